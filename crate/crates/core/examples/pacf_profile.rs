//! Partial autocorrelations of the synthetic series over two days of lags.

use kenn::series::{split_chronological, SyntheticParams};
use kenn::stats::pacf;

fn main() -> kenn::Result<()> {
    let s = SyntheticParams::default().generate()?;
    let (train, _) = split_chronological(&s, 0.8)?;
    let profile = pacf(&train, 2 * s.period())?;

    println!("lag  pacf");
    for (lag, v) in profile.iter() {
        let bar = "#".repeat((v.abs() * 40.0).round() as usize);
        let mark = if v > 0.2 { '*' } else { ' ' };
        println!("{lag:>3} {v:+.3}{mark} {bar}");
    }
    println!("* above the 0.2 link threshold");
    Ok(())
}
