//! Generates the default synthetic series and writes it as CSV.
//!
//! cargo run --release --example generate_data -- [out.csv]

use kenn::series::{write_csv, SyntheticParams};
use kenn::stats::autocovariance;

fn main() -> kenn::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "synthetic.csv".into());
    let params = SyntheticParams::default();
    let s = params.generate()?;

    let v = s.values();
    let (lo, hi) = v.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    println!("{} observations, period {}, mean {:.2}, range [{lo:.2}, {hi:.2}]", s.len(), s.period(), s.mean());

    let gamma = autocovariance(v, 2 * s.period())?;
    for lag in [1, 2, s.period() / 2, s.period(), 2 * s.period()] {
        println!("autocorrelation at lag {lag:>3}: {:+.3}", gamma[lag] / gamma[0]);
    }

    write_csv(&s, &out)?;
    println!("wrote {out}");
    Ok(())
}
