//! Test error of every knowledge system on the synthetic series.

use kenn::kds::{Forecaster, KdsKind};
use kenn::metrics::MetricsReport;
use kenn::series::{split_chronological, SyntheticParams};

fn main() -> kenn::Result<()> {
    let s = SyntheticParams::default().generate()?;
    let (train, test) = split_chronological(&s, 0.8)?;
    let kinds = [
        KdsKind::graph(),
        KdsKind::SeasonalAr { p: 2, seasonal_diff: true },
        KdsKind::NaiveLast,
        KdsKind::Zero,
        KdsKind::Noisy {
            inner: Box::new(KdsKind::graph()),
            noise_sd: 1.5,
            seed: 0,
        },
    ];
    let v = s.values();
    // Every system starts at the same point so the scores are comparable.
    let start = test.origin();
    let truth = &v[start..];
    println!("{:<18} {:>10} {:>10}", "system", "mse", "mae");
    for kind in kinds {
        let kds = kind.fit(&train)?;
        let pred: Vec<f64> = (start..v.len())
            .map(|t| kds.forecast(&v[..t], t, 1).map(|f| f[0]))
            .collect::<kenn::Result<_>>()?;
        let m = MetricsReport::evaluate(kds.name(), &pred, truth)?;
        println!("{:<18} {:>10.3} {:>10.3}", m.model_name, m.mse, m.mae);
    }
    Ok(())
}
