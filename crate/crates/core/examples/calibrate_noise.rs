//! Derives the noise level of the handicapped knowledge system: the
//! standard deviation at which its median test MSE is 1.15 times the
//! stand-alone network's.
//!
//! The added noise is independent of everything else, so the noisy MSE is
//! close to `kds + sd^2`. That gives a starting point, which a bisection on
//! the actual noisy forecasts then refines.

use kenn::experiment::{load_series, prepare, run_case, ExperimentConfig};
use kenn::kds::KdsKind;
use kenn::metrics::{median, mse};

const RATIO: f64 = 1.15;

fn noisy_median(base: &ExperimentConfig, sd: f64) -> kenn::Result<f64> {
    let cfg = ExperimentConfig {
        kds: KdsKind::Noisy {
            inner: Box::new(base.kds.clone()),
            noise_sd: sd,
            seed: 0,
        },
        ..base.clone()
    };
    let mut v = Vec::new();
    for &seed in &cfg.seeds {
        let series = load_series(&cfg, seed)?;
        let prep = prepare(&cfg, &series, seed)?;
        v.push(mse(&prep.kds_test, &prep.truth)?);
    }
    Ok(median(&v).unwrap_or(f64::NAN))
}

fn main() -> kenn::Result<()> {
    let base = ExperimentConfig::default();
    let m = run_case(&base)?.medians();
    let target = RATIO * m.dnn;
    println!("median DNN {:.4}, KDS {:.4}, target noisy KDS {:.4}", m.dnn, m.kds, target);
    if m.kds >= target {
        println!("the clean knowledge system already exceeds the target; no noise needed");
        return Ok(());
    }

    let guess = (target - m.kds).sqrt();
    let (mut lo, mut hi) = (0.0, 2.0 * guess);
    while noisy_median(&base, hi)? < target {
        hi *= 2.0;
    }
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if noisy_median(&base, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let sd = 0.5 * (lo + hi);
    println!("first guess {guess:.4}, calibrated noise_sd {sd:.4}");
    println!("noisy KDS median MSE at {sd:.2}: {:.4}", noisy_median(&base, (sd * 100.0).round() / 100.0)?);
    Ok(())
}
