//! Oracles shared by the integration tests and the acceptance suite.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use kenn::experiment::{DataSource, ExperimentConfig};
use kenn::neural::{gradient, loss, Predictor};
use kenn::series::{split_chronological, SyntheticParams};
use kenn::Series;

/// Stationary AR(2) series with random coefficients inside the stationarity
/// triangle, plus a random level.
pub fn ar_series(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a1: f64 = rng.random_range(-0.9..0.9);
    let a2: f64 = rng.random_range(-0.9..0.9f64).clamp(-0.9, 0.95 - a1.abs());
    let level: f64 = rng.random_range(-10.0..10.0);
    let mut x = vec![0.0; n + 100];
    for t in 2..x.len() {
        let e: f64 = StandardNormal.sample(&mut rng);
        x[t] = a1 * x[t - 1] + a2 * x[t - 2] + e;
    }
    x[100..].iter().map(|v| v + level).collect()
}

/// PACF at lags `1..=max_lag` as the last coefficient of an OLS regression
/// of the centred series on its own lags.
///
/// The design is built from the series padded with zeros on both sides, so
/// the normal equations are exactly the Yule–Walker equations with the
/// biased (divisor n) autocovariances. Ordinary truncated regression
/// differs from those by O(1/n).
pub fn pacf_ols(values: &[f64], max_lag: usize) -> Vec<f64> {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let at = |i: isize| -> f64 {
        if i >= 0 && (i as usize) < n {
            c[i as usize]
        } else {
            0.0
        }
    };
    (1..=max_lag)
        .map(|k| {
            // rows t = 0 .. n+k-1; target c[t], regressors c[t-1..t-k]
            let rows = n + k;
            let x = DMatrix::from_fn(rows, k, |t, j| at(t as isize - j as isize - 1));
            let y = DVector::from_fn(rows, |t, _| at(t as isize));
            let beta = x.svd(true, true).solve(&y, 1e-14).expect("svd solve");
            beta[k - 1]
        })
        .collect()
}

/// Central finite-difference gradient of the batch loss.
pub fn numeric_gradient(p: &Predictor, batch: &[(Vec<f64>, Vec<f64>)], step: f64) -> Vec<f64> {
    let mut params = p.params.clone();
    (0..params.len())
        .map(|i| {
            let orig = params[i];
            params[i] = orig + step;
            let up = loss(&with(p, &params), batch).unwrap();
            params[i] = orig - step;
            let down = loss(&with(p, &params), batch).unwrap();
            params[i] = orig;
            (up - down) / (2.0 * step)
        })
        .collect()
}

fn with(p: &Predictor, params: &[f64]) -> Predictor {
    Predictor::from_params(p.arch.clone(), params.to_vec(), p.seed).unwrap()
}

/// Worst per-coordinate relative error between the analytic and numeric
/// gradients. Coordinates where both are below `floor` in magnitude are
/// compared on the `floor` scale.
pub fn gradient_error(p: &Predictor, batch: &[(Vec<f64>, Vec<f64>)], floor: f64) -> f64 {
    let analytic = gradient(p, batch).unwrap();
    let numeric = numeric_gradient(p, batch, 1e-5);
    analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
        .fold(0.0, f64::max)
}

pub fn random_batch(seed: u64, input_len: usize, output_len: usize, size: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size)
        .map(|_| {
            let x = (0..input_len).map(|_| rng.random_range(0.0..1.0)).collect();
            let y = (0..output_len).map(|_| rng.random_range(-0.5..1.5)).collect();
            (x, y)
        })
        .collect()
}

/// A short, fast configuration for pipeline-level checks.
pub fn small_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        data: DataSource::Synthetic(SyntheticParams {
            n: 1440,
            ..SyntheticParams::default()
        }),
        seeds: vec![1, 2],
        ..ExperimentConfig::default()
    };
    cfg.train.max_epochs = 15;
    cfg
}

/// The series with every test-slice value replaced by garbage.
pub fn poisoned(s: &Series, cfg: &ExperimentConfig) -> Series {
    let (_, test) = split_chronological(s, cfg.train_fraction).unwrap();
    let cut = test.origin() - s.origin();
    let mut v = s.values().to_vec();
    for (i, x) in v[cut..].iter_mut().enumerate() {
        *x = 1e6 + 37.0 * i as f64;
    }
    Series::with_origin(v, s.period(), s.origin()).unwrap()
}
