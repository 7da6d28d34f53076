//! Sample autocovariance and partial autocorrelation.

use crate::error::{Error, Result};
use crate::series::Series;

/// Partial autocorrelations for lags `1..=max_lag`.
#[derive(Debug, Clone, PartialEq)]
pub struct PacfProfile {
    values: Vec<f64>,
}

impl PacfProfile {
    /// Wraps precomputed values, `values[k - 1]` being lag `k`.
    pub fn from_values(values: Vec<f64>) -> Self {
        PacfProfile { values }
    }

    pub fn max_lag(&self) -> usize {
        self.values.len()
    }

    /// Partial autocorrelation at `lag` (1-based). Panics if out of range.
    pub fn at(&self, lag: usize) -> f64 {
        self.values[lag - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(lag, value)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (i + 1, v))
    }
}

/// Biased sample autocovariance `γ(k) = (1/n) Σ (x_t − x̄)(x_{t+k} − x̄)` for
/// `k = 0..=max_lag`.
pub fn autocovariance(values: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = values.len();
    if max_lag >= n {
        return Err(Error::InvalidArgument(format!(
            "max_lag {max_lag} must be below series length {n}"
        )));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
    Ok((0..=max_lag)
        .map(|k| {
            centered[..n - k]
                .iter()
                .zip(&centered[k..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n as f64
        })
        .collect())
}

/// Partial autocorrelation by the Durbin–Levinson recursion.
///
/// The value at lag `k` is the last coefficient of the order-`k`
/// Yule–Walker fit on the biased autocovariances.
pub fn pacf(s: &Series, max_lag: usize) -> Result<PacfProfile> {
    pacf_values(s.values(), max_lag)
}

pub fn pacf_values(values: &[f64], max_lag: usize) -> Result<PacfProfile> {
    let gamma = autocovariance(values, max_lag)?;
    let g0 = gamma[0];
    // Relative to the data magnitude so that affine rescaling does not
    // change the verdict.
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(g0 > 1e-24 * scale * scale) {
        return Err(Error::ZeroVariance);
    }

    let mut out = Vec::with_capacity(max_lag);
    let mut phi: Vec<f64> = Vec::with_capacity(max_lag);
    let mut next = Vec::with_capacity(max_lag);
    let mut v = g0;
    for k in 1..=max_lag {
        let acc: f64 = phi
            .iter()
            .enumerate()
            .map(|(j, p)| p * gamma[k - 1 - j])
            .sum();
        let kappa = if v > 0.0 { (gamma[k] - acc) / v } else { 0.0 };
        next.clear();
        next.extend((0..phi.len()).map(|j| phi[j] - kappa * phi[phi.len() - 1 - j]));
        next.push(kappa);
        std::mem::swap(&mut phi, &mut next);
        v *= 1.0 - kappa * kappa;
        out.push(kappa);
    }
    Ok(PacfProfile { values: out })
}
