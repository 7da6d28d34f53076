//! Degraded, redundant and statistical knowledge systems.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::series::Series;

/// Repeats the last observation `h` times.
pub fn naive_last(history: &[f64], h: usize) -> Result<Vec<f64>> {
    let last = history
        .last()
        .ok_or_else(|| Error::InvalidArgument("naive forecast needs history".into()))?;
    Ok(vec![*last; h])
}

pub fn zero_kds(h: usize) -> Vec<f64> {
    vec![0.0; h]
}

/// Adds i.i.d. zero-mean Gaussian noise drawn from one seeded stream.
pub fn noisy_wrap(inner_preds: &[f64], noise_sd: f64, seed: u64) -> Result<Vec<f64>> {
    if noise_sd == 0.0 {
        return Ok(inner_preds.to_vec());
    }
    let normal = gaussian(noise_sd)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(inner_preds
        .iter()
        .map(|p| p + normal.sample(&mut rng))
        .collect())
}

/// Noise for the forecast of absolute index `index`: a pure function of
/// `(seed, index)`, so walk-forward forecasts get the same perturbation no
/// matter the order they are requested in.
pub fn indexed_noise(noise_sd: f64, seed: u64, index: usize) -> Result<f64> {
    if noise_sd == 0.0 {
        return Ok(0.0);
    }
    let normal = gaussian(noise_sd)?;
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(index as u64)));
    Ok(normal.sample(&mut rng))
}

fn gaussian(sd: f64) -> Result<Normal<f64>> {
    if !(sd >= 0.0) || !sd.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise_sd must be finite and non-negative, got {sd}"
        )));
    }
    Normal::new(0.0, sd).map_err(|e| Error::InvalidArgument(e.to_string()))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seasonal-difference plus AR(p), fitted by conditional least squares.
///
/// With `seasonal_diff` the model works on `z_t = x_t − x_{t−period}`;
/// `z_t = c + Σ φ_j z_{t−j} + e_t`. Forecasts run the AR recursion on `z`
/// and add back the value one period earlier.
#[derive(Debug, Clone, PartialEq)]
pub struct SeasonalArModel {
    pub period: usize,
    pub seasonal_diff: bool,
    pub intercept: f64,
    /// `coefficients[j]` multiplies `z_{t−1−j}`.
    pub coefficients: Vec<f64>,
    /// Standard errors of `coefficients`.
    pub std_errors: Vec<f64>,
    /// True when the normal equations were singular and a ridge term was added.
    pub regularized: bool,
}

const RIDGE: f64 = 1e-8;

pub fn seasonal_ar_fit(train: &Series, p: usize, seasonal_diff: bool) -> Result<SeasonalArModel> {
    if p == 0 {
        return Err(Error::InvalidArgument("AR order must be at least 1".into()));
    }
    let period = train.period();
    let needed = period + p + 11;
    if train.len() < needed {
        return Err(Error::TooShort {
            needed,
            actual: train.len(),
        });
    }
    let x = train.values();
    let z: Vec<f64> = if seasonal_diff {
        (period..x.len()).map(|t| x[t] - x[t - period]).collect()
    } else {
        x.to_vec()
    };

    let rows = z.len() - p;
    let k = p + 1;
    let design = DMatrix::from_fn(rows, k, |r, c| if c == 0 { 1.0 } else { z[r + p - c] });
    let y = DVector::from_iterator(rows, z[p..].iter().copied());
    let xtx = design.transpose() * &design;
    let xty = design.transpose() * &y;

    let (inverse, regularized) = match xtx.clone().cholesky() {
        Some(ch) => (ch.inverse(), false),
        None => {
            let lambda = RIDGE * (xtx.trace() / k as f64).max(1.0);
            let ridged = &xtx + DMatrix::identity(k, k) * lambda;
            let ch = ridged.cholesky().ok_or_else(|| {
                Error::InvalidArgument("normal equations are singular even with ridge".into())
            })?;
            (ch.inverse(), true)
        }
    };
    let beta = &inverse * xty;
    let resid = &y - &design * &beta;
    let dof = rows.saturating_sub(k).max(1) as f64;
    let s2 = resid.norm_squared() / dof;
    let std_errors = (1..k).map(|j| (s2 * inverse[(j, j)]).sqrt()).collect();

    Ok(SeasonalArModel {
        period,
        seasonal_diff,
        intercept: beta[0],
        coefficients: beta.iter().skip(1).copied().collect(),
        std_errors,
        regularized,
    })
}

impl SeasonalArModel {
    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn min_history(&self) -> usize {
        if self.seasonal_diff {
            self.period + self.order()
        } else {
            self.order()
        }
    }

    pub fn forecast(&self, history: &[f64], h: usize) -> Result<Vec<f64>> {
        let needed = self.min_history();
        if history.len() < needed {
            return Err(Error::TooShort {
                needed,
                actual: history.len(),
            });
        }
        let p = self.order();
        let mut x = history[history.len() - needed..].to_vec();
        let z_at = |x: &[f64], t: usize| {
            if self.seasonal_diff {
                x[t] - x[t - self.period]
            } else {
                x[t]
            }
        };
        let mut out = Vec::with_capacity(h);
        for _ in 0..h {
            let n = x.len();
            let z_hat = self.intercept
                + self
                    .coefficients
                    .iter()
                    .enumerate()
                    .map(|(j, phi)| phi * z_at(&x, n - 1 - j))
                    .sum::<f64>();
            let y = if self.seasonal_diff {
                z_hat + x[n - self.period]
            } else {
                z_hat
            };
            debug_assert!(p <= n);
            out.push(y);
            x.push(y);
        }
        Ok(out)
    }
}
