//! Mini-batch gradient descent with plateau stopping.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_len, Evaluator, Predictor};
use crate::error::{Error, Result};
use crate::window::SampleSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub plateau_patience: usize,
    /// Relative improvement over the best loss that resets patience.
    pub plateau_min_delta: f64,
    /// Seeds the per-epoch shuffle.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.05,
            batch_size: 32,
            max_epochs: 300,
            plateau_patience: 20,
            plateau_min_delta: 1e-5,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if self.batch_size == 0 || self.max_epochs == 0 || self.plateau_patience == 0 {
            return Err(Error::Config(
                "batch_size, max_epochs and plateau_patience must be at least 1".into(),
            ));
        }
        if !(self.plateau_min_delta >= 0.0) {
            return Err(Error::Config("plateau_min_delta must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    /// Training MSE over the full data after each epoch.
    pub loss_history: Vec<f64>,
    /// True when training ended on the plateau rule rather than `max_epochs`.
    pub plateaued: bool,
}

impl TrainOutcome {
    pub fn epochs(&self) -> usize {
        self.loss_history.len()
    }

    pub fn final_loss(&self) -> f64 {
        self.loss_history.last().copied().unwrap_or(f64::NAN)
    }
}

/// Trains on the inputs and targets of already-scaled samples.
pub fn train(p: &Predictor, data: &SampleSet, cfg: &TrainConfig) -> Result<(Predictor, TrainOutcome)> {
    let inputs: Vec<Vec<f64>> = data.iter().map(|s| s.input.clone()).collect();
    let targets: Vec<Vec<f64>> = data.iter().map(|s| s.target.clone()).collect();
    train_pairs(p, &inputs, &targets, cfg, |_, _| {})
}

/// Trains on explicit `(input, target)` pairs. `observer` sees the epoch
/// number (from 1) and the parameters after every epoch.
pub fn train_pairs(
    p: &Predictor,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    cfg: &TrainConfig,
    mut observer: impl FnMut(usize, &[f64]),
) -> Result<(Predictor, TrainOutcome)> {
    cfg.validate()?;
    if inputs.is_empty() {
        return Err(Error::InvalidArgument("training data is empty".into()));
    }
    check_len(inputs.len(), targets.len())?;
    for (x, y) in inputs.iter().zip(targets) {
        check_len(p.input_len(), x.len())?;
        check_len(p.output_len(), y.len())?;
    }

    let n = inputs.len();
    let h = p.output_len();
    let mut params = p.params.clone();
    let mut grad = vec![0.0; params.len()];
    let mut ev = Evaluator::new(&p.arch);
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut history = Vec::new();
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    let mut plateaued = false;

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            grad.fill(0.0);
            let scale = 1.0 / (batch.len() * h) as f64;
            for &i in batch {
                ev.accumulate(&params, &inputs[i], &targets[i], scale, &mut grad);
            }
            for (w, g) in params.iter_mut().zip(&grad) {
                *w -= cfg.learning_rate * g;
            }
        }

        let sse: f64 = inputs
            .iter()
            .zip(targets)
            .map(|(x, y)| ev.sse(&params, x, y))
            .sum();
        let loss = sse / (n * h) as f64;
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch, loss });
        }
        history.push(loss);
        observer(epoch, &params);

        if loss < best * (1.0 - cfg.plateau_min_delta) {
            best = loss;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.plateau_patience {
                plateaued = true;
                break;
            }
        }
    }

    Ok((
        Predictor {
            arch: p.arch.clone(),
            params,
            seed: p.seed,
        },
        TrainOutcome {
            loss_history: history,
            plateaued,
        },
    ))
}
