//! Residual fusion of a knowledge system and a neural predictor.
//!
//! The network sees `[window ‖ kds_pred]` and is trained on the knowledge
//! system's error, `target − kds_pred`. Its output is added back to
//! `kds_pred`. Everything happens in each sample's own min-max space, and
//! the knowledge forecast is scaled with the window's affine, so
//! `unscale(kds + r) = unscale(kds) + range · r`.

pub mod checkpoint;

use crate::error::{Error, Result};
use crate::kds::Kds;
use crate::neural::{init_predictor, train_pairs, ArchSpec, Predictor, TrainConfig, TrainOutcome};
use crate::window::{unscale_prediction, SampleSet};

pub use checkpoint::{load_kenn, read_kenn, save_kenn, write_kenn};

#[derive(Debug, Clone, PartialEq)]
pub struct KennModel {
    /// Input width `w + 1 + h`, output width `h`.
    pub predictor: Predictor,
    pub kds: Kds,
    pub w: usize,
    pub h: usize,
}

/// `[window ‖ kds_pred]`, window first.
pub fn fuse_input(window_scaled: &[f64], kds_pred_scaled: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(window_scaled.len() + kds_pred_scaled.len());
    v.extend_from_slice(window_scaled);
    v.extend_from_slice(kds_pred_scaled);
    v
}

impl KennModel {
    /// Freshly initialized fusion model for windows of `w + 1` observations
    /// and horizon `h`.
    pub fn new(arch: &ArchSpec, kds: Kds, w: usize, h: usize, seed: u64) -> Result<Self> {
        let predictor = init_predictor(&arch.build(w + 1 + h, h)?, seed)?;
        Self::from_parts(predictor, kds, w, h)
    }

    pub fn from_parts(predictor: Predictor, kds: Kds, w: usize, h: usize) -> Result<Self> {
        if predictor.input_len() != w + 1 + h {
            return Err(Error::DimensionMismatch {
                expected: w + 1 + h,
                actual: predictor.input_len(),
            });
        }
        if predictor.output_len() != h {
            return Err(Error::DimensionMismatch {
                expected: h,
                actual: predictor.output_len(),
            });
        }
        Ok(KennModel { predictor, kds, w, h })
    }

    fn check(&self, window: &[f64], kds_pred: &[f64]) -> Result<()> {
        if window.len() != self.w + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.w + 1,
                actual: window.len(),
            });
        }
        if kds_pred.len() != self.h {
            return Err(Error::DimensionMismatch {
                expected: self.h,
                actual: kds_pred.len(),
            });
        }
        Ok(())
    }
}

/// Network output on the fused input plus the knowledge forecast, in the
/// sample's scaled space.
pub fn kenn_forward(m: &KennModel, window_scaled: &[f64], kds_pred_scaled: &[f64]) -> Result<Vec<f64>> {
    m.check(window_scaled, kds_pred_scaled)?;
    let r = m.predictor.forward(&fuse_input(window_scaled, kds_pred_scaled))?;
    Ok(r.iter().zip(kds_pred_scaled).map(|(r, p)| r + p).collect())
}

/// Scales samples carrying raw knowledge forecasts into the network's
/// space. A zero knowledge system contributes exact zeros in every sample's
/// space rather than the image of a raw zero.
pub fn scale_for_fusion(raw: &SampleSet, kds: &Kds) -> SampleSet {
    let mut set = raw.scaled();
    if matches!(kds, Kds::Zero) {
        for s in &mut set.samples {
            if let Some(p) = &mut s.kds_pred {
                p.fill(0.0);
            }
        }
    }
    set
}

/// Inputs padded with `h` zeros in place of a knowledge forecast, and the
/// plain targets. The stand-alone network trains on these so that it
/// shares width and initialization with the fused one.
pub fn padded_pairs(data: &SampleSet) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let zeros = vec![0.0; data.h];
    data.iter()
        .map(|s| (fuse_input(&s.input, &zeros), s.target.clone()))
        .unzip()
}

/// Fused inputs and residual targets of scaled samples.
pub fn residual_pairs(data: &SampleSet) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let mut inputs = Vec::with_capacity(data.len());
    let mut targets = Vec::with_capacity(data.len());
    for s in data.iter() {
        let p = s.kds_pred.as_ref().ok_or(Error::MissingKdsPredictions)?;
        inputs.push(fuse_input(&s.input, p));
        targets.push(s.target.iter().zip(p).map(|(t, p)| t - p).collect());
    }
    Ok((inputs, targets))
}

/// Trains the inner predictor on the knowledge system's residuals.
pub fn train_kenn(m: &KennModel, data: &SampleSet, cfg: &TrainConfig) -> Result<(KennModel, TrainOutcome)> {
    train_kenn_observed(m, data, cfg, |_, _| {})
}

/// [`train_kenn`] with a per-epoch parameter observer.
pub fn train_kenn_observed(
    m: &KennModel,
    data: &SampleSet,
    cfg: &TrainConfig,
    observer: impl FnMut(usize, &[f64]),
) -> Result<(KennModel, TrainOutcome)> {
    if data.h != m.h || data.w != m.w {
        return Err(Error::InvalidArgument(format!(
            "samples have w={}, h={}; model expects w={}, h={}",
            data.w, data.h, m.w, m.h
        )));
    }
    let (inputs, targets) = residual_pairs(data)?;
    let (predictor, outcome) = train_pairs(&m.predictor, &inputs, &targets, cfg, observer)?;
    Ok((
        KennModel {
            predictor,
            kds: m.kds.clone(),
            w: m.w,
            h: m.h,
        },
        outcome,
    ))
}

/// Scaled-space MSE of [`kenn_forward`] against the targets.
pub fn kenn_loss(m: &KennModel, data: &SampleSet) -> Result<f64> {
    let mut sse = 0.0;
    let mut n = 0;
    for s in data.iter() {
        let p = s.kds_pred.as_ref().ok_or(Error::MissingKdsPredictions)?;
        let y = kenn_forward(m, &s.input, p)?;
        sse += y.iter().zip(&s.target).map(|(y, t)| (y - t) * (y - t)).sum::<f64>();
        n += y.len();
    }
    if n == 0 {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    Ok(sse / n as f64)
}

/// Unscaled fused predictions for scaled samples, concatenated in order.
pub fn kenn_predict(m: &KennModel, samples: &SampleSet) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(samples.len() * m.h);
    for s in samples.iter() {
        let p = s.kds_pred.as_ref().ok_or(Error::MissingKdsPredictions)?;
        out.extend(unscale_prediction(&kenn_forward(m, &s.input, p)?, s.scale));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::{loss, PredictorArch};
    use crate::window::{make_samples, Sample, Scale};
    use crate::Series;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model(seed: u64) -> KennModel {
        KennModel::new(&ArchSpec::Mlp { hidden: vec![5] }, Kds::Zero, 3, 2, seed).unwrap()
    }

    fn zero_model() -> KennModel {
        let mut m = model(0);
        m.predictor.params.iter_mut().for_each(|p| *p = 0.0);
        m
    }

    fn scaled_set(kds: impl Fn(&Sample) -> Vec<f64>) -> SampleSet {
        let values: Vec<f64> = (0..40).map(|i| 10.0 + (i as f64 * 0.9).sin() * 3.0 + i as f64 * 0.1).collect();
        let mut set = make_samples(&Series::new(values, 8).unwrap(), 3, 2).unwrap();
        for s in &mut set.samples {
            s.kds_pred = Some(kds(s));
        }
        set.scaled()
    }

    #[test]
    fn fuse_examples() {
        assert_eq!(fuse_input(&[0.0, 1.0], &[0.5]), vec![0.0, 1.0, 0.5]);
        assert_eq!(fuse_input(&[1.0, 2.0], &[3.0, 4.0]), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(fuse_input(&[0.0, 1.0], &[0.0]), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn model_dimensions() {
        let m = model(1);
        assert_eq!(m.predictor.input_len(), 6);
        assert_eq!(m.predictor.output_len(), 2);
        let wrong = init_predictor(&PredictorArch::mlp(&[4, 2]), 0).unwrap();
        assert!(KennModel::from_parts(wrong, Kds::Zero, 3, 2).is_err());
        assert!(kenn_forward(&m, &[0.0; 3], &[0.0; 2]).is_err());
        assert!(kenn_forward(&m, &[0.0; 4], &[0.0; 3]).is_err());
    }

    #[test]
    fn zero_params_return_kds() {
        let m = zero_model();
        assert_eq!(kenn_forward(&m, &[0.1, 0.2, 0.3, 0.4], &[0.7, -2.5]).unwrap(), vec![0.7, -2.5]);
        let set = scaled_set(|s| vec![s.input[3] + 1.0, s.input[0] - 0.5]);
        assert_eq!(kenn_predict(&m, &set).unwrap(), set.unscaled_kds().unwrap());
    }

    #[test]
    fn prediction_commutes_with_unscaling() {
        let m = model(4);
        let set = scaled_set(|s| vec![s.input[3], s.input[2]]);
        let fused = kenn_predict(&m, &set).unwrap();
        let kds = set.unscaled_kds().unwrap();
        for (i, s) in set.iter().enumerate() {
            let x = fuse_input(&s.input, s.kds_pred.as_ref().unwrap());
            let r = m.predictor.forward(&x).unwrap();
            for j in 0..2 {
                let alt = kds[i * 2 + j] + s.scale.range() * r[j];
                let got = fused[i * 2 + j];
                assert!((got - alt).abs() <= 1e-12 * got.abs().max(1.0));
            }
        }
    }

    #[test]
    fn missing_kds_is_an_error() {
        let mut set = scaled_set(|s| vec![s.input[0]; 2]);
        set.samples[3].kds_pred = None;
        assert!(matches!(train_kenn(&model(0), &set, &TrainConfig::default()), Err(Error::MissingKdsPredictions)));
        assert!(kenn_predict(&model(0), &set).is_err());
    }

    #[test]
    fn perfect_kds_is_a_fixpoint() {
        let set = scaled_set(|s| s.target.clone());
        let m = zero_model();
        assert_eq!(kenn_loss(&m, &set).unwrap(), 0.0);
        let (inputs, targets) = residual_pairs(&set).unwrap();
        assert!(targets.iter().flatten().all(|&r| r == 0.0));
        let batch: Vec<_> = inputs.into_iter().zip(targets).collect();
        let g = crate::neural::gradient(&m.predictor, &batch).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));

        let cfg = TrainConfig {
            learning_rate: 0.2,
            max_epochs: 5000,
            plateau_min_delta: 0.0,
            plateau_patience: 5000,
            ..TrainConfig::default()
        };
        let (trained, out) = train_kenn(&model(3), &set, &cfg).unwrap();
        assert!(out.final_loss() < 1e-6, "{}", out.final_loss());
        assert!(kenn_loss(&trained, &set).unwrap() < 1e-6);
    }

    #[test]
    fn zero_kds_matches_plain_training() {
        let mut set = scaled_set(|_| vec![0.0; 2]);
        set.samples.iter_mut().for_each(|s| s.kds_pred = Some(vec![0.0; 2]));
        let cfg = TrainConfig {
            max_epochs: 25,
            batch_size: 5,
            seed: 8,
            ..TrainConfig::default()
        };
        let m = model(6);
        let mut kenn_traj = Vec::new();
        let (trained, _) = train_kenn_observed(&m, &set, &cfg, |_, p| kenn_traj.push(p.to_vec())).unwrap();

        let (inputs, targets) = padded_pairs(&set);
        let mut plain_traj = Vec::new();
        let (plain, _) = train_pairs(&m.predictor, &inputs, &targets, &cfg, |_, p| plain_traj.push(p.to_vec())).unwrap();
        assert_eq!(kenn_traj, plain_traj);
        assert_eq!(trained.predictor, plain);
    }

    #[test]
    fn zero_kds_is_zero_in_scaled_space() {
        let values: Vec<f64> = (0..20).map(|i| 5.0 + i as f64).collect();
        let mut raw = make_samples(&Series::new(values, 4).unwrap(), 3, 1).unwrap();
        for s in &mut raw.samples {
            s.kds_pred = Some(vec![0.0]);
        }
        let set = scale_for_fusion(&raw, &Kds::Zero);
        assert!(set.iter().all(|s| s.kds_pred == Some(vec![0.0])));
        let other = scale_for_fusion(&raw, &Kds::NaiveLast);
        assert!(other.iter().all(|s| s.kds_pred.as_ref().unwrap()[0] < 0.0));
    }

    #[test]
    fn objective_equivalence() {
        let set = scaled_set(|s| vec![s.input[1] * 0.9, s.input[3] + 0.2]);
        let m = model(12);
        let (inputs, targets) = residual_pairs(&set).unwrap();
        let batch: Vec<_> = inputs.into_iter().zip(targets).collect();
        let a = kenn_loss(&m, &set).unwrap();
        let b = loss(&m.predictor, &batch).unwrap();
        assert!((a - b).abs() <= 1e-15, "{a} vs {b}");
    }

    proptest! {
        #[test]
        fn residual_identity(seed in 0u64..10_000) {
            let m = model(seed % 17);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..3.0)).collect();
            let p: Vec<f64> = (0..2).map(|_| rng.random_range(-5.0..5.0)).collect();
            let y = kenn_forward(&m, &x, &p).unwrap();
            let r = m.predictor.forward(&fuse_input(&x, &p)).unwrap();
            for j in 0..2 {
                // One rounded addition, nothing else.
                prop_assert_eq!(y[j].to_bits(), (r[j] + p[j]).to_bits());
                let scale = y[j].abs().max(r[j].abs()).max(p[j].abs());
                prop_assert!(((y[j] - r[j]) - p[j]).abs() <= 2.0 * f64::EPSILON * scale);
            }
        }
    }

    #[test]
    fn identity_scale_predictions_are_scaled_outputs() {
        let m = zero_model();
        let set = SampleSet {
            samples: vec![Sample {
                input: vec![0.0; 4],
                target: vec![0.0; 2],
                kds_pred: Some(vec![1.5, 2.5]),
                scale: Scale::IDENTITY,
                target_start: 4,
            }],
            w: 3,
            h: 2,
        };
        assert_eq!(kenn_predict(&m, &set).unwrap(), vec![1.5, 2.5]);
    }
}
