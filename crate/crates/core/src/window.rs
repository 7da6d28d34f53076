//! Rolling-window samples and per-sample min-max scaling.

use crate::error::{Error, Result};
use crate::series::Series;

/// Affine parameters of a per-sample min-max transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scale {
    pub min: f64,
    pub max: f64,
}

impl Scale {
    /// The identity transform.
    pub const IDENTITY: Scale = Scale { min: 0.0, max: 1.0 };

    /// Min-max over `window`. A constant window gets unit range so the
    /// scaled values are 0 and inversion stays exact.
    pub fn fit(window: &[f64]) -> Scale {
        let min = window.iter().copied().fold(f64::INFINITY, f64::min);
        let max = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max > min {
            Scale { min, max }
        } else {
            Scale { min, max: min + 1.0 }
        }
    }

    pub fn range(&self) -> f64 {
        self.max - self.min
    }

    pub fn apply(&self, v: f64) -> f64 {
        (v - self.min) / self.range()
    }

    pub fn invert(&self, v: f64) -> f64 {
        v * self.range() + self.min
    }
}

/// One training or evaluation example.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// `w + 1` past observations, oldest first.
    pub input: Vec<f64>,
    /// `h` future observations.
    pub target: Vec<f64>,
    /// Knowledge-system forecast aligned with `target`.
    pub kds_pred: Option<Vec<f64>>,
    pub scale: Scale,
    /// Absolute series index of `target[0]`.
    pub target_start: usize,
}

/// Samples sharing `w` and `h`, ordered by window end.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
    pub w: usize,
    pub h: usize,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Sample> {
        self.samples.iter()
    }

    /// Drops samples whose first target precedes `first_target`.
    pub fn retain_from(&mut self, first_target: usize) {
        self.samples.retain(|s| s.target_start >= first_target);
    }

    /// Per-sample min-max scaling of every sample.
    pub fn scaled(&self) -> SampleSet {
        SampleSet {
            samples: self.samples.iter().map(scale_sample).collect(),
            w: self.w,
            h: self.h,
        }
    }

    /// Unscaled targets, concatenated in sample order.
    pub fn unscaled_targets(&self) -> Vec<f64> {
        self.samples
            .iter()
            .flat_map(|s| s.target.iter().map(move |&v| s.scale.invert(v)))
            .collect()
    }

    /// Unscaled knowledge-system predictions, concatenated in sample order.
    pub fn unscaled_kds(&self) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.len() * self.h);
        for s in &self.samples {
            let p = s.kds_pred.as_ref().ok_or(Error::MissingKdsPredictions)?;
            out.extend(p.iter().map(|&v| s.scale.invert(v)));
        }
        Ok(out)
    }
}

/// Stride-1 rolling windows: sample `i` has input `values[i..=i+w]` and
/// target `values[i+w+1..=i+w+h]`.
pub fn make_samples(s: &Series, w: usize, h: usize) -> Result<SampleSet> {
    if h == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let v = s.values();
    let needed = w + 1 + h;
    if v.len() < needed {
        return Err(Error::TooShort {
            needed,
            actual: v.len(),
        });
    }
    let samples = (0..v.len() - w - h)
        .map(|i| Sample {
            input: v[i..=i + w].to_vec(),
            target: v[i + w + 1..=i + w + h].to_vec(),
            kds_pred: None,
            scale: Scale::IDENTITY,
            target_start: s.origin() + i + w + 1,
        })
        .collect();
    Ok(SampleSet { samples, w, h })
}

/// Min-max scales a sample using its input window. Target and
/// knowledge-system prediction share the same affine and may leave [0, 1].
pub fn scale_sample(sample: &Sample) -> Sample {
    let scale = Scale::fit(&sample.input);
    let map = |xs: &[f64]| xs.iter().map(|&v| scale.apply(v)).collect::<Vec<_>>();
    Sample {
        input: map(&sample.input),
        target: map(&sample.target),
        kds_pred: sample.kds_pred.as_deref().map(map),
        scale,
        target_start: sample.target_start,
    }
}

pub fn unscale_prediction(pred_scaled: &[f64], scale: Scale) -> Vec<f64> {
    pred_scaled.iter().map(|&v| scale.invert(v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(v: &[f64]) -> Series {
        Series::new(v.to_vec(), 2).unwrap()
    }

    #[test]
    fn windows_with_unit_horizon() {
        let set = make_samples(&series(&[1., 2., 3., 4., 5.]), 1, 1).unwrap();
        let pairs: Vec<_> = set
            .iter()
            .map(|s| (s.input.clone(), s.target.clone()))
            .collect();
        assert_eq!(
            pairs,
            vec![
                (vec![1., 2.], vec![3.]),
                (vec![2., 3.], vec![4.]),
                (vec![3., 4.], vec![5.]),
            ]
        );
        assert_eq!(set.samples[0].target_start, 2);
    }

    #[test]
    fn windows_with_longer_horizon() {
        let set = make_samples(&series(&[1., 2., 3., 4., 5., 6.]), 2, 2).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.samples[0].input, vec![1., 2., 3.]);
        assert_eq!(set.samples[0].target, vec![4., 5.]);
        assert_eq!(set.samples[1].input, vec![2., 3., 4.]);
        assert_eq!(set.samples[1].target, vec![5., 6.]);
    }

    #[test]
    fn sample_count_is_n_minus_w_minus_h() {
        let s = Series::new(vec![0.5; 13000], 48).unwrap();
        assert_eq!(make_samples(&s, 48, 1).unwrap().len(), 12951);
    }

    #[test]
    fn too_short_is_an_error() {
        assert!(matches!(
            make_samples(&series(&[1., 2., 3.]), 2, 1),
            Err(Error::TooShort { .. })
        ));
    }

    #[test]
    fn scaling_uses_input_window() {
        let s = Sample {
            input: vec![10., 20.],
            target: vec![30.],
            kds_pred: None,
            scale: Scale::IDENTITY,
            target_start: 2,
        };
        let t = scale_sample(&s);
        assert_eq!(t.input, vec![0., 1.]);
        assert_eq!(t.target, vec![2.]);
        assert_eq!(t.scale, Scale { min: 10., max: 20. });
    }

    #[test]
    fn constant_window_gets_unit_range() {
        let s = Sample {
            input: vec![5., 5.],
            target: vec![5.],
            kds_pred: None,
            scale: Scale::IDENTITY,
            target_start: 2,
        };
        let t = scale_sample(&s);
        assert_eq!(t.input, vec![0., 0.]);
        assert_eq!(t.target, vec![0.]);
        assert_eq!(t.scale, Scale { min: 5., max: 6. });
    }

    #[test]
    fn kds_prediction_shares_the_affine() {
        let s = Sample {
            input: vec![0., 4.],
            target: vec![1.],
            kds_pred: Some(vec![2.]),
            scale: Scale::IDENTITY,
            target_start: 2,
        };
        assert_eq!(scale_sample(&s).kds_pred, Some(vec![0.5]));
    }

    #[test]
    fn unscale_examples() {
        let scale = Scale { min: 10., max: 20. };
        assert_eq!(unscale_prediction(&[0.5], scale), vec![15.]);
        assert_eq!(unscale_prediction(&[2.0], scale), vec![30.]);
    }

    proptest! {
        #[test]
        fn scale_round_trip(
            input in prop::collection::vec(-1e6f64..1e6, 2..20),
            target in prop::collection::vec(-1e6f64..1e6, 1..4),
        ) {
            let s = Sample { input, target: target.clone(), kds_pred: None, scale: Scale::IDENTITY, target_start: 0 };
            let t = scale_sample(&s);
            let back = unscale_prediction(&t.target, t.scale);
            for (a, b) in back.iter().zip(&target) {
                let denom = b.abs().max(t.scale.range()).max(1e-300);
                prop_assert!((a - b).abs() / denom < 1e-12, "{a} vs {b}");
            }
        }

        #[test]
        fn targets_reconstruct_the_tail(
            values in prop::collection::vec(-100f64..100.0, 10..60),
            w in 0usize..5,
        ) {
            let s = Series::new(values.clone(), 3).unwrap();
            let set = make_samples(&s, w, 1).unwrap();
            let joined: Vec<f64> = set.iter().flat_map(|x| x.target.clone()).collect();
            prop_assert_eq!(&joined[..], &values[w + 1..]);
        }
    }
}
