use crate::error::{Error, Result};

/// Test-set error summary for one model.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub model_name: String,
    pub mse: f64,
    pub mae: f64,
    pub n_test: usize,
}

impl MetricsReport {
    pub fn evaluate(model_name: impl Into<String>, pred: &[f64], truth: &[f64]) -> Result<Self> {
        Ok(MetricsReport {
            model_name: model_name.into(),
            mse: mse(pred, truth)?,
            mae: mae(pred, truth)?,
            n_test: truth.len(),
        })
    }
}

fn check(pred: &[f64], truth: &[f64]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: pred.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::InvalidArgument("metrics need at least one value".into()));
    }
    Ok(())
}

/// Mean squared error.
pub fn mse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check(pred, truth)?;
    let sum: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(sum / truth.len() as f64)
}

/// Mean absolute error.
pub fn mae(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check(pred, truth)?;
    let sum: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum();
    Ok(sum / truth.len() as f64)
}

/// Median of a non-empty slice; the mean of the two middle values for even
/// lengths.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(mse(&[1., 2.], &[1., 2.]).unwrap(), 0.0);
        assert_eq!(mse(&[0., 0.], &[1., 3.]).unwrap(), 5.0);
        assert_eq!(mae(&[0., 0.], &[1., 3.]).unwrap(), 2.0);
    }

    #[test]
    fn errors() {
        assert!(mse(&[1.], &[1., 2.]).is_err());
        assert!(mse(&[], &[]).is_err());
    }

    #[test]
    fn median_values() {
        assert_eq!(median(&[3., 1., 2.]), Some(2.));
        assert_eq!(median(&[4., 1., 2., 3.]), Some(2.5));
        assert_eq!(median(&[]), None);
    }

    proptest! {
        #[test]
        fn mse_symmetric_and_nonnegative(
            pairs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..50)
        ) {
            let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let ab = mse(&a, &b).unwrap();
            prop_assert_eq!(ab, mse(&b, &a).unwrap());
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab == 0.0, a == b);
        }
    }
}
