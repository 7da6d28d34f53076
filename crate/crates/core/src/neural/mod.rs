//! Trainable predictors: an MLP and a causal TCN over a flat parameter
//! vector, with reverse-mode gradients written out by hand.

pub mod checkpoint;
pub mod mlp;
pub mod tcn;
pub mod train;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::window::{unscale_prediction, SampleSet};

pub use checkpoint::{load_predictor, read_predictor, save_predictor, write_predictor};
pub use mlp::Mlp;
pub use tcn::Tcn;
pub use train::{train, train_pairs, TrainConfig, TrainOutcome};

/// Shrinks the initial range of the final linear layer so a fresh network
/// outputs values near zero. In a fused model that means training starts
/// close to the knowledge forecast.
pub const OUTPUT_SCALE: f64 = 0.1;

/// A concrete network shape with fixed input and output widths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredictorArch {
    /// Layer widths from input to output.
    Mlp { widths: Vec<usize> },
    Tcn {
        input_len: usize,
        blocks: usize,
        channels: usize,
        kernel_size: usize,
        output_len: usize,
    },
}

impl PredictorArch {
    pub fn mlp(widths: &[usize]) -> Self {
        PredictorArch::Mlp {
            widths: widths.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PredictorArch::Mlp { widths } => {
                if widths.len() < 2 {
                    return Err(Error::InvalidArgument(
                        "an MLP needs at least input and output widths".into(),
                    ));
                }
                if widths.contains(&0) {
                    return Err(Error::InvalidArgument("MLP widths must be at least 1".into()));
                }
            }
            PredictorArch::Tcn {
                input_len,
                blocks,
                channels,
                kernel_size,
                output_len,
            } => {
                if [*input_len, *blocks, *channels, *kernel_size, *output_len].contains(&0) {
                    return Err(Error::InvalidArgument(
                        "TCN sizes must all be at least 1".into(),
                    ));
                }
                if *blocks > 16 {
                    return Err(Error::InvalidArgument("TCN supports at most 16 blocks".into()));
                }
            }
        }
        Ok(())
    }

    pub fn input_len(&self) -> usize {
        match self {
            PredictorArch::Mlp { widths } => widths[0],
            PredictorArch::Tcn { input_len, .. } => *input_len,
        }
    }

    pub fn output_len(&self) -> usize {
        match self {
            PredictorArch::Mlp { widths } => *widths.last().unwrap(),
            PredictorArch::Tcn { output_len, .. } => *output_len,
        }
    }

    pub fn param_count(&self) -> usize {
        self.net().param_count()
    }

    pub fn kind(&self) -> &'static str {
        match self {
            PredictorArch::Mlp { .. } => "mlp",
            PredictorArch::Tcn { .. } => "tcn",
        }
    }

    pub(crate) fn net(&self) -> Net {
        match self {
            PredictorArch::Mlp { widths } => Net::Mlp(Mlp::new(widths.clone())),
            &PredictorArch::Tcn {
                input_len,
                blocks,
                channels,
                kernel_size,
                output_len,
            } => Net::Tcn(Tcn {
                input_len,
                blocks,
                channels,
                kernel_size,
                output_len,
            }),
        }
    }
}

/// Architecture as written in configs: hidden shape only. Input and output
/// widths come from the window and horizon at build time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ArchSpec {
    Mlp {
        #[serde(default = "default_hidden")]
        hidden: Vec<usize>,
    },
    Tcn {
        #[serde(default = "default_blocks")]
        blocks: usize,
        #[serde(default = "default_channels")]
        channels: usize,
        #[serde(default = "default_kernel")]
        kernel_size: usize,
    },
}

fn default_hidden() -> Vec<usize> {
    vec![32, 16]
}
fn default_blocks() -> usize {
    4
}
fn default_channels() -> usize {
    4
}
fn default_kernel() -> usize {
    3
}

impl Default for ArchSpec {
    fn default() -> Self {
        ArchSpec::Mlp {
            hidden: default_hidden(),
        }
    }
}

impl ArchSpec {
    pub fn tcn() -> Self {
        ArchSpec::Tcn {
            blocks: default_blocks(),
            channels: default_channels(),
            kernel_size: default_kernel(),
        }
    }

    pub fn build(&self, input_len: usize, output_len: usize) -> Result<PredictorArch> {
        let arch = match self {
            ArchSpec::Mlp { hidden } => {
                let mut widths = vec![input_len];
                widths.extend(hidden);
                widths.push(output_len);
                PredictorArch::Mlp { widths }
            }
            &ArchSpec::Tcn {
                blocks,
                channels,
                kernel_size,
            } => PredictorArch::Tcn {
                input_len,
                blocks,
                channels,
                kernel_size,
                output_len,
            },
        };
        arch.validate()?;
        Ok(arch)
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Net {
    Mlp(Mlp),
    Tcn(Tcn),
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Cache {
    mlp: mlp::MlpCache,
    tcn: tcn::TcnCache,
}

impl Net {
    pub(crate) fn param_count(&self) -> usize {
        match self {
            Net::Mlp(m) => m.param_count(),
            Net::Tcn(t) => t.param_count(),
        }
    }

    pub(crate) fn forward<'c>(&self, params: &[f64], input: &[f64], cache: &'c mut Cache) -> &'c [f64] {
        match self {
            Net::Mlp(m) => m.forward(params, input, &mut cache.mlp),
            Net::Tcn(t) => t.forward(params, input, &mut cache.tcn),
        }
    }

    pub(crate) fn backward(&self, params: &[f64], cache: &mut Cache, grad_out: &[f64], grad: &mut [f64]) {
        match self {
            Net::Mlp(m) => m.backward(params, &mut cache.mlp, grad_out, grad),
            Net::Tcn(t) => t.backward(params, &mut cache.tcn, grad_out, grad),
        }
    }
}

/// A network shape plus its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictor {
    pub arch: PredictorArch,
    pub params: Vec<f64>,
    pub seed: u64,
}

/// Scaled-uniform weights (He for ReLU layers, LeCun for linear ones, the
/// final layer further shrunk by [`OUTPUT_SCALE`]) and zero biases, drawn
/// from a ChaCha stream seeded with `seed`.
pub fn init_predictor(arch: &PredictorArch, seed: u64) -> Result<Predictor> {
    arch.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = match arch.net() {
        Net::Mlp(m) => m.init(&mut rng),
        Net::Tcn(t) => t.init(&mut rng),
    };
    Ok(Predictor {
        arch: arch.clone(),
        params,
        seed,
    })
}

impl Predictor {
    /// Wraps an explicit parameter vector.
    pub fn from_params(arch: PredictorArch, params: Vec<f64>, seed: u64) -> Result<Self> {
        arch.validate()?;
        let expected = arch.param_count();
        if params.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument("parameters must be finite".into()));
        }
        Ok(Predictor { arch, params, seed })
    }

    pub fn input_len(&self) -> usize {
        self.arch.input_len()
    }

    pub fn output_len(&self) -> usize {
        self.arch.output_len()
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        check_len(self.input_len(), input.len())?;
        let mut cache = Cache::default();
        Ok(self.arch.net().forward(&self.params, input, &mut cache).to_vec())
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// Reusable forward/backward state for one network.
pub(crate) struct Evaluator {
    net: Net,
    cache: Cache,
    grad_out: Vec<f64>,
}

impl Evaluator {
    pub(crate) fn new(arch: &PredictorArch) -> Self {
        Evaluator {
            net: arch.net(),
            cache: Cache::default(),
            grad_out: Vec::new(),
        }
    }

    /// Sum of squared errors of one sample.
    pub(crate) fn sse(&mut self, params: &[f64], input: &[f64], target: &[f64]) -> f64 {
        let out = self.net.forward(params, input, &mut self.cache);
        out.iter().zip(target).map(|(y, t)| (y - t) * (y - t)).sum()
    }

    /// Adds `scale * d sse / d params` into `grad` and returns the sample's
    /// sum of squared errors.
    pub(crate) fn accumulate(
        &mut self,
        params: &[f64],
        input: &[f64],
        target: &[f64],
        scale: f64,
        grad: &mut [f64],
    ) -> f64 {
        let out = self.net.forward(params, input, &mut self.cache);
        self.grad_out.clear();
        let mut sse = 0.0;
        for (y, t) in out.iter().zip(target) {
            let e = y - t;
            sse += e * e;
            self.grad_out.push(2.0 * e * scale);
        }
        self.net.backward(params, &mut self.cache, &self.grad_out, grad);
        sse
    }
}

fn check_batch(p: &Predictor, batch: &[(Vec<f64>, Vec<f64>)]) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("batch is empty".into()));
    }
    for (x, y) in batch {
        check_len(p.input_len(), x.len())?;
        check_len(p.output_len(), y.len())?;
    }
    Ok(())
}

/// Batch-mean MSE over every output element.
pub fn loss(p: &Predictor, batch: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
    check_batch(p, batch)?;
    let mut ev = Evaluator::new(&p.arch);
    let sse: f64 = batch.iter().map(|(x, y)| ev.sse(&p.params, x, y)).sum();
    Ok(sse / (batch.len() * p.output_len()) as f64)
}

/// Exact gradient of [`loss`] with respect to `p.params`.
pub fn gradient(p: &Predictor, batch: &[(Vec<f64>, Vec<f64>)]) -> Result<Vec<f64>> {
    check_batch(p, batch)?;
    let mut ev = Evaluator::new(&p.arch);
    let mut grad = vec![0.0; p.params.len()];
    let scale = 1.0 / (batch.len() * p.output_len()) as f64;
    for (x, y) in batch {
        ev.accumulate(&p.params, x, y, scale, &mut grad);
    }
    Ok(grad)
}

/// Forward pass on each scaled sample, mapped back through that sample's
/// scale. Output is concatenated in sample order.
pub fn predict_series(p: &Predictor, samples: &SampleSet) -> Result<Vec<f64>> {
    check_len(p.output_len(), samples.h)?;
    let net = p.arch.net();
    let mut cache = Cache::default();
    let mut out = Vec::with_capacity(samples.len() * samples.h);
    for s in samples.iter() {
        check_len(p.input_len(), s.input.len())?;
        let y = net.forward(&p.params, &s.input, &mut cache);
        out.extend(unscale_prediction(y, s.scale));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn tcn_arch(input_len: usize) -> PredictorArch {
        PredictorArch::Tcn {
            input_len,
            blocks: 3,
            channels: 3,
            kernel_size: 2,
            output_len: 2,
        }
    }

    #[test]
    fn init_is_deterministic_with_zero_biases() {
        let arch = PredictorArch::mlp(&[4, 8, 1]);
        let a = init_predictor(&arch, 5).unwrap();
        let b = init_predictor(&arch, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.params.len(), 49);
        // Biases follow each weight matrix.
        assert!(a.params[32..40].iter().all(|&v| v == 0.0));
        assert_eq!(a.params[48], 0.0);
        assert_ne!(a.params, init_predictor(&arch, 6).unwrap().params);
    }

    #[test]
    fn invalid_arch_is_rejected() {
        assert!(init_predictor(&PredictorArch::mlp(&[3]), 0).is_err());
        assert!(init_predictor(&PredictorArch::mlp(&[3, 0, 1]), 0).is_err());
    }

    #[test]
    fn zero_params_give_zero_output() {
        for arch in [PredictorArch::mlp(&[3, 5, 2]), tcn_arch(6)] {
            let n = arch.param_count();
            let p = Predictor::from_params(arch, vec![0.0; n], 0).unwrap();
            let x: Vec<f64> = (0..p.input_len()).map(|i| i as f64 - 1.5).collect();
            assert_eq!(p.forward(&x).unwrap(), vec![0.0; p.output_len()]);
        }
    }

    #[test]
    fn single_neuron_by_hand() {
        let p = Predictor::from_params(PredictorArch::mlp(&[1, 1]), vec![2.0, 3.0], 0).unwrap();
        assert_eq!(p.forward(&[5.0]).unwrap(), vec![13.0]);
        assert!(p.forward(&[5.0, 1.0]).is_err());

        let p = Predictor::from_params(PredictorArch::mlp(&[1, 1]), vec![1.0, 0.0], 0).unwrap();
        let batch = vec![(vec![1.0], vec![0.0])];
        assert_eq!(loss(&p, &batch).unwrap(), 1.0);
        assert_eq!(gradient(&p, &batch).unwrap(), vec![2.0, 2.0]);
    }

    #[test]
    fn gradient_vanishes_at_exact_fit() {
        let p = init_predictor(&PredictorArch::mlp(&[3, 4, 2]), 1).unwrap();
        let batch: Vec<_> = (0..5)
            .map(|i| {
                let x = vec![i as f64, 1.0, -0.5 * i as f64];
                let y = p.forward(&x).unwrap();
                (x, y)
            })
            .collect();
        assert!(gradient(&p, &batch).unwrap().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn tcn_parameter_count() {
        // Block 0: conv 1->3 (6+3), conv 3->3 (18+3), skip 1->3 (3+3).
        // Blocks 1, 2: two 3->3 convs each (21+21). Readout 3->2 (6+2).
        let arch = tcn_arch(8);
        assert_eq!(arch.param_count(), 36 + 42 * 2 + 8);
    }

    #[test]
    fn tcn_receptive_field() {
        let t = Tcn {
            input_len: 50,
            blocks: 4,
            channels: 4,
            kernel_size: 3,
            output_len: 1,
        };
        assert_eq!(t.receptive_field(), 61);
    }

    fn finite_difference_check(p: &Predictor, batch: &[(Vec<f64>, Vec<f64>)]) {
        let g = gradient(p, batch).unwrap();
        let step = 1e-5;
        for i in 0..p.params.len() {
            let mut plus = p.clone();
            plus.params[i] += step;
            let mut minus = p.clone();
            minus.params[i] -= step;
            let numeric = (loss(&plus, batch).unwrap() - loss(&minus, batch).unwrap()) / (2.0 * step);
            let denom = g[i].abs().max(numeric.abs()).max(1e-6);
            assert!(
                (g[i] - numeric).abs() / denom < 1e-4,
                "param {i}: analytic {} numeric {numeric}",
                g[i]
            );
        }
    }

    fn random_batch(p: &Predictor, n: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let x = (0..p.input_len()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let y = (0..p.output_len()).map(|_| rng.random_range(-1.0..1.0)).collect();
                (x, y)
            })
            .collect()
    }

    #[test]
    fn mlp_gradient_matches_finite_differences() {
        let p = init_predictor(&PredictorArch::mlp(&[5, 7, 4, 2]), 3).unwrap();
        finite_difference_check(&p, &random_batch(&p, 6, 4));
    }

    #[test]
    fn tcn_gradient_matches_finite_differences() {
        let mut p = init_predictor(&tcn_arch(10), 8).unwrap();
        // Nonzero biases exercise their gradient paths too.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for v in &mut p.params {
            *v += rng.random_range(-0.1..0.1);
        }
        finite_difference_check(&p, &random_batch(&p, 4, 9));
    }

    #[test]
    fn predict_series_unscales_per_sample() {
        use crate::window::make_samples;
        let arch = PredictorArch::mlp(&[2, 1]);
        // Predicts the mean of the scaled window.
        let p = Predictor::from_params(arch, vec![0.5, 0.5, 0.0], 0).unwrap();
        let s = crate::Series::new(vec![1.0, 3.0, 10.0, 20.0], 2).unwrap();
        let set = make_samples(&s, 1, 1).unwrap().scaled();
        let pred = predict_series(&p, &set).unwrap();
        assert_eq!(pred.len(), set.len());
        assert_eq!(pred, vec![2.0, 6.5]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn tcn_is_causal(seed in 0u64..1000, t in 0usize..12, bump in -3.0f64..3.0) {
            let arch = PredictorArch::Tcn {
                input_len: 12,
                blocks: 3,
                channels: 4,
                kernel_size: 3,
                output_len: 1,
            };
            let p = init_predictor(&arch, seed).unwrap();
            let net = match arch.net() { Net::Tcn(t) => t, Net::Mlp(_) => unreachable!() };
            let x: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).sin()).collect();
            let mut y = x.clone();
            y[t] += bump;
            let a = net.activations(&p.params, &x);
            let b = net.activations(&p.params, &y);
            for (la, lb) in a.iter().zip(&b) {
                for c in 0..la.len() / 12 {
                    for pos in 0..t {
                        prop_assert_eq!(la[c * 12 + pos], lb[c * 12 + pos]);
                    }
                }
            }
        }

        #[test]
        fn forward_is_finite_and_deterministic(seed in 0u64..1000) {
            let p = init_predictor(&PredictorArch::mlp(&[6, 5, 3]), seed).unwrap();
            let x = [0.1, -0.2, 0.3, 0.0, 1.0, -1.0];
            let a = p.forward(&x).unwrap();
            prop_assert!(a.iter().all(|v| v.is_finite()));
            prop_assert_eq!(a, p.forward(&x).unwrap());
        }
    }
}
