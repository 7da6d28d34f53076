//! Fully connected network: ReLU hidden layers, linear output.
//!
//! Parameters are laid out layer by layer, each as a row-major
//! `out x in` weight matrix followed by `out` biases.

use rand::Rng;

use super::OUTPUT_SCALE;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mlp {
    widths: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct MlpCache {
    /// Post-activation values per layer; `acts[0]` is the input.
    acts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
}

impl Mlp {
    pub fn new(widths: Vec<usize>) -> Self {
        Mlp { widths }
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn input_len(&self) -> usize {
        self.widths[0]
    }

    pub fn output_len(&self) -> usize {
        *self.widths.last().unwrap()
    }

    fn layers(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        // (offset, fan_in, fan_out)
        let mut offset = 0;
        self.widths.windows(2).map(move |w| {
            let here = offset;
            offset += w[0] * w[1] + w[1];
            (here, w[0], w[1])
        })
    }

    pub fn param_count(&self) -> usize {
        self.widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn init<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let n_layers = self.widths.len() - 1;
        let mut params = vec![0.0; self.param_count()];
        for (l, (offset, fan_in, fan_out)) in self.layers().enumerate() {
            // He scaling ahead of a ReLU; a shrunk LeCun range for the output.
            let limit = if l + 1 < n_layers {
                (6.0 / fan_in as f64).sqrt()
            } else {
                OUTPUT_SCALE * (3.0 / fan_in as f64).sqrt()
            };
            for w in &mut params[offset..offset + fan_in * fan_out] {
                *w = rng.random_range(-limit..limit);
            }
        }
        params
    }

    pub fn forward<'c>(&self, params: &[f64], input: &[f64], cache: &'c mut MlpCache) -> &'c [f64] {
        let n_layers = self.widths.len() - 1;
        cache.acts.resize(self.widths.len(), Vec::new());
        cache.acts[0].clear();
        cache.acts[0].extend_from_slice(input);
        for (l, (offset, fan_in, fan_out)) in self.layers().enumerate() {
            let (prev, rest) = cache.acts.split_at_mut(l + 1);
            let a = &prev[l];
            let out = &mut rest[0];
            out.clear();
            let weights = &params[offset..offset + fan_in * fan_out];
            let biases = &params[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
            for (row, b) in weights.chunks_exact(fan_in).zip(biases) {
                let z = b + row.iter().zip(a).map(|(w, x)| w * x).sum::<f64>();
                out.push(if l + 1 < n_layers { z.max(0.0) } else { z });
            }
        }
        &cache.acts[n_layers]
    }

    /// Accumulates `d loss / d params` into `grad` given `d loss / d output`
    /// for the input last passed to `forward` with this cache.
    pub fn backward(&self, params: &[f64], cache: &mut MlpCache, grad_out: &[f64], grad: &mut [f64]) {
        let layers: Vec<_> = self.layers().collect();
        cache.delta.clear();
        cache.delta.extend_from_slice(grad_out);
        for (l, &(offset, fan_in, fan_out)) in layers.iter().enumerate().rev() {
            let a_prev = &cache.acts[l];
            let (gw, gb) = grad[offset..offset + fan_in * fan_out + fan_out].split_at_mut(fan_in * fan_out);
            for (o, &d) in cache.delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                gb[o] += d;
                for (g, x) in gw[o * fan_in..(o + 1) * fan_in].iter_mut().zip(a_prev) {
                    *g += d * x;
                }
            }
            if l == 0 {
                break;
            }
            let weights = &params[offset..offset + fan_in * fan_out];
            cache.delta_prev.clear();
            cache.delta_prev.resize(fan_in, 0.0);
            for (o, &d) in cache.delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                for (dp, w) in cache.delta_prev.iter_mut().zip(&weights[o * fan_in..(o + 1) * fan_in]) {
                    *dp += w * d;
                }
            }
            // ReLU derivative, taken as 0 at the kink.
            for (dp, a) in cache.delta_prev.iter_mut().zip(a_prev) {
                if *a <= 0.0 {
                    *dp = 0.0;
                }
            }
            std::mem::swap(&mut cache.delta, &mut cache.delta_prev);
        }
    }
}
