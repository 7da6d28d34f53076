//! Temporal convolutional network over a single-channel input sequence.
//!
//! Each residual block applies two causal dilated convolutions with ReLU
//! activations and adds a skip path (identity, or a 1x1 convolution when the
//! channel count changes). Block `b` uses dilation `2^b`. A linear readout
//! maps the channels at the final time step to the horizon.
//!
//! Activations are stored channel-major: `x[c * len + t]`.

use rand::Rng;

use super::OUTPUT_SCALE;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tcn {
    pub input_len: usize,
    pub blocks: usize,
    pub channels: usize,
    pub kernel_size: usize,
    pub output_len: usize,
}

#[derive(Debug, Clone, Copy)]
struct Conv {
    offset: usize,
    c_in: usize,
    c_out: usize,
    k: usize,
    dilation: usize,
}

impl Conv {
    fn weights(&self) -> usize {
        self.c_out * self.c_in * self.k
    }

    fn size(&self) -> usize {
        self.weights() + self.c_out
    }

    fn w(&self, o: usize, i: usize, j: usize) -> usize {
        self.offset + (o * self.c_in + i) * self.k + j
    }

    fn b(&self, o: usize) -> usize {
        self.offset + self.weights() + o
    }

    fn forward(&self, params: &[f64], x: &[f64], len: usize, y: &mut Vec<f64>) {
        y.clear();
        y.resize(self.c_out * len, 0.0);
        for o in 0..self.c_out {
            let bias = params[self.b(o)];
            let row = &mut y[o * len..(o + 1) * len];
            row.fill(bias);
            for i in 0..self.c_in {
                let xi = &x[i * len..(i + 1) * len];
                for j in 0..self.k {
                    let w = params[self.w(o, i, j)];
                    let shift = j * self.dilation;
                    if shift >= len {
                        continue;
                    }
                    for t in shift..len {
                        row[t] += w * xi[t - shift];
                    }
                }
            }
        }
    }

    /// Accumulates parameter gradients and writes `d loss / d x` into `dx`
    /// (added to its current contents).
    fn backward(&self, params: &[f64], x: &[f64], dy: &[f64], len: usize, grad: &mut [f64], dx: &mut [f64]) {
        for o in 0..self.c_out {
            let dyo = &dy[o * len..(o + 1) * len];
            grad[self.b(o)] += dyo.iter().sum::<f64>();
            for i in 0..self.c_in {
                let xi = &x[i * len..(i + 1) * len];
                for j in 0..self.k {
                    let shift = j * self.dilation;
                    if shift >= len {
                        continue;
                    }
                    let w = params[self.w(o, i, j)];
                    let mut g = 0.0;
                    let dxi = &mut dx[i * len..(i + 1) * len];
                    for t in shift..len {
                        g += dyo[t] * xi[t - shift];
                        dxi[t - shift] += w * dyo[t];
                    }
                    grad[self.w(o, i, j)] += g;
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Block {
    conv1: Conv,
    conv2: Conv,
    skip: Option<Conv>,
}

#[derive(Debug, Clone, Default)]
pub struct TcnCache {
    /// Input of every block plus the final output: `blocks + 1` entries.
    xs: Vec<Vec<f64>>,
    h1: Vec<Vec<f64>>,
    h2: Vec<Vec<f64>>,
    out: Vec<f64>,
    scratch: Vec<f64>,
}

impl Tcn {
    fn layout(&self) -> (Vec<Block>, usize) {
        let mut offset = 0;
        let mut c_in = 1;
        let mut blocks = Vec::with_capacity(self.blocks);
        for b in 0..self.blocks {
            let dilation = 1 << b;
            let mut conv = |c_in: usize, k: usize, dilation: usize| {
                let c = Conv {
                    offset,
                    c_in,
                    c_out: self.channels,
                    k,
                    dilation,
                };
                offset += c.size();
                c
            };
            let conv1 = conv(c_in, self.kernel_size, dilation);
            let conv2 = conv(self.channels, self.kernel_size, dilation);
            let skip = (c_in != self.channels).then(|| conv(c_in, 1, 1));
            blocks.push(Block { conv1, conv2, skip });
            c_in = self.channels;
        }
        (blocks, offset)
    }

    fn readout_offset(&self) -> usize {
        self.layout().1
    }

    pub fn param_count(&self) -> usize {
        self.readout_offset() + self.output_len * self.channels + self.output_len
    }

    /// Number of past steps visible to the final output.
    pub fn receptive_field(&self) -> usize {
        1 + (0..self.blocks)
            .map(|b| 2 * (self.kernel_size - 1) * (1 << b))
            .sum::<usize>()
    }

    pub fn init<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let mut params = vec![0.0; self.param_count()];
        let (blocks, readout) = self.layout();
        let mut fill = |conv: &Conv, gain: f64| {
            let limit = (gain / (conv.c_in * conv.k) as f64).sqrt();
            for p in &mut params[conv.offset..conv.offset + conv.weights()] {
                *p = rng.random_range(-limit..limit);
            }
        };
        for blk in &blocks {
            fill(&blk.conv1, 6.0);
            fill(&blk.conv2, 6.0);
            if let Some(s) = &blk.skip {
                fill(s, 3.0);
            }
        }
        let limit = OUTPUT_SCALE * (3.0 / self.channels as f64).sqrt();
        for p in &mut params[readout..readout + self.output_len * self.channels] {
            *p = rng.random_range(-limit..limit);
        }
        params
    }

    pub fn forward<'c>(&self, params: &[f64], input: &[f64], cache: &'c mut TcnCache) -> &'c [f64] {
        let len = self.input_len;
        let (blocks, readout) = self.layout();
        cache.xs.resize(blocks.len() + 1, Vec::new());
        cache.h1.resize(blocks.len(), Vec::new());
        cache.h2.resize(blocks.len(), Vec::new());
        cache.xs[0].clear();
        cache.xs[0].extend_from_slice(input);
        for (b, blk) in blocks.iter().enumerate() {
            let (xs_head, xs_tail) = cache.xs.split_at_mut(b + 1);
            let x = &xs_head[b];
            blk.conv1.forward(params, x, len, &mut cache.h1[b]);
            cache.h1[b].iter_mut().for_each(|v| *v = v.max(0.0));
            blk.conv2.forward(params, &cache.h1[b], len, &mut cache.h2[b]);
            cache.h2[b].iter_mut().for_each(|v| *v = v.max(0.0));
            let out = &mut xs_tail[0];
            match &blk.skip {
                Some(s) => s.forward(params, x, len, out),
                None => {
                    out.clear();
                    out.extend_from_slice(x);
                }
            }
            for (o, h) in out.iter_mut().zip(&cache.h2[b]) {
                *o += h;
            }
        }
        let last = &cache.xs[blocks.len()];
        cache.out.clear();
        for j in 0..self.output_len {
            let row = &params[readout + j * self.channels..readout + (j + 1) * self.channels];
            let bias = params[readout + self.output_len * self.channels + j];
            let z = bias
                + row
                    .iter()
                    .enumerate()
                    .map(|(c, w)| w * last[c * len + len - 1])
                    .sum::<f64>();
            cache.out.push(z);
        }
        &cache.out
    }

    pub fn backward(&self, params: &[f64], cache: &mut TcnCache, grad_out: &[f64], grad: &mut [f64]) {
        let len = self.input_len;
        let (blocks, readout) = self.layout();
        let c = self.channels;
        let mut d_x = vec![0.0; c * len];
        {
            let last = &cache.xs[blocks.len()];
            for (j, &g) in grad_out.iter().enumerate() {
                grad[readout + self.output_len * c + j] += g;
                for ch in 0..c {
                    grad[readout + j * c + ch] += g * last[ch * len + len - 1];
                    d_x[ch * len + len - 1] += params[readout + j * c + ch] * g;
                }
            }
        }
        for (b, blk) in blocks.iter().enumerate().rev() {
            let d_out = d_x;
            let x = &cache.xs[b];
            let c_in = blk.conv1.c_in;
            let mut d_in = vec![0.0; c_in * len];
            match &blk.skip {
                Some(s) => s.backward(params, x, &d_out, len, grad, &mut d_in),
                None => d_in.copy_from_slice(&d_out),
            }
            // Through the second ReLU and convolution.
            let mut d_z2 = d_out;
            for (d, h) in d_z2.iter_mut().zip(&cache.h2[b]) {
                if *h <= 0.0 {
                    *d = 0.0;
                }
            }
            cache.scratch.clear();
            cache.scratch.resize(c * len, 0.0);
            blk.conv2.backward(params, &cache.h1[b], &d_z2, len, grad, &mut cache.scratch);
            for (d, h) in cache.scratch.iter_mut().zip(&cache.h1[b]) {
                if *h <= 0.0 {
                    *d = 0.0;
                }
            }
            blk.conv1.backward(params, x, &cache.scratch, len, grad, &mut d_in);
            d_x = d_in;
        }
    }

    /// Every intermediate activation sequence, channel-major, in forward
    /// order: per block `h1`, `h2`, block output.
    pub fn activations(&self, params: &[f64], input: &[f64]) -> Vec<Vec<f64>> {
        let mut cache = TcnCache::default();
        self.forward(params, input, &mut cache);
        let mut out = Vec::new();
        for b in 0..self.blocks {
            out.push(cache.h1[b].clone());
            out.push(cache.h2[b].clone());
            out.push(cache.xs[b + 1].clone());
        }
        out
    }
}
