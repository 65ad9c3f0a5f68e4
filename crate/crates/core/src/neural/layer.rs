use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

use super::activation::{softmax, Activation};
use super::tensor::Tensor;

/// Layer description. Spatial layers work on channel-last `[h, w, c]` tensors
/// with no padding; dense layers flatten their input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum LayerSpec {
    Dense { input: usize, output: usize },
    Conv2d { in_ch: usize, out_ch: usize, kernel: usize, stride: usize },
    MaxPool { kernel: usize, stride: usize },
    AvgPool { kernel: usize, stride: usize },
    Activation { function: Activation },
    Softmax,
}

/// `floor((input - kernel) / stride) + 1`.
pub fn conv_output_size(input: usize, kernel: usize, stride: usize) -> Result<usize> {
    if kernel == 0 || stride == 0 {
        return Err(Error::InvalidSpec("kernel and stride must be positive".into()));
    }
    if input < kernel {
        return Err(Error::InvalidSpec(format!("input size {input} is smaller than kernel {kernel}")));
    }
    Ok((input - kernel) / stride + 1)
}

impl LayerSpec {
    pub fn param_count(&self) -> u64 {
        match *self {
            LayerSpec::Dense { input, output } => (input * output + output) as u64,
            LayerSpec::Conv2d { in_ch, out_ch, kernel, .. } => (kernel * kernel * in_ch * out_ch + out_ch) as u64,
            _ => 0,
        }
    }

    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        let spatial = |input: &[usize]| -> Result<(usize, usize, usize)> {
            match *input {
                [h, w, c] => Ok((h, w, c)),
                _ => Err(Error::ShapeMismatch { expected: vec![0, 0, 0], got: input.to_vec() }),
            }
        };
        match *self {
            LayerSpec::Dense { input: n, output } => {
                let got: usize = input.iter().product();
                if got != n {
                    return Err(Error::ShapeMismatch { expected: vec![n], got: input.to_vec() });
                }
                Ok(vec![output])
            }
            LayerSpec::Conv2d { in_ch, out_ch, kernel, stride } => {
                let (h, w, c) = spatial(input)?;
                if c != in_ch {
                    return Err(Error::ShapeMismatch { expected: vec![h, w, in_ch], got: input.to_vec() });
                }
                Ok(vec![conv_output_size(h, kernel, stride)?, conv_output_size(w, kernel, stride)?, out_ch])
            }
            LayerSpec::MaxPool { kernel, stride } | LayerSpec::AvgPool { kernel, stride } => {
                let (h, w, c) = spatial(input)?;
                Ok(vec![conv_output_size(h, kernel, stride)?, conv_output_size(w, kernel, stride)?, c])
            }
            LayerSpec::Activation { .. } | LayerSpec::Softmax => Ok(input.to_vec()),
        }
    }

    fn param_shapes(&self) -> Vec<Vec<usize>> {
        match *self {
            LayerSpec::Dense { input, output } => vec![vec![input, output], vec![output]],
            LayerSpec::Conv2d { in_ch, out_ch, kernel, .. } => vec![vec![kernel, kernel, in_ch, out_ch], vec![out_ch]],
            _ => Vec::new(),
        }
    }

    fn fan_in(&self) -> usize {
        match *self {
            LayerSpec::Dense { input, .. } => input,
            LayerSpec::Conv2d { in_ch, kernel, .. } => kernel * kernel * in_ch,
            _ => 1,
        }
    }
}

/// Instantiated layer with parameters, accumulated gradients and a forward cache.
#[derive(Debug, Clone)]
pub struct Layer {
    pub spec: LayerSpec,
    pub input_shape: Vec<usize>,
    pub output_shape: Vec<usize>,
    /// `[weights, bias]` for parametrised layers.
    pub params: Vec<Tensor>,
    pub grads: Vec<Tensor>,
    cache: Option<Tensor>,
}

impl Layer {
    /// Weights and biases are drawn from `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`.
    pub fn new(spec: LayerSpec, input_shape: &[usize], rng: &mut Rng) -> Result<Self> {
        let output_shape = spec.output_shape(input_shape)?;
        let bound = 1.0 / (spec.fan_in() as f64).sqrt();
        let shapes = spec.param_shapes();
        let params = shapes
            .iter()
            .map(|s| {
                let mut t = Tensor::zeros(s);
                t.data_mut().iter_mut().for_each(|x| *x = rng.uniform(-bound, bound));
                t
            })
            .collect();
        let grads = shapes.iter().map(|s| Tensor::zeros(s)).collect();
        Ok(Layer { spec, input_shape: input_shape.to_vec(), output_shape, params, grads, cache: None })
    }

    pub fn clear_cache(&mut self) {
        self.cache = None;
    }

    pub fn zero_grad(&mut self) {
        self.grads.iter_mut().for_each(|g| g.fill(0.0));
    }

    /// Forward pass; when `cache` is set the input (or softmax output) is kept for backward.
    pub fn forward(&mut self, input: &Tensor, cache: bool) -> Result<Tensor> {
        let out = self.compute(input)?;
        if cache {
            self.cache = Some(if self.spec == LayerSpec::Softmax { out.clone() } else { input.clone() });
        }
        Ok(out)
    }

    /// Forward pass without touching the cache.
    pub fn compute(&self, input: &Tensor) -> Result<Tensor> {
        if input.len() != self.input_shape.iter().product::<usize>() {
            return Err(Error::ShapeMismatch { expected: self.input_shape.clone(), got: input.shape().to_vec() });
        }
        let x = input.data();
        let mut out = Tensor::zeros(&self.output_shape);
        match self.spec {
            LayerSpec::Dense { input: n, output: m } => {
                let (w, b) = (self.params[0].data(), self.params[1].data());
                let y = out.data_mut();
                y.copy_from_slice(b);
                for (i, &xi) in x.iter().enumerate().take(n) {
                    if xi != 0.0 {
                        let row = &w[i * m..(i + 1) * m];
                        for (yj, wij) in y.iter_mut().zip(row) {
                            *yj += xi * wij;
                        }
                    }
                }
            }
            LayerSpec::Conv2d { in_ch, out_ch, kernel, stride } => {
                let (w, b) = (self.params[0].data(), self.params[1].data());
                let iw = self.input_shape[1];
                let (oh, ow) = (self.output_shape[0], self.output_shape[1]);
                let y = out.data_mut();
                for oy in 0..oh {
                    for ox in 0..ow {
                        let o = (oy * ow + ox) * out_ch;
                        y[o..o + out_ch].copy_from_slice(b);
                        for ky in 0..kernel {
                            for kx in 0..kernel {
                                let ib = ((oy * stride + ky) * iw + ox * stride + kx) * in_ch;
                                for c in 0..in_ch {
                                    let xv = x[ib + c];
                                    let wb = ((ky * kernel + kx) * in_ch + c) * out_ch;
                                    for f in 0..out_ch {
                                        y[o + f] += xv * w[wb + f];
                                    }
                                }
                            }
                        }
                    }
                }
            }
            LayerSpec::MaxPool { kernel, stride } | LayerSpec::AvgPool { kernel, stride } => {
                let max = matches!(self.spec, LayerSpec::MaxPool { .. });
                let (iw, c) = (self.input_shape[1], self.input_shape[2]);
                let (oh, ow) = (self.output_shape[0], self.output_shape[1]);
                let y = out.data_mut();
                for oy in 0..oh {
                    for ox in 0..ow {
                        for ch in 0..c {
                            let mut acc = if max { f64::NEG_INFINITY } else { 0.0 };
                            for ky in 0..kernel {
                                for kx in 0..kernel {
                                    let v = x[((oy * stride + ky) * iw + ox * stride + kx) * c + ch];
                                    if max {
                                        acc = acc.max(v);
                                    } else {
                                        acc += v;
                                    }
                                }
                            }
                            y[(oy * ow + ox) * c + ch] = if max { acc } else { acc / (kernel * kernel) as f64 };
                        }
                    }
                }
            }
            LayerSpec::Activation { function } => {
                for (yo, &xi) in out.data_mut().iter_mut().zip(x) {
                    *yo = function.apply(xi);
                }
            }
            LayerSpec::Softmax => out.data_mut().copy_from_slice(&softmax(x)),
        }
        Ok(out)
    }

    /// Backpropagate `grad_out`, adding parameter gradients and returning the input gradient.
    pub fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor> {
        let cached = self.cache.take().ok_or(Error::NoForwardCache)?;
        if grad_out.len() != self.output_shape.iter().product::<usize>() {
            return Err(Error::ShapeMismatch { expected: self.output_shape.clone(), got: grad_out.shape().to_vec() });
        }
        let g = grad_out.data();
        let mut gin = Tensor::zeros(&self.input_shape);
        match self.spec {
            LayerSpec::Dense { input: n, output: m } => {
                let x = cached.data();
                let w = self.params[0].data();
                let dx = gin.data_mut();
                for i in 0..n {
                    let row = &w[i * m..(i + 1) * m];
                    dx[i] = row.iter().zip(g).map(|(a, b)| a * b).sum();
                }
                let dw = self.grads[0].data_mut();
                for i in 0..n {
                    if x[i] != 0.0 {
                        for j in 0..m {
                            dw[i * m + j] += x[i] * g[j];
                        }
                    }
                }
                for (db, gj) in self.grads[1].data_mut().iter_mut().zip(g) {
                    *db += gj;
                }
            }
            LayerSpec::Conv2d { in_ch, out_ch, kernel, stride } => {
                let x = cached.data();
                let iw = self.input_shape[1];
                let (oh, ow) = (self.output_shape[0], self.output_shape[1]);
                let w = self.params[0].data();
                let dx = gin.data_mut();
                let (dws, dbs) = self.grads.split_at_mut(1);
                let dw = dws[0].data_mut();
                let db = dbs[0].data_mut();
                for oy in 0..oh {
                    for ox in 0..ow {
                        let o = (oy * ow + ox) * out_ch;
                        let go = &g[o..o + out_ch];
                        for (d, gv) in db.iter_mut().zip(go) {
                            *d += gv;
                        }
                        for ky in 0..kernel {
                            for kx in 0..kernel {
                                let ib = ((oy * stride + ky) * iw + ox * stride + kx) * in_ch;
                                for c in 0..in_ch {
                                    let wb = ((ky * kernel + kx) * in_ch + c) * out_ch;
                                    let xv = x[ib + c];
                                    let mut acc = 0.0;
                                    for f in 0..out_ch {
                                        dw[wb + f] += xv * go[f];
                                        acc += w[wb + f] * go[f];
                                    }
                                    dx[ib + c] += acc;
                                }
                            }
                        }
                    }
                }
            }
            LayerSpec::MaxPool { kernel, stride } | LayerSpec::AvgPool { kernel, stride } => {
                let max = matches!(self.spec, LayerSpec::MaxPool { .. });
                let x = cached.data();
                let (iw, c) = (self.input_shape[1], self.input_shape[2]);
                let (oh, ow) = (self.output_shape[0], self.output_shape[1]);
                let area = (kernel * kernel) as f64;
                let dx = gin.data_mut();
                for oy in 0..oh {
                    for ox in 0..ow {
                        for ch in 0..c {
                            let gv = g[(oy * ow + ox) * c + ch];
                            let idx = |ky: usize, kx: usize| ((oy * stride + ky) * iw + ox * stride + kx) * c + ch;
                            if max {
                                // first maximum in window order receives the gradient
                                let mut best = idx(0, 0);
                                for ky in 0..kernel {
                                    for kx in 0..kernel {
                                        if x[idx(ky, kx)] > x[best] {
                                            best = idx(ky, kx);
                                        }
                                    }
                                }
                                dx[best] += gv;
                            } else {
                                for ky in 0..kernel {
                                    for kx in 0..kernel {
                                        dx[idx(ky, kx)] += gv / area;
                                    }
                                }
                            }
                        }
                    }
                }
            }
            LayerSpec::Activation { function } => {
                for ((d, &xi), gv) in gin.data_mut().iter_mut().zip(cached.data()).zip(g) {
                    *d = function.derivative(xi) * gv;
                }
            }
            LayerSpec::Softmax => {
                let s = cached.data();
                let dot: f64 = s.iter().zip(g).map(|(a, b)| a * b).sum();
                for ((d, si), gv) in gin.data_mut().iter_mut().zip(s).zip(g) {
                    *d = si * (gv - dot);
                }
            }
        }
        Ok(gin)
    }
}
