//! Network layers: dense, batch normalization, ReLU and inverted dropout.
//!
//! Forward passes are pure: train-mode side effects (batch statistics for
//! the running averages) are returned in the cache and applied by the
//! trainer, so a layer can be evaluated concurrently and finite-difference
//! checked without mutating the model.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::tensor::Tensor;
use crate::Result;

/// Dense layer `y = x·W + b`, weights shaped (inputs, outputs).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Dense {
    pub weights: Tensor,
    pub bias: Tensor,
}

impl Dense {
    /// He-uniform initialization scaled by fan-in, zero biases.
    pub fn init(inputs: usize, outputs: usize, rng: &mut ChaCha8Rng) -> Self {
        let limit = (6.0 / inputs as f64).sqrt();
        let weights = Tensor::from_fn(inputs, outputs, |_, _| rng.gen_range(-limit..limit));
        Self {
            weights,
            bias: Tensor::zeros(1, outputs),
        }
    }
}

/// Batch normalization with learned scale γ and shift β plus running
/// statistics for inference.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BatchNorm {
    pub gamma: Tensor,
    pub beta: Tensor,
    pub running_mean: Tensor,
    pub running_var: Tensor,
    pub epsilon: f64,
    /// Fraction of the old running statistic retained per batch.
    pub momentum: f64,
}

impl BatchNorm {
    pub fn new(width: usize, epsilon: f64, momentum: f64) -> Self {
        Self {
            gamma: Tensor::from_fn(1, width, |_, _| 1.0),
            beta: Tensor::zeros(1, width),
            running_mean: Tensor::zeros(1, width),
            running_var: Tensor::from_fn(1, width, |_, _| 1.0),
            epsilon,
            momentum,
        }
    }
}

/// Inverted dropout: kept activations are scaled by 1/keep at train time so
/// inference is the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Dropout {
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Layer {
    Dense(Dense),
    BatchNorm(BatchNorm),
    Relu,
    Dropout(Dropout),
}

/// Per-layer values captured by a train-mode forward pass, consumed by
/// [`Layer::backward`] and the running-statistics update.
#[derive(Debug, Clone)]
pub enum LayerCache {
    Dense {
        input: Tensor,
    },
    BatchNorm {
        normalized: Tensor,
        inv_std: Vec<f64>,
        batch_mean: Vec<f64>,
        batch_var: Vec<f64>,
    },
    Relu {
        output_positive: Vec<bool>,
    },
    Dropout {
        /// 0 where dropped, 1/keep where kept; empty for rate = 0.
        mask: Vec<f64>,
    },
}

/// Parameter gradients in the same order as [`Layer::params`].
#[derive(Debug, Clone)]
pub enum LayerGrads {
    Dense { weights: Tensor, bias: Tensor },
    BatchNorm { gamma: Tensor, beta: Tensor },
    None,
}

impl LayerGrads {
    pub fn tensors(&self) -> Vec<&Tensor> {
        match self {
            LayerGrads::Dense { weights, bias } => alloc::vec![weights, bias],
            LayerGrads::BatchNorm { gamma, beta } => alloc::vec![gamma, beta],
            LayerGrads::None => Vec::new(),
        }
    }
}

impl Layer {
    pub fn output_width(&self, input_width: usize) -> usize {
        match self {
            Layer::Dense(d) => d.weights.cols(),
            _ => input_width,
        }
    }

    /// Learnable parameter tensors, in a stable order.
    pub fn params(&self) -> Vec<&Tensor> {
        match self {
            Layer::Dense(d) => alloc::vec![&d.weights, &d.bias],
            Layer::BatchNorm(bn) => alloc::vec![&bn.gamma, &bn.beta],
            _ => Vec::new(),
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        match self {
            Layer::Dense(d) => alloc::vec![&mut d.weights, &mut d.bias],
            Layer::BatchNorm(bn) => alloc::vec![&mut bn.gamma, &mut bn.beta],
            _ => Vec::new(),
        }
    }

    /// Train-mode forward pass. Dropout masks come from `rng`; batch
    /// normalization uses batch statistics and reports them in the cache.
    pub fn forward_train(
        &self,
        input: &Tensor,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Tensor, LayerCache)> {
        match self {
            Layer::Dense(d) => {
                let mut out = input.matmul(&d.weights)?;
                out.add_row_broadcast(d.bias.row(0))?;
                Ok((
                    out,
                    LayerCache::Dense {
                        input: input.clone(),
                    },
                ))
            }
            Layer::BatchNorm(bn) => {
                let (rows, cols) = input.shape();
                let n = rows as f64;
                let mut mean = alloc::vec![0.0; cols];
                for row in input.rows_iter() {
                    for (m, v) in mean.iter_mut().zip(row) {
                        *m += v;
                    }
                }
                for m in &mut mean {
                    *m /= n;
                }
                let mut var = alloc::vec![0.0; cols];
                for row in input.rows_iter() {
                    for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                        let d = v - m;
                        *s += d * d;
                    }
                }
                for v in &mut var {
                    *v /= n;
                }
                let inv_std: Vec<f64> =
                    var.iter().map(|v| 1.0 / (v + bn.epsilon).sqrt()).collect();
                let mut normalized = Tensor::zeros(rows, cols);
                for (out_row, in_row) in (0..rows).map(|r| (r, input.row(r))) {
                    let dst = normalized.row_mut(out_row);
                    for (c, (d, v)) in dst.iter_mut().zip(in_row).enumerate() {
                        *d = (v - mean[c]) * inv_std[c];
                    }
                }
                let mut out = Tensor::zeros(rows, cols);
                let gamma = bn.gamma.row(0);
                let beta = bn.beta.row(0);
                for r in 0..rows {
                    let src = normalized.row(r);
                    let dst = out.row_mut(r);
                    for c in 0..cols {
                        dst[c] = gamma[c] * src[c] + beta[c];
                    }
                }
                Ok((
                    out,
                    LayerCache::BatchNorm {
                        normalized,
                        inv_std,
                        batch_mean: mean,
                        batch_var: var,
                    },
                ))
            }
            Layer::Relu => {
                let mut out = input.clone();
                let mut positive = Vec::with_capacity(out.data().len());
                for v in out.data_mut() {
                    if *v > 0.0 {
                        positive.push(true);
                    } else {
                        *v = 0.0;
                        positive.push(false);
                    }
                }
                Ok((
                    out,
                    LayerCache::Relu {
                        output_positive: positive,
                    },
                ))
            }
            Layer::Dropout(dr) => {
                if dr.rate == 0.0 {
                    return Ok((input.clone(), LayerCache::Dropout { mask: Vec::new() }));
                }
                let keep = 1.0 - dr.rate;
                let scale = 1.0 / keep;
                let mut out = input.clone();
                let mut mask = Vec::with_capacity(out.data().len());
                for v in out.data_mut() {
                    let m = if rng.gen_bool(keep) { scale } else { 0.0 };
                    mask.push(m);
                    *v *= m;
                }
                Ok((out, LayerCache::Dropout { mask }))
            }
        }
    }

    /// Inference-mode forward pass: running statistics, no dropout.
    pub fn forward_infer(&self, input: &Tensor) -> Result<Tensor> {
        match self {
            Layer::Dense(d) => {
                let mut out = input.matmul(&d.weights)?;
                out.add_row_broadcast(d.bias.row(0))?;
                Ok(out)
            }
            Layer::BatchNorm(bn) => {
                let (rows, cols) = input.shape();
                let mean = bn.running_mean.row(0);
                let var = bn.running_var.row(0);
                let gamma = bn.gamma.row(0);
                let beta = bn.beta.row(0);
                let mut out = Tensor::zeros(rows, cols);
                for r in 0..rows {
                    let src = input.row(r);
                    let dst = out.row_mut(r);
                    for c in 0..cols {
                        dst[c] =
                            gamma[c] * (src[c] - mean[c]) / (var[c] + bn.epsilon).sqrt() + beta[c];
                    }
                }
                Ok(out)
            }
            Layer::Relu => {
                let mut out = input.clone();
                for v in out.data_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
                Ok(out)
            }
            Layer::Dropout(_) => Ok(input.clone()),
        }
    }

    /// Reverse-mode step: gradient w.r.t. the layer input plus parameter
    /// gradients. The cache must come from a train-mode forward pass over
    /// the same batch.
    pub fn backward(
        &self,
        cache: &LayerCache,
        grad_out: &Tensor,
    ) -> Result<(Tensor, LayerGrads)> {
        match (self, cache) {
            (Layer::Dense(d), LayerCache::Dense { input }) => {
                let grad_w = input.transpose_matmul(grad_out)?;
                let grad_b = Tensor::from_vec(1, grad_out.cols(), grad_out.column_sums())?;
                let grad_in = grad_out.matmul(&d.weights.transposed())?;
                Ok((
                    grad_in,
                    LayerGrads::Dense {
                        weights: grad_w,
                        bias: grad_b,
                    },
                ))
            }
            (
                Layer::BatchNorm(bn),
                LayerCache::BatchNorm {
                    normalized,
                    inv_std,
                    ..
                },
            ) => {
                let (rows, cols) = grad_out.shape();
                let n = rows as f64;
                let gamma = bn.gamma.row(0);
                // dγ_j = Σ_i g_ij x̂_ij ; dβ_j = Σ_i g_ij.
                let mut dgamma = alloc::vec![0.0; cols];
                let mut dbeta = alloc::vec![0.0; cols];
                // Σ_i dx̂_ij and Σ_i dx̂_ij·x̂_ij with dx̂ = g·γ.
                let mut sum_dxhat = alloc::vec![0.0; cols];
                let mut sum_dxhat_xhat = alloc::vec![0.0; cols];
                for r in 0..rows {
                    let g = grad_out.row(r);
                    let xh = normalized.row(r);
                    for c in 0..cols {
                        dgamma[c] += g[c] * xh[c];
                        dbeta[c] += g[c];
                        let dxh = g[c] * gamma[c];
                        sum_dxhat[c] += dxh;
                        sum_dxhat_xhat[c] += dxh * xh[c];
                    }
                }
                let mut grad_in = Tensor::zeros(rows, cols);
                for r in 0..rows {
                    let g = grad_out.row(r);
                    let xh = normalized.row(r);
                    let dst = grad_in.row_mut(r);
                    for c in 0..cols {
                        let dxh = g[c] * gamma[c];
                        dst[c] = inv_std[c] / n
                            * (n * dxh - sum_dxhat[c] - xh[c] * sum_dxhat_xhat[c]);
                    }
                }
                Ok((
                    grad_in,
                    LayerGrads::BatchNorm {
                        gamma: Tensor::from_vec(1, cols, dgamma)?,
                        beta: Tensor::from_vec(1, cols, dbeta)?,
                    },
                ))
            }
            (Layer::Relu, LayerCache::Relu { output_positive }) => {
                let mut grad_in = grad_out.clone();
                for (v, keep) in grad_in.data_mut().iter_mut().zip(output_positive) {
                    if !keep {
                        *v = 0.0;
                    }
                }
                Ok((grad_in, LayerGrads::None))
            }
            (Layer::Dropout(_), LayerCache::Dropout { mask }) => {
                let mut grad_in = grad_out.clone();
                if !mask.is_empty() {
                    for (v, m) in grad_in.data_mut().iter_mut().zip(mask) {
                        *v *= m;
                    }
                }
                Ok((grad_in, LayerGrads::None))
            }
            _ => Err(crate::Error::InvalidConfig(
                "layer cache does not match layer type".into(),
            )),
        }
    }

    /// Folds the batch statistics from a train-mode cache into the running
    /// statistics; a no-op for parameterless layers.
    pub fn update_running_stats(&mut self, cache: &LayerCache) {
        if let (
            Layer::BatchNorm(bn),
            LayerCache::BatchNorm {
                batch_mean,
                batch_var,
                ..
            },
        ) = (self, cache)
        {
            let m = bn.momentum;
            for (r, b) in bn.running_mean.data_mut().iter_mut().zip(batch_mean) {
                *r = m * *r + (1.0 - m) * b;
            }
            for (r, b) in bn.running_var.data_mut().iter_mut().zip(batch_var) {
                *r = m * *r + (1.0 - m) * b;
            }
        }
    }
}
