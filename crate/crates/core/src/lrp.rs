//! Composite layer-wise relevance propagation.
//!
//! Dense layers use the z/epsilon rule, conv layers the alpha-beta rule,
//! max-pools route relevance to the recorded winner, and relu/flatten pass it
//! through unchanged. Biases take part in denominators but absorb no
//! relevance, so totals are conserved exactly only for bias-free layers.

use crate::attribution::{AttributionMap, MapKind};
use crate::error::{Error, Result};
use crate::model::{ForwardTrace, LayerKind, Model};
use crate::ops::{conv_output_extent, route_to_argmax, ArgmaxIndices, Pair};
use crate::tensor::Tensor;

/// Stabilizer for the alpha-beta denominators.
pub const ALPHA_BETA_STABILIZER: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct LrpConfig {
    /// z-rule stabilizer, `z + epsilon * sign(z)`.
    pub epsilon: f32,
    pub alpha: f32,
    pub beta: f32,
}

impl Default for LrpConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            alpha: 1.0,
            beta: 0.0,
        }
    }
}

impl LrpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "lrp epsilon must be >= 0, got {}",
                self.epsilon
            )));
        }
        check_alpha_beta(self.alpha, self.beta)
    }
}

fn check_alpha_beta(alpha: f32, beta: f32) -> Result<()> {
    if !((alpha - beta) - 1.0).abs().le(&1e-6) || beta < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "alpha - beta must equal 1 with beta >= 0, got alpha={alpha} beta={beta}"
        )));
    }
    Ok(())
}

/// z-rule through a dense layer: `R_j = sum_k a_j w_kj / (z_k + eps*sign(z_k)) * R_k`,
/// with `sign(0) = +1`. Outputs whose stabilized denominator is exactly zero
/// pass no relevance.
pub fn lrp_dense_z(activations: &Tensor, weights: &Tensor, bias: &Tensor, r_out: &Tensor, epsilon: f32) -> Result<Tensor> {
    weights.expect_rank(2, "lrp dense weights")?;
    let (m, n) = (weights.shape()[0], weights.shape()[1]);
    if activations.shape() != [n] {
        return Err(Error::shape("lrp dense activations", [n], activations.shape()));
    }
    if bias.shape() != [m] {
        return Err(Error::shape("lrp dense bias", [m], bias.shape()));
    }
    if r_out.shape() != [m] {
        return Err(Error::shape("lrp dense relevance", [m], r_out.shape()));
    }
    let a = activations.data();
    let eps = epsilon as f64;
    let mut acc = vec![0.0f64; n];
    for ((row, &b), &r) in weights.data().chunks_exact(n).zip(bias.data()).zip(r_out.data()) {
        if r == 0.0 {
            continue;
        }
        let z = row
            .iter()
            .zip(a)
            .fold(0.0f64, |s, (&w, &x)| s + w as f64 * x as f64)
            + b as f64;
        let denom = z + if z >= 0.0 { eps } else { -eps };
        if denom == 0.0 {
            continue;
        }
        let s = r as f64 / denom;
        for ((dst, &w), &x) in acc.iter_mut().zip(row).zip(a) {
            *dst += x as f64 * w as f64 * s;
        }
    }
    Tensor::new([n], acc.into_iter().map(|v| v as f32).collect())
}

/// Alpha-beta rule through a conv layer, positive and negative contributions
/// normalized separately.
#[allow(clippy::too_many_arguments)]
pub fn lrp_conv_alphabeta(
    activations: &Tensor,
    weights: &Tensor,
    bias: &Tensor,
    stride: Pair,
    padding: Pair,
    r_out: &Tensor,
    alpha: f32,
    beta: f32,
) -> Result<Tensor> {
    check_alpha_beta(alpha, beta)?;
    activations.expect_rank(3, "lrp conv activations")?;
    weights.expect_rank(4, "lrp conv weights")?;
    let (c_in, h, w) = (
        activations.shape()[0],
        activations.shape()[1],
        activations.shape()[2],
    );
    let ws = weights.shape();
    let (c_out, kh, kw) = (ws[0], ws[2], ws[3]);
    if ws[1] != c_in {
        return Err(Error::shape("lrp conv input channels", ws[1], c_in));
    }
    if bias.shape() != [c_out] {
        return Err(Error::shape("lrp conv bias", [c_out], bias.shape()));
    }
    let oh = conv_output_extent(h, kh, stride[0], padding[0])?;
    let ow = conv_output_extent(w, kw, stride[1], padding[1])?;
    if r_out.shape() != [c_out, oh, ow] {
        return Err(Error::shape("lrp conv relevance", [c_out, oh, ow], r_out.shape()));
    }

    let a = activations.data();
    let wt = weights.data();
    let (alpha, beta) = (alpha as f64, beta as f64);
    let mut acc = vec![0.0f64; a.len()];
    // visit every (input offset, weight offset) pair feeding one output cell
    let taps = |co: usize, oy: usize, ox: usize, f: &mut dyn FnMut(usize, usize)| {
        for ci in 0..c_in {
            for ky in 0..kh {
                let Some(iy) = crate::ops::conv_tap(oy, ky, stride[0], padding[0], h) else {
                    continue;
                };
                for kx in 0..kw {
                    let Some(ix) = crate::ops::conv_tap(ox, kx, stride[1], padding[1], w) else {
                        continue;
                    };
                    f((ci * h + iy) * w + ix, ((co * c_in + ci) * kh + ky) * kw + kx);
                }
            }
        }
    };
    for co in 0..c_out {
        let b = bias.data()[co] as f64;
        for oy in 0..oh {
            for ox in 0..ow {
                let r = r_out.data()[(co * oh + oy) * ow + ox] as f64;
                if r == 0.0 {
                    continue;
                }
                let (mut zp, mut zn) = (b.max(0.0), b.min(0.0));
                taps(co, oy, ox, &mut |xi, wi| {
                    let p = a[xi] as f64 * wt[wi] as f64;
                    if p > 0.0 {
                        zp += p;
                    } else {
                        zn += p;
                    }
                });
                let sp = if zp > 0.0 {
                    alpha * r / (zp + ALPHA_BETA_STABILIZER)
                } else {
                    0.0
                };
                let sn = if zn < 0.0 && beta != 0.0 {
                    beta * r / (zn - ALPHA_BETA_STABILIZER)
                } else {
                    0.0
                };
                if sp == 0.0 && sn == 0.0 {
                    continue;
                }
                taps(co, oy, ox, &mut |xi, wi| {
                    let p = a[xi] as f64 * wt[wi] as f64;
                    if p > 0.0 {
                        acc[xi] += p * sp;
                    } else if p < 0.0 {
                        acc[xi] -= p * sn;
                    }
                });
            }
        }
    }
    Tensor::new(activations.shape().to_vec(), acc.into_iter().map(|v| v as f32).collect())
}

/// Winner-take-all: each pooled cell's relevance goes to its argmax.
pub fn lrp_maxpool(argmax: &ArgmaxIndices, r_out: &Tensor) -> Result<Tensor> {
    route_to_argmax(argmax, r_out)
}

/// Propagate `logit[class] * onehot(class)` back to the network input.
/// Returns `[C, H, W]` relevance over the (preprocessed) input.
pub fn lrp_composite(model: &Model, trace: &ForwardTrace, class_index: usize, config: &LrpConfig) -> Result<Tensor> {
    config.validate()?;
    model.check_class(class_index)?;
    if trace.len() != model.layers().len() {
        return Err(Error::shape("trace length", model.layers().len(), trace.len()));
    }
    let mut relevance = Tensor::zeros([model.class_count()]);
    relevance.data_mut()[class_index] = trace.logits().data()[class_index];

    for (i, layer) in model.layers().iter().enumerate().rev() {
        let a = trace.layer_input(i);
        relevance = match &layer.kind {
            LayerKind::Dense(_) => {
                let p = layer.params();
                lrp_dense_z(a, &p.weights, &p.bias, &relevance, config.epsilon)?
            }
            LayerKind::Conv2d(g) => {
                let p = layer.params();
                lrp_conv_alphabeta(
                    a,
                    &p.weights,
                    &p.bias,
                    g.stride,
                    g.padding,
                    &relevance,
                    config.alpha,
                    config.beta,
                )?
            }
            LayerKind::MaxPool2d(_) => {
                let am = trace.argmax(i).expect("trace records pool argmax");
                lrp_maxpool(am, &relevance)?
            }
            LayerKind::Relu => relevance,
            LayerKind::Flatten => relevance.into_shape(a.shape().to_vec())?,
        };
    }
    Ok(relevance)
}

/// Mean over the channel axis of `[C, H, W]` relevance; signs are kept.
pub fn channel_average(relevance: &Tensor) -> Result<AttributionMap> {
    relevance.expect_rank(3, "channel_average input")?;
    let (c, h, w) = (relevance.shape()[0], relevance.shape()[1], relevance.shape()[2]);
    let plane = h * w;
    let mut sum = vec![0.0f64; plane];
    for ch in 0..c {
        for (s, &v) in sum.iter_mut().zip(relevance.channel(ch)) {
            *s += v as f64;
        }
    }
    let avg = sum.into_iter().map(|s| (s / c as f64) as f32).collect();
    AttributionMap::new(Tensor::new([h, w], avg)?, MapKind::Lrp)
}
