use super::Pair;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Output extent of a strided, zero-padded window. Rejects geometries where
/// the window does not tile the padded input exactly.
pub fn conv_output_extent(input: usize, kernel: usize, stride: usize, pad: usize) -> Result<usize> {
    if stride == 0 || kernel == 0 {
        return Err(Error::InvalidArgument(
            "kernel and stride must be positive".into(),
        ));
    }
    let padded = input + 2 * pad;
    if kernel > padded {
        return Err(Error::InvalidArgument(format!(
            "kernel {kernel} larger than padded input {padded}"
        )));
    }
    let span = padded - kernel;
    if span % stride != 0 {
        return Err(Error::InvalidArgument(format!(
            "non-integral output extent: ({input} + 2*{pad} - {kernel}) / {stride}"
        )));
    }
    Ok(span / stride + 1)
}

struct ConvDims {
    c_in: usize,
    h: usize,
    w: usize,
    c_out: usize,
    kh: usize,
    kw: usize,
    oh: usize,
    ow: usize,
}

fn conv_dims(input: &Tensor, weights: &Tensor, stride: Pair, padding: Pair) -> Result<ConvDims> {
    input.expect_rank(3, "conv2d input")?;
    weights.expect_rank(4, "conv2d weights")?;
    let (c_in, h, w) = (input.shape()[0], input.shape()[1], input.shape()[2]);
    let ws = weights.shape();
    if ws[1] != c_in {
        return Err(Error::shape("conv2d input channels", ws[1], c_in));
    }
    let oh = conv_output_extent(h, ws[2], stride[0], padding[0])?;
    let ow = conv_output_extent(w, ws[3], stride[1], padding[1])?;
    Ok(ConvDims {
        c_in,
        h,
        w,
        c_out: ws[0],
        kh: ws[2],
        kw: ws[3],
        oh,
        ow,
    })
}

/// Input coordinate hit by kernel tap `k` of output cell `o`, if inside the
/// unpadded input.
#[inline]
pub(crate) fn tap(o: usize, k: usize, stride: usize, pad: usize, extent: usize) -> Option<usize> {
    let i = (o * stride + k).checked_sub(pad)?;
    (i < extent).then_some(i)
}

/// Cross-correlation with zero padding.
///
/// `input` is `[C_in, H, W]`, `weights` `[C_out, C_in, kH, kW]`, `bias` `[C_out]`.
/// Each output cell accumulates over `(c_in, ky, kx)` in row-major order and
/// adds the bias last.
pub fn conv2d_forward(
    input: &Tensor,
    weights: &Tensor,
    bias: &Tensor,
    stride: Pair,
    padding: Pair,
) -> Result<Tensor> {
    let d = conv_dims(input, weights, stride, padding)?;
    if bias.shape() != [d.c_out] {
        return Err(Error::shape("conv2d bias", [d.c_out], bias.shape()));
    }
    let x = input.data();
    let wt = weights.data();
    let mut out = Tensor::zeros([d.c_out, d.oh, d.ow]);
    let o = out.data_mut();
    for co in 0..d.c_out {
        let b = bias.data()[co];
        for oy in 0..d.oh {
            for ox in 0..d.ow {
                let mut acc = 0.0f32;
                for ci in 0..d.c_in {
                    let wbase = (co * d.c_in + ci) * d.kh * d.kw;
                    let xbase = ci * d.h * d.w;
                    for ky in 0..d.kh {
                        let Some(iy) = tap(oy, ky, stride[0], padding[0], d.h) else {
                            continue;
                        };
                        for kx in 0..d.kw {
                            let Some(ix) = tap(ox, kx, stride[1], padding[1], d.w) else {
                                continue;
                            };
                            acc += wt[wbase + ky * d.kw + kx] * x[xbase + iy * d.w + ix];
                        }
                    }
                }
                o[(co * d.oh + oy) * d.ow + ox] = acc + b;
            }
        }
    }
    Ok(out)
}

/// Gradient of a convolution with respect to its input (transposed convolution
/// of `grad_out` with `weights`).
pub fn conv2d_backward_input(
    input_shape: &[usize],
    weights: &Tensor,
    grad_out: &Tensor,
    stride: Pair,
    padding: Pair,
) -> Result<Tensor> {
    let probe = Tensor::zeros(input_shape.to_vec());
    let d = conv_dims(&probe, weights, stride, padding)?;
    if grad_out.shape() != [d.c_out, d.oh, d.ow] {
        return Err(Error::shape(
            "conv2d output gradient",
            [d.c_out, d.oh, d.ow],
            grad_out.shape(),
        ));
    }
    let wt = weights.data();
    let g = grad_out.data();
    let mut grad_in = probe;
    let gi = grad_in.data_mut();
    for co in 0..d.c_out {
        for oy in 0..d.oh {
            for ox in 0..d.ow {
                let go = g[(co * d.oh + oy) * d.ow + ox];
                if go == 0.0 {
                    continue;
                }
                for ci in 0..d.c_in {
                    let wbase = (co * d.c_in + ci) * d.kh * d.kw;
                    let xbase = ci * d.h * d.w;
                    for ky in 0..d.kh {
                        let Some(iy) = tap(oy, ky, stride[0], padding[0], d.h) else {
                            continue;
                        };
                        for kx in 0..d.kw {
                            let Some(ix) = tap(ox, kx, stride[1], padding[1], d.w) else {
                                continue;
                            };
                            gi[xbase + iy * d.w + ix] += wt[wbase + ky * d.kw + kx] * go;
                        }
                    }
                }
            }
        }
    }
    Ok(grad_in)
}
