use super::Pair;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Winning input position of every max-pool output cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArgmaxIndices {
    input_shape: Vec<usize>,
    output_shape: Vec<usize>,
    /// Flat row-major offset into the input, one per output cell.
    indices: Vec<usize>,
}

impl ArgmaxIndices {
    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn output_shape(&self) -> &[usize] {
        &self.output_shape
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

/// Floor-mode output extent of an unpadded pooling window.
pub fn pool_output_extent(input: usize, kernel: usize, stride: usize) -> Result<usize> {
    if kernel == 0 || stride == 0 {
        return Err(Error::InvalidArgument(
            "pool kernel and stride must be positive".into(),
        ));
    }
    if kernel > input {
        return Err(Error::InvalidArgument(format!(
            "pool window {kernel} larger than input extent {input}"
        )));
    }
    Ok((input - kernel) / stride + 1)
}

/// Per-window maximum over a `[C, H, W]` tensor. Ties go to the first
/// row-major position inside the window.
pub fn maxpool2d_forward(input: &Tensor, kernel: Pair, stride: Pair) -> Result<(Tensor, ArgmaxIndices)> {
    input.expect_rank(3, "maxpool2d input")?;
    let (c, h, w) = (input.shape()[0], input.shape()[1], input.shape()[2]);
    let oh = pool_output_extent(h, kernel[0], stride[0])?;
    let ow = pool_output_extent(w, kernel[1], stride[1])?;
    let x = input.data();
    let mut out = Tensor::zeros([c, oh, ow]);
    let mut indices = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        let base = ch * h * w;
        for oy in 0..oh {
            for ox in 0..ow {
                let mut best = base + oy * stride[0] * w + ox * stride[1];
                for ky in 0..kernel[0] {
                    let row = base + (oy * stride[0] + ky) * w + ox * stride[1];
                    for kx in 0..kernel[1] {
                        if x[row + kx] > x[best] {
                            best = row + kx;
                        }
                    }
                }
                out.data_mut()[(ch * oh + oy) * ow + ox] = x[best];
                indices.push(best);
            }
        }
    }
    Ok((
        out,
        ArgmaxIndices {
            input_shape: input.shape().to_vec(),
            output_shape: vec![c, oh, ow],
            indices,
        },
    ))
}

/// Scatter every output-cell value onto its recorded argmax position,
/// accumulating where windows overlap. Serves both max-pool backprop and
/// winner-take-all relevance routing.
pub fn route_to_argmax(argmax: &ArgmaxIndices, values: &Tensor) -> Result<Tensor> {
    if values.shape() != argmax.output_shape() {
        return Err(Error::shape(
            "maxpool routing",
            argmax.output_shape(),
            values.shape(),
        ));
    }
    let mut routed = Tensor::zeros(argmax.input_shape.clone());
    let r = routed.data_mut();
    for (&idx, &v) in argmax.indices.iter().zip(values.data()) {
        r[idx] += v;
    }
    Ok(routed)
}
