use super::{LayerKind, Model};
use crate::error::{Error, Result};
use crate::ops::{conv2d_forward, dense_forward, maxpool2d_forward, ArgmaxIndices};
use crate::tensor::Tensor;

/// Cached activations of one forward pass.
#[derive(Clone, Debug)]
pub struct ForwardTrace {
    input: Tensor,
    normalized: Tensor,
    outputs: Vec<Tensor>,
    argmax: Vec<Option<ArgmaxIndices>>,
}

impl ForwardTrace {
    /// Raw image the pass started from.
    pub fn input(&self) -> &Tensor {
        &self.input
    }

    /// Preprocessed image seen by the first layer.
    pub fn normalized(&self) -> &Tensor {
        &self.normalized
    }

    pub fn output(&self, layer: usize) -> &Tensor {
        &self.outputs[layer]
    }

    /// Activation entering `layer`.
    pub fn layer_input(&self, layer: usize) -> &Tensor {
        if layer == 0 {
            &self.normalized
        } else {
            &self.outputs[layer - 1]
        }
    }

    pub fn argmax(&self, layer: usize) -> Option<&ArgmaxIndices> {
        self.argmax[layer].as_ref()
    }

    pub fn logits(&self) -> &Tensor {
        self.outputs.last().expect("model has at least one layer")
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }
}

impl Model {
    /// Subtract mean and divide by std per channel.
    pub fn preprocess(&self, image: &Tensor) -> Result<Tensor> {
        let spec = self.input();
        if image.shape() != spec.shape() {
            return Err(Error::shape("model input", spec.shape(), image.shape()));
        }
        let plane = spec.height * spec.width;
        let mut out = image.clone();
        for (c, chunk) in out.data_mut().chunks_exact_mut(plane).enumerate() {
            let (m, s) = (spec.mean[c], spec.std[c]);
            chunk.iter_mut().for_each(|v| *v = (*v - m) / s);
        }
        Ok(out)
    }

    fn apply(&self, layer: usize, x: &Tensor) -> Result<(Tensor, Option<ArgmaxIndices>)> {
        let l = &self.layers()[layer];
        Ok(match &l.kind {
            LayerKind::Conv2d(g) => {
                let p = l.params();
                (conv2d_forward(x, &p.weights, &p.bias, g.stride, g.padding)?, None)
            }
            LayerKind::Relu => (x.map(|v| v.max(0.0)), None),
            LayerKind::MaxPool2d(g) => {
                let (y, am) = maxpool2d_forward(x, g.kernel, g.stride)?;
                (y, Some(am))
            }
            LayerKind::Flatten => (x.reshape([x.len()])?, None),
            LayerKind::Dense(_) => {
                let p = l.params();
                (dense_forward(x, &p.weights, &p.bias)?, None)
            }
        })
    }

    /// Run layers `start..` on `activation` (the input of layer `start`) and
    /// return the final output.
    pub fn run_from(&self, start: usize, activation: &Tensor) -> Result<Tensor> {
        let expected: &[usize] = if start == 0 {
            &[]
        } else {
            self.output_shape(start - 1)
        };
        if start > 0 && activation.shape() != expected {
            return Err(Error::shape("run_from activation", expected, activation.shape()));
        }
        let mut x = activation.clone();
        for i in start..self.layers().len() {
            x = self.apply(i, &x)?.0;
        }
        Ok(x)
    }

    /// Logit vector for a raw image.
    pub fn logits(&self, image: &Tensor) -> Result<Tensor> {
        let x = self.preprocess(image)?;
        self.run_from(0, &x)
    }
}

/// Traced forward pass over a raw `[C, H, W]` image with values in `[0, 1]`.
pub fn forward(model: &Model, image: &Tensor) -> Result<ForwardTrace> {
    let normalized = model.preprocess(image)?;
    let n = model.layers().len();
    let mut outputs = Vec::with_capacity(n);
    let mut argmax = Vec::with_capacity(n);
    for i in 0..n {
        let x = if i == 0 { &normalized } else { &outputs[i - 1] };
        let (y, am) = model.apply(i, x)?;
        outputs.push(y);
        argmax.push(am);
    }
    Ok(ForwardTrace {
        input: image.clone(),
        normalized,
        outputs,
        argmax,
    })
}
