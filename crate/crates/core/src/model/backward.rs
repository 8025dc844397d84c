use super::{ForwardTrace, LayerKind, Model, INPUT_LAYER};
use crate::error::{Error, Result};
use crate::ops::{conv2d_backward_input, dense_backward_input, route_to_argmax};
use crate::tensor::Tensor;

/// Gradient of input-of-`layer` given the gradient of its output.
fn layer_backward(model: &Model, trace: &ForwardTrace, layer: usize, grad_out: &Tensor) -> Result<Tensor> {
    let l = &model.layers()[layer];
    let input = trace.layer_input(layer);
    match &l.kind {
        LayerKind::Conv2d(g) => conv2d_backward_input(
            input.shape(),
            &l.params().weights,
            grad_out,
            g.stride,
            g.padding,
        ),
        LayerKind::Relu => grad_out.zip_map(trace.output(layer), |g, y| if y > 0.0 { g } else { 0.0 }),
        LayerKind::MaxPool2d(_) => {
            let am = trace
                .argmax(layer)
                .expect("trace records argmax for every maxpool layer");
            route_to_argmax(am, grad_out)
        }
        LayerKind::Flatten => grad_out.reshape(input.shape()),
        LayerKind::Dense(_) => dense_backward_input(&l.params().weights, grad_out),
    }
}

/// Vector-Jacobian product: propagate `seed` (shaped like the logits) back to
/// the output of `layer_name`, or to the raw image for [`INPUT_LAYER`].
pub fn backprop(model: &Model, trace: &ForwardTrace, seed: &Tensor, layer_name: &str) -> Result<Tensor> {
    let n = model.layers().len();
    if trace.len() != n {
        return Err(Error::shape("trace length", n, trace.len()));
    }
    if seed.shape() != trace.logits().shape() {
        return Err(Error::shape("logit seed", trace.logits().shape(), seed.shape()));
    }
    let stop = if layer_name == INPUT_LAYER {
        None
    } else {
        Some(model.layer_index(layer_name)?)
    };
    let first = stop.map_or(0, |s| s + 1);
    let mut grad = seed.clone();
    for layer in (first..n).rev() {
        grad = layer_backward(model, trace, layer, &grad)?;
    }
    if stop.is_none() {
        // undo the preprocessing scale: d(normalized)/d(raw) = 1/std
        let spec = model.input();
        let plane = spec.height * spec.width;
        for (c, chunk) in grad.data_mut().chunks_exact_mut(plane).enumerate() {
            let s = spec.std[c];
            chunk.iter_mut().for_each(|v| *v /= s);
        }
    }
    Ok(grad)
}

/// `d logit[class_index] / d activation` at the output of `layer_name`
/// (or the raw image for [`INPUT_LAYER`]).
pub fn grad_wrt_layer(model: &Model, trace: &ForwardTrace, class_index: usize, layer_name: &str) -> Result<Tensor> {
    model.check_class(class_index)?;
    let mut seed = Tensor::zeros([model.class_count()]);
    seed.data_mut()[class_index] = 1.0;
    backprop(model, trace, &seed, layer_name)
}
