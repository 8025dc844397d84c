//! GradCAM++ localization maps.
//!
//! For feature maps `A` at the target conv layer and their gradient `g` with
//! respect to the class logit, each location gets
//!
//! ```text
//! alpha = g^2 / (2 g^2 + sum(A_k) g^3 + eps)      (0 where g == 0)
//! w_k   = sum_ij alpha_ij * max(g_ij, 0)
//! L     = relu(sum_k w_k A_k), min-max scaled to [0, 1]
//!         (a constant positive map scales to all ones)
//! ```
//!
//! Second and third derivatives are taken as powers of the first-order
//! gradient, the usual closed form for piecewise-linear networks.

use crate::attribution::{min_max_normalize, AttributionMap, MapKind};
use crate::error::{Error, Result};
use crate::model::{grad_wrt_layer, ForwardTrace, LayerKind, Model};
use crate::tensor::Tensor;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCamConfig {
    /// Conv layer to explain; `None` picks the last conv2d in the chain.
    pub target_layer: Option<String>,
    /// Stabilizer added to the alpha denominator.
    pub epsilon: f32,
}

impl Default for GradCamConfig {
    fn default() -> Self {
        Self {
            target_layer: None,
            epsilon: 1e-8,
        }
    }
}

impl GradCamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gradcam epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    fn resolve_layer<'m>(&'m self, model: &'m Model) -> Result<&'m str> {
        match &self.target_layer {
            Some(name) => Ok(name),
            None => model
                .last_conv()
                .ok_or_else(|| Error::InvalidArgument("model has no conv2d layer".into())),
        }
    }
}

/// Combine `[K, h, w]` activations and gradients into an unnormalized,
/// rectified GradCAM++ map.
pub fn gradcam_pp_from_parts(activations: &Tensor, gradients: &Tensor, epsilon: f32) -> Result<Tensor> {
    activations.expect_rank(3, "gradcam activations")?;
    if activations.shape() != gradients.shape() {
        return Err(Error::shape(
            "gradcam gradients",
            activations.shape(),
            gradients.shape(),
        ));
    }
    let (k, h, w) = (
        activations.shape()[0],
        activations.shape()[1],
        activations.shape()[2],
    );
    let plane = h * w;
    let mut cam = vec![0.0f32; plane];
    for ch in 0..k {
        let a = activations.channel(ch);
        let g = gradients.channel(ch);
        let a_sum: f32 = a.iter().sum();
        let mut weight = 0.0f32;
        for &gi in g {
            if gi == 0.0 {
                continue;
            }
            let g2 = gi * gi;
            let alpha = g2 / (2.0 * g2 + a_sum * g2 * gi + epsilon);
            weight += alpha * gi.max(0.0);
        }
        if weight == 0.0 {
            continue;
        }
        for (c, &av) in cam.iter_mut().zip(a) {
            *c += weight * av;
        }
    }
    Tensor::new([h, w], cam.into_iter().map(|v| v.max(0.0)).collect())
}

/// GradCAM++ map at conv resolution, scaled to `[0, 1]`.
pub fn gradcam_pp(model: &Model, trace: &ForwardTrace, class_index: usize, config: &GradCamConfig) -> Result<AttributionMap> {
    config.validate()?;
    model.check_class(class_index)?;
    let layer = config.resolve_layer(model)?;
    let idx = model.layer_index(layer)?;
    if !matches!(model.layers()[idx].kind, LayerKind::Conv2d(_)) {
        return Err(Error::InvalidArgument(format!(
            "gradcam target `{layer}` is a {} layer, not conv2d",
            model.layers()[idx].kind.tag()
        )));
    }
    let grads = grad_wrt_layer(model, trace, class_index, layer)?;
    let cam = gradcam_pp_from_parts(trace.output(idx), &grads, config.epsilon)?;
    AttributionMap::new(min_max_normalize(&cam), MapKind::GradCam)
}
