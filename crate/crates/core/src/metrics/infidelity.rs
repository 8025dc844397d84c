use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{add_pixelwise, class_logit, image_plane, MetricConfig};
use crate::attribution::AttributionMap;
use crate::error::{Error, Result};
use crate::model::Model;
use crate::tensor::Tensor;

/// Monte-Carlo estimate of `E[(I . phi - (f(x) - f(x - I)))^2]` with
/// `I ~ N(0, perturb_scale^2)` per pixel, shared across channels.
pub fn infidelity(model: &Model, image: &Tensor, class_index: usize, attribution: &AttributionMap, cfg: &MetricConfig) -> Result<f64> {
    infidelity_with_rng(model, image, class_index, attribution, cfg, &mut cfg.rng())
}

pub fn infidelity_with_rng(
    model: &Model,
    image: &Tensor,
    class_index: usize,
    attribution: &AttributionMap,
    cfg: &MetricConfig,
    rng: &mut impl Rng,
) -> Result<f64> {
    cfg.validate()?;
    model.check_class(class_index)?;
    let (h, w) = image_plane(image)?;
    attribution.expect_extent(h, w, "infidelity attribution")?;
    let normal = Normal::new(0.0f32, cfg.infidelity.perturb_scale)
        .map_err(|e| Error::InvalidArgument(format!("infidelity perturbation: {e}")))?;
    let fx = class_logit(model, image, class_index)?;
    let phi = attribution.data();
    let mut noise = vec![0.0f32; h * w];
    let mut total = 0.0f64;
    for _ in 0..cfg.infidelity.samples {
        for v in noise.iter_mut() {
            *v = normal.sample(rng);
        }
        let dot: f64 = noise.iter().zip(phi).map(|(&i, &p)| i as f64 * p as f64).sum();
        let drop = fx - class_logit(model, &add_pixelwise(image, &noise, -1.0), class_index)?;
        total += (dot - drop).powi(2);
    }
    Ok(total / cfg.infidelity.samples as f64)
}
