use rand::Rng;

use super::{add_pixelwise, image_plane, MetricConfig};
use crate::error::{Error, Result};
use crate::explainer::Explainer;
use crate::tensor::Tensor;

/// Mean of `|phi(x) - phi(x + d)| / |phi(x)|` over uniform pixel noise
/// `d` in `[-radius, radius]`, shared across channels.
pub fn avg_sensitivity(explainer: &dyn Explainer, image: &Tensor, class_index: usize, cfg: &MetricConfig) -> Result<f64> {
    avg_sensitivity_with_rng(explainer, image, class_index, cfg, &mut cfg.rng())
}

pub fn avg_sensitivity_with_rng(
    explainer: &dyn Explainer,
    image: &Tensor,
    class_index: usize,
    cfg: &MetricConfig,
    rng: &mut impl Rng,
) -> Result<f64> {
    cfg.validate()?;
    let (h, w) = image_plane(image)?;
    let base = explainer.attribute(image, class_index)?;
    let norm = base.values().l2_norm();
    if norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let r = cfg.sensitivity.radius;
    let mut delta = vec![0.0f32; h * w];
    let mut total = 0.0f64;
    for _ in 0..cfg.sensitivity.samples {
        for d in delta.iter_mut() {
            *d = rng.random_range(-r..=r);
        }
        let moved = explainer.attribute(&add_pixelwise(image, &delta, 1.0), class_index)?;
        if moved.values().shape() != base.values().shape() {
            return Err(Error::shape("perturbed explanation", base.values().shape(), moved.values().shape()));
        }
        let diff: f64 = base
            .data()
            .iter()
            .zip(moved.data())
            .map(|(&a, &b)| (a as f64 - b as f64).powi(2))
            .sum();
        total += diff.sqrt() / norm;
    }
    Ok(total / cfg.sensitivity.samples as f64)
}
