//! GradCAM++ x LRP fusion.
//!
//! The GradCAM++ map is upsampled to input resolution, thresholded into a
//! soft mask, multiplied with the channel-averaged LRP relevance and blurred.

use serde::{Deserialize, Serialize};

use crate::attribution::{min_max_normalize, AttributionMap, MapKind};
use crate::error::{Error, Result};
use crate::gradcam::{gradcam_pp, GradCamConfig};
use crate::lrp::{channel_average, lrp_composite, LrpConfig};
use crate::model::{forward, ForwardTrace, Model};
use crate::ops::{bilinear_resize, gaussian_blur};
use crate::tensor::Tensor;

#[derive(Clone, Debug, PartialEq)]
pub struct ExplanationConfig {
    /// GradCAM threshold in `[0, 1)`.
    pub tau: f32,
    /// Gaussian blur sigma; 0 disables the blur.
    pub sigma: f32,
    pub gradcam: GradCamConfig,
    pub lrp: LrpConfig,
}

impl Default for ExplanationConfig {
    fn default() -> Self {
        Self {
            tau: 0.25,
            sigma: 2.0,
            gradcam: GradCamConfig::default(),
            lrp: LrpConfig::default(),
        }
    }
}

impl ExplanationConfig {
    pub fn validate(&self) -> Result<()> {
        check_tau(self.tau)?;
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "sigma must be finite and >= 0, got {}",
                self.sigma
            )));
        }
        self.gradcam.validate()?;
        self.lrp.validate()
    }
}

fn check_tau(tau: f32) -> Result<()> {
    if !(0.0..1.0).contains(&tau) {
        return Err(Error::InvalidArgument(format!("tau must lie in [0, 1), got {tau}")));
    }
    Ok(())
}

/// Snapshot of the config used for one explanation, in serializable form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub tau: f32,
    pub sigma: f32,
    pub gradcam_layer: String,
    pub gradcam_epsilon: f32,
    pub lrp_epsilon: f32,
    pub alpha: f32,
    pub beta: f32,
}

/// Final fused map plus every intermediate, all at input resolution.
#[derive(Clone, Debug, PartialEq)]
pub struct Explanation {
    pub final_map: AttributionMap,
    /// GradCAM++ upsampled to input resolution.
    pub gradcam_raw: AttributionMap,
    pub gradcam_mask: AttributionMap,
    pub lrp_avg: AttributionMap,
    /// `gradcam_mask * lrp_avg` before blurring.
    pub product: AttributionMap,
    pub class_index: usize,
    pub config: ConfigSnapshot,
}

impl Explanation {
    /// `(name, map)` pairs in a fixed order, final map first.
    pub fn maps(&self) -> [(&'static str, &AttributionMap); 5] {
        [
            ("final", &self.final_map),
            ("gradcam", &self.gradcam_raw),
            ("mask", &self.gradcam_mask),
            ("lrp_avg", &self.lrp_avg),
            ("product", &self.product),
        ]
    }
}

/// `m = max(g - tau, 0)` followed by min-max scaling.
pub fn threshold_mask(gradcam_map: &AttributionMap, tau: f32) -> Result<AttributionMap> {
    check_tau(tau)?;
    let m = gradcam_map.values().map(|g| (g - tau).max(0.0));
    AttributionMap::new(min_max_normalize(&m), MapKind::GradCam)
}

/// Elementwise product of a mask and the averaged LRP map.
pub fn fuse(mask: &AttributionMap, lrp_avg: &AttributionMap) -> Result<AttributionMap> {
    lrp_avg.expect_extent(mask.height(), mask.width(), "fuse lrp map")?;
    AttributionMap::new(mask.values().zip_map(lrp_avg.values(), |m, r| m * r)?, MapKind::Fused)
}

/// Threshold, fuse and blur already computed GradCAM and LRP maps.
pub fn compose(gradcam_raw: AttributionMap, lrp_avg: AttributionMap, tau: f32, sigma: f32) -> Result<(AttributionMap, AttributionMap, AttributionMap)> {
    let mask = threshold_mask(&gradcam_raw, tau)?;
    let product = fuse(&mask, &lrp_avg)?;
    let blurred = AttributionMap::new(gaussian_blur(product.values(), sigma as f64)?, MapKind::Fused)?;
    Ok((mask, product, blurred))
}

/// GradCAM++ map resized to the input's spatial extent.
pub fn upsampled_gradcam(model: &Model, trace: &ForwardTrace, class_index: usize, config: &GradCamConfig) -> Result<AttributionMap> {
    let cam = gradcam_pp(model, trace, class_index, config)?;
    let input = model.input();
    let up = bilinear_resize(cam.values(), input.height, input.width)?;
    AttributionMap::new(up, MapKind::GradCam)
}

/// Channel-averaged composite LRP relevance at input resolution.
pub fn lrp_map(model: &Model, trace: &ForwardTrace, class_index: usize, config: &LrpConfig) -> Result<AttributionMap> {
    channel_average(&lrp_composite(model, trace, class_index, config)?)
}

/// Full pipeline for one image, reusing an existing trace.
pub fn explain_trace(model: &Model, trace: &ForwardTrace, class_index: usize, config: &ExplanationConfig) -> Result<Explanation> {
    config.validate()?;
    model.check_class(class_index)?;
    let gradcam_raw = upsampled_gradcam(model, trace, class_index, &config.gradcam)?;
    let lrp_avg = lrp_map(model, trace, class_index, &config.lrp)?;
    let (gradcam_mask, product, final_map) = compose(gradcam_raw.clone(), lrp_avg.clone(), config.tau, config.sigma)?;
    let gradcam_layer = match &config.gradcam.target_layer {
        Some(name) => name.clone(),
        None => model.last_conv().unwrap_or_default().to_string(),
    };
    Ok(Explanation {
        final_map,
        gradcam_raw,
        gradcam_mask,
        lrp_avg,
        product,
        class_index,
        config: ConfigSnapshot {
            tau: config.tau,
            sigma: config.sigma,
            gradcam_layer,
            gradcam_epsilon: config.gradcam.epsilon,
            lrp_epsilon: config.lrp.epsilon,
            alpha: config.lrp.alpha,
            beta: config.lrp.beta,
        },
    })
}

/// Full pipeline for one raw `[3, H, W]` image in `[0, 1]`.
pub fn explain(model: &Model, image: &Tensor, class_index: usize, config: &ExplanationConfig) -> Result<Explanation> {
    config.validate()?;
    model.check_class(class_index)?;
    let trace = forward(model, image)?;
    explain_trace(model, &trace, class_index, config)
}
