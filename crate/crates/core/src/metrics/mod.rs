//! Attribution quality metrics and the benchmark harness.
//!
//! Stochastic metrics draw from a ChaCha8 stream. Standalone calls seed it
//! from `MetricConfig::seed`; the benchmark gives every
//! (image, method, metric) cell its own stream so results do not depend on
//! scheduling.

mod benchmark;
mod faithfulness;
mod infidelity;
mod rank;
mod report;
mod sensitivity;
mod sparseness;
mod ssim;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use benchmark::{benchmark, BenchmarkImage};
pub use faithfulness::{faithfulness_correlation, faithfulness_correlation_with_rng, pearson};
pub use infidelity::{infidelity, infidelity_with_rng};
pub use rank::{relevance_rank_accuracy, BinaryMask};
pub use report::{format_sig6, MetricKind, MetricReport, MethodRow};
pub use sensitivity::{avg_sensitivity, avg_sensitivity_with_rng};
pub use sparseness::sparseness;
pub use ssim::{random_logit, random_logit_with_rng, ssim};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfidelityConfig {
    pub samples: usize,
    pub perturb_scale: f32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaithfulnessConfig {
    pub subsets: usize,
    pub subset_size: usize,
    pub baseline: f32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityConfig {
    pub samples: usize,
    pub radius: f32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomLogitConfig {
    pub ssim_window: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub seed: u64,
    pub infidelity: InfidelityConfig,
    pub faithfulness: FaithfulnessConfig,
    pub sensitivity: SensitivityConfig,
    pub random_logit: RandomLogitConfig,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            infidelity: InfidelityConfig {
                samples: 128,
                perturb_scale: 0.2,
            },
            faithfulness: FaithfulnessConfig {
                subsets: 100,
                subset_size: 56,
                baseline: 0.0,
            },
            sensitivity: SensitivityConfig {
                samples: 16,
                radius: 0.05,
            },
            random_logit: RandomLogitConfig { ssim_window: 7 },
        }
    }
}

impl MetricConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    /// Checks that do not depend on image size.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("infidelity.samples", self.infidelity.samples),
            ("faithfulness.subsets", self.faithfulness.subsets),
            ("faithfulness.subset_size", self.faithfulness.subset_size),
            ("sensitivity.samples", self.sensitivity.samples),
            ("random_logit.ssim_window", self.random_logit.ssim_window),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::InvalidArgument(format!("{name} must be positive")));
            }
        }
        if !(self.sensitivity.radius > 0.0) || !self.sensitivity.radius.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "sensitivity.radius must be > 0, got {}",
                self.sensitivity.radius
            )));
        }
        if !(self.infidelity.perturb_scale > 0.0) || !self.infidelity.perturb_scale.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "infidelity.perturb_scale must be > 0, got {}",
                self.infidelity.perturb_scale
            )));
        }
        if !self.faithfulness.baseline.is_finite() {
            return Err(Error::InvalidArgument("faithfulness.baseline must be finite".into()));
        }
        Ok(())
    }

    pub(crate) fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Independent stream for one benchmark cell.
pub fn cell_rng(seed: u64, image: usize, method: u64, metric: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((image as u64) << 16) | (method << 8) | metric);
    rng
}

/// `image` with `delta` (`[H, W]`) added to every channel.
pub(crate) fn add_pixelwise(image: &crate::tensor::Tensor, delta: &[f32], sign: f32) -> crate::tensor::Tensor {
    let plane = delta.len();
    let mut out = image.clone();
    for chunk in out.data_mut().chunks_exact_mut(plane) {
        for (v, &d) in chunk.iter_mut().zip(delta) {
            *v += sign * d;
        }
    }
    out
}

pub(crate) fn image_plane(image: &crate::tensor::Tensor) -> Result<(usize, usize)> {
    image.expect_rank(3, "metric image")?;
    Ok((image.shape()[1], image.shape()[2]))
}

pub(crate) fn class_logit(model: &crate::model::Model, image: &crate::tensor::Tensor, class_index: usize) -> Result<f64> {
    Ok(model.logits(image)?.data()[class_index] as f64)
}

#[cfg(test)]
pub(crate) mod testing {
    use crate::model::{InputSpec, Layer, Model};
    use crate::tensor::Tensor;

    /// flatten + one dense layer over a `[3, h, w]` identity-normalized input.
    pub fn linear_model(h: usize, w: usize, classes: usize, seed: u64, bias: bool) -> Model {
        let n = 3 * h * w;
        let weights = Tensor::from_fn([classes, n], |i| {
            let x = (i as u64).wrapping_mul(2654435761).wrapping_add(seed * 97) % 1000;
            x as f32 / 500.0 - 1.0
        });
        let b = if bias {
            Tensor::from_fn([classes], |i| 0.1 * i as f32 + 0.05)
        } else {
            Tensor::zeros([classes])
        };
        Model::new(
            InputSpec::identity(3, h, w),
            classes,
            vec![Layer::flatten("flat"), Layer::dense("fc", weights, b)],
        )
        .unwrap()
    }

    /// Row `class` of the dense weights summed over channels, `[h, w]`.
    pub fn channel_summed_weights(model: &Model, class: usize) -> Tensor {
        let input = model.input();
        let plane = input.height * input.width;
        let p = model.layers()[1].params.as_ref().unwrap();
        let row = &p.weights.data()[class * 3 * plane..(class + 1) * 3 * plane];
        Tensor::from_fn([input.height, input.width], |i| row[i] + row[plane + i] + row[2 * plane + i])
    }
}
