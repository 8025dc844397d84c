use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::attribution::AttributionMap;
use crate::error::{Error, Result};
use crate::fusion::{explain, lrp_map, upsampled_gradcam, ExplanationConfig};
use crate::model::{forward, Model};
use crate::tensor::Tensor;

/// Attribution methods compared by the benchmark.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Proposed,
    GradCam,
    Lrp,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Proposed, Method::GradCam, Method::Lrp];

    pub fn name(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::GradCam => "gradcam",
            Method::Lrp => "lrp",
        }
    }

    pub(crate) fn id(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "proposed" | "fused" => Ok(Method::Proposed),
            "gradcam" | "gradcam++" => Ok(Method::GradCam),
            "lrp" => Ok(Method::Lrp),
            other => Err(Error::InvalidArgument(format!(
                "unknown method `{other}` (expected proposed, gradcam or lrp)"
            ))),
        }
    }
}

/// Anything that maps an image and class to a pixel attribution.
pub trait Explainer: Sync {
    fn attribute(&self, image: &Tensor, class_index: usize) -> Result<AttributionMap>;
}

impl<F> Explainer for F
where
    F: Fn(&Tensor, usize) -> Result<AttributionMap> + Sync,
{
    fn attribute(&self, image: &Tensor, class_index: usize) -> Result<AttributionMap> {
        self(image, class_index)
    }
}

/// One of the three built-in methods bound to a model.
///
/// `GradCam` yields the upsampled, min-max scaled GradCAM++ map, `Lrp` the
/// channel-averaged relevance and `Proposed` the blurred fused map.
#[derive(Clone, Debug)]
pub struct MethodExplainer<'m> {
    pub model: &'m Model,
    pub method: Method,
    pub config: ExplanationConfig,
}

impl<'m> MethodExplainer<'m> {
    pub fn new(model: &'m Model, method: Method, config: ExplanationConfig) -> Self {
        Self {
            model,
            method,
            config,
        }
    }
}

impl Explainer for MethodExplainer<'_> {
    fn attribute(&self, image: &Tensor, class_index: usize) -> Result<AttributionMap> {
        match self.method {
            Method::Proposed => Ok(explain(self.model, image, class_index, &self.config)?.final_map),
            Method::GradCam => {
                self.config.gradcam.validate()?;
                let trace = forward(self.model, image)?;
                upsampled_gradcam(self.model, &trace, class_index, &self.config.gradcam)
            }
            Method::Lrp => {
                let trace = forward(self.model, image)?;
                lrp_map(self.model, &trace, class_index, &self.config.lrp)
            }
        }
    }
}
