use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Which method produced a map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    GradCam,
    Lrp,
    Fused,
}

/// Signed 2-D relevance field over pixels.
#[derive(Clone, Debug, PartialEq)]
pub struct AttributionMap {
    values: Tensor,
    kind: MapKind,
}

impl AttributionMap {
    pub fn new(values: Tensor, kind: MapKind) -> Result<Self> {
        values.expect_rank(2, "attribution map")?;
        Ok(Self { values, kind })
    }

    pub fn values(&self) -> &Tensor {
        &self.values
    }

    pub fn into_values(self) -> Tensor {
        self.values
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn height(&self) -> usize {
        self.values.shape()[0]
    }

    pub fn width(&self) -> usize {
        self.values.shape()[1]
    }

    pub fn data(&self) -> &[f32] {
        self.values.data()
    }

    pub(crate) fn expect_extent(&self, h: usize, w: usize, context: &str) -> Result<()> {
        if self.values.shape() != [h, w] {
            return Err(Error::shape(context, [h, w], self.values.shape()));
        }
        Ok(())
    }
}

/// Min-max scale to `[0, 1]`. A constant map becomes all ones when the
/// constant is positive and all zeros otherwise.
pub(crate) fn min_max_normalize(t: &Tensor) -> Tensor {
    let (lo, hi) = (t.min(), t.max());
    if hi > lo {
        let span = hi - lo;
        t.map(|v| (v - lo) / span)
    } else if hi > 0.0 {
        Tensor::full(t.shape().to_vec(), 1.0)
    } else {
        Tensor::zeros(t.shape().to_vec())
    }
}
