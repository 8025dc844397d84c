use serde::{Deserialize, Serialize};

use crate::attribution::AttributionMap;
use crate::error::{Error, Result};

/// Binary ground-truth mask, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(height: usize, width: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != height * width {
            return Err(Error::shape("binary mask", height * width, bits.len()));
        }
        Ok(Self { height, width, bits })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

/// Fraction of the ground-truth pixels covered by the `|GT|` highest
/// attributions; ties go to the earlier pixel in row-major order.
pub fn relevance_rank_accuracy(attribution: &AttributionMap, gt: &BinaryMask) -> Result<f64> {
    attribution.expect_extent(gt.height, gt.width, "rank accuracy attribution")?;
    let k = gt.count();
    if k == 0 {
        return Err(Error::InvalidArgument("ground-truth mask is empty".into()));
    }
    let values = attribution.data();
    let mut order: Vec<usize> = (0..values.len()).collect();
    // stable sort keeps row-major order among equal values
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let hits = order[..k].iter().filter(|&&i| gt.bits[i]).count();
    Ok(hits as f64 / k as f64)
}
