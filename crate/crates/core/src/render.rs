//! Diverging heatmaps: white at zero, red for positive, blue for negative,
//! scaled by the largest magnitude.

use std::path::Path;

use crate::attribution::AttributionMap;
use crate::error::Result;
use crate::imageio::write_rgb;

/// Interleaved 8-bit RGB pixels for `map`. An all-zero map is mid-gray.
pub fn heatmap_rgb(map: &AttributionMap) -> Vec<u8> {
    let scale = map.values().max_abs();
    let mut out = Vec::with_capacity(map.data().len() * 3);
    for &v in map.data() {
        if scale == 0.0 || !scale.is_finite() {
            out.extend_from_slice(&[128, 128, 128]);
            continue;
        }
        let t = (v.abs() / scale).min(1.0);
        let fade = (255.0 * (1.0 - t)).round() as u8;
        if v >= 0.0 {
            out.extend_from_slice(&[255, fade, fade]);
        } else {
            out.extend_from_slice(&[fade, fade, 255]);
        }
    }
    out
}

pub fn render_heatmap(map: &AttributionMap, path: impl AsRef<Path>) -> Result<()> {
    write_rgb(path.as_ref(), map.width(), map.height(), heatmap_rgb(map))
}
