use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Source coordinate for output index `dst` under half-pixel (align-corners
/// false) mapping, clamped at the low edge.
fn source_coord(dst: usize, in_extent: usize, out_extent: usize) -> (usize, usize, f32) {
    let scale = in_extent as f32 / out_extent as f32;
    let src = ((dst as f32 + 0.5) * scale - 0.5).max(0.0);
    let lo = (src.floor() as usize).min(in_extent - 1);
    let hi = (lo + 1).min(in_extent - 1);
    let frac = if hi == lo { 0.0 } else { src - lo as f32 };
    (lo, hi, frac)
}

/// Bilinear resize of a 2-D map with align-corners-false sampling.
pub fn bilinear_resize(map: &Tensor, out_h: usize, out_w: usize) -> Result<Tensor> {
    map.expect_rank(2, "bilinear_resize input")?;
    if out_h == 0 || out_w == 0 {
        return Err(Error::InvalidArgument(format!(
            "resize target must be positive, got {out_h}x{out_w}"
        )));
    }
    let (h, w) = (map.shape()[0], map.shape()[1]);
    if (h, w) == (out_h, out_w) {
        return Ok(map.clone());
    }
    let cols: Vec<_> = (0..out_w).map(|x| source_coord(x, w, out_w)).collect();
    let src = map.data();
    let mut out = Tensor::zeros([out_h, out_w]);
    let o = out.data_mut();
    for y in 0..out_h {
        let (y0, y1, fy) = source_coord(y, h, out_h);
        for (x, &(x0, x1, fx)) in cols.iter().enumerate() {
            let top = src[y0 * w + x0] + (src[y0 * w + x1] - src[y0 * w + x0]) * fx;
            let bottom = src[y1 * w + x0] + (src[y1 * w + x1] - src[y1 * w + x0]) * fx;
            o[y * out_w + x] = top + (bottom - top) * fy;
        }
    }
    Ok(out)
}
