use rand::Rng;

use super::MetricConfig;
use crate::error::{Error, Result};
use crate::explainer::Explainer;
use crate::model::Model;
use crate::tensor::Tensor;

const C1: f64 = 0.01 * 0.01;
const C2: f64 = 0.03 * 0.03;

/// Mean SSIM over every valid `window x window` position, uniform weights,
/// population statistics and unit data range.
pub fn ssim(a: &Tensor, b: &Tensor, window: usize) -> Result<f64> {
    a.expect_rank(2, "ssim input")?;
    if a.shape() != b.shape() {
        return Err(Error::shape("ssim inputs", a.shape(), b.shape()));
    }
    let (h, w) = (a.shape()[0], a.shape()[1]);
    if window == 0 || window > h || window > w {
        return Err(Error::InvalidArgument(format!(
            "ssim window {window} does not fit a {h}x{w} map"
        )));
    }
    let (x, y) = (a.data(), b.data());
    let n = (window * window) as f64;
    let mut total = 0.0f64;
    for oy in 0..=h - window {
        for ox in 0..=w - window {
            let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for dy in 0..window {
                let row = (oy + dy) * w + ox;
                for i in row..row + window {
                    let (p, q) = (x[i] as f64, y[i] as f64);
                    sx += p;
                    sy += q;
                    sxx += p * p;
                    syy += q * q;
                    sxy += p * q;
                }
            }
            let (mx, my) = (sx / n, sy / n);
            let vx = (sxx / n - mx * mx).max(0.0);
            let vy = (syy / n - my * my).max(0.0);
            let cov = sxy / n - mx * my;
            total += ((2.0 * mx * my + C1) * (2.0 * cov + C2))
                / ((mx * mx + my * my + C1) * (vx + vy + C2));
        }
    }
    Ok(total / ((h - window + 1) * (w - window + 1)) as f64)
}

/// `1 - SSIM` between the explanation for `class_index` and for a uniformly
/// drawn other class, after joint min-max scaling. Negative SSIM counts as 0,
/// so the result lies in `[0, 1]`.
pub fn random_logit(explainer: &dyn Explainer, model: &Model, image: &Tensor, class_index: usize, cfg: &MetricConfig, seed: u64) -> Result<f64> {
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    random_logit_with_rng(explainer, model, image, class_index, cfg, &mut rng)
}

pub fn random_logit_with_rng(
    explainer: &dyn Explainer,
    model: &Model,
    image: &Tensor,
    class_index: usize,
    cfg: &MetricConfig,
    rng: &mut impl Rng,
) -> Result<f64> {
    cfg.validate()?;
    model.check_class(class_index)?;
    let k = model.class_count();
    if k < 2 {
        return Err(Error::InvalidArgument("random_logit needs at least 2 classes".into()));
    }
    let other = draw_other_class(rng, k, class_index);
    let target = explainer.attribute(image, class_index)?;
    let contrast = explainer.attribute(image, other)?;
    distance(target.values(), contrast.values(), cfg.random_logit.ssim_window)
}

pub(crate) fn draw_other_class(rng: &mut impl Rng, class_count: usize, class_index: usize) -> usize {
    let c = rng.random_range(0..class_count - 1);
    if c >= class_index {
        c + 1
    } else {
        c
    }
}

pub(crate) fn distance(a: &Tensor, b: &Tensor, window: usize) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::shape("random_logit maps", a.shape(), b.shape()));
    }
    let lo = a.min().min(b.min());
    let hi = a.max().max(b.max());
    let (sa, sb) = if hi > lo {
        let (lo, span) = (lo as f64, (hi - lo) as f64);
        let scale = |t: &Tensor| t.map(|v| ((v as f64 - lo) / span) as f32);
        (scale(a), scale(b))
    } else {
        (Tensor::zeros(a.shape().to_vec()), Tensor::zeros(b.shape().to_vec()))
    };
    Ok(1.0 - ssim(&sa, &sb, window)?.clamp(0.0, 1.0))
}
