use rand::seq::index::sample;
use rand::Rng;

use super::{class_logit, image_plane, MetricConfig};
use crate::attribution::AttributionMap;
use crate::error::{Error, Result};
use crate::model::Model;
use crate::tensor::Tensor;

/// Pearson correlation between attribution mass on random pixel subsets and
/// the logit drop when those pixels are set to the baseline.
pub fn faithfulness_correlation(model: &Model, image: &Tensor, class_index: usize, attribution: &AttributionMap, cfg: &MetricConfig) -> Result<f64> {
    faithfulness_correlation_with_rng(model, image, class_index, attribution, cfg, &mut cfg.rng())
}

pub fn faithfulness_correlation_with_rng(
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
    attribution.expect_extent(h, w, "faithfulness attribution")?;
    let plane = h * w;
    let fc = &cfg.faithfulness;
    if fc.subset_size >= plane {
        return Err(Error::InvalidArgument(format!(
            "faithfulness subset_size {} must be below the pixel count {plane}",
            fc.subset_size
        )));
    }
    let fx = class_logit(model, image, class_index)?;
    let phi = attribution.data();
    let mut mass = Vec::with_capacity(fc.subsets);
    let mut drop = Vec::with_capacity(fc.subsets);
    for _ in 0..fc.subsets {
        let subset = sample(rng, plane, fc.subset_size);
        let mut masked = image.clone();
        let data = masked.data_mut();
        let mut s = 0.0f64;
        for p in subset.iter() {
            s += phi[p] as f64;
            for c in 0..image.shape()[0] {
                data[c * plane + p] = fc.baseline;
            }
        }
        mass.push(s);
        drop.push(fx - class_logit(model, &masked, class_index)?);
    }
    pearson(&mass, &drop)
}

/// Pearson correlation in f64, clamped to `[-1, 1]`.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::shape("pearson series", x.len(), y.len()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateCorrelation("attribution"));
    }
    if syy == 0.0 {
        return Err(Error::DegenerateCorrelation("output"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attribution::MapKind;
    use crate::metrics::testing::linear_model;
    use proptest::prelude::*;

    fn image() -> Tensor {
        Tensor::from_fn([3, 10, 10], |i| ((i * 53) % 17) as f32 / 17.0 + 0.05)
    }

    /// `phi_p = sum_c w_cp x_cp` for a bias-free identity-normalized linear model.
    fn additive(m: &Model, x: &Tensor, class: usize) -> AttributionMap {
        let plane = 100;
        let p = m.layers()[1].params.as_ref().unwrap();
        let row = &p.weights.data()[class * 300..(class + 1) * 300];
        let t = Tensor::from_fn([10, 10], |i| (0..3).map(|c| row[c * plane + i] * x.data()[c * plane + i]).sum());
        AttributionMap::new(t, MapKind::Lrp).unwrap()
    }

    #[test]
    fn exact_additive_attribution_correlates_perfectly() {
        let m = linear_model(10, 10, 3, 5, false);
        let x = image();
        let phi = additive(&m, &x, 2);
        let r = faithfulness_correlation(&m, &x, 2, &phi, &MetricConfig::default()).unwrap();
        assert!((r - 1.0).abs() <= 1e-6, "{r}");
        let neg = AttributionMap::new(phi.values().map(|v| -v), MapKind::Lrp).unwrap();
        let r = faithfulness_correlation(&m, &x, 2, &neg, &MetricConfig::default()).unwrap();
        assert!((r + 1.0).abs() <= 1e-6, "{r}");
    }

    #[test]
    fn constant_attribution_is_degenerate() {
        let m = linear_model(10, 10, 2, 6, false);
        let phi = AttributionMap::new(Tensor::full([10, 10], 0.3), MapKind::Lrp).unwrap();
        let err = faithfulness_correlation(&m, &image(), 0, &phi, &MetricConfig::default()).unwrap_err();
        assert!(matches!(err, Error::DegenerateCorrelation(_)));
    }

    #[test]
    fn subset_must_fit() {
        let m = linear_model(4, 4, 2, 6, false);
        let phi = AttributionMap::new(Tensor::full([4, 4], 0.3), MapKind::Lrp).unwrap();
        let x = Tensor::full([3, 4, 4], 0.5);
        assert!(faithfulness_correlation(&m, &x, 0, &phi, &MetricConfig::default()).is_err());
    }

    proptest! {
        #[test]
        fn pearson_in_range_and_affine_invariant(
            pairs in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..40),
            a in 0.1f64..5.0,
            b in -3.0f64..3.0,
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            if let Ok(r) = pearson(&x, &y) {
                prop_assert!((-1.0..=1.0).contains(&r));
                let xs: Vec<f64> = x.iter().map(|v| a * v + b).collect();
                let r2 = pearson(&xs, &y).unwrap();
                prop_assert!((r - r2).abs() <= 1e-9);
            }
        }
    }
}
