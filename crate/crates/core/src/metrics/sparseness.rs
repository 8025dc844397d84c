use crate::attribution::AttributionMap;
use crate::error::{Error, Result};

/// Gini index of `|phi|`: `sum_k (2k - n - 1) a_(k) / (n sum a)` over the
/// ascending sort. An all-zero map scores 0.
pub fn sparseness(attribution: &AttributionMap) -> Result<f64> {
    gini(attribution.data())
}

pub(crate) fn gini(values: &[f32]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("sparseness of an empty attribution".into()));
    }
    let mut a: Vec<f64> = values.iter().map(|v| (*v as f64).abs()).collect();
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("sparseness input".into()));
    }
    a.sort_by(f64::total_cmp);
    let total: f64 = a.iter().sum();
    if total == 0.0 {
        return Ok(0.0);
    }
    let n = a.len() as f64;
    let weighted: f64 = a
        .iter()
        .enumerate()
        .map(|(k, v)| (2.0 * (k + 1) as f64 - n - 1.0) * v)
        .sum();
    Ok(weighted / (n * total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_examples() {
        assert_eq!(gini(&[1.0, 1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert!((gini(&[0.0, 0.0, 0.0, 1.0]).unwrap() - 0.75).abs() < 1e-12);
        assert!((gini(&[0.0, 0.0, 1.0]).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(gini(&[0.0; 5]).unwrap(), 0.0);
        assert!(gini(&[]).is_err());
    }

    proptest! {
        #[test]
        fn scale_and_permutation_invariant(
            v in proptest::collection::vec(-5.0f32..5.0, 1..64),
            c in prop_oneof![-4.0f32..-0.25, 0.25f32..4.0],
            rot in 0usize..64,
        ) {
            let g = gini(&v).unwrap();
            let scaled: Vec<f32> = v.iter().map(|x| x * c).collect();
            prop_assert!((gini(&scaled).unwrap() - g).abs() <= 1e-6);
            let mut p = v.clone();
            let k = rot % p.len();
            p.rotate_left(k);
            prop_assert!((gini(&p).unwrap() - g).abs() <= 1e-12);
            prop_assert!((0.0..1.0).contains(&g));
        }
    }
}
