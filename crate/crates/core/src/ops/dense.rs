use crate::error::{Error, Result};
use crate::tensor::Tensor;

fn dense_dims(weights: &Tensor) -> Result<(usize, usize)> {
    weights.expect_rank(2, "dense weights")?;
    Ok((weights.shape()[0], weights.shape()[1]))
}

/// `W·x + b` with `W` shaped `[M, N]`; each output sums inputs in index order
/// and adds the bias last.
pub fn dense_forward(input: &Tensor, weights: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let (m, n) = dense_dims(weights)?;
    if input.shape() != [n] {
        return Err(Error::shape("dense input", [n], input.shape()));
    }
    if bias.shape() != [m] {
        return Err(Error::shape("dense bias", [m], bias.shape()));
    }
    let x = input.data();
    let out = weights
        .data()
        .chunks_exact(n)
        .zip(bias.data())
        .map(|(row, &b)| row.iter().zip(x).fold(0.0f32, |acc, (w, v)| acc + w * v) + b)
        .collect();
    Tensor::new([m], out)
}

/// `Wᵀ·g`, the input gradient of a dense layer.
pub fn dense_backward_input(weights: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
    let (m, n) = dense_dims(weights)?;
    if grad_out.shape() != [m] {
        return Err(Error::shape("dense output gradient", [m], grad_out.shape()));
    }
    let mut grad_in = Tensor::zeros([n]);
    let gi = grad_in.data_mut();
    for (row, &g) in weights.data().chunks_exact(n).zip(grad_out.data()) {
        if g == 0.0 {
            continue;
        }
        for (acc, w) in gi.iter_mut().zip(row) {
            *acc += w * g;
        }
    }
    Ok(grad_in)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_weights() {
        let x = Tensor::new([3], vec![1.5, -2.0, 0.25]).unwrap();
        let w = Tensor::from_fn([3, 3], |i| if i % 4 == 0 { 1.0 } else { 0.0 });
        assert_eq!(dense_forward(&x, &w, &Tensor::zeros([3])).unwrap(), x);
    }

    #[test]
    fn hand_sum() {
        let x = Tensor::new([2], vec![1.0, 2.0]).unwrap();
        let w = Tensor::new([1, 2], vec![1.0, 1.0]).unwrap();
        let y = dense_forward(&x, &w, &Tensor::zeros([1])).unwrap();
        assert_eq!(y.data(), &[3.0]);
    }

    #[test]
    fn zero_input_gives_bias() {
        let w = Tensor::from_fn([2, 4], |i| i as f32);
        let b = Tensor::new([2], vec![0.5, -0.75]).unwrap();
        assert_eq!(dense_forward(&Tensor::zeros([4]), &w, &b).unwrap(), b);
    }

    #[test]
    fn shape_errors() {
        let w = Tensor::zeros([2, 3]);
        assert!(dense_forward(&Tensor::zeros([4]), &w, &Tensor::zeros([2])).is_err());
        assert!(dense_forward(&Tensor::zeros([3]), &w, &Tensor::zeros([3])).is_err());
        assert!(dense_backward_input(&w, &Tensor::zeros([3])).is_err());
    }

    proptest! {
        #[test]
        fn matches_naive_reference(
            (m, n, wd, xd, bd) in (1usize..6, 1usize..9).prop_flat_map(|(m, n)| (
                Just(m), Just(n),
                proptest::collection::vec(-1.0f32..1.0, m * n),
                proptest::collection::vec(-3.0f32..3.0, n),
                proptest::collection::vec(-1.0f32..1.0, m),
            ))
        ) {
            let w = Tensor::new([m, n], wd).unwrap();
            let x = Tensor::new([n], xd).unwrap();
            let b = Tensor::new([m], bd).unwrap();
            let y = dense_forward(&x, &w, &b).unwrap();
            for i in 0..m {
                let mut s = b.data()[i] as f64;
                for j in 0..n {
                    s += w.at(&[i, j]) as f64 * x.data()[j] as f64;
                }
                prop_assert!((y.data()[i] as f64 - s).abs() <= 1e-5 * s.abs().max(1.0));
            }
        }
    }
}
