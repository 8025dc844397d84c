use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Normalized 1-D Gaussian taps for offsets `-r..=r`, `r = ceil(3 sigma)`.
pub fn gaussian_kernel_1d(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let taps: Vec<f64> = (-radius..=radius)
        .map(|d| (-((d * d) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / total).collect()
}

/// Half-sample symmetric reflection (`d c b a | a b c d | d c b a`).
fn reflect(i: i64, n: usize) -> usize {
    let n = n as i64;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m >= n { period - 1 - m } else { m }) as usize
}

/// Separable Gaussian smoothing of a 2-D map with reflected borders.
/// `sigma == 0` returns the input unchanged.
pub fn gaussian_blur(map: &Tensor, sigma: f64) -> Result<Tensor> {
    map.expect_rank(2, "gaussian_blur input")?;
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "blur sigma must be finite and >= 0, got {sigma}"
        )));
    }
    if !map.all_finite() {
        return Err(Error::NonFinite("gaussian_blur input".into()));
    }
    if sigma == 0.0 {
        return Ok(map.clone());
    }
    let kernel = gaussian_kernel_1d(sigma);
    let radius = (kernel.len() / 2) as i64;
    let (h, w) = (map.shape()[0], map.shape()[1]);
    let src = map.data();

    let mut horizontal = vec![0.0f64; h * w];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            horizontal[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, &t)| t * row[reflect(x as i64 + k as i64 - radius, w)] as f64)
                .sum();
        }
    }

    let mut out = Tensor::zeros([h, w]);
    let o = out.data_mut();
    for y in 0..h {
        for x in 0..w {
            let v: f64 = kernel
                .iter()
                .enumerate()
                .map(|(k, &t)| t * horizontal[reflect(y as i64 + k as i64 - radius, h) * w + x])
                .sum();
            o[y * w + x] = v as f32;
        }
    }
    Ok(out)
}
