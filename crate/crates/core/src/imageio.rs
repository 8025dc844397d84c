//! PNG input: RGB images scaled to `[0, 1]` and binary ground-truth masks.

use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::BinaryMask;
use crate::tensor::Tensor;

fn open(path: &Path) -> Result<image::DynamicImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    image::load_from_memory_with_format(&bytes, image::ImageFormat::Png).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// 8-bit PNG as a `[3, H, W]` tensor with values `v / 255`.
pub fn load_image(path: impl AsRef<Path>) -> Result<Tensor> {
    let rgb = open(path.as_ref())?.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let raw = rgb.as_raw();
    let plane = w * h;
    Tensor::new([3, h, w], (0..3 * plane).map(|i| raw[(i % plane) * 3 + i / plane] as f32 / 255.0).collect())
}

/// Grayscale PNG where any nonzero pixel is foreground.
pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let gray = open(path.as_ref())?.to_luma8();
    BinaryMask::new(
        gray.height() as usize,
        gray.width() as usize,
        gray.as_raw().iter().map(|&v| v != 0).collect(),
    )
}

/// Write `[3, H, W]` values in `[0, 1]` as an 8-bit RGB PNG.
pub fn save_image(image: &Tensor, path: impl AsRef<Path>) -> Result<()> {
    image.expect_rank(3, "save_image")?;
    if image.shape()[0] != 3 {
        return Err(Error::shape("save_image channels", 3, image.shape()[0]));
    }
    let (h, w) = (image.shape()[1], image.shape()[2]);
    let plane = h * w;
    let d = image.data();
    let bytes = (0..3 * plane)
        .map(|i| (d[(i % 3) * plane + i / 3].clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    write_rgb(path.as_ref(), w, h, bytes)
}

pub(crate) fn write_rgb(path: &Path, width: usize, height: usize, bytes: Vec<u8>) -> Result<()> {
    let buf = image::RgbImage::from_raw(width as u32, height as u32, bytes).expect("buffer sized to extent");
    buf.save_with_format(path, image::ImageFormat::Png).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Decode {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    })
}
