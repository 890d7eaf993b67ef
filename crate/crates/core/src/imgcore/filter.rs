use super::Frame;
use crate::{Error, Result};

/// Normalized 1-D Gaussian of radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::param(format!("gaussian sigma must be > 0, got {sigma}")));
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = k.iter().sum();
    k.iter_mut().for_each(|w| *w /= total);
    Ok(k)
}

/// Separable convolution of a `width x height` plane with clamp-to-border.
pub(crate) fn convolve_separable(
    src: &[f64],
    width: usize,
    height: usize,
    kernel: &[f64],
) -> Vec<f64> {
    let radius = (kernel.len() / 2) as isize;
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let mut tmp = vec![0.0; src.len()];
    for y in 0..height {
        let row = &src[y * width..(y + 1) * width];
        for x in 0..width {
            tmp[y * width + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, w)| w * row[clamp(x as isize + k as isize - radius, width)])
                .sum();
        }
    }
    let mut out = vec![0.0; src.len()];
    for y in 0..height {
        for x in 0..width {
            out[y * width + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, w)| w * tmp[clamp(y as isize + k as isize - radius, height) * width + x])
                .sum();
        }
    }
    out
}

/// Gaussian smoothing, applied to each channel independently, rounded back
/// to 8 bits.
pub fn gaussian_blur(img: &Frame, sigma: f64) -> Result<Frame> {
    let kernel = gaussian_kernel(sigma)?;
    let (w, h, c) = (img.width(), img.height(), img.channels());
    let mut out = vec![0u8; img.data().len()];
    for ch in 0..c {
        let plane: Vec<f64> = img.data()[ch..].iter().step_by(c).map(|&v| v as f64).collect();
        let blurred = convolve_separable(&plane, w, h, &kernel);
        for (i, v) in blurred.into_iter().enumerate() {
            out[i * c + ch] = v.round().clamp(0.0, 255.0) as u8;
        }
    }
    Ok(Frame::new(w, h, c, out)?.with_timestamp(img.timestamp()))
}
