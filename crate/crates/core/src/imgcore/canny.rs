//! Canny edge detection.
//!
//! Smoothing and Sobel gradients are computed in integer arithmetic with a
//! fixed-point Gaussian, so mirror-symmetric inputs produce exactly equal
//! magnitudes on both sides of a step. Non-maximum suppression keeps a
//! pixel when it is strictly greater than its neighbor in the gradient
//! direction (toward the brighter side) and not smaller than the one behind
//! it; plateau ties therefore resolve to the bright side of the edge.

use std::collections::VecDeque;

use super::{gaussian_kernel, BinaryMask, Frame};
use crate::{Error, Result};

const KERNEL_ONE: f64 = 4096.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CannyParams {
    pub sigma: f64,
    /// Explicit `(low, high)` hysteresis thresholds in Sobel magnitude units.
    /// `None` uses `high = 0.2 * max magnitude`, `low = 0.5 * high`.
    pub thresholds: Option<(f64, f64)>,
}

impl Default for CannyParams {
    fn default() -> Self {
        CannyParams {
            sigma: 1.4,
            thresholds: None,
        }
    }
}

impl CannyParams {
    pub fn apply(&self, img: &Frame) -> Result<BinaryMask> {
        match self.thresholds {
            Some((lo, hi)) => canny_edges(img, self.sigma, lo, hi),
            None => canny_auto(img, self.sigma),
        }
    }
}

struct Gradients {
    width: usize,
    height: usize,
    gx: Vec<i64>,
    gy: Vec<i64>,
    mag2: Vec<i128>,
    /// Divides `sqrt(mag2)` into ordinary 8-bit Sobel units.
    scale: f64,
}

impl Gradients {
    fn new(img: &Frame, sigma: f64) -> Result<Self> {
        let kernel: Vec<i64> = gaussian_kernel(sigma)?
            .iter()
            .map(|w| (w * KERNEL_ONE).round() as i64)
            .collect();
        let ksum: i64 = kernel.iter().sum();
        let (w, h) = img.dims();
        let r = (kernel.len() / 2) as isize;
        let cx = |v: isize| v.clamp(0, w as isize - 1) as usize;
        let cy = |v: isize| v.clamp(0, h as isize - 1) as usize;

        let mut tmp = vec![0i64; w * h];
        for y in 0..h {
            for x in 0..w {
                tmp[y * w + x] = kernel
                    .iter()
                    .enumerate()
                    .map(|(k, kw)| kw * img.luma_at(cx(x as isize + k as isize - r), y) as i64)
                    .sum();
            }
        }
        let mut smooth = vec![0i64; w * h];
        for y in 0..h {
            for x in 0..w {
                smooth[y * w + x] = kernel
                    .iter()
                    .enumerate()
                    .map(|(k, kw)| kw * tmp[cy(y as isize + k as isize - r) * w + x])
                    .sum();
            }
        }

        let at = |x: isize, y: isize| smooth[cy(y) * w + cx(x)];
        let mut gx = vec![0i64; w * h];
        let mut gy = vec![0i64; w * h];
        let mut mag2 = vec![0i128; w * h];
        for y in 0..h as isize {
            for x in 0..w as isize {
                let dx = at(x + 1, y - 1) + 2 * at(x + 1, y) + at(x + 1, y + 1)
                    - at(x - 1, y - 1)
                    - 2 * at(x - 1, y)
                    - at(x - 1, y + 1);
                let dy = at(x - 1, y + 1) + 2 * at(x, y + 1) + at(x + 1, y + 1)
                    - at(x - 1, y - 1)
                    - 2 * at(x, y - 1)
                    - at(x + 1, y - 1);
                let i = y as usize * w + x as usize;
                gx[i] = dx;
                gy[i] = dy;
                mag2[i] = dx as i128 * dx as i128 + dy as i128 * dy as i128;
            }
        }
        Ok(Gradients {
            width: w,
            height: h,
            gx,
            gy,
            mag2,
            scale: (ksum * ksum) as f64,
        })
    }

    fn magnitude(&self, i: usize) -> f64 {
        (self.mag2[i] as f64).sqrt() / self.scale
    }

    fn mag2_or_zero(&self, x: isize, y: isize) -> i128 {
        if x < 0 || y < 0 || x >= self.width as isize || y >= self.height as isize {
            0
        } else {
            self.mag2[y as usize * self.width + x as usize]
        }
    }

    /// Non-maximum suppression along the gradient direction quantized to
    /// 0, 45, 90 or 135 degrees.
    fn suppress(&self) -> Vec<bool> {
        let (w, h) = (self.width, self.height);
        let mut keep = vec![false; w * h];
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                if self.mag2[i] == 0 {
                    continue;
                }
                let (gx, gy) = (self.gx[i], self.gy[i]);
                let angle = (gy as f64).atan2(gx as f64).to_degrees().rem_euclid(180.0);
                let (mut dx, mut dy) = if !(22.5..157.5).contains(&angle) {
                    (1isize, 0isize)
                } else if angle < 67.5 {
                    (1, 1)
                } else if angle < 112.5 {
                    (0, 1)
                } else {
                    (-1, 1)
                };
                if gx * (dx as i64) + gy * (dy as i64) < 0 {
                    dx = -dx;
                    dy = -dy;
                }
                let (xi, yi) = (x as isize, y as isize);
                let ahead = self.mag2_or_zero(xi + dx, yi + dy);
                let behind = self.mag2_or_zero(xi - dx, yi - dy);
                keep[i] = self.mag2[i] > ahead && self.mag2[i] >= behind;
            }
        }
        keep
    }

    fn max_magnitude(&self) -> f64 {
        let m = self.mag2.iter().copied().max().unwrap_or(0);
        (m as f64).sqrt() / self.scale
    }

    fn hysteresis(&self, low: f64, high: f64) -> BinaryMask {
        let (w, h) = (self.width, self.height);
        let thin = self.suppress();
        let mag: Vec<f64> = (0..w * h).map(|i| self.magnitude(i)).collect();
        let mut edges = vec![false; w * h];
        let mut queue = VecDeque::new();
        for i in 0..w * h {
            if thin[i] && mag[i] >= high {
                edges[i] = true;
                queue.push_back(i);
            }
        }
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i % w, i / w);
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let j = ny * w + nx;
                    if !edges[j] && thin[j] && mag[j] >= low {
                        edges[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        BinaryMask::from_bits(w, h, edges).expect("same dimensions")
    }
}

/// Sobel gradient magnitude of the `sigma`-smoothed image, row-major.
pub fn gradient_magnitude(img: &Frame, sigma: f64) -> Result<Vec<f64>> {
    let g = Gradients::new(img, sigma)?;
    Ok((0..g.mag2.len()).map(|i| g.magnitude(i)).collect())
}

pub fn canny_edges(img: &Frame, sigma: f64, t_low: f64, t_high: f64) -> Result<BinaryMask> {
    if !(t_low > 0.0 && t_low < t_high) {
        return Err(Error::param(format!(
            "canny thresholds need 0 < low < high, got {t_low}, {t_high}"
        )));
    }
    Ok(Gradients::new(img, sigma)?.hysteresis(t_low, t_high))
}

/// Canny with `t_high = 0.2 * max magnitude` and `t_low = 0.5 * t_high`.
/// A frame without any gradient has no edges.
pub fn canny_auto(img: &Frame, sigma: f64) -> Result<BinaryMask> {
    let g = Gradients::new(img, sigma)?;
    let high = 0.2 * g.max_magnitude();
    if high <= 0.0 {
        return Ok(BinaryMask::new(img.width(), img.height()));
    }
    Ok(g.hysteresis(0.5 * high, high))
}
