use crate::imgcore::{rgb_to_hsv, Frame, Rect};
use crate::{Error, Result};

pub const HUE_BINS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkinParams {
    /// Minimum saturation (of 255) for a pixel to count as colored.
    pub sat_min: f64,
    /// Minimum value (of 255).
    pub val_min: f64,
    /// Fraction of the face ROI kept on each axis, centered.
    pub core_frac: f64,
}

impl Default for SkinParams {
    fn default() -> Self {
        SkinParams {
            sat_min: 30.0,
            val_min: 30.0,
            core_frac: 0.6,
        }
    }
}

/// Normalized hue histogram with saturation/value gates.
#[derive(Debug, Clone, PartialEq)]
pub struct SkinModel {
    hist: [f64; HUE_BINS],
    sat_min: f64,
    val_min: f64,
}

#[inline]
pub fn hue_bin(h: f64) -> usize {
    ((h * HUE_BINS as f64 / 360.0) as usize).min(HUE_BINS - 1)
}

impl SkinModel {
    /// Normalizes `counts`; an all-zero histogram is an error.
    pub fn from_histogram(counts: [f64; HUE_BINS], sat_min: f64, val_min: f64) -> Result<Self> {
        if counts.iter().any(|&c| c < 0.0 || !c.is_finite()) {
            return Err(Error::param("hue histogram needs finite non-negative bins"));
        }
        let total: f64 = counts.iter().sum();
        if total <= 0.0 {
            return Err(Error::EmptySkinModel);
        }
        let mut hist = counts;
        hist.iter_mut().for_each(|c| *c /= total);
        Ok(SkinModel {
            hist,
            sat_min,
            val_min,
        })
    }

    /// Generic prior over red-orange hues (about 349 to 45 degrees), for
    /// sessions without a face ROI to sample from.
    pub fn default_prior() -> Self {
        let mut counts = [0.0; HUE_BINS];
        for b in [0, 1, 2, 3, HUE_BINS - 1] {
            counts[b] = 1.0;
        }
        let p = SkinParams::default();
        Self::from_histogram(counts, p.sat_min, p.val_min).expect("non-empty prior")
    }

    pub fn histogram(&self) -> &[f64; HUE_BINS] {
        &self.hist
    }

    pub fn sat_min(&self) -> f64 {
        self.sat_min
    }

    pub fn val_min(&self) -> f64 {
        self.val_min
    }

    #[inline]
    fn weight(&self, rgb: [u8; 3], max_bin: f64) -> u8 {
        let hsv = rgb_to_hsv(rgb);
        if hsv.s < self.sat_min || hsv.v < self.val_min {
            return 0;
        }
        (255.0 * self.hist[hue_bin(hsv.h)] / max_bin).round() as u8
    }
}

/// Samples the central `core_frac` of `face` into a hue histogram.
pub fn build_skin_model(frame: &Frame, face: Rect, params: &SkinParams) -> Result<SkinModel> {
    frame.check_rect(&face)?;
    if face.w == 0 || face.h == 0 {
        return Err(Error::param("empty face ROI"));
    }
    let cw = ((face.w as f64 * params.core_frac).round() as usize).clamp(1, face.w);
    let ch = ((face.h as f64 * params.core_frac).round() as usize).clamp(1, face.h);
    let core = Rect::new(face.x + (face.w - cw) / 2, face.y + (face.h - ch) / 2, cw, ch);
    let mut counts = [0.0; HUE_BINS];
    for y in core.y..core.bottom() {
        for x in core.x..core.right() {
            let hsv = rgb_to_hsv(frame.rgb_at(x, y));
            if hsv.s >= params.sat_min && hsv.v >= params.val_min {
                counts[hue_bin(hsv.h)] += 1.0;
            }
        }
    }
    SkinModel::from_histogram(counts, params.sat_min, params.val_min)
}

/// Skin-probability image: `round(255 * hist[bin] / max bin)` for gated
/// pixels, 0 elsewhere.
pub fn backproject(frame: &Frame, model: &SkinModel) -> Frame {
    let max_bin = model.hist.iter().cloned().fold(0.0, f64::max);
    let n = frame.width() * frame.height();
    let data = (0..n)
        .map(|i| model.weight(frame.rgb_at_index(i), max_bin))
        .collect();
    Frame::gray(frame.width(), frame.height(), data)
        .expect("same dimensions")
        .with_timestamp(frame.timestamp())
}
