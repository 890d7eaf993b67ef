//! RGB to YCbCr (BT.601 full range) and HSV.

/// Full-range BT.601 YCbCr, chroma offset by 128, each component in [0, 255].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YCbCr {
    pub y: f64,
    pub cb: f64,
    pub cr: f64,
}

/// Hue in degrees [0, 360); saturation and value in [0, 255].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hsv {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

/// BT.601 full-range conversion. Luma is computed in integer thousandths so
/// that any grey pixel maps to `Cb = Cr = 128` exactly.
#[inline]
pub fn rgb_to_ycbcr([r, g, b]: [u8; 3]) -> YCbCr {
    let (r, g, b) = (r as i32, g as i32, b as i32);
    let y_milli = 299 * r + 587 * g + 114 * b;
    // Kb = 0.114, Kr = 0.299: Cb = (B - Y) / (2 (1 - Kb)), Cr = (R - Y) / (2 (1 - Kr)).
    let cb = 128.0 + (1000 * b - y_milli) as f64 / 1772.0;
    let cr = 128.0 + (1000 * r - y_milli) as f64 / 1402.0;
    YCbCr {
        y: (y_milli as f64 / 1000.0).clamp(0.0, 255.0),
        cb: cb.clamp(0.0, 255.0),
        cr: cr.clamp(0.0, 255.0),
    }
}

#[inline]
pub fn rgb_to_hsv([r, g, b]: [u8; 3]) -> Hsv {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let v = max as f64;
    if max == min {
        return Hsv { h: 0.0, s: 0.0, v };
    }
    let delta = (max - min) as f64;
    let s = 255.0 * delta / v;
    let (r, g, b) = (r as f64, g as f64, b as f64);
    let sector = if max as f64 == r {
        ((g - b) / delta).rem_euclid(6.0)
    } else if max as f64 == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    };
    let mut h = 60.0 * sector;
    if h >= 360.0 {
        h -= 360.0;
    }
    Hsv { h, s, v }
}

/// Inverse of [`rgb_to_hsv`], rounded to 8 bits.
pub fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let h = h.rem_euclid(360.0);
    let s = (s / 255.0).clamp(0.0, 1.0);
    let v = v.clamp(0.0, 255.0);
    let c = v * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
    let (r1, g1, b1) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [
        (r1 + m).round() as u8,
        (g1 + m).round() as u8,
        (b1 + m).round() as u8,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Textbook six-decimal BT.601 coefficients, unclamped.
    fn ycbcr_oracle(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
        (
            0.299 * r + 0.587 * g + 0.114 * b,
            128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b,
            128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b,
        )
    }

    #[test]
    fn black_is_neutral() {
        let c = rgb_to_ycbcr([0, 0, 0]);
        assert_eq!((c.y, c.cb, c.cr), (0.0, 128.0, 128.0));
    }

    #[test]
    fn pure_red_matches_formula() {
        let c = rgb_to_ycbcr([255, 0, 0]);
        let (y, cb, cr) = ycbcr_oracle(255.0, 0.0, 0.0);
        assert!((c.y - y).abs() < 1e-9, "{} vs {y}", c.y);
        assert!((c.cb - cb).abs() < 1e-3, "{} vs {cb}", c.cb);
        // Cr = 255.5 before clamping.
        assert!((cr - 255.5).abs() < 1e-3);
        assert_eq!(c.cr, 255.0);
    }

    #[test]
    fn grey_has_exact_neutral_chroma() {
        for v in 0..=255u8 {
            let c = rgb_to_ycbcr([v, v, v]);
            assert_eq!(c.cb, 128.0);
            assert_eq!(c.cr, 128.0);
            assert_eq!(c.y, v as f64);
        }
    }

    #[test]
    fn matches_oracle_on_a_grid() {
        for r in (0..=255).step_by(15) {
            for g in (0..=255).step_by(15) {
                for b in (0..=255).step_by(15) {
                    let c = rgb_to_ycbcr([r as u8, g as u8, b as u8]);
                    let (y, cb, cr) = ycbcr_oracle(r as f64, g as f64, b as f64);
                    assert!((c.y - y.clamp(0.0, 255.0)).abs() < 1e-3);
                    assert!((c.cb - cb.clamp(0.0, 255.0)).abs() < 1e-3);
                    assert!((c.cr - cr.clamp(0.0, 255.0)).abs() < 1e-3);
                }
            }
        }
    }

    #[test]
    fn achromatic_hsv() {
        let c = rgb_to_hsv([128, 128, 128]);
        assert_eq!((c.h, c.s, c.v), (0.0, 0.0, 128.0));
    }

    #[test]
    fn primary_hues() {
        assert_eq!(rgb_to_hsv([255, 0, 0]).h, 0.0);
        assert_eq!(rgb_to_hsv([0, 255, 0]).h, 120.0);
        assert_eq!(rgb_to_hsv([0, 0, 255]).h, 240.0);
        assert_eq!(rgb_to_hsv([255, 0, 255]).h, 300.0);
        let c = rgb_to_hsv([255, 0, 1]);
        assert!(c.h > 359.0 && c.h < 360.0);
    }

    #[test]
    fn hsv_round_trip_within_one_level() {
        for r in (0..=255).step_by(17) {
            for g in (0..=255).step_by(17) {
                for b in (0..=255).step_by(17) {
                    let c = rgb_to_hsv([r as u8, g as u8, b as u8]);
                    let back = hsv_to_rgb(c.h, c.s, c.v);
                    for (a, e) in back.iter().zip([r, g, b]) {
                        assert!((*a as i32 - e).abs() <= 1);
                    }
                }
            }
        }
    }
}
