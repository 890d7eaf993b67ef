//! Codebook background model.
//!
//! Each pixel keeps a short list of codewords summarizing the colors it took
//! during training. A codeword matches a YCbCr sample when the chroma lies
//! within a Euclidean radius of the codeword's running mean and the luma
//! lies inside `[alpha * lo, min(beta * hi, 255)]`. A pixel is foreground when
//! no codeword matches.

use std::io::{Read, Write};

use crate::imgcore::{rgb_to_ycbcr, BinaryMask, Frame, YCbCr};
use crate::{par, Error, Result};

const MAGIC: &[u8; 4] = b"CBK1";

/// Default number of training frames.
pub const DEFAULT_TRAINING_FRAMES: usize = 90;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodebookParams {
    /// Chroma match radius while training.
    pub eps_train: f64,
    /// Chroma match radius while extracting foreground.
    pub eps_detect: f64,
    /// Lower luma scale, in (0, 1].
    pub alpha: f64,
    /// Upper luma scale, >= 1.
    pub beta: f64,
    /// Codewords unseen for more than this fraction of the training length
    /// are dropped.
    pub mnrl_prune_frac: f64,
}

impl Default for CodebookParams {
    fn default() -> Self {
        CodebookParams {
            eps_train: 10.0,
            eps_detect: 12.0,
            alpha: 0.7,
            beta: 1.3,
            mnrl_prune_frac: 0.5,
        }
    }
}

impl CodebookParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.eps_train > 0.0
            && self.eps_detect >= self.eps_train
            && self.alpha > 0.0
            && self.alpha <= 1.0
            && self.beta >= 1.0
            && self.mnrl_prune_frac > 0.0
            && self.mnrl_prune_frac <= 1.0
            && [self.eps_train, self.eps_detect, self.alpha, self.beta, self.mnrl_prune_frac]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::param(format!("invalid codebook parameters {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Codeword {
    pub cb: f64,
    pub cr: f64,
    pub luma_lo: f64,
    pub luma_hi: f64,
    pub freq: u32,
    /// Longest run of training frames in which this codeword was not matched.
    pub mnrl: u32,
    /// 1-based training frame indices.
    pub first_seen: u32,
    pub last_seen: u32,
}

impl Codeword {
    fn new(p: YCbCr, t: u32) -> Self {
        Codeword {
            cb: p.cb,
            cr: p.cr,
            luma_lo: p.y,
            luma_hi: p.y,
            freq: 1,
            mnrl: 0,
            first_seen: t,
            last_seen: t,
        }
    }

    fn absorb(&mut self, p: YCbCr, t: u32) {
        let n = self.freq as f64 + 1.0;
        self.cb += (p.cb - self.cb) / n;
        self.cr += (p.cr - self.cr) / n;
        self.luma_lo = self.luma_lo.min(p.y);
        self.luma_hi = self.luma_hi.max(p.y);
        self.freq += 1;
        self.mnrl = self.mnrl.max(t - self.last_seen - 1);
        self.last_seen = t;
    }

    /// Folds in the wrap-around gap: frames after `last_seen` plus frames
    /// before `first_seen`.
    fn close(&mut self, frames: u32) {
        let wrap = (frames - self.last_seen) + (self.first_seen - 1);
        self.mnrl = self.mnrl.max(wrap);
    }
}

/// Chroma within `eps` of the codeword mean and luma inside the scaled
/// bounds.
#[inline]
pub fn codeword_match(p: YCbCr, cw: &Codeword, eps: f64, alpha: f64, beta: f64) -> bool {
    let (dcb, dcr) = (p.cb - cw.cb, p.cr - cw.cr);
    dcb * dcb + dcr * dcr <= eps * eps
        && alpha * cw.luma_lo <= p.y
        && p.y <= (beta * cw.luma_hi).min(255.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodebookModel {
    width: usize,
    height: usize,
    params: CodebookParams,
    /// `offsets[i]..offsets[i + 1]` indexes pixel `i`'s codewords.
    offsets: Vec<u32>,
    words: Vec<Codeword>,
}

impl CodebookModel {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn params(&self) -> &CodebookParams {
        &self.params
    }

    pub fn codewords(&self, x: usize, y: usize) -> &[Codeword] {
        let i = y * self.width + x;
        &self.words[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    pub fn total_codewords(&self) -> usize {
        self.words.len()
    }

    fn from_pixels(width: usize, height: usize, params: CodebookParams, pixels: Vec<Vec<Codeword>>) -> Self {
        let mut offsets = Vec::with_capacity(pixels.len() + 1);
        let mut words = Vec::with_capacity(pixels.iter().map(Vec::len).sum());
        offsets.push(0);
        for cws in pixels {
            words.extend(cws);
            offsets.push(words.len() as u32);
        }
        CodebookModel {
            width,
            height,
            params,
            offsets,
            words,
        }
    }

    /// Whether the sample at `(x, y)` matches any codeword under the
    /// detection thresholds.
    #[inline]
    pub fn is_background(&self, x: usize, y: usize, p: YCbCr) -> bool {
        let CodebookParams {
            eps_detect,
            alpha,
            beta,
            ..
        } = self.params;
        self.codewords(x, y)
            .iter()
            .any(|cw| codeword_match(p, cw, eps_detect, alpha, beta))
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.width as u32).to_le_bytes())?;
        w.write_all(&(self.height as u32).to_le_bytes())?;
        let p = &self.params;
        for v in [p.eps_train, p.eps_detect, p.alpha, p.beta, p.mnrl_prune_frac] {
            w.write_all(&v.to_le_bytes())?;
        }
        for i in 0..self.width * self.height {
            let cws = &self.words[self.offsets[i] as usize..self.offsets[i + 1] as usize];
            w.write_all(&(cws.len() as u32).to_le_bytes())?;
            for cw in cws {
                for v in [cw.cb, cw.cr, cw.luma_lo, cw.luma_hi] {
                    w.write_all(&v.to_le_bytes())?;
                }
                for v in [cw.freq, cw.mnrl, cw.first_seen, cw.last_seen] {
                    w.write_all(&v.to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(28 + 4 * self.offsets.len() + 48 * self.words.len());
        self.write_to(&mut buf).expect("writing to a Vec");
        buf
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Parse(format!("bad codebook magic {magic:?}")));
        }
        let width = read_u32(&mut r)? as usize;
        let height = read_u32(&mut r)? as usize;
        if width == 0 || height == 0 {
            return Err(Error::Parse(format!("codebook of {width}x{height} pixels")));
        }
        let params = CodebookParams {
            eps_train: read_f64(&mut r)?,
            eps_detect: read_f64(&mut r)?,
            alpha: read_f64(&mut r)?,
            beta: read_f64(&mut r)?,
            mnrl_prune_frac: read_f64(&mut r)?,
        };
        params.validate()?;
        let mut offsets = Vec::with_capacity(width * height + 1);
        let mut words = Vec::new();
        offsets.push(0u32);
        for _ in 0..width * height {
            let n = read_u32(&mut r)?;
            for _ in 0..n {
                let cw = Codeword {
                    cb: read_f64(&mut r)?,
                    cr: read_f64(&mut r)?,
                    luma_lo: read_f64(&mut r)?,
                    luma_hi: read_f64(&mut r)?,
                    freq: read_u32(&mut r)?,
                    mnrl: read_u32(&mut r)?,
                    first_seen: read_u32(&mut r)?,
                    last_seen: read_u32(&mut r)?,
                };
                words.push(cw);
            }
            offsets.push(words.len() as u32);
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::Parse("trailing bytes after codebook".into()));
        }
        Ok(CodebookModel {
            width,
            height,
            params,
            offsets,
            words,
        })
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::read_from(bytes)
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Learns a static background from `frames`. Rows are trained in parallel;
/// the result does not depend on the thread count.
pub fn train_codebook(frames: &[Frame], params: CodebookParams) -> Result<CodebookModel> {
    params.validate()?;
    let first = frames
        .first()
        .ok_or_else(|| Error::Training("empty training sequence".into()))?;
    let (width, height) = first.dims();
    if let Some(bad) = frames.iter().find(|f| f.dims() != (width, height)) {
        return Err(Error::Training(format!(
            "mixed frame sizes: {width}x{height} and {}x{}",
            bad.width(),
            bad.height()
        )));
    }
    let n = frames.len() as u32;
    let prune_above = params.mnrl_prune_frac * n as f64;

    let rows: Vec<Vec<Vec<Codeword>>> = par::map_range(height, |y| {
        let mut row: Vec<Vec<Codeword>> = vec![Vec::new(); width];
        for (t, frame) in frames.iter().enumerate() {
            let t = t as u32 + 1;
            for (x, cws) in row.iter_mut().enumerate() {
                let p = rgb_to_ycbcr(frame.rgb_at(x, y));
                match cws
                    .iter_mut()
                    .find(|cw| codeword_match(p, cw, params.eps_train, params.alpha, params.beta))
                {
                    Some(cw) => cw.absorb(p, t),
                    None => cws.push(Codeword::new(p, t)),
                }
            }
        }
        for cws in row.iter_mut() {
            cws.iter_mut().for_each(|cw| cw.close(n));
            prune(cws, prune_above);
        }
        row
    });
    Ok(CodebookModel::from_pixels(
        width,
        height,
        params,
        rows.into_iter().flatten().collect(),
    ))
}

/// Drops codewords whose MNRL exceeds `limit`. A pixel always keeps at least
/// its most persistent codeword.
fn prune(cws: &mut Vec<Codeword>, limit: f64) {
    if cws.iter().all(|cw| cw.mnrl as f64 > limit) {
        let best = cws
            .iter()
            .enumerate()
            .min_by_key(|(i, cw)| (cw.mnrl, std::cmp::Reverse(cw.freq), *i))
            .map(|(i, _)| i)
            .expect("at least one codeword per trained pixel");
        let keep = cws[best];
        cws.clear();
        cws.push(keep);
    } else {
        cws.retain(|cw| cw.mnrl as f64 <= limit);
    }
}

/// First binary mask: pixels no codeword explains.
pub fn extract_foreground(model: &CodebookModel, frame: &Frame) -> Result<BinaryMask> {
    if frame.dims() != model.dims() {
        return Err(Error::DimensionMismatch {
            expected: model.dims(),
            actual: frame.dims(),
        });
    }
    let width = model.width;
    let mut bits = vec![false; width * model.height];
    par::for_each_row(&mut bits, width, |y, row| {
        for (x, bit) in row.iter_mut().enumerate() {
            *bit = !model.is_background(x, y, rgb_to_ycbcr(frame.rgb_at(x, y)));
        }
    });
    BinaryMask::from_bits(width, model.height, bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cw(cb: f64, cr: f64, lo: f64, hi: f64) -> Codeword {
        Codeword {
            cb,
            cr,
            luma_lo: lo,
            luma_hi: hi,
            freq: 1,
            mnrl: 0,
            first_seen: 1,
            last_seen: 1,
        }
    }

    fn ycc(y: f64, cb: f64, cr: f64) -> YCbCr {
        YCbCr { y, cb, cr }
    }

    fn constant(w: usize, h: usize, rgb: [u8; 3], n: usize) -> Vec<Frame> {
        (0..n).map(|_| Frame::filled_rgb(w, h, rgb).unwrap()).collect()
    }

    #[test]
    fn self_match() {
        let c = cw(100.0, 140.0, 80.0, 90.0);
        assert!(codeword_match(ycc(85.0, 100.0, 140.0), &c, 10.0, 0.7, 1.3));
    }

    #[test]
    fn chroma_radius_exceeded() {
        let c = cw(100.0, 140.0, 80.0, 90.0);
        assert!(codeword_match(ycc(85.0, 110.0, 140.0), &c, 10.0, 0.7, 1.3));
        assert!(!codeword_match(ycc(85.0, 111.0, 140.0), &c, 10.0, 0.7, 1.3));
    }

    #[test]
    fn luma_lower_bound() {
        // alpha * lo = 0.7 * 80 = 56
        let c = cw(100.0, 140.0, 80.0, 90.0);
        assert!(!codeword_match(ycc(55.0, 100.0, 140.0), &c, 10.0, 0.7, 1.3));
        assert!(codeword_match(ycc(56.0, 100.0, 140.0), &c, 10.0, 0.7, 1.3));
        // beta * hi = 117
        assert!(codeword_match(ycc(117.0, 100.0, 140.0), &c, 10.0, 0.7, 1.3));
        assert!(!codeword_match(ycc(118.0, 100.0, 140.0), &c, 10.0, 0.7, 1.3));
    }

    #[test]
    fn luma_upper_bound_caps_at_255() {
        let c = cw(128.0, 128.0, 240.0, 250.0);
        assert!(codeword_match(ycc(255.0, 128.0, 128.0), &c, 10.0, 0.7, 1.3));
    }

    #[test]
    fn invalid_params_rejected() {
        let p = CodebookParams {
            eps_detect: 5.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let p = CodebookParams {
            alpha: 1.2,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn training_errors() {
        assert!(train_codebook(&[], CodebookParams::default()).is_err());
        let frames = vec![
            Frame::filled_rgb(4, 4, [1, 2, 3]).unwrap(),
            Frame::filled_rgb(4, 5, [1, 2, 3]).unwrap(),
        ];
        assert!(matches!(
            train_codebook(&frames, CodebookParams::default()),
            Err(Error::Training(_))
        ));
    }

    #[test]
    fn constant_sequence_gives_one_codeword() {
        let frames = constant(6, 4, [90, 120, 60], 90);
        let m = train_codebook(&frames, CodebookParams::default()).unwrap();
        for y in 0..4 {
            for x in 0..6 {
                let cws = m.codewords(x, y);
                assert_eq!(cws.len(), 1);
                assert_eq!(cws[0].freq, 90);
                assert_eq!(cws[0].mnrl, 0);
            }
        }
        assert!(extract_foreground(&m, &frames[17]).unwrap().is_empty());
    }

    #[test]
    fn alternating_values_keep_two_codewords() {
        // chroma of the two colors differs by far more than eps_train
        let a = [200, 60, 60];
        let b = [60, 60, 200];
        let d = {
            let (p, q) = (rgb_to_ycbcr(a), rgb_to_ycbcr(b));
            (p.cb - q.cb).hypot(p.cr - q.cr)
        };
        assert!(d > 10.0);
        let frames: Vec<Frame> = (0..90)
            .map(|t| Frame::filled_rgb(3, 3, if t % 2 == 0 { a } else { b }).unwrap())
            .collect();
        let m = train_codebook(&frames, CodebookParams::default()).unwrap();
        let cws = m.codewords(1, 1);
        assert_eq!(cws.len(), 2);
        // A occupies odd frames 1..89, B even frames 2..90: every gap is one frame.
        assert_eq!(cws[0].mnrl, 1);
        assert_eq!(cws[1].mnrl, 1);
        assert_eq!((cws[0].freq, cws[1].freq), (45, 45));
    }

    #[test]
    fn transient_is_pruned() {
        let bg = [90, 120, 60];
        let mut frames = constant(8, 8, bg, 90);
        for f in frames.iter_mut().take(3) {
            *f = Frame::filled_rgb(8, 8, [250, 30, 30]).unwrap();
        }
        let params = CodebookParams::default();
        let unpruned = train_codebook(
            &frames,
            CodebookParams {
                mnrl_prune_frac: 1.0,
                ..params
            },
        )
        .unwrap();
        let transient = unpruned.codewords(0, 0)[0];
        assert_eq!((transient.first_seen, transient.last_seen), (1, 3));
        assert_eq!(transient.mnrl, 87);
        let bgword = unpruned.codewords(0, 0)[1];
        assert_eq!(bgword.mnrl, 3);

        let m = train_codebook(&frames, params).unwrap();
        assert_eq!(m.codewords(4, 4).len(), 1);
        assert_eq!(m.codewords(4, 4)[0].first_seen, 4);
    }

    #[test]
    fn every_pixel_keeps_a_codeword() {
        // three colors each held for a third of the sequence
        let colors = [[250, 30, 30], [30, 250, 30], [30, 30, 250]];
        let frames: Vec<Frame> = (0..90)
            .map(|t| Frame::filled_rgb(2, 2, colors[t / 30]).unwrap())
            .collect();
        let m = train_codebook(&frames, CodebookParams::default()).unwrap();
        assert_eq!(m.codewords(0, 0).len(), 1);
    }

    #[test]
    fn chroma_shifted_region_is_foreground() {
        let (w, h) = (60, 50);
        let frames = constant(w, h, [120, 110, 100], 10);
        let m = train_codebook(&frames, CodebookParams::default()).unwrap();
        let mut q = frames[0].clone();
        // shift Cr up by ~36 (3 x eps_detect) keeping luma close
        let base = rgb_to_ycbcr([120, 110, 100]);
        let shifted = [190, 90, 90];
        let s = rgb_to_ycbcr(shifted);
        assert!((s.cb - base.cb).hypot(s.cr - base.cr) >= 36.0);
        for y in 10..30 {
            for x in 20..40 {
                let o = (y * w + x) * 3;
                q.data_mut()[o..o + 3].copy_from_slice(&shifted);
            }
        }
        let fg = extract_foreground(&m, &q).unwrap();
        let expected = BinaryMask::from_fn(w, h, |x, y| (20..40).contains(&x) && (10..30).contains(&y));
        assert_eq!(fg, expected);
    }

    #[test]
    fn luma_scaling_within_bounds_is_background() {
        let frames = constant(8, 8, [100, 100, 100], 20);
        let m = train_codebook(&frames, CodebookParams::default()).unwrap();
        for scale in [0.75, 0.9, 1.1, 1.25] {
            let v = (100.0 * scale) as u8;
            let q = Frame::filled_rgb(8, 8, [v, v, v]).unwrap();
            assert!(extract_foreground(&m, &q).unwrap().is_empty(), "scale {scale}");
        }
        let dark = Frame::filled_rgb(8, 8, [60, 60, 60]).unwrap();
        assert_eq!(extract_foreground(&m, &dark).unwrap().count(), 64);
    }

    #[test]
    fn dimension_mismatch() {
        let frames = constant(8, 8, [100, 100, 100], 2);
        let m = train_codebook(&frames, CodebookParams::default()).unwrap();
        let q = Frame::filled_rgb(8, 9, [100, 100, 100]).unwrap();
        assert!(matches!(
            extract_foreground(&m, &q),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn looser_pruning_never_adds_foreground() {
        let mut frames = constant(12, 12, [90, 120, 60], 40);
        for (t, f) in frames.iter_mut().enumerate() {
            if (5..20).contains(&t) {
                for i in 0..36 {
                    f.data_mut()[i * 3..i * 3 + 3].copy_from_slice(&[200, 40, 40]);
                }
            }
        }
        let q = {
            let mut q = frames[0].clone();
            for i in 0..72 {
                q.data_mut()[i * 3..i * 3 + 3].copy_from_slice(&[200, 40, 40]);
            }
            q
        };
        let all = train_codebook(
            &frames,
            CodebookParams {
                mnrl_prune_frac: 1.0,
                ..Default::default()
            },
        )
        .unwrap();
        let strict = train_codebook(&frames, CodebookParams::default()).unwrap();
        let fg_all = extract_foreground(&all, &q).unwrap();
        let fg_strict = extract_foreground(&strict, &q).unwrap();
        assert!(fg_all.is_subset_of(&fg_strict));
        assert!(fg_all.count() < fg_strict.count());
    }

    #[test]
    fn file_round_trip() {
        let mut frames = constant(5, 3, [90, 120, 60], 30);
        frames[4] = Frame::filled_rgb(5, 3, [10, 200, 30]).unwrap();
        let m = train_codebook(&frames, CodebookParams::default()).unwrap();
        let bytes = m.to_bytes();
        assert_eq!(&bytes[..4], b"CBK1");
        let back = CodebookModel::from_bytes(&bytes).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn corrupt_file_rejected() {
        let frames = constant(2, 2, [9, 9, 9], 2);
        let mut bytes = train_codebook(&frames, CodebookParams::default()).unwrap().to_bytes();
        assert!(CodebookModel::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        bytes.push(0);
        assert!(CodebookModel::from_bytes(&bytes).is_err());
        bytes[0] = b'X';
        assert!(CodebookModel::from_bytes(&bytes).is_err());
    }
}
