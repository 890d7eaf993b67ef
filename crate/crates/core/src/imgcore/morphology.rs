//! Binary morphology with a `(2r+1) x (2r+1)` square structuring element.
//!
//! Only in-image pixels take part in a neighborhood. Dilation therefore
//! treats the outside as false and erosion treats it as true, which keeps
//! the two exactly dual under complement.

use super::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorphOp {
    Erode,
    Dilate,
    /// Erode then dilate.
    Open,
    /// Dilate then erode.
    Close,
}

pub fn morph(mask: &BinaryMask, op: MorphOp, kernel_radius: usize) -> BinaryMask {
    match op {
        MorphOp::Erode => square(mask, kernel_radius, true),
        MorphOp::Dilate => square(mask, kernel_radius, false),
        MorphOp::Open => square(&square(mask, kernel_radius, true), kernel_radius, false),
        MorphOp::Close => square(&square(mask, kernel_radius, false), kernel_radius, true),
    }
}

fn square(mask: &BinaryMask, r: usize, erode: bool) -> BinaryMask {
    let (w, h) = mask.dims();
    let rows = pass(mask.bits(), w, h, r, erode, true);
    let bits = pass(&rows, w, h, r, erode, false);
    BinaryMask::from_bits(w, h, bits).expect("same dimensions")
}

/// One 1-D min/max pass along rows (`horizontal`) or columns.
fn pass(src: &[bool], w: usize, h: usize, r: usize, erode: bool, horizontal: bool) -> Vec<bool> {
    let (lines, len) = if horizontal { (h, w) } else { (w, h) };
    let at = |line: usize, i: usize| {
        if horizontal {
            line * w + i
        } else {
            i * w + line
        }
    };
    let mut out = vec![false; src.len()];
    let mut prefix = vec![0usize; len + 1];
    for line in 0..lines {
        for i in 0..len {
            prefix[i + 1] = prefix[i] + src[at(line, i)] as usize;
        }
        for i in 0..len {
            let lo = i.saturating_sub(r);
            let hi = (i + r + 1).min(len);
            let set = prefix[hi] - prefix[lo];
            out[at(line, i)] = if erode { set == hi - lo } else { set > 0 };
        }
    }
    out
}
