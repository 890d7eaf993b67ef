use super::{Frame, Rect};
use crate::Result;

/// Summed-area tables of pixel values and squared pixel values, each
/// `(width + 1) x (height + 1)` with a zero first row and column.
#[derive(Debug, Clone)]
pub struct IntegralImage {
    width: usize,
    height: usize,
    sum: Vec<u64>,
    sq_sum: Vec<u64>,
}

impl IntegralImage {
    /// Built from the first channel of `img`.
    pub fn new(img: &Frame) -> Self {
        let (w, h) = img.dims();
        let stride = w + 1;
        let mut sum = vec![0u64; stride * (h + 1)];
        let mut sq_sum = vec![0u64; stride * (h + 1)];
        for y in 0..h {
            let mut row = 0u64;
            let mut row_sq = 0u64;
            for x in 0..w {
                let v = img.luma_at(x, y) as u64;
                row += v;
                row_sq += v * v;
                let i = (y + 1) * stride + x + 1;
                sum[i] = sum[i - stride] + row;
                sq_sum[i] = sq_sum[i - stride] + row_sq;
            }
        }
        IntegralImage {
            width: w,
            height: h,
            sum,
            sq_sum,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Table entry `(i, j)`: sum of all pixels with `x < i` and `y < j`.
    pub fn entry(&self, i: usize, j: usize) -> u64 {
        self.sum[j * (self.width + 1) + i]
    }

    #[inline]
    fn lookup(table: &[u64], stride: usize, r: &Rect) -> u64 {
        let a = table[r.y * stride + r.x];
        let b = table[r.y * stride + r.x + r.w];
        let c = table[(r.y + r.h) * stride + r.x];
        let d = table[(r.y + r.h) * stride + r.x + r.w];
        d + a - b - c
    }

    pub fn rect_sum(&self, r: &Rect) -> Result<u64> {
        self.check(r)?;
        Ok(self.rect_sum_unchecked(r))
    }

    pub fn rect_sq_sum(&self, r: &Rect) -> Result<u64> {
        self.check(r)?;
        Ok(Self::lookup(&self.sq_sum, self.width + 1, r))
    }

    /// Caller guarantees `r` lies inside the image.
    #[inline]
    pub(crate) fn rect_sum_unchecked(&self, r: &Rect) -> u64 {
        Self::lookup(&self.sum, self.width + 1, r)
    }

    #[inline]
    pub(crate) fn rect_sq_sum_unchecked(&self, r: &Rect) -> u64 {
        Self::lookup(&self.sq_sum, self.width + 1, r)
    }

    fn check(&self, r: &Rect) -> Result<()> {
        if r.fits_in(self.width, self.height) {
            Ok(())
        } else {
            Err(crate::Error::Bounds {
                x: r.x,
                y: r.y,
                w: r.w,
                h: r.h,
                width: self.width,
                height: self.height,
            })
        }
    }
}

/// Sum of `img` over `rect` through a freshly built integral image.
pub fn integral_rect_sum(img: &Frame, rect: Rect) -> Result<u64> {
    img.check_rect(&rect)?;
    IntegralImage::new(img).rect_sum(&rect)
}
