use super::{BinaryMask, Rect};

/// An 8-connected foreground component.
#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    /// 1-based; matches the value in [`Labels::labels`].
    pub label: u32,
    pub area: usize,
    pub bbox: Rect,
    pub centroid: (f64, f64),
}

/// Per-pixel component labels (0 = background) with the blob list.
#[derive(Debug, Clone)]
pub struct Labels {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
    pub blobs: Vec<Blob>,
}

impl Labels {
    /// Mask of the pixels carrying `label`.
    pub fn mask_of(&self, label: u32) -> BinaryMask {
        BinaryMask::from_bits(
            self.width,
            self.height,
            self.labels.iter().map(|&l| l == label).collect(),
        )
        .expect("same dimensions")
    }
}

/// Labels 8-connected components. Blobs are ordered by area descending,
/// then by `(bbox.y, bbox.x)`, and labelled `1..` in that order.
pub fn label_components(mask: &BinaryMask) -> Labels {
    let (w, h) = mask.dims();
    let mut raw = vec![0u32; w * h];
    let mut found: Vec<(usize, Rect, f64, f64)> = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !mask.bits()[start] || raw[start] != 0 {
            continue;
        }
        let id = found.len() as u32 + 1;
        raw[start] = id;
        stack.push(start);
        let (mut area, mut sx, mut sy) = (0usize, 0f64, 0f64);
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            area += 1;
            sx += x as f64;
            sy += y as f64;
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let j = ny * w + nx;
                    if mask.bits()[j] && raw[j] == 0 {
                        raw[j] = id;
                        stack.push(j);
                    }
                }
            }
        }
        let bbox = Rect::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1);
        found.push((area, bbox, sx / area as f64, sy / area as f64));
    }

    let mut order: Vec<usize> = (0..found.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(found[i].0), found[i].1.y, found[i].1.x));
    let mut relabel = vec![0u32; found.len() + 1];
    let blobs = order
        .iter()
        .enumerate()
        .map(|(rank, &i)| {
            relabel[i + 1] = rank as u32 + 1;
            let (area, bbox, cx, cy) = found[i];
            Blob {
                label: rank as u32 + 1,
                area,
                bbox,
                centroid: (cx, cy),
            }
        })
        .collect();
    for l in raw.iter_mut() {
        *l = relabel[*l as usize];
    }
    Labels {
        width: w,
        height: h,
        labels: raw,
        blobs,
    }
}

pub fn connected_components(mask: &BinaryMask) -> Vec<Blob> {
    label_components(mask).blobs
}
