use crate::imgcore::{label_components, BinaryMask, CannyParams};
use crate::{Error, Result};

/// Ordered boundary points, in traversal order.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourPointSet {
    pub points: Vec<(f64, f64)>,
}

impl ContourPointSet {
    pub fn new(points: Vec<(f64, f64)>) -> Self {
        ContourPointSet { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Perimeter of the closed polyline.
    pub fn perimeter(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| {
                let (a, b) = (self.points[i], self.points[(i + 1) % n]);
                (b.0 - a.0).hypot(b.1 - a.1)
            })
            .sum()
    }
}

/// Neighbor offsets in counter-clockwise order as seen on screen (y down).
const DIRS: [(isize, isize); 8] = [
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];
const WEST: usize = 4;

fn dir_index(dx: isize, dy: isize) -> usize {
    DIRS.iter()
        .position(|&d| d == (dx, dy))
        .expect("neighbors are 8-adjacent")
}

/// Moore-neighbor boundary trace of the component containing `start`, which
/// must be its topmost-leftmost pixel. Counter-clockwise on screen.
fn moore_trace(region: &BinaryMask, start: (usize, usize)) -> Vec<(usize, usize)> {
    let at = |p: (usize, usize), d: usize| -> Option<(usize, usize)> {
        let (x, y) = (p.0 as isize + DIRS[d].0, p.1 as isize + DIRS[d].1);
        region.get_or_false(x, y).then_some((x as usize, y as usize))
    };
    let mut points = vec![start];
    let (mut p, mut back) = (start, WEST);
    let mut first_move = None;
    let limit = 4 * region.count() + 8;
    for _ in 0..limit {
        let found = (1..=8).map(|k| (back + k) % 8).find_map(|d| at(p, d).map(|n| (n, d)));
        let Some((next, d)) = found else { break };
        if p == start {
            match first_move {
                Some(m) if m == next => {
                    points.pop();
                    break;
                }
                None => first_move = Some(next),
                _ => {}
            }
        }
        // the neighbor scanned just before `next` is background; it becomes
        // the backtrack point of `next`
        let prev = DIRS[(d + 7) % 8];
        let prev_abs = (p.0 as isize + prev.0, p.1 as isize + prev.1);
        back = dir_index(prev_abs.0 - next.0 as isize, prev_abs.1 - next.1 as isize);
        points.push(next);
        p = next;
    }
    points
}

/// Contour of the largest edge component of `mask`.
///
/// Canny runs on the mask rendered as 0/255 grey and the largest edge
/// component is traced counter-clockwise from its topmost-leftmost pixel.
/// A component touching fewer than 3 mask pixels only rings a speck and is
/// reported as degenerate.
pub fn trace_contour(mask: &BinaryMask, canny: &CannyParams) -> Result<ContourPointSet> {
    if mask.is_empty() {
        return Err(Error::DegenerateShape("empty mask".into()));
    }
    let edges = canny.apply(&mask.to_gray())?;
    let labels = label_components(&edges);
    let Some(largest) = labels.blobs.first() else {
        return Err(Error::DegenerateShape("no contour edges".into()));
    };
    let region = labels.mask_of(largest.label);
    let on_object = region.and(mask)?.count();
    if on_object < 3 {
        return Err(Error::DegenerateShape(format!(
            "edge ring has {on_object} pixels on the object"
        )));
    }
    let w = region.width();
    let start = region
        .bits()
        .iter()
        .position(|&b| b)
        .map(|i| (i % w, i / w))
        .expect("largest component is non-empty");
    let points: Vec<(f64, f64)> = moore_trace(&region, start)
        .into_iter()
        .map(|(x, y)| (x as f64, y as f64))
        .collect();
    if points.len() < 3 {
        return Err(Error::DegenerateShape(format!("{} contour points", points.len())));
    }
    Ok(ContourPointSet { points })
}

/// `n` points at uniform arc-length spacing along the closed contour,
/// starting at its first point.
pub fn sample_contour(contour: &ContourPointSet, n: usize) -> Result<ContourPointSet> {
    if n < 3 {
        return Err(Error::param(format!("need at least 3 samples, got {n}")));
    }
    let pts = &contour.points;
    let m = pts.len();
    if m == 0 {
        return Err(Error::DegenerateShape("empty contour".into()));
    }
    let seg: Vec<f64> = (0..m)
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % m]);
            (b.0 - a.0).hypot(b.1 - a.1)
        })
        .collect();
    let total: f64 = seg.iter().sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateShape("contour has zero length".into()));
    }
    let mut out = Vec::with_capacity(n);
    let (mut i, mut start) = (0usize, 0.0f64);
    for k in 0..n {
        let target = k as f64 * total / n as f64;
        while i + 1 < m && start + seg[i] <= target {
            start += seg[i];
            i += 1;
        }
        let (a, b) = (pts[i], pts[(i + 1) % m]);
        let t = if seg[i] > 0.0 {
            ((target - start) / seg[i]).clamp(0.0, 1.0)
        } else {
            0.0
        };
        out.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
    }
    Ok(ContourPointSet { points: out })
}
