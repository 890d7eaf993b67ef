use crate::imgcore::{Frame, Rect};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CamShiftParams {
    pub max_iterations: usize,
    /// Mean shift stops once the window moves less than this many pixels.
    pub min_shift: f64,
    /// Smallest window side after resizing.
    pub min_side: usize,
    /// Windows holding less probability mass than this are lost.
    pub lost_threshold: f64,
}

impl Default for CamShiftParams {
    fn default() -> Self {
        CamShiftParams {
            max_iterations: 10,
            min_shift: 1.0,
            min_side: 8,
            lost_threshold: 5.0 * 255.0,
        }
    }
}

/// Per-stream tracker state.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackState {
    pub window: Rect,
    pub frames_since_reinit: usize,
    pub reinit_period: usize,
    pub lost: bool,
}

impl TrackState {
    /// A lost tracker covering the whole frame, so the first step runs the
    /// detector.
    pub fn new(width: usize, height: usize, reinit_period: usize) -> Self {
        let reinit_period = reinit_period.max(1);
        TrackState {
            window: Rect::new(0, 0, width, height),
            frames_since_reinit: reinit_period - 1,
            reinit_period,
            lost: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanShiftOutcome {
    pub window: Rect,
    /// Zeroth moment of the final window.
    pub mass: f64,
    /// Mass of every accepted window, starting with the initial one.
    pub masses: Vec<f64>,
}

struct Moments {
    m00: f64,
    m10: f64,
    m01: f64,
}

fn moments(prob: &Frame, r: &Rect) -> Moments {
    let (mut m00, mut m10, mut m01) = (0.0, 0.0, 0.0);
    for y in r.y..r.bottom() {
        let mut row = 0u64;
        let mut row_x = 0u64;
        for x in r.x..r.right() {
            let p = prob.luma_at(x, y) as u64;
            row += p;
            row_x += p * x as u64;
        }
        m00 += row as f64;
        m10 += row_x as f64;
        m01 += (row * y as u64) as f64;
    }
    Moments { m00, m10, m01 }
}

/// Places a `w x h` window so its center is as close to `(cx, cy)` as the
/// frame allows.
fn centered(cx: f64, cy: f64, w: usize, h: usize, fw: usize, fh: usize) -> Rect {
    let w = w.clamp(1, fw);
    let h = h.clamp(1, fh);
    let x = (cx - (w as f64 - 1.0) / 2.0).round().clamp(0.0, (fw - w) as f64) as usize;
    let y = (cy - (h as f64 - 1.0) / 2.0).round().clamp(0.0, (fh - h) as f64) as usize;
    Rect::new(x, y, w, h)
}

fn clamp_into(r: Rect, fw: usize, fh: usize) -> Rect {
    let w = r.w.clamp(1, fw);
    let h = r.h.clamp(1, fh);
    Rect::new(r.x.min(fw - w), r.y.min(fh - h), w, h)
}

fn center_of(r: &Rect) -> (f64, f64) {
    (
        r.x as f64 + (r.w as f64 - 1.0) / 2.0,
        r.y as f64 + (r.h as f64 - 1.0) / 2.0,
    )
}

/// Fixed-size mean shift. A move is only accepted when it does not lose
/// mass, so the mass sequence is non-decreasing.
pub fn mean_shift(prob: &Frame, start: Rect, params: &CamShiftParams) -> MeanShiftOutcome {
    let (fw, fh) = prob.dims();
    let mut window = clamp_into(start, fw, fh);
    let mut m = moments(prob, &window);
    let mut masses = vec![m.m00];
    for _ in 0..params.max_iterations {
        if m.m00 <= 0.0 {
            break;
        }
        let next = centered(m.m10 / m.m00, m.m01 / m.m00, window.w, window.h, fw, fh);
        if next == window {
            break;
        }
        let nm = moments(prob, &next);
        if nm.m00 < m.m00 {
            break;
        }
        let (ox, oy) = center_of(&window);
        let (nx, ny) = center_of(&next);
        window = next;
        m = nm;
        masses.push(m.m00);
        if (nx - ox).hypot(ny - oy) < params.min_shift {
            break;
        }
    }
    MeanShiftOutcome {
        window,
        mass: m.m00,
        masses,
    }
}

/// One CamShift update of `state.window` on a probability image.
///
/// Empty windows mark the track lost and keep the window. Otherwise the
/// window is mean-shifted, then resized to a square of side
/// `2 * sqrt(M00 / 255)` clamped to `[min_side, min(frame w, h)]` around the
/// converged center.
pub fn camshift_track(prob: &Frame, state: &TrackState, params: &CamShiftParams) -> TrackState {
    let (fw, fh) = prob.dims();
    let start = clamp_into(state.window, fw, fh);
    let mut next = state.clone();
    if moments(prob, &start).m00 <= 0.0 {
        next.window = start;
        next.lost = true;
        return next;
    }
    let ms = mean_shift(prob, start, params);
    let (cx, cy) = center_of(&ms.window);
    let max_side = fw.min(fh);
    let side = ((2.0 * (ms.mass / 255.0).sqrt()).round() as usize).clamp(params.min_side.min(max_side), max_side);
    next.window = centered(cx, cy, side, side, fw, fh);
    next.lost = ms.mass < params.lost_threshold;
    next
}
