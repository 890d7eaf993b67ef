//! Boosted cascade of rectangle features, evaluated on integral images.
//!
//! Model file (`HCAS1`), whitespace-delimited:
//!
//! ```text
//! HCAS1
//! <window w> <window h>
//! <stage count>
//! per stage:  <threshold> <weak count>
//!   per weak: <rect count> (<x> <y> <w> <h> <weight>)* <split> <left> <right>
//! ```

use std::fmt::Write as _;

use crate::imgcore::{Frame, IntegralImage, Rect};
use crate::{par, Error, Result};

const HEADER: &str = "HCAS1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedRect {
    pub rect: Rect,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakClassifier {
    pub feature: Vec<WeightedRect>,
    pub split_threshold: f64,
    /// Output when the normalized feature is below `split_threshold`.
    pub left_value: f64,
    pub right_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub threshold: f64,
    pub weak: Vec<WeakClassifier>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeModel {
    pub window: (usize, usize),
    pub stages: Vec<Stage>,
}

impl CascadeModel {
    pub fn validate(&self) -> Result<()> {
        let (ww, wh) = self.window;
        if ww == 0 || wh == 0 {
            return Err(Error::Model(format!("empty base window {ww}x{wh}")));
        }
        for (s, stage) in self.stages.iter().enumerate() {
            if stage.threshold.is_nan() {
                return Err(Error::Model(format!("stage {s}: NaN threshold")));
            }
            for (k, weak) in stage.weak.iter().enumerate() {
                for wr in &weak.feature {
                    if !wr.rect.fits_in(ww, wh) {
                        return Err(Error::Model(format!(
                            "stage {s} weak {k}: rect {:?} outside {ww}x{wh} window",
                            wr.rect
                        )));
                    }
                    if !wr.weight.is_finite() {
                        return Err(Error::Model(format!("stage {s} weak {k}: non-finite weight")));
                    }
                }
                if weak.split_threshold.is_nan()
                    || !weak.left_value.is_finite()
                    || !weak.right_value.is_finite()
                {
                    return Err(Error::Model(format!("stage {s} weak {k}: bad values")));
                }
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let header = tokens.next().unwrap_or_default();
        if header != HEADER {
            return Err(Error::Model(format!("expected header {HEADER}, found {header:?}")));
        }
        let mut next = |what: &str| {
            tokens
                .next()
                .ok_or_else(|| Error::Model(format!("unexpected end of file reading {what}")))
        };
        fn num<T: std::str::FromStr>(tok: &str, what: &str) -> Result<T> {
            tok.parse()
                .map_err(|_| Error::Model(format!("bad {what}: {tok:?}")))
        }
        let window = (
            num(next("window width")?, "window width")?,
            num(next("window height")?, "window height")?,
        );
        let n_stages: usize = num(next("stage count")?, "stage count")?;
        let mut stages = Vec::with_capacity(n_stages.min(1024));
        for _ in 0..n_stages {
            let threshold = num(next("stage threshold")?, "stage threshold")?;
            let n_weak: usize = num(next("weak count")?, "weak count")?;
            let mut weak = Vec::with_capacity(n_weak.min(4096));
            for _ in 0..n_weak {
                let n_rects: usize = num(next("rect count")?, "rect count")?;
                let mut feature = Vec::with_capacity(n_rects.min(16));
                for _ in 0..n_rects {
                    let rect = Rect::new(
                        num(next("rect x")?, "rect x")?,
                        num(next("rect y")?, "rect y")?,
                        num(next("rect w")?, "rect w")?,
                        num(next("rect h")?, "rect h")?,
                    );
                    let weight = num(next("rect weight")?, "rect weight")?;
                    feature.push(WeightedRect { rect, weight });
                }
                weak.push(WeakClassifier {
                    feature,
                    split_threshold: num(next("split threshold")?, "split threshold")?,
                    left_value: num(next("left value")?, "left value")?,
                    right_value: num(next("right value")?, "right value")?,
                });
            }
            stages.push(Stage { threshold, weak });
        }
        if let Some(extra) = tokens.next() {
            return Err(Error::Model(format!("trailing token {extra:?}")));
        }
        let model = CascadeModel { window, stages };
        model.validate()?;
        Ok(model)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{HEADER}");
        let _ = writeln!(s, "{} {}", self.window.0, self.window.1);
        let _ = writeln!(s, "{}", self.stages.len());
        for stage in &self.stages {
            let _ = writeln!(s, "{} {}", stage.threshold, stage.weak.len());
            for weak in &stage.weak {
                let _ = write!(s, "  {}", weak.feature.len());
                for wr in &weak.feature {
                    let r = wr.rect;
                    let _ = write!(s, "  {} {} {} {} {}", r.x, r.y, r.w, r.h, wr.weight);
                }
                let _ = writeln!(
                    s,
                    "  {} {} {}",
                    weak.split_threshold, weak.left_value, weak.right_value
                );
            }
        }
        s
    }
}

struct Scale {
    factor: f64,
    win_w: usize,
    win_h: usize,
    step: usize,
}

fn scales(frame: (usize, usize), window: (usize, usize), scale_factor: f64) -> Vec<Scale> {
    let mut out = Vec::new();
    let mut factor = 1.0f64;
    loop {
        let win_w = (window.0 as f64 * factor).round() as usize;
        let win_h = (window.1 as f64 * factor).round() as usize;
        if win_w > frame.0 || win_h > frame.1 {
            break;
        }
        out.push(Scale {
            factor,
            win_w,
            win_h,
            step: ((factor / 10.0).round() as usize).max(1),
        });
        factor *= scale_factor;
    }
    out
}

/// Number of windows the detector evaluates on a `frame`-sized image.
pub fn scan_positions(frame: (usize, usize), window: (usize, usize), scale_factor: f64) -> usize {
    scales(frame, window, scale_factor)
        .iter()
        .map(|s| ((frame.0 - s.win_w) / s.step + 1) * ((frame.1 - s.win_h) / s.step + 1))
        .sum()
}

fn scale_rect(r: &Rect, s: f64, win_w: usize, win_h: usize) -> Rect {
    let x = ((r.x as f64 * s).round() as usize).min(win_w);
    let y = ((r.y as f64 * s).round() as usize).min(win_h);
    let w = ((r.w as f64 * s).round() as usize).min(win_w - x);
    let h = ((r.h as f64 * s).round() as usize).min(win_h - y);
    Rect::new(x, y, w, h)
}

/// Per-scale model with feature rects resized to the scanned window.
struct ScaledModel<'a> {
    model: &'a CascadeModel,
    rects: Vec<Vec<Vec<Rect>>>,
}

impl<'a> ScaledModel<'a> {
    fn new(model: &'a CascadeModel, s: &Scale) -> Self {
        let rects = model
            .stages
            .iter()
            .map(|st| {
                st.weak
                    .iter()
                    .map(|wk| {
                        wk.feature
                            .iter()
                            .map(|wr| scale_rect(&wr.rect, s.factor, s.win_w, s.win_h))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        ScaledModel { model, rects }
    }

    fn passes(&self, ii: &IntegralImage, win: &Rect, area_scale: f64) -> bool {
        let area = win.area() as f64;
        let mean = ii.rect_sum_unchecked(win) as f64 / area;
        let var = ii.rect_sq_sum_unchecked(win) as f64 / area - mean * mean;
        let sigma = var.max(0.0).sqrt().max(1.0);
        for (stage, stage_rects) in self.model.stages.iter().zip(&self.rects) {
            let mut score = 0.0;
            for (weak, rects) in stage.weak.iter().zip(stage_rects) {
                let mut value = 0.0;
                for (wr, r) in weak.feature.iter().zip(rects) {
                    let abs = Rect::new(win.x + r.x, win.y + r.y, r.w, r.h);
                    let sum = ii.rect_sum_unchecked(&abs) as f64;
                    value += wr.weight * (sum - mean * r.area() as f64);
                }
                value /= area_scale * sigma;
                score += if value < weak.split_threshold {
                    weak.left_value
                } else {
                    weak.right_value
                };
            }
            if !(score >= stage.threshold) {
                return false;
            }
        }
        true
    }
}

/// Sliding-window cascade detection.
///
/// Features are evaluated on the window's mean- and variance-normalized
/// pixels, in base-window units. With `min_neighbors == 0` every passing
/// window is returned; otherwise passes overlapping with IoU > 0.3 are
/// grouped, groups smaller than `min_neighbors` are dropped, and each group
/// is replaced by its average rectangle. Results are sorted by area
/// descending, then by position.
pub fn viola_jones_detect(
    img: &Frame,
    model: &CascadeModel,
    scale_factor: f64,
    min_neighbors: usize,
) -> Result<Vec<Rect>> {
    model.validate()?;
    if !(scale_factor > 1.0) || !scale_factor.is_finite() {
        return Err(Error::param(format!("scale factor must be > 1, got {scale_factor}")));
    }
    let ii = IntegralImage::new(img);
    let (fw, fh) = img.dims();
    let mut raw = Vec::new();
    for s in scales((fw, fh), model.window, scale_factor) {
        let scaled = ScaledModel::new(model, &s);
        let ys: Vec<usize> = (0..=fh - s.win_h).step_by(s.step).collect();
        let area_scale = s.factor * s.factor;
        let rows = par::map_slice(&ys, |&y| {
            (0..=fw - s.win_w)
                .step_by(s.step)
                .map(|x| Rect::new(x, y, s.win_w, s.win_h))
                .filter(|win| scaled.passes(&ii, win, area_scale))
                .collect::<Vec<_>>()
        });
        raw.extend(rows.into_iter().flatten());
    }
    let mut out = if min_neighbors == 0 {
        raw
    } else {
        group(&raw, min_neighbors)
    };
    out.sort_by_key(|r| (std::cmp::Reverse(r.area()), r.y, r.x));
    Ok(out)
}

fn group(rects: &[Rect], min_neighbors: usize) -> Vec<Rect> {
    let n = rects.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if rects[i].iou(&rects[j]) > 0.3 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<Rect>> = Default::default();
    for (i, r) in rects.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(*r);
    }
    groups
        .into_values()
        .filter(|g| g.len() >= min_neighbors)
        .map(|g| {
            let k = g.len() as f64;
            let avg = |f: fn(&Rect) -> usize| (g.iter().map(|r| f(r) as f64).sum::<f64>() / k).round() as usize;
            Rect::new(avg(|r| r.x), avg(|r| r.y), avg(|r| r.w).max(1), avg(|r| r.h).max(1))
        })
        .collect()
}
