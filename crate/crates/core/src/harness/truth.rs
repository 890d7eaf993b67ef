//! Ground-truth files: per-frame labels and raise intervals.

use std::fmt::Write as _;

use crate::cpdh::Gesture;
use crate::imgcore::Rect;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TruthRow {
    pub index: usize,
    pub label: Option<Gesture>,
    pub bbox: Option<Rect>,
}

/// `index<TAB>label<TAB>x y w h`, one row per frame; `none` rows carry a
/// zero box.
pub fn format_truth(rows: &[TruthRow]) -> String {
    let mut s = String::new();
    for r in rows {
        let b = r.bbox.unwrap_or(Rect::new(0, 0, 0, 0));
        let label = r.label.map_or("none", Gesture::token);
        let _ = writeln!(s, "{}\t{}\t{} {} {} {}", r.index, label, b.x, b.y, b.w, b.h);
    }
    s
}

pub fn parse_truth(text: &str) -> Result<Vec<TruthRow>> {
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |what: &str| Error::Parse(format!("truth line {}: {what}", n + 1));
        let cols: Vec<&str> = line.split('\t').collect();
        if n == 0 && cols[0].trim().parse::<usize>().is_err() {
            continue; // header row
        }
        if cols.len() != 3 {
            return Err(bad("expected 3 tab-separated columns"));
        }
        let index = cols[0].trim().parse().map_err(|_| bad("bad frame index"))?;
        let label = match cols[1].trim() {
            "none" => None,
            g => Some(g.parse()?),
        };
        let nums: Vec<usize> = cols[2]
            .split_whitespace()
            .map(|v| v.parse().map_err(|_| bad("bad box")))
            .collect::<Result<_>>()?;
        if nums.len() != 4 {
            return Err(bad("box needs 4 numbers"));
        }
        let rect = Rect::new(nums[0], nums[1], nums[2], nums[3]);
        rows.push(TruthRow {
            index,
            label,
            bbox: (rect.area() > 0).then_some(rect),
        });
    }
    Ok(rows)
}

/// Closed time interval in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Self {
        Interval { start, end }
    }

    /// Intersection over union of two intervals; two equal points give 1.
    pub fn iou(&self, other: &Interval) -> f64 {
        let inter = (self.end.min(other.end) - self.start.max(other.start)).max(0.0);
        let union = self.end.max(other.end) - self.start.min(other.start);
        if union > 0.0 {
            inter / union
        } else if self == other {
            1.0
        } else {
            0.0
        }
    }
}

pub fn format_intervals(intervals: &[Interval]) -> String {
    let mut s = String::from("t_start\tt_end\n");
    for i in intervals {
        let _ = writeln!(s, "{}\t{}", i.start, i.end);
    }
    s
}

pub fn parse_intervals(text: &str) -> Result<Vec<Interval>> {
    let mut out = Vec::new();
    for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let (a, b) = line
            .split_once('\t')
            .ok_or_else(|| Error::Parse(format!("bad interval line {line:?}")))?;
        let num = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad time {v:?}")))
        };
        out.push(Interval::new(num(a)?, num(b)?));
    }
    Ok(out)
}
