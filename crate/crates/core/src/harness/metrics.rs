//! Per-frame recall/precision and ROC over the 1-NN acceptance distance.

use std::fmt::Write as _;

use num_rational::Ratio;

use super::truth::Interval;
use crate::cpdh::{Classification, Gesture};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub tpr: f64,
    pub fpr: f64,
}

/// Confusion counts for one positive class.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub roc: Vec<RocPoint>,
}

impl EvalReport {
    pub fn from_counts(tp: u64, fp: u64, fn_: u64) -> Self {
        EvalReport {
            tp,
            fp,
            fn_,
            roc: Vec::new(),
        }
    }

    /// `tp / (tp + fn)`, absent when there are no positives.
    pub fn recall(&self) -> Option<Ratio<u64>> {
        (self.tp + self.fn_ > 0).then(|| Ratio::new(self.tp, self.tp + self.fn_))
    }

    /// `tp / (tp + fp)`, absent when nothing was predicted positive.
    pub fn precision(&self) -> Option<Ratio<u64>> {
        (self.tp + self.fp > 0).then(|| Ratio::new(self.tp, self.tp + self.fp))
    }

    pub fn recall_pct(&self) -> Option<f64> {
        self.recall().map(pct)
    }

    pub fn precision_pct(&self) -> Option<f64> {
        self.precision().map(pct)
    }
}

fn pct(r: Ratio<u64>) -> f64 {
    100.0 * *r.numer() as f64 / *r.denom() as f64
}

/// Frame-level counts for `positive`.
pub fn evaluate(pred: &[Option<Gesture>], truth: &[Option<Gesture>], positive: Gesture) -> Result<EvalReport> {
    if pred.len() != truth.len() {
        return Err(Error::param(format!(
            "{} predictions for {} truth frames",
            pred.len(),
            truth.len()
        )));
    }
    let p = Some(positive);
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (a, b) in pred.iter().zip(truth) {
        match (*a == p, *b == p) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    Ok(EvalReport::from_counts(tp, fp, fn_))
}

/// `(threshold, tpr, fpr)` for each threshold, predicting positive when
/// `distance <= threshold`.
pub fn roc_points(scored: &[(f64, bool)], thresholds: &[f64]) -> Result<Vec<RocPoint>> {
    if thresholds.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::param("thresholds must be sorted ascending"));
    }
    let mut pos: Vec<f64> = scored.iter().filter(|s| s.1).map(|s| s.0).collect();
    let mut neg: Vec<f64> = scored.iter().filter(|s| !s.1).map(|s| s.0).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::DegenerateRoc {
            positives: pos.len(),
            negatives: neg.len(),
        });
    }
    pos.sort_by(f64::total_cmp);
    neg.sort_by(f64::total_cmp);
    Ok(thresholds
        .iter()
        .map(|&t| RocPoint {
            threshold: t,
            tpr: pos.partition_point(|&d| d <= t) as f64 / pos.len() as f64,
            fpr: neg.partition_point(|&d| d <= t) as f64 / neg.len() as f64,
        })
        .collect())
}

/// One threshold below every score, then each distinct score.
pub fn roc_thresholds(scored: &[(f64, bool)]) -> Vec<f64> {
    let mut d: Vec<f64> = scored.iter().map(|s| s.0).collect();
    d.sort_by(f64::total_cmp);
    d.dedup();
    if let Some(&first) = d.first() {
        d.insert(0, first - 1.0);
    }
    d
}

/// ROC scores from classified frames: the nearest-neighbour distance, and
/// whether its label matches the truth.
pub fn recognition_scores(nearest: &[Option<Classification>], truth: &[Option<Gesture>]) -> Vec<(f64, bool)> {
    nearest
        .iter()
        .zip(truth)
        .filter_map(|(c, t)| c.map(|c| (c.distance, Some(c.label) == *t)))
        .collect()
}

/// Event-level counts: a truth interval is matched by at most one predicted
/// interval with IoU at least `min_iou` (greedy, in order).
pub fn match_intervals(pred: &[Interval], truth: &[Interval], min_iou: f64) -> EvalReport {
    let mut used = vec![false; pred.len()];
    let mut tp = 0;
    for t in truth {
        let hit = pred
            .iter()
            .enumerate()
            .filter(|(i, p)| !used[*i] && p.iou(t) >= min_iou)
            .max_by(|a, b| a.1.iou(t).total_cmp(&b.1.iou(t)));
        if let Some((i, _)) = hit {
            used[i] = true;
            tp += 1;
        }
    }
    EvalReport::from_counts(tp, pred.len() as u64 - tp, truth.len() as u64 - tp)
}

/// Tab-separated report, one row per named report.
pub fn format_report(rows: &[(&str, &EvalReport)]) -> String {
    let opt = |v: Option<f64>| v.map_or("NA".to_string(), |v| format!("{v:.2}"));
    let mut s = String::from("class\ttp\tfp\tfn\trecall_pct\tprecision_pct\n");
    for (name, r) in rows {
        let _ = writeln!(
            s,
            "{name}\t{}\t{}\t{}\t{}\t{}",
            r.tp,
            r.fp,
            r.fn_,
            opt(r.recall_pct()),
            opt(r.precision_pct())
        );
    }
    s
}

pub fn format_roc(points: &[RocPoint]) -> String {
    let mut s = String::from("threshold\ttpr\tfpr\n");
    for p in points {
        let _ = writeln!(s, "{}\t{}\t{}", p.threshold, p.tpr, p.fpr);
    }
    s
}
