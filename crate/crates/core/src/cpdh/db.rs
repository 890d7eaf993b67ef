use std::fmt::Write as _;

use super::descriptor::squared_distance;
use super::{cpdh_distance, describe, CpdhDescriptor, DescriptorParams, Gesture};
use crate::imgcore::BinaryMask;
use crate::{par, Error, Result};

const HEADER: &str = "CPDH1";

#[derive(Debug, Clone, PartialEq)]
pub struct DbEntry {
    pub descriptor: CpdhDescriptor,
    pub label: Gesture,
}

/// Labelled descriptors sharing one `(u, v, n)` shape.
#[derive(Debug, Clone, PartialEq)]
pub struct GestureDb {
    u: usize,
    v: usize,
    n: usize,
    entries: Vec<DbEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub label: Gesture,
    pub distance: f64,
    pub entry_index: usize,
}

/// Result of [`build_gesture_db`].
#[derive(Debug, Clone)]
pub struct DbBuild {
    pub db: GestureDb,
    /// Masks dropped because no usable contour could be extracted.
    pub skipped: usize,
}

impl GestureDb {
    pub fn new(u: usize, v: usize, n: usize) -> Self {
        GestureDb {
            u,
            v,
            n,
            entries: Vec::new(),
        }
    }

    pub fn u(&self) -> usize {
        self.u
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[DbEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count(&self, label: Gesture) -> usize {
        self.entries.iter().filter(|e| e.label == label).count()
    }

    pub fn push(&mut self, descriptor: CpdhDescriptor, label: Gesture) -> Result<()> {
        if (descriptor.u(), descriptor.v()) != (self.u, self.v) || descriptor.total() as usize != self.n {
            return Err(Error::Database(format!(
                "descriptor {}x{} with {} points does not fit a {}x{} n={} database",
                descriptor.u(),
                descriptor.v(),
                descriptor.total(),
                self.u,
                self.v,
                self.n
            )));
        }
        self.entries.push(DbEntry { descriptor, label });
        Ok(())
    }

    /// Nearest entry by Euclidean distance; ties go to the lowest index.
    pub fn classify(&self, query: &CpdhDescriptor) -> Result<Classification> {
        if self.entries.is_empty() {
            return Err(Error::Database("empty database".into()));
        }
        if (query.u(), query.v()) != (self.u, self.v) {
            return Err(Error::param(format!(
                "query is {}x{}, database is {}x{}",
                query.u(),
                query.v(),
                self.u,
                self.v
            )));
        }
        let (entry_index, d2) = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| (i, squared_distance(query, &e.descriptor)))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        Ok(Classification {
            label: self.entries[entry_index].label,
            distance: d2.sqrt(),
            entry_index,
        })
    }

    /// Distances between all same-label entry pairs, ascending.
    pub fn intra_class_distances(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (i, a) in self.entries.iter().enumerate() {
            for b in &self.entries[i + 1..] {
                if a.label == b.label {
                    out.push(cpdh_distance(&a.descriptor, &b.descriptor).expect("same shape"));
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }

    /// Nearest-rank `q`-quantile of the intra-class distances, `q` in (0, 1].
    pub fn intra_class_percentile(&self, q: f64) -> Option<f64> {
        let d = self.intra_class_distances();
        if d.is_empty() {
            return None;
        }
        let rank = ((q.clamp(0.0, 1.0) * d.len() as f64).ceil() as usize).clamp(1, d.len());
        Some(d[rank - 1])
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{HEADER} {} {} {} {}\n", self.u, self.v, self.n, self.entries.len());
        for e in &self.entries {
            s.push_str(e.label.token());
            for c in e.descriptor.counts() {
                let _ = write!(s, " {c}");
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| Error::Parse("empty database file".into()))?
            .split_whitespace()
            .collect();
        if header.len() != 5 || header[0] != HEADER {
            return Err(Error::Parse(format!("bad database header {header:?}")));
        }
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad number {s:?}")))
        };
        let (u, v, n, count) = (num(header[1])?, num(header[2])?, num(header[3])?, num(header[4])?);
        if u == 0 || v == 0 {
            return Err(Error::Parse(format!("bad descriptor shape {u}x{v}")));
        }
        let mut db = GestureDb::new(u, v, n);
        for line in lines {
            let mut tok = line.split_whitespace();
            let label: Gesture = tok.next().unwrap_or_default().parse()?;
            let counts = tok
                .map(|t| t.parse::<u32>().map_err(|_| Error::Parse(format!("bad count {t:?}"))))
                .collect::<Result<Vec<_>>>()?;
            db.push(CpdhDescriptor::from_counts(u, v, counts)?, label)?;
        }
        if db.len() != count {
            return Err(Error::Parse(format!("header says {count} entries, found {}", db.len())));
        }
        Ok(db)
    }
}

/// Describes every mask (in parallel) and collects a database. Masks without
/// a usable contour are skipped and counted; every label must end up with at
/// least one entry.
pub fn build_gesture_db(masks: &[(BinaryMask, Gesture)], params: &DescriptorParams) -> Result<DbBuild> {
    if masks.is_empty() {
        return Err(Error::Database("no masks supplied".into()));
    }
    let described = par::map_slice(masks, |(mask, label)| (describe(mask, params), *label));
    let mut db = GestureDb::new(params.radial_bins, params.angular_bins, params.samples);
    let mut skipped = 0;
    for (i, (d, label)) in described.into_iter().enumerate() {
        match d {
            Ok(d) => db.push(d, label)?,
            Err(Error::DegenerateShape(why)) => {
                log::warn!("skipping mask {i} ({label}): {why}");
                skipped += 1;
            }
            Err(e) => return Err(e),
        }
    }
    for g in Gesture::ALL {
        if db.count(g) == 0 {
            return Err(Error::Database(format!("no usable {g} masks")));
        }
    }
    Ok(DbBuild { db, skipped })
}
