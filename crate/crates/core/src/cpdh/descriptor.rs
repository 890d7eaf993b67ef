use std::f64::consts::TAU;

use super::ContourPointSet;
use crate::{Error, Result};

/// Contour samples in polar coordinates about their centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarPointSet {
    /// `(rho, theta)` with `theta` in `[0, 2 pi)`.
    pub points: Vec<(f64, f64)>,
    pub centroid: (f64, f64),
    /// Radius of the circumscribed circle, `max rho`.
    pub rho_max: f64,
}

/// Centroid-relative polar coordinates with a full four-quadrant angle.
///
/// Offsets are taken relative to the first point before averaging, so any
/// translation that keeps those offsets exact (e.g. integer shifts of pixel
/// coordinates) produces a bit-identical result.
pub fn to_polar(sampled: &ContourPointSet) -> Result<PolarPointSet> {
    let pts = &sampled.points;
    if pts.len() < 3 {
        return Err(Error::DegenerateShape(format!("{} points", pts.len())));
    }
    let origin = pts[0];
    let n = pts.len() as f64;
    let rel: Vec<(f64, f64)> = pts.iter().map(|p| (p.0 - origin.0, p.1 - origin.1)).collect();
    let mx = rel.iter().map(|p| p.0).sum::<f64>() / n;
    let my = rel.iter().map(|p| p.1).sum::<f64>() / n;
    let points: Vec<(f64, f64)> = rel
        .iter()
        .map(|&(x, y)| {
            let (dx, dy) = (x - mx, y - my);
            let mut theta = dy.atan2(dx);
            if theta < 0.0 {
                theta += TAU;
            }
            if theta >= TAU {
                theta = 0.0;
            }
            (dx.hypot(dy), theta)
        })
        .collect();
    let rho_max = points.iter().map(|p| p.0).fold(0.0, f64::max);
    if !(rho_max > 0.0) {
        return Err(Error::DegenerateShape("all points coincide".into()));
    }
    Ok(PolarPointSet {
        points,
        centroid: (origin.0 + mx, origin.1 + my),
        rho_max,
    })
}

/// `u x v` histogram of polar contour points, rows radial, columns angular.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CpdhDescriptor {
    u: usize,
    v: usize,
    counts: Vec<u32>,
}

impl CpdhDescriptor {
    pub fn from_counts(u: usize, v: usize, counts: Vec<u32>) -> Result<Self> {
        if u == 0 || v == 0 || counts.len() != u * v {
            return Err(Error::param(format!(
                "{} counts for a {u}x{v} descriptor",
                counts.len()
            )));
        }
        Ok(CpdhDescriptor { u, v, counts })
    }

    pub fn u(&self) -> usize {
        self.u
    }

    pub fn v(&self) -> usize {
        self.v
    }

    /// Row-major counts.
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn get(&self, radial: usize, angular: usize) -> u32 {
        self.counts[radial * self.v + angular]
    }

    /// Number of binned points, `n`.
    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }
}

/// Bins every point: radial index `min(floor(rho u / rho_max), u - 1)`,
/// angular index `floor(theta v / 2 pi)`.
pub fn build_cpdh(polar: &PolarPointSet, u: usize, v: usize) -> Result<CpdhDescriptor> {
    if u == 0 || v == 0 {
        return Err(Error::param(format!("bin counts must be >= 1, got {u}x{v}")));
    }
    if !(polar.rho_max > 0.0) {
        return Err(Error::DegenerateShape("rho_max is zero".into()));
    }
    let mut counts = vec![0u32; u * v];
    for &(rho, theta) in &polar.points {
        let r = ((rho * u as f64 / polar.rho_max) as usize).min(u - 1);
        let a = ((theta * v as f64 / TAU) as usize).min(v - 1);
        counts[r * v + a] += 1;
    }
    Ok(CpdhDescriptor { u, v, counts })
}

/// Euclidean distance between flattened count vectors.
pub fn cpdh_distance(a: &CpdhDescriptor, b: &CpdhDescriptor) -> Result<f64> {
    if (a.u, a.v) != (b.u, b.v) {
        return Err(Error::param(format!(
            "descriptor shapes differ: {}x{} vs {}x{}",
            a.u, a.v, b.u, b.v
        )));
    }
    Ok(squared_distance(a, b).sqrt())
}

#[inline]
pub(crate) fn squared_distance(a: &CpdhDescriptor, b: &CpdhDescriptor) -> f64 {
    a.counts
        .iter()
        .zip(&b.counts)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn cross() -> ContourPointSet {
        ContourPointSet::new(vec![(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)])
    }

    #[test]
    fn symmetric_cross() {
        let p = to_polar(&cross()).unwrap();
        assert_eq!(p.centroid, (0.0, 0.0));
        assert_eq!(p.rho_max, 1.0);
        let thetas: Vec<f64> = p.points.iter().map(|q| q.1).collect();
        assert_eq!(thetas, vec![0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2]);
        assert!(p.points.iter().all(|q| q.0 == 1.0));
        let d = build_cpdh(&p, 1, 4).unwrap();
        assert_eq!(d.counts(), &[1, 1, 1, 1]);
    }

    #[test]
    fn three_four_five() {
        // centroid at the origin; the (3, 4) sample sits in quadrant I
        let c = ContourPointSet::new(vec![(3.0, 4.0), (-3.0, 4.0), (-3.0, -4.0), (3.0, -4.0)]);
        let p = to_polar(&c).unwrap();
        assert_eq!(p.centroid, (0.0, 0.0));
        assert_eq!(p.points[0].0, 5.0);
        assert!((p.points[0].1 - (4.0f64 / 3.0).atan()).abs() < 1e-15);
        assert!((p.points[2].1 - (PI + (4.0f64 / 3.0).atan())).abs() < 1e-15);
    }

    #[test]
    fn translation_moves_the_centroid_only() {
        let base = ContourPointSet::new(vec![(1.5, 2.0), (7.25, 3.0), (4.0, 9.5), (0.5, 6.0)]);
        let moved = ContourPointSet::new(base.points.iter().map(|p| (p.0 + 100.0, p.1 - 40.0)).collect());
        let (a, b) = (to_polar(&base).unwrap(), to_polar(&moved).unwrap());
        assert_eq!(a.points, b.points);
        assert_eq!(a.rho_max, b.rho_max);
        assert_eq!((a.centroid.0 + 100.0, a.centroid.1 - 40.0), b.centroid);
    }

    #[test]
    fn coincident_points_are_degenerate() {
        let c = ContourPointSet::new(vec![(3.0, 3.0); 4]);
        assert!(matches!(to_polar(&c), Err(Error::DegenerateShape(_))));
        assert!(to_polar(&ContourPointSet::new(vec![(0.0, 0.0), (1.0, 1.0)])).is_err());
    }

    #[test]
    fn single_location_fills_one_bin() {
        let p = PolarPointSet {
            points: vec![(2.0, 1.0); 17],
            centroid: (0.0, 0.0),
            rho_max: 4.0,
        };
        let d = build_cpdh(&p, 5, 12).unwrap();
        assert_eq!(d.get(2, 1), 17);
        assert_eq!(d.total(), 17);
        assert_eq!(d.counts().iter().filter(|&&c| c > 0).count(), 1);
    }

    #[test]
    fn circle_lands_in_outer_ring() {
        // 48 points evenly on a circle, offset half a bin so none lies on a
        // bin edge; each angular bin must get exactly 48 / 12 = 4 points
        let pts: Vec<(f64, f64)> = (0..48)
            .map(|k| {
                let t = (k as f64 + 0.5) * TAU / 48.0;
                (10.0 * t.cos(), 10.0 * t.sin())
            })
            .collect();
        let p = to_polar(&ContourPointSet::new(pts)).unwrap();
        let d = build_cpdh(&p, 5, 12).unwrap();
        for a in 0..12 {
            for r in 0..4 {
                assert_eq!(d.get(r, a), 0);
            }
        }
        let outer: Vec<u32> = (0..12).map(|a| d.get(4, a)).collect();
        let (lo, hi) = (outer.iter().min().unwrap(), outer.iter().max().unwrap());
        assert!(hi - lo <= 1);
        assert_eq!(outer.iter().sum::<u32>(), 48);
    }

    #[test]
    fn distances() {
        let a = CpdhDescriptor::from_counts(1, 3, vec![2, 1, 0]).unwrap();
        let b = CpdhDescriptor::from_counts(1, 3, vec![1, 2, 0]).unwrap();
        assert_eq!(cpdh_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(cpdh_distance(&a, &b).unwrap(), 2f64.sqrt());
        let c = CpdhDescriptor::from_counts(3, 1, vec![2, 1, 0]).unwrap();
        assert!(cpdh_distance(&a, &c).is_err());
    }

    fn descriptor() -> impl Strategy<Value = CpdhDescriptor> {
        proptest::collection::vec(0u32..30, 12)
            .prop_map(|c| CpdhDescriptor::from_counts(3, 4, c).unwrap())
    }

    proptest! {
        #[test]
        fn metric_axioms(a in descriptor(), b in descriptor(), c in descriptor()) {
            let ab = cpdh_distance(&a, &b).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, cpdh_distance(&b, &a).unwrap());
            prop_assert_eq!(ab == 0.0, a == b);
            let ac = cpdh_distance(&a, &c).unwrap();
            let cb = cpdh_distance(&c, &b).unwrap();
            prop_assert!(ab <= ac + cb + 1e-9);
        }

        #[test]
        fn counts_sum_to_n(pts in proptest::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 3..200)) {
            let set = ContourPointSet::new(pts.clone());
            if let Ok(p) = to_polar(&set) {
                let d = build_cpdh(&p, 5, 12).unwrap();
                prop_assert_eq!(d.total() as usize, pts.len());
            }
        }
    }
}
