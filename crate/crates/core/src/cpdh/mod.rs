//! Contour point distribution histograms: contour points of a hand mask,
//! binned in polar coordinates around their centroid, and matched against a
//! labelled database by Euclidean distance.

mod contour;
mod db;
mod descriptor;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use contour::{sample_contour, trace_contour, ContourPointSet};
pub use db::{build_gesture_db, Classification, DbBuild, DbEntry, GestureDb};
pub use descriptor::{build_cpdh, cpdh_distance, to_polar, CpdhDescriptor, PolarPointSet};

use crate::imgcore::{BinaryMask, CannyParams};
use crate::{Error, Result};

/// The two recognized hand shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gesture {
    Palm,
    Fist,
}

impl Gesture {
    pub const ALL: [Gesture; 2] = [Gesture::Palm, Gesture::Fist];

    pub fn token(self) -> &'static str {
        match self {
            Gesture::Palm => "palm",
            Gesture::Fist => "fist",
        }
    }
}

impl fmt::Display for Gesture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Gesture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "palm" => Ok(Gesture::Palm),
            "fist" => Ok(Gesture::Fist),
            other => Err(Error::Parse(format!("unknown gesture {other:?}"))),
        }
    }
}

/// Sampling and binning settings shared by a database and its queries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescriptorParams {
    /// Contour samples N.
    pub samples: usize,
    /// Radial bins u.
    pub radial_bins: usize,
    /// Angular bins v.
    pub angular_bins: usize,
    pub canny: CannyParams,
}

impl Default for DescriptorParams {
    fn default() -> Self {
        DescriptorParams {
            samples: 100,
            radial_bins: 5,
            angular_bins: 12,
            canny: CannyParams::default(),
        }
    }
}

/// Full chain: contour, resampling, polar transform, histogram.
pub fn describe(mask: &BinaryMask, params: &DescriptorParams) -> Result<CpdhDescriptor> {
    let contour = trace_contour(mask, &params.canny)?;
    let sampled = sample_contour(&contour, params.samples)?;
    let polar = to_polar(&sampled)?;
    build_cpdh(&polar, params.radial_bins, params.angular_bins)
}
