//! Hand localization and skin tracking: Viola-Jones cascade evaluation (or a
//! motion-blob fallback), a hue histogram skin model, back-projection and
//! CamShift with periodic re-initialization.

mod camshift;
mod cascade;
mod skin;
mod tracker;

pub use camshift::{camshift_track, mean_shift, CamShiftParams, MeanShiftOutcome, TrackState};
pub use cascade::{
    scan_positions, viola_jones_detect, CascadeModel, Stage, WeakClassifier, WeightedRect,
};
pub use skin::{backproject, build_skin_model, hue_bin, SkinModel, SkinParams, HUE_BINS};
pub use tracker::{
    blob_detect, tracker_step, BlobDetector, CascadeDetector, HandDetector, TrackerParams,
};

/// Region of interest, in pixels.
pub type Roi = crate::imgcore::Rect;
