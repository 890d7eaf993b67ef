use super::{
    backproject, camshift_track, viola_jones_detect, CamShiftParams, CascadeModel, SkinModel,
    TrackState,
};
use crate::imgcore::{connected_components, threshold, BinaryMask, Frame, Rect};

/// Source of hand ROIs for tracker (re-)initialization. Implementations
/// return candidates largest first.
pub trait HandDetector: Send + Sync {
    fn detect(&self, frame: &Frame, foreground: &BinaryMask) -> Vec<Rect>;
}

/// Bounding boxes of foreground components with at least `min_area` pixels,
/// largest first.
pub fn blob_detect(foreground: &BinaryMask, min_area: usize) -> Vec<Rect> {
    connected_components(foreground)
        .into_iter()
        .filter(|b| b.area >= min_area)
        .map(|b| b.bbox)
        .collect()
}

/// Motion-blob fallback used when no cascade model is available.
#[derive(Debug, Clone)]
pub struct BlobDetector {
    pub min_area: usize,
}

impl HandDetector for BlobDetector {
    fn detect(&self, _frame: &Frame, foreground: &BinaryMask) -> Vec<Rect> {
        blob_detect(foreground, self.min_area)
    }
}

#[derive(Debug, Clone)]
pub struct CascadeDetector {
    pub model: CascadeModel,
    pub scale_factor: f64,
    pub min_neighbors: usize,
}

impl HandDetector for CascadeDetector {
    fn detect(&self, frame: &Frame, _foreground: &BinaryMask) -> Vec<Rect> {
        match viola_jones_detect(&frame.to_gray(), &self.model, self.scale_factor, self.min_neighbors) {
            Ok(rois) => rois,
            Err(e) => {
                log::warn!("cascade detection failed: {e}");
                Vec::new()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerParams {
    pub camshift: CamShiftParams,
    /// Back-projection level at or above which a pixel is skin.
    pub skin_threshold: u8,
}

impl Default for TrackerParams {
    fn default() -> Self {
        TrackerParams {
            camshift: CamShiftParams::default(),
            skin_threshold: 60,
        }
    }
}

/// One tracking step: re-initializes from the detector when the period has
/// elapsed or the track is lost, then runs CamShift on the skin
/// back-projection. Returns the new state and the full-frame skin mask.
pub fn tracker_step(
    frame: &Frame,
    foreground: &BinaryMask,
    state: &TrackState,
    detector: &dyn HandDetector,
    skin: &SkinModel,
    params: &TrackerParams,
) -> (TrackState, BinaryMask) {
    let mut next = state.clone();
    next.frames_since_reinit = (state.frames_since_reinit + 1).min(state.reinit_period);
    if next.frames_since_reinit >= state.reinit_period || state.lost {
        next.frames_since_reinit = 0;
        if let Some(roi) = detector.detect(frame, foreground).first() {
            next.window = *roi;
            next.lost = false;
        }
    }
    if next.lost {
        return (next, BinaryMask::new(frame.width(), frame.height()));
    }
    let prob = backproject(frame, skin);
    let tracked = camshift_track(&prob, &next, &params.camshift);
    (tracked, threshold(&prob, params.skin_threshold))
}
