//! Per-frame orchestration: mask fusion and cleanup, classification, raise
//! debouncing, the participation indicator and the event wire format.

mod indicator;
mod raise;
mod session;
mod sink;
mod wire;

pub use indicator::{update_indicator, IndicatorParams, IndicatorSample, IndicatorState, ParticipationSeries};
pub use raise::{detect_raise_events, RaiseEvent, RaiseTracker};
pub use session::{run_session, Session, SessionSummary};
pub use sink::{EventSink, MemorySink, TcpBroadcastSink, WriterSink};
pub use wire::{parse_record, serialize_event, WireRecord};

use crate::background::{extract_foreground, CodebookModel};
use crate::cpdh::{describe, Classification, DescriptorParams, Gesture, GestureDb};
use crate::imgcore::{connected_components, gaussian_blur, morph, threshold, BinaryMask, CannyParams, Frame, MorphOp};
use crate::skintrack::{tracker_step, HandDetector, SkinModel, TrackState, TrackerParams};
use crate::{Error, Result};

/// Recognition result for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct GestureEvent {
    pub t: f64,
    pub learner: String,
    pub gesture: Option<Gesture>,
    /// Nearest-neighbour distance; present exactly when `gesture` is.
    pub distance: Option<f64>,
}

impl GestureEvent {
    pub fn none(t: f64, learner: impl Into<String>) -> Self {
        GestureEvent {
            t,
            learner: learner.into(),
            gesture: None,
            distance: None,
        }
    }

    pub fn detected(t: f64, learner: impl Into<String>, gesture: Gesture, distance: f64) -> Self {
        GestureEvent {
            t,
            learner: learner.into(),
            gesture: Some(gesture),
            distance: Some(distance),
        }
    }
}

/// Pixel-wise AND.
pub fn fuse_masks(motion: &BinaryMask, skin: &BinaryMask) -> Result<BinaryMask> {
    motion.and(skin)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostprocessParams {
    pub morph_radius: usize,
    pub blur_sigma: f64,
    pub level: u8,
}

impl Default for PostprocessParams {
    fn default() -> Self {
        PostprocessParams {
            morph_radius: 1,
            blur_sigma: 1.0,
            level: 128,
        }
    }
}

/// Opening, closing, Gaussian blur of the 0/255 rendering, then threshold.
pub fn postprocess_mask(mask: &BinaryMask, params: &PostprocessParams) -> Result<BinaryMask> {
    let opened = morph(mask, MorphOp::Open, params.morph_radius);
    let closed = morph(&opened, MorphOp::Close, params.morph_radius);
    let blurred = gaussian_blur(&closed.to_gray(), params.blur_sigma)?;
    Ok(threshold(&blurred, params.level))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    /// Consecutive palm frames needed to open a raise.
    pub debounce_k: usize,
    pub indicator: IndicatorParams,
    /// Seconds between indicator samples.
    pub sample_period: f64,
    /// 1-NN acceptance radius; `None` derives it from the database.
    pub max_distance: Option<f64>,
    /// Smallest cleaned component worth classifying, in pixels.
    pub min_area: usize,
    pub reinit_period: usize,
    pub tracker: TrackerParams,
    pub postprocess: PostprocessParams,
    pub canny: CannyParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            debounce_k: 5,
            indicator: IndicatorParams::default(),
            sample_period: 1.0,
            max_distance: None,
            min_area: 150,
            reinit_period: 20,
            tracker: TrackerParams::default(),
            postprocess: PostprocessParams::default(),
            canny: CannyParams::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.indicator.validate()?;
        if self.debounce_k == 0 || self.min_area == 0 || self.reinit_period == 0 {
            return Err(Error::param("debounce_k, min_area and reinit_period must be >= 1"));
        }
        if !(self.sample_period > 0.0) {
            return Err(Error::param("sample_period must be > 0"));
        }
        if let Some(d) = self.max_distance {
            if !(d > 0.0) {
                return Err(Error::param(format!("max_distance must be > 0, got {d}")));
            }
        }
        if !(self.postprocess.blur_sigma > 0.0) {
            return Err(Error::param("blur_sigma must be > 0"));
        }
        Ok(())
    }
}

/// Immutable models shared by every learner stream.
pub struct Pipeline {
    background: CodebookModel,
    db: GestureDb,
    detector: Box<dyn HandDetector>,
    skin: SkinModel,
    config: PipelineConfig,
    max_distance: f64,
    descriptor: DescriptorParams,
}

/// Mutable per-stream state.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamState {
    pub learner: String,
    pub track: TrackState,
}

/// Everything [`Pipeline::process_frame`] learned about a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameOutcome {
    pub event: GestureEvent,
    /// Nearest database entry, even when rejected by `max_distance`.
    pub nearest: Option<Classification>,
    pub track: TrackState,
}

impl Pipeline {
    pub fn new(
        background: CodebookModel,
        db: GestureDb,
        detector: Box<dyn HandDetector>,
        skin: SkinModel,
        config: PipelineConfig,
    ) -> Result<Self> {
        config.validate()?;
        if db.is_empty() {
            return Err(Error::Database("empty database".into()));
        }
        let max_distance = match config.max_distance {
            Some(d) => d,
            None => db
                .intra_class_percentile(0.95)
                .filter(|&d| d > 0.0)
                .ok_or_else(|| {
                    Error::Database("cannot derive max_distance; the database has no distinct same-label pairs".into())
                })?,
        };
        let descriptor = DescriptorParams {
            samples: db.n(),
            radial_bins: db.u(),
            angular_bins: db.v(),
            canny: config.canny,
        };
        Ok(Pipeline {
            background,
            db,
            detector,
            skin,
            config,
            max_distance,
            descriptor,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn max_distance(&self) -> f64 {
        self.max_distance
    }

    pub fn db(&self) -> &GestureDb {
        &self.db
    }

    pub fn background(&self) -> &CodebookModel {
        &self.background
    }

    pub fn new_stream(&self, learner: impl Into<String>) -> StreamState {
        let (w, h) = self.background.dims();
        StreamState {
            learner: learner.into(),
            track: TrackState::new(w, h, self.config.reinit_period),
        }
    }

    /// Runs the whole per-frame chain. Never fails: a stage that cannot
    /// produce a result yields a `None` gesture.
    pub fn process_frame(&self, state: &StreamState, frame: &Frame) -> (StreamState, FrameOutcome) {
        let t = frame.timestamp();
        let motion = match extract_foreground(&self.background, frame) {
            Ok(m) => m,
            Err(e) => {
                log::warn!("frame at t={t}: {e}");
                let outcome = FrameOutcome {
                    event: GestureEvent::none(t, state.learner.clone()),
                    nearest: None,
                    track: state.track.clone(),
                };
                return (state.clone(), outcome);
            }
        };
        let (track, skin) = tracker_step(
            frame,
            &motion,
            &state.track,
            self.detector.as_ref(),
            &self.skin,
            &self.config.tracker,
        );
        let nearest = self.classify_masks(&motion, &skin);
        let event = match nearest {
            Some(c) if c.distance <= self.max_distance => {
                GestureEvent::detected(t, state.learner.clone(), c.label, c.distance)
            }
            _ => GestureEvent::none(t, state.learner.clone()),
        };
        let next = StreamState {
            learner: state.learner.clone(),
            track: track.clone(),
        };
        (next, FrameOutcome { event, nearest, track })
    }

    fn classify_masks(&self, motion: &BinaryMask, skin: &BinaryMask) -> Option<Classification> {
        let fused = fuse_masks(motion, skin).ok()?;
        if fused.count() < self.config.min_area {
            return None;
        }
        let cleaned = postprocess_mask(&fused, &self.config.postprocess).ok()?;
        let largest = connected_components(&cleaned).into_iter().next()?;
        if largest.area < self.config.min_area {
            return None;
        }
        let descriptor = describe(&cleaned, &self.descriptor).ok()?;
        self.db.classify(&descriptor).ok()
    }
}
