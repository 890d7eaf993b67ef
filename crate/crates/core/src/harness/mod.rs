//! Frame files, synthetic scenarios and evaluation metrics.

mod metrics;
mod pnm;
mod shapes;
mod source;
mod synth;
mod truth;

pub use metrics::{
    evaluate, format_report, format_roc, match_intervals, recognition_scores, roc_points, roc_thresholds, EvalReport,
    RocPoint,
};
pub use pnm::{decode_pnm, encode_pnm, read_pnm, write_pnm, PnmEncoding};
pub use shapes::{ShapeJitter, Silhouette, HAND_UNIT_PX};
pub use source::{frame_file_name, load_frames, FrameSource};
pub use synth::{
    gen_synthetic, sample_masks, ActorEvent, Background, FacePatch, Scenario, ScenarioSpec, SynthSummary, MASK_CANVAS,
};
pub use truth::{format_intervals, format_truth, parse_intervals, parse_truth, Interval, TruthRow};
