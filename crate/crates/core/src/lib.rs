//! Real-time hand detection and palm/fist recognition for learner webcam
//! streams, turned into hand-raise events and a per-learner participation
//! indicator.
//!
//! The per-frame chain is:
//!
//! 1. [`background`] subtracts a codebook model of the static scene (motion mask).
//! 2. [`skintrack`] tracks the hand with CamShift over a hue back-projection (skin mask).
//! 3. [`pipeline`] ANDs the two masks, cleans the result and classifies it with
//!    the contour point distribution histogram from [`cpdh`].
//! 4. Palm runs are debounced into raise events that feed the indicator.
//!
//! [`harness`] provides frame I/O, synthetic scenarios and the recall/precision
//! and ROC metrics. Data-parallel loops go through rayon when the `parallel`
//! feature is enabled (the default) and run sequentially otherwise.

pub mod background;
pub mod cpdh;
mod error;
pub mod harness;
pub mod imgcore;
pub mod par;
pub mod pipeline;
pub mod skintrack;

pub use error::{Error, Result};
