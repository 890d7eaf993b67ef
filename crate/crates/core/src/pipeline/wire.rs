//! Newline-delimited JSON records for the dashboard feed.

use serde::{Deserialize, Serialize};

use super::{GestureEvent, IndicatorSample, IndicatorState};
use crate::cpdh::Gesture;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum WireRecord {
    Gesture(GestureEvent),
    Indicator(IndicatorSample),
}

impl From<GestureEvent> for WireRecord {
    fn from(e: GestureEvent) -> Self {
        WireRecord::Gesture(e)
    }
}

impl From<IndicatorSample> for WireRecord {
    fn from(s: IndicatorSample) -> Self {
        WireRecord::Indicator(s)
    }
}

// field order here is the order on the wire
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Line {
    t: f64,
    learner: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gesture: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    distance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    freq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    state: Option<String>,
}

/// One newline-terminated record.
pub fn serialize_event(record: &WireRecord) -> String {
    let line = match record {
        WireRecord::Gesture(e) => Line {
            t: e.t,
            learner: e.learner.clone(),
            kind: "gesture".into(),
            gesture: Some(e.gesture.map_or("none", Gesture::token).into()),
            distance: e.gesture.and(e.distance),
            freq: None,
            state: None,
        },
        WireRecord::Indicator(s) => Line {
            t: s.t,
            learner: s.learner.clone(),
            kind: "indicator".into(),
            gesture: None,
            distance: None,
            freq: Some(s.freq),
            state: Some(s.state.token().into()),
        },
    };
    let mut out = serde_json::to_string(&line).expect("records serialize");
    out.push('\n');
    out
}

/// Parses one record, with or without its trailing newline.
pub fn parse_record(text: &str) -> Result<WireRecord> {
    let text = text.strip_suffix('\n').unwrap_or(text);
    let line: Line = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let bad = |what: &str| Error::Parse(format!("{what} in {} record", line.kind));
    match line.kind.as_str() {
        "gesture" => {
            if line.freq.is_some() || line.state.is_some() {
                return Err(bad("indicator fields"));
            }
            let gesture = match line.gesture.as_deref().ok_or_else(|| bad("missing gesture"))? {
                "none" => None,
                g => Some(g.parse::<Gesture>()?),
            };
            if gesture.is_some() != line.distance.is_some() {
                return Err(bad("distance must be present exactly for palm/fist"));
            }
            Ok(WireRecord::Gesture(GestureEvent {
                t: line.t,
                learner: line.learner,
                gesture,
                distance: line.distance,
            }))
        }
        "indicator" => {
            if line.gesture.is_some() || line.distance.is_some() {
                return Err(bad("gesture fields"));
            }
            let state = match line.state.as_deref() {
                Some("green") => IndicatorState::Green,
                Some("red") => IndicatorState::Red,
                _ => return Err(bad("missing or unknown state")),
            };
            let freq = line.freq.ok_or_else(|| bad("missing freq"))?;
            Ok(WireRecord::Indicator(IndicatorSample {
                t: line.t,
                learner: line.learner,
                freq,
                state,
            }))
        }
        other => Err(Error::Parse(format!("unknown record kind {other:?}"))),
    }
}
