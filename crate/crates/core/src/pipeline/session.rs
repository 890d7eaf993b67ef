use super::{
    serialize_event, EventSink, FrameOutcome, GestureEvent, IndicatorSample, ParticipationSeries, Pipeline,
    RaiseEvent, RaiseTracker, StreamState, WireRecord,
};
use crate::cpdh::Classification;
use crate::imgcore::Frame;
use crate::{Error, Result};

/// One learner stream: tracker state, raise debouncing and the indicator,
/// sampled every `sample_period` seconds of stream time.
pub struct Session<'p> {
    pipeline: &'p Pipeline,
    state: StreamState,
    raises: RaiseTracker,
    series: Option<ParticipationSeries>,
    next_sample: f64,
    last_t: Option<f64>,
}

/// What a finished session produced.
#[derive(Debug, Clone)]
pub struct SessionSummary {
    pub events: Vec<GestureEvent>,
    pub nearest: Vec<Option<Classification>>,
    pub raises: Vec<RaiseEvent>,
    pub samples: Vec<IndicatorSample>,
    pub series: Option<ParticipationSeries>,
}

impl<'p> Session<'p> {
    pub fn new(pipeline: &'p Pipeline, learner: impl Into<String>) -> Self {
        Session {
            pipeline,
            state: pipeline.new_stream(learner),
            raises: RaiseTracker::new(pipeline.config().debounce_k),
            series: None,
            next_sample: f64::NEG_INFINITY,
            last_t: None,
        }
    }

    pub fn state(&self) -> &StreamState {
        &self.state
    }

    pub fn series(&self) -> Option<&ParticipationSeries> {
        self.series.as_ref()
    }

    /// Processes one frame and returns its outcome plus the records to emit,
    /// in order: the gesture record, then an indicator sample when due.
    pub fn push_frame(&mut self, frame: &Frame) -> Result<(FrameOutcome, Vec<WireRecord>)> {
        let t = frame.timestamp();
        if let Some(last) = self.last_t {
            if t < last {
                return Err(Error::TimeRegression { now: t, last });
            }
        }
        self.last_t = Some(t);
        let (state, outcome) = self.pipeline.process_frame(&self.state, frame);
        self.state = state;
        let config = self.pipeline.config();
        let series = self
            .series
            .get_or_insert_with(|| ParticipationSeries::new(self.state.learner.clone(), config.indicator, t));
        if let Some(open) = self.raises.push(&outcome.event) {
            series.record(open);
        }
        let mut records = vec![WireRecord::Gesture(outcome.event.clone())];
        if t >= self.next_sample {
            records.push(WireRecord::Indicator(series.update(t)?));
            self.next_sample = if self.next_sample.is_finite() {
                let mut next = self.next_sample;
                while next <= t {
                    next += config.sample_period;
                }
                next
            } else {
                t + config.sample_period
            };
        }
        Ok((outcome, records))
    }

    pub fn finish(self) -> (Vec<RaiseEvent>, Option<ParticipationSeries>) {
        (self.raises.finish(), self.series)
    }
}

/// Replays `frames` through a fresh session, writing every record to `sink`.
pub fn run_session<I>(pipeline: &Pipeline, learner: &str, frames: I, sink: &dyn EventSink) -> Result<SessionSummary>
where
    I: IntoIterator<Item = Result<Frame>>,
{
    let mut session = Session::new(pipeline, learner);
    let mut events = Vec::new();
    let mut nearest = Vec::new();
    let mut samples = Vec::new();
    for frame in frames {
        let (outcome, records) = session.push_frame(&frame?)?;
        for r in records {
            sink.emit(&serialize_event(&r))?;
            if let WireRecord::Indicator(s) = r {
                samples.push(s);
            }
        }
        events.push(outcome.event);
        nearest.push(outcome.nearest);
    }
    let (raises, series) = session.finish();
    Ok(SessionSummary {
        events,
        nearest,
        raises,
        samples,
        series,
    })
}
