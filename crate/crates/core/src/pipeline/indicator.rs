use std::fmt;

use super::RaiseEvent;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndicatorState {
    Green,
    Red,
}

impl IndicatorState {
    pub fn token(self) -> &'static str {
        match self {
            IndicatorState::Green => "green",
            IndicatorState::Red => "red",
        }
    }
}

impl fmt::Display for IndicatorState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndicatorParams {
    /// Sliding window, seconds.
    pub window_w: f64,
    /// Events per minute below which participation counts as low.
    pub red_threshold: f64,
    /// Seconds of sustained low participation before turning red.
    pub grace: f64,
}

impl Default for IndicatorParams {
    fn default() -> Self {
        IndicatorParams {
            window_w: 300.0,
            red_threshold: 0.5,
            grace: 120.0,
        }
    }
}

impl IndicatorParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("window_w", self.window_w),
            ("red_threshold", self.red_threshold),
            ("grace", self.grace),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// One point of the indicator curve.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorSample {
    pub t: f64,
    pub learner: String,
    pub freq: f64,
    pub state: IndicatorState,
}

/// Raise events of one learner and the frequency curve derived from them.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticipationSeries {
    learner: String,
    params: IndicatorParams,
    events: Vec<RaiseEvent>,
    freq_curve: Vec<(f64, f64)>,
    state: IndicatorState,
    red_since: Option<f64>,
    below_since: Option<f64>,
}

impl ParticipationSeries {
    /// A green series whose low-participation clock starts at `start`, since
    /// no raise has been seen yet.
    pub fn new(learner: impl Into<String>, params: IndicatorParams, start: f64) -> Self {
        ParticipationSeries {
            learner: learner.into(),
            params,
            events: Vec::new(),
            freq_curve: Vec::new(),
            state: IndicatorState::Green,
            red_since: None,
            below_since: Some(start),
        }
    }

    pub fn learner(&self) -> &str {
        &self.learner
    }

    pub fn params(&self) -> &IndicatorParams {
        &self.params
    }

    pub fn events(&self) -> &[RaiseEvent] {
        &self.events
    }

    pub fn freq_curve(&self) -> &[(f64, f64)] {
        &self.freq_curve
    }

    pub fn state(&self) -> IndicatorState {
        self.state
    }

    pub fn red_since(&self) -> Option<f64> {
        self.red_since
    }

    /// Adds a raise, or updates the last one when it has the same start
    /// (an open raise growing frame by frame).
    pub fn record(&mut self, e: RaiseEvent) {
        match self.events.last_mut() {
            Some(last) if last.t_start == e.t_start => *last = e,
            _ => self.events.push(e),
        }
    }

    /// Events per minute with `t_start` in `(now - window_w, now]`.
    pub fn freq_at(&self, now: f64) -> f64 {
        let from = now - self.params.window_w;
        let n = self
            .events
            .iter()
            .filter(|e| e.t_start > from && e.t_start <= now)
            .count();
        60.0 * n as f64 / self.params.window_w
    }

    /// Samples the curve at `now` and advances the green/red state machine.
    pub fn update(&mut self, now: f64) -> Result<IndicatorSample> {
        let last = self
            .freq_curve
            .last()
            .map(|p| p.0)
            .or(self.below_since.filter(|_| self.freq_curve.is_empty()));
        if let Some(last) = last {
            if now < last {
                return Err(Error::TimeRegression { now, last });
            }
        }
        let freq = self.freq_at(now);
        if freq >= self.params.red_threshold {
            self.below_since = None;
            self.state = IndicatorState::Green;
            self.red_since = None;
        } else {
            let since = *self.below_since.get_or_insert(now);
            if now - since >= self.params.grace && self.state == IndicatorState::Green {
                self.state = IndicatorState::Red;
                self.red_since = Some(now);
            }
        }
        match self.freq_curve.last_mut() {
            Some(p) if p.0 == now => p.1 = freq,
            _ => self.freq_curve.push((now, freq)),
        }
        Ok(IndicatorSample {
            t: now,
            learner: self.learner.clone(),
            freq,
            state: self.state,
        })
    }
}

/// Functional form of [`ParticipationSeries::update`].
pub fn update_indicator(series: &ParticipationSeries, now: f64) -> Result<ParticipationSeries> {
    let mut next = series.clone();
    next.update(now)?;
    Ok(next)
}
