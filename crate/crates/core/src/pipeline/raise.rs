use super::GestureEvent;
use crate::cpdh::Gesture;

/// A debounced run of palm frames.
#[derive(Debug, Clone, PartialEq)]
pub struct RaiseEvent {
    pub t_start: f64,
    pub t_end: f64,
    pub learner: String,
}

/// Streaming form of [`detect_raise_events`].
#[derive(Debug, Clone)]
pub struct RaiseTracker {
    k: usize,
    run: Option<RaiseEvent>,
    run_len: usize,
    closed: Vec<RaiseEvent>,
}

impl RaiseTracker {
    pub fn new(debounce_k: usize) -> Self {
        RaiseTracker {
            k: debounce_k.max(1),
            run: None,
            run_len: 0,
            closed: Vec::new(),
        }
    }

    /// Feeds one event and returns the currently open raise, if the palm run
    /// has reached `k` frames.
    pub fn push(&mut self, e: &GestureEvent) -> Option<RaiseEvent> {
        if e.gesture == Some(Gesture::Palm) {
            match &mut self.run {
                Some(r) => r.t_end = e.t,
                None => {
                    self.run = Some(RaiseEvent {
                        t_start: e.t,
                        t_end: e.t,
                        learner: e.learner.clone(),
                    })
                }
            }
            self.run_len += 1;
            return self.active();
        }
        self.close_run();
        None
    }

    pub fn active(&self) -> Option<RaiseEvent> {
        self.run.clone().filter(|_| self.run_len >= self.k)
    }

    pub fn closed(&self) -> &[RaiseEvent] {
        &self.closed
    }

    fn close_run(&mut self) {
        if let Some(r) = self.run.take() {
            if self.run_len >= self.k {
                self.closed.push(r);
            }
        }
        self.run_len = 0;
    }

    /// Closes any open run at the end of the stream.
    pub fn finish(mut self) -> Vec<RaiseEvent> {
        self.close_run();
        self.closed
    }
}

/// Runs of at least `debounce_k` consecutive palm events, from the first to
/// the last palm of each run.
pub fn detect_raise_events(stream: &[GestureEvent], debounce_k: usize) -> Vec<RaiseEvent> {
    let mut tracker = RaiseTracker::new(debounce_k);
    for e in stream {
        tracker.push(e);
    }
    tracker.finish()
}
