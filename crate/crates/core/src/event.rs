//! Threshold-free event detection.
//!
//! Every consecutive sample pair gets a change score
//! `M(t) = 1 - min(P(t-1), P(t)) / max(P(t-1), P(t))`. Scores above the
//! standard deviation of all scores are outliers; a run of consecutive
//! outliers is one steady-state transition whose delta is measured across
//! the whole run.

use alloc::vec::Vec;

use crate::signal::PowerSignal;

/// Below this power (W) on both sides of a pair, the pair scores 0.
pub const DEFAULT_DEAD_BAND: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub dead_band: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            dead_band: DEFAULT_DEAD_BAND,
        }
    }
}

/// A detected steady-state transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    /// First sample of the new steady state run (the later sample of the
    /// first outlier pair).
    pub sample_index: usize,
    pub delta_watts: f64,
    pub magnitude_watts: f64,
}

impl EventRecord {
    pub fn new(sample_index: usize, delta_watts: f64) -> Self {
        EventRecord {
            sample_index,
            delta_watts,
            magnitude_watts: libm::fabs(delta_watts),
        }
    }
}

/// Change score of the pair `(prev, next)`.
pub fn ratio_score(prev: f64, next: f64, dead_band: f64) -> f64 {
    let (lo, hi) = if prev <= next { (prev, next) } else { (next, prev) };
    if hi < dead_band || hi <= 0.0 {
        return 0.0;
    }
    // negative readings (meter offset) clamp to a full-scale change
    (1.0 - lo / hi).clamp(0.0, 1.0)
}

/// Per-pair scores; `None` for pairs that touch forward-filled gaps.
/// Entry `t - 1` scores the pair `(t - 1, t)`.
pub fn change_scores(signal: &PowerSignal, config: &DetectorConfig) -> Vec<Option<f64>> {
    (1..signal.len())
        .map(|t| {
            if signal.pair_in_gap(t) {
                None
            } else {
                Some(ratio_score(signal.samples[t - 1], signal.samples[t], config.dead_band))
            }
        })
        .collect()
}

pub fn detect_events(signal: &PowerSignal, config: &DetectorConfig) -> Vec<EventRecord> {
    let scores = change_scores(signal, config);
    let included: Vec<f64> = scores.iter().flatten().copied().collect();
    if included.is_empty() {
        return Vec::new();
    }
    let n = included.len() as f64;
    let mean = included.iter().sum::<f64>() / n;
    let var = included.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / n;
    let threshold = libm::sqrt(var);
    if !(threshold > 0.0) {
        return Vec::new();
    }

    let samples = &signal.samples;
    let mut events = Vec::new();
    let mut run_start: Option<usize> = None;
    let close = |start: usize, end: usize, events: &mut Vec<EventRecord>| {
        let delta = samples[end] - samples[start - 1];
        if delta != 0.0 {
            events.push(EventRecord::new(start, delta));
        }
    };
    for (k, score) in scores.iter().enumerate() {
        let t = k + 1;
        let outlier = matches!(score, Some(m) if *m > threshold);
        match (outlier, run_start) {
            (true, None) => run_start = Some(t),
            (false, Some(start)) => {
                close(start, t - 1, &mut events);
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(start) = run_start {
        close(start, samples.len() - 1, &mut events);
    }
    events
}

pub fn event_magnitudes(events: &[EventRecord]) -> Vec<f64> {
    events.iter().map(|e| e.magnitude_watts).collect()
}
