//! Uniform-rate power signals.

use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};

/// Sampled active power of one appliance (or of an aggregate), in watts.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSignal {
    pub appliance_id: String,
    /// Seconds between consecutive samples.
    pub sample_period: f64,
    pub samples: Vec<f64>,
    /// Sample index ranges that were forward-filled across missing data.
    pub gaps: Vec<Range<usize>>,
}

impl PowerSignal {
    pub fn new(appliance_id: impl Into<String>, sample_period: f64, samples: Vec<f64>) -> Result<Self> {
        Self::with_gaps(appliance_id, sample_period, samples, Vec::new())
    }

    pub fn with_gaps(
        appliance_id: impl Into<String>,
        sample_period: f64,
        samples: Vec<f64>,
        gaps: Vec<Range<usize>>,
    ) -> Result<Self> {
        if !(sample_period > 0.0 && sample_period.is_finite()) {
            return Err(Error::InvalidSignal(alloc::format!(
                "sample period must be > 0, got {sample_period}"
            )));
        }
        if samples.len() < 2 {
            return Err(Error::InvalidSignal(alloc::format!(
                "need at least 2 samples, got {}",
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidSignal(alloc::format!("sample {i} is not finite")));
        }
        let len = samples.len();
        let gaps = gaps
            .into_iter()
            .map(|g| g.start.min(len)..g.end.min(len))
            .filter(|g| !g.is_empty())
            .collect();
        Ok(PowerSignal {
            appliance_id: appliance_id.into(),
            sample_period,
            samples,
            gaps,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        (self.samples.len() - 1) as f64 * self.sample_period
    }

    pub fn in_gap(&self, index: usize) -> bool {
        self.gaps.iter().any(|g| g.contains(&index))
    }

    /// True when the pair `(t - 1, t)` touches forward-filled data.
    pub fn pair_in_gap(&self, t: usize) -> bool {
        t > 0 && (self.in_gap(t) || self.in_gap(t - 1))
    }

    /// Zero-order-hold resampling onto a coarser uniform grid.
    ///
    /// The sample at time `k * target_period` is the latest original sample
    /// at or before that time.
    pub fn resample(&self, target_period: f64) -> Result<PowerSignal> {
        let native = self.sample_period;
        if !(target_period > 0.0 && target_period.is_finite()) {
            return Err(Error::InvalidArgument(alloc::format!(
                "target period must be > 0, got {target_period}"
            )));
        }
        if target_period < native * (1.0 - 1e-12) {
            return Err(Error::UpsamplingUnsupported {
                native,
                target: target_period,
            });
        }
        if target_period <= native * (1.0 + 1e-12) {
            return Ok(self.clone());
        }
        let ratio = target_period / native;
        let count = libm::floor((self.len() - 1) as f64 / ratio + 1e-9) as usize + 1;
        let source = |k: usize| -> usize {
            let idx = libm::floor(k as f64 * ratio + 1e-9) as usize;
            idx.min(self.len() - 1)
        };
        let samples: Vec<f64> = (0..count).map(|k| self.samples[source(k)]).collect();
        let gaps = self
            .gaps
            .iter()
            .map(|g| {
                let start = libm::floor(g.start as f64 / ratio + 1e-9) as usize;
                let end = libm::ceil(g.end as f64 / ratio - 1e-9) as usize;
                start..end.max(start + 1)
            })
            .collect();
        PowerSignal::with_gaps(self.appliance_id.clone(), target_period, samples, gaps)
    }
}
