//! Uniform integration grid over event values and composite Simpson rules.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::AppliancePopulation;

pub const DEFAULT_INTERVALS: usize = 4096;
pub const MIN_INTERVALS: usize = 64;

/// Uniform grid on `[lo, hi]` with `n` subintervals (`n + 1` nodes).
///
/// `n` is kept a multiple of 4 so the Simpson rule also applies on every
/// other node, which gives the half-resolution error estimate for free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaGrid {
    lo: f64,
    hi: f64,
    n: usize,
}

impl AlphaGrid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument(alloc::format!(
                "grid bounds must satisfy lo < hi, got [{lo}, {hi}]"
            )));
        }
        let n = n.max(MIN_INTERVALS).next_multiple_of(4);
        Ok(AlphaGrid { lo, hi, n })
    }

    /// Covers every transition with nonzero participation: Gaussians out to
    /// 8 of the largest standard deviation, empirical supports padded by one
    /// of their bins.
    pub fn for_population(pop: &AppliancePopulation, n: usize) -> Result<Self> {
        let mut gauss: Option<(f64, f64, f64)> = None;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (_, t) in pop.transitions().filter(|(_, t)| t.participation > 0.0) {
            match &t.distribution {
                crate::model::PowerDistribution::Gaussian { mean, std } => {
                    let g = gauss.get_or_insert((*mean, *mean, *std));
                    g.0 = g.0.min(*mean);
                    g.1 = g.1.max(*mean);
                    g.2 = g.2.max(*std);
                }
                empirical => {
                    let (a, b) = empirical.support();
                    lo = lo.min(a);
                    hi = hi.max(b);
                }
            }
        }
        if let Some((min_mean, max_mean, max_std)) = gauss {
            let pad = crate::model::GAUSSIAN_SUPPORT_SIGMAS * max_std;
            lo = lo.min(min_mean - pad);
            hi = hi.max(max_mean + pad);
        }
        if !(lo < hi) {
            return Err(Error::InvalidPopulation(alloc::vec![crate::model::Violation::Empty]));
        }
        AlphaGrid::new(lo, hi, n)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn intervals(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.n + 1
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / self.n as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k == self.n {
            self.hi
        } else {
            self.lo + k as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|k| self.node(k)).collect()
    }

    /// Same bounds, twice the resolution.
    pub fn refined(&self) -> Self {
        AlphaGrid {
            n: self.n * 2,
            ..*self
        }
    }
}

/// Composite Simpson rule over uniformly spaced samples (odd count >= 3).
pub fn simpson(values: &[f64], step: f64) -> f64 {
    debug_assert!(values.len() >= 3 && values.len() % 2 == 1);
    let last = values.len() - 1;
    let mut odd = 0.0;
    let mut even = 0.0;
    for (k, v) in values.iter().enumerate().take(last).skip(1) {
        if k % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    step / 3.0 * (values[0] + values[last] + 4.0 * odd + 2.0 * even)
}

/// Simpson on the full grid and on every other node.
pub fn simpson_with_coarse(values: &[f64], step: f64) -> (f64, f64) {
    let fine = simpson(values, step);
    let coarse: Vec<f64> = values.iter().step_by(2).copied().collect();
    (fine, simpson(&coarse, 2.0 * step))
}

pub fn trapezoid_uniform(values: &[f64], step: f64) -> f64 {
    let last = values.len() - 1;
    step * (values[1..last].iter().sum::<f64>() + 0.5 * (values[0] + values[last]))
}
