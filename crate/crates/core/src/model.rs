//! Domain types shared by every stage: transition power distributions,
//! participation indices and the appliance population they form.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Tolerance on the participation sum for populations built in memory.
pub const STRICT_TOLERANCE: f64 = 1e-6;
/// Tolerance for populations read from rounded listings or files.
pub const FILE_TOLERANCE: f64 = 5e-3;

/// Multiple of the largest standard deviation a Gaussian support extends to.
pub const GAUSSIAN_SUPPORT_SIGMAS: f64 = 8.0;

const SQRT_2PI: f64 = 2.506_628_274_631_000_2;

/// Power value distribution of one mode transition, in watts.
#[derive(Debug, Clone, PartialEq)]
pub enum PowerDistribution {
    Gaussian { mean: f64, std: f64 },
    /// Piecewise-linear density on an ascending grid, zero outside it.
    Empirical { grid: Vec<f64>, density: Vec<f64> },
}

impl PowerDistribution {
    pub fn gaussian(mean: f64, std: f64) -> Result<Self> {
        let dist = PowerDistribution::Gaussian { mean, std };
        match dist.check() {
            Some(reason) => Err(Error::InvalidDistribution(reason)),
            None => Ok(dist),
        }
    }

    pub fn empirical(grid: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        let dist = PowerDistribution::Empirical { grid, density };
        match dist.check() {
            Some(reason) => Err(Error::InvalidDistribution(reason)),
            None => Ok(dist),
        }
    }

    /// Describes the first violated invariant, if any.
    pub fn check(&self) -> Option<String> {
        match self {
            PowerDistribution::Gaussian { mean, std } => {
                if !mean.is_finite() {
                    return Some(alloc::format!("gaussian mean must be finite, got {mean}"));
                }
                if !(std.is_finite() && *std > 0.0) {
                    return Some(alloc::format!("gaussian std must be > 0, got {std}"));
                }
                None
            }
            PowerDistribution::Empirical { grid, density } => {
                if grid.len() != density.len() {
                    return Some(alloc::format!(
                        "empirical grid has {} values but density has {}",
                        grid.len(),
                        density.len()
                    ));
                }
                if grid.len() < 2 {
                    return Some("empirical grid needs at least 2 points".to_string());
                }
                if grid.iter().any(|g| !g.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
                    return Some("empirical grid must be finite and strictly ascending".to_string());
                }
                if density.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
                    return Some("empirical density must be finite and >= 0".to_string());
                }
                let mass = trapezoid(grid, density);
                if (mass - 1.0).abs() > 1e-6 {
                    return Some(alloc::format!(
                        "empirical density integrates to {mass}, expected 1 +- 1e-6"
                    ));
                }
                None
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            PowerDistribution::Gaussian { mean, std } => {
                let z = (x - mean) / std;
                libm::exp(-0.5 * z * z) / (SQRT_2PI * std)
            }
            PowerDistribution::Empirical { grid, density } => {
                let last = grid.len() - 1;
                if !(x >= grid[0] && x <= grid[last]) {
                    return 0.0;
                }
                let hi = grid.partition_point(|&g| g < x).max(1);
                let lo = hi - 1;
                let t = (x - grid[lo]) / (grid[hi] - grid[lo]);
                density[lo] + t * (density[hi] - density[lo])
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            PowerDistribution::Gaussian { mean, .. } => *mean,
            PowerDistribution::Empirical { grid, density } => {
                let xs: Vec<f64> = grid.iter().zip(density).map(|(g, d)| g * d).collect();
                trapezoid(grid, &xs)
            }
        }
    }

    /// Interval outside of which the density is negligible (Gaussian) or zero
    /// (empirical, padded by one grid step).
    pub fn support(&self) -> (f64, f64) {
        match self {
            PowerDistribution::Gaussian { mean, std } => (
                mean - GAUSSIAN_SUPPORT_SIGMAS * std,
                mean + GAUSSIAN_SUPPORT_SIGMAS * std,
            ),
            PowerDistribution::Empirical { grid, .. } => {
                let last = grid.len() - 1;
                let step = grid[1] - grid[0];
                (grid[0] - step, grid[last] + step)
            }
        }
    }
}

/// Trapezoidal integral of `values` sampled on `grid`.
pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(g, v)| 0.5 * (g[1] - g[0]) * (v[0] + v[1]))
        .sum()
}

/// One operating-mode transition of an appliance.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionModel {
    pub distribution: PowerDistribution,
    /// Fraction of all aggregate events caused by this transition.
    pub participation: f64,
}

impl TransitionModel {
    pub fn new(distribution: PowerDistribution, participation: f64) -> Self {
        TransitionModel {
            distribution,
            participation,
        }
    }

    pub fn gaussian(mean: f64, std: f64, participation: f64) -> Result<Self> {
        Ok(TransitionModel::new(
            PowerDistribution::gaussian(mean, std)?,
            participation,
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Appliance {
    pub id: String,
    /// Transition `j` of this appliance is `transitions[j - 1]`.
    pub transitions: Vec<TransitionModel>,
}

impl Appliance {
    pub fn new(id: impl Into<String>, transitions: Vec<TransitionModel>) -> Self {
        Appliance {
            id: id.into(),
            transitions,
        }
    }
}

/// All appliances and their transitions: the complete input of the metric.
///
/// Construction does not check invariants so that invalid inputs can be
/// reported in full by [`AppliancePopulation::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct AppliancePopulation {
    appliances: Vec<Appliance>,
}

/// A failed population invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Empty,
    DuplicateId { appliance: String },
    NoTransitions { appliance: String },
    ParticipationOutOfRange { appliance: String, transition: usize, value: f64 },
    Distribution { appliance: String, transition: usize, reason: String },
    Normalization { total: f64, tolerance: f64 },
}

impl Violation {
    pub fn is_normalization(&self) -> bool {
        matches!(self, Violation::Normalization { .. })
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "appliances: population has no appliances"),
            Violation::DuplicateId { appliance } => {
                write!(f, "appliances.id: duplicate appliance id {appliance:?}")
            }
            Violation::NoTransitions { appliance } => {
                write!(f, "{appliance}.transitions: appliance has no transitions (needs >= 1)")
            }
            Violation::ParticipationOutOfRange {
                appliance,
                transition,
                value,
            } => write!(
                f,
                "{appliance}.transitions[{transition}].pi: participation out of [0,1] ({value})"
            ),
            Violation::Distribution {
                appliance,
                transition,
                reason,
            } => write!(f, "{appliance}.transitions[{transition}].dist: {reason}"),
            Violation::Normalization { total, tolerance } => write!(
                f,
                "pi: participation sums to {total}, outside 1 +- {tolerance}"
            ),
        }
    }
}

impl AppliancePopulation {
    pub fn new(appliances: Vec<Appliance>) -> Self {
        AppliancePopulation { appliances }
    }

    /// Builds and validates against `tolerance`.
    pub fn checked(appliances: Vec<Appliance>, tolerance: f64) -> Result<Self> {
        let pop = AppliancePopulation::new(appliances);
        let violations = pop.validate(tolerance);
        if violations.is_empty() {
            Ok(pop)
        } else {
            Err(Error::InvalidPopulation(violations))
        }
    }

    pub fn appliances(&self) -> &[Appliance] {
        &self.appliances
    }

    pub fn len(&self) -> usize {
        self.appliances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.appliances.is_empty()
    }

    pub fn transition_count(&self) -> usize {
        self.appliances.iter().map(|a| a.transitions.len()).sum()
    }

    /// Every transition with the index of its appliance, in population order.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, &TransitionModel)> + '_ {
        self.appliances
            .iter()
            .enumerate()
            .flat_map(|(i, a)| a.transitions.iter().map(move |t| (i, t)))
    }

    pub fn total_participation(&self) -> f64 {
        self.transitions().map(|(_, t)| t.participation).sum()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.appliances.iter().position(|a| a.id == id)
    }

    /// Lists every violated invariant; empty iff the population is valid.
    pub fn validate(&self, tolerance: f64) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.appliances.is_empty() {
            out.push(Violation::Empty);
            return out;
        }
        let mut seen = BTreeSet::new();
        for a in &self.appliances {
            if !seen.insert(a.id.as_str()) {
                out.push(Violation::DuplicateId {
                    appliance: a.id.clone(),
                });
            }
            if a.transitions.is_empty() {
                out.push(Violation::NoTransitions {
                    appliance: a.id.clone(),
                });
            }
            for (j, t) in a.transitions.iter().enumerate() {
                let p = t.participation;
                if !(0.0..=1.0).contains(&p) {
                    out.push(Violation::ParticipationOutOfRange {
                        appliance: a.id.clone(),
                        transition: j + 1,
                        value: p,
                    });
                }
                if let Some(reason) = t.distribution.check() {
                    out.push(Violation::Distribution {
                        appliance: a.id.clone(),
                        transition: j + 1,
                        reason,
                    });
                }
            }
        }
        let total = self.total_participation();
        if !((total - 1.0).abs() <= tolerance) {
            out.push(Violation::Normalization { total, tolerance });
        }
        out
    }

    /// Scales every participation index by `1 / total`.
    pub fn renormalize(&self) -> Result<Self> {
        let total = self.total_participation();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::DegeneratePopulation);
        }
        let appliances = self
            .appliances
            .iter()
            .map(|a| Appliance {
                id: a.id.clone(),
                transitions: a
                    .transitions
                    .iter()
                    .map(|t| TransitionModel {
                        distribution: t.distribution.clone(),
                        participation: t.participation / total,
                    })
                    .collect(),
            })
            .collect();
        Ok(AppliancePopulation { appliances })
    }

    /// Copy without the transitions whose participation is exactly zero.
    pub fn without_idle_transitions(&self) -> Self {
        let appliances = self
            .appliances
            .iter()
            .map(|a| Appliance {
                id: a.id.clone(),
                transitions: a
                    .transitions
                    .iter()
                    .filter(|t| t.participation != 0.0)
                    .cloned()
                    .collect(),
            })
            .collect();
        AppliancePopulation { appliances }
    }
}
