//! The disaggregation difficulty metric.
//!
//! A generic event value `α` has density `f_T(α) = Σ π_ij f_ij(α)` over all
//! transitions. Its posterior over transitions is `π_ij f_ij(α) / f_T(α)`
//! and `e_α` is the entropy of that posterior. The metric is the `f_T`
//! weighted average of `e_α`.
//!
//! With appliances partitioned into metered blocks, `e_α` becomes the block
//! posterior weighted average of the entropies of the within-block
//! conditional posteriors. Refining a partition can only lower `e_α` at
//! every `α`, so it can only lower the metric.
//!
//! All per-node quantities are computed from the unnormalized weights
//! `w_ij = π_ij f_ij(α)` so that the single-block case reproduces the
//! unpartitioned entropy bit for bit.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::model::AppliancePopulation;
use crate::partition::Partition;
use crate::quadrature::{self, AlphaGrid};

/// Mixture densities at or below this are treated as unsupported.
pub const DEFAULT_FLOOR: f64 = 1e-300;
pub const DEFAULT_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LogBase {
    #[default]
    E,
    Two,
    Ten,
}

impl LogBase {
    pub const ALL: [LogBase; 3] = [LogBase::Two, LogBase::E, LogBase::Ten];

    /// Converts an entropy in nats to this base.
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            LogBase::E => nats,
            LogBase::Two => nats / core::f64::consts::LN_2,
            LogBase::Ten => nats / core::f64::consts::LN_10,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LogBase::E => "e",
            LogBase::Two => "2",
            LogBase::Ten => "10",
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e" | "E" | "ln" | "nat" | "nats" => Ok(LogBase::E),
            "2" | "bits" => Ok(LogBase::Two),
            "10" => Ok(LogBase::Ten),
            other => Err(Error::InvalidArgument(alloc::format!(
                "log base must be one of e, 2, 10; got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdmConfig {
    pub base: LogBase,
    pub intervals: usize,
    pub floor: f64,
    /// Error estimates above this add a warning to the report.
    pub tolerance: f64,
}

impl Default for DdmConfig {
    fn default() -> Self {
        DdmConfig {
            base: LogBase::E,
            intervals: quadrature::DEFAULT_INTERVALS,
            floor: DEFAULT_FLOOR,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

/// Writes `π_ij f_ij(α)` for every transition into `out`; returns their sum.
pub fn transition_weights(pop: &AppliancePopulation, alpha: f64, out: &mut Vec<f64>) -> f64 {
    out.clear();
    let mut total = 0.0;
    for (_, t) in pop.transitions() {
        let w = t.participation * t.distribution.pdf(alpha);
        out.push(w);
        total += w;
    }
    total
}

/// Density of a generic event's value.
pub fn mixture_pdf(pop: &AppliancePopulation, alpha: f64) -> f64 {
    let mut w = Vec::with_capacity(pop.transition_count());
    transition_weights(pop, alpha, &mut w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    /// One probability per transition, in population order.
    pub probs: Vec<f64>,
    /// False when the mixture density is below the floor; `probs` is then
    /// uniform.
    pub supported: bool,
}

pub fn posterior(pop: &AppliancePopulation, alpha: f64) -> Posterior {
    let mut w = Vec::with_capacity(pop.transition_count());
    let f_t = transition_weights(pop, alpha, &mut w);
    if !(f_t > DEFAULT_FLOOR) {
        let m = w.len().max(1) as f64;
        return Posterior {
            probs: vec![1.0 / m; w.len()],
            supported: false,
        };
    }
    Posterior {
        probs: w.iter().map(|x| x / f_t).collect(),
        supported: true,
    }
}

/// Maps each transition (population order) to its appliance index.
pub fn transition_owners(pop: &AppliancePopulation) -> Vec<usize> {
    pop.transitions().map(|(i, _)| i).collect()
}

fn check_partition(pop: &AppliancePopulation, partition: &Partition) -> Result<()> {
    if partition.len() != pop.len() {
        return Err(Error::InvalidPartition(alloc::format!(
            "partition covers {} appliances, population has {}",
            partition.len(),
            pop.len()
        )));
    }
    Ok(())
}

/// Posterior mass of each block.
pub fn block_posterior(pop: &AppliancePopulation, partition: &Partition, alpha: f64) -> Result<Vec<f64>> {
    check_partition(pop, partition)?;
    let post = posterior(pop, alpha);
    let mut mass = vec![0.0; partition.block_count()];
    for ((i, _), p) in pop.transitions().zip(&post.probs) {
        mass[partition.block_of(i)] += p;
    }
    Ok(mass)
}

/// Scratch space for [`partitioned_entropy_nats`].
#[derive(Debug, Clone, Default)]
pub struct EntropyScratch {
    block_weight: Vec<f64>,
    block_entropy: Vec<f64>,
}

/// `e_α` in nats from the transition weights at one node.
///
/// `weights[t]` belongs to appliance `owners[t]`, which sits in block
/// `code[owners[t]]`. Nodes with `f_t <= floor` return 0.
pub fn partitioned_entropy_nats(
    weights: &[f64],
    f_t: f64,
    owners: &[usize],
    partition: &Partition,
    floor: f64,
    scratch: &mut EntropyScratch,
) -> f64 {
    if !(f_t > floor) {
        return 0.0;
    }
    let b = partition.block_count();
    let code = partition.code();
    scratch.block_weight.clear();
    scratch.block_weight.resize(b, 0.0);
    scratch.block_entropy.clear();
    scratch.block_entropy.resize(b, 0.0);
    for (&w, &owner) in weights.iter().zip(owners) {
        scratch.block_weight[code[owner] as usize] += w;
    }
    for (&w, &owner) in weights.iter().zip(owners) {
        if w > 0.0 {
            let k = code[owner] as usize;
            let q = w / scratch.block_weight[k];
            scratch.block_entropy[k] -= q * libm::log(q);
        }
    }
    let mut e = 0.0;
    for (&wk, &hk) in scratch.block_weight.iter().zip(&scratch.block_entropy) {
        if wk > 0.0 {
            e += (wk / f_t) * hk;
        }
    }
    e
}

/// Entropy of the transition posterior at `alpha`.
pub fn entropy_alpha(pop: &AppliancePopulation, alpha: f64, base: LogBase) -> f64 {
    let partition = Partition::single_block(pop.len());
    entropy_alpha_partitioned(pop, &partition, alpha, base).expect("single block fits")
}

/// Block-weighted within-block entropy at `alpha`.
pub fn entropy_alpha_partitioned(
    pop: &AppliancePopulation,
    partition: &Partition,
    alpha: f64,
    base: LogBase,
) -> Result<f64> {
    check_partition(pop, partition)?;
    let mut w = Vec::with_capacity(pop.transition_count());
    let f_t = transition_weights(pop, alpha, &mut w);
    let owners = transition_owners(pop);
    let nats = partitioned_entropy_nats(&w, f_t, &owners, partition, DEFAULT_FLOOR, &mut EntropyScratch::default());
    Ok(base.from_nats(nats))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DdmReport {
    pub ddm: f64,
    pub base: LogBase,
    /// Probability that an event is caused by each block.
    pub per_block_mass: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub e_alpha: Vec<f64>,
    /// Absolute difference to the half-resolution Simpson estimate.
    pub quadrature_error_estimate: f64,
    /// Grid nodes where the mixture density fell below the floor.
    pub unsupported_nodes: usize,
    pub warning: Option<String>,
}

/// Mixture weights tabulated on a grid; evaluates the metric for any
/// partition of the population it was built from.
#[derive(Debug, Clone)]
pub struct Evaluator {
    grid: AlphaGrid,
    config: DdmConfig,
    /// Node-major: `weights[k * m + t]`.
    weights: Vec<f64>,
    f_t: Vec<f64>,
    owners: Vec<usize>,
    appliances: usize,
    /// Participation per appliance over the population total.
    appliance_mass: Vec<f64>,
}

impl Evaluator {
    pub fn new(pop: &AppliancePopulation, config: DdmConfig) -> Result<Self> {
        let grid = AlphaGrid::for_population(pop, config.intervals)?;
        Self::with_grid(pop, grid, config)
    }

    pub fn with_grid(pop: &AppliancePopulation, grid: AlphaGrid, config: DdmConfig) -> Result<Self> {
        if pop.is_empty() || pop.transition_count() == 0 {
            return Err(Error::InvalidPopulation(vec![crate::model::Violation::Empty]));
        }
        let m = pop.transition_count();
        let nodes = grid.node_count();
        let mut weights = Vec::with_capacity(m * nodes);
        let mut f_t = Vec::with_capacity(nodes);
        let mut row = Vec::with_capacity(m);
        for k in 0..nodes {
            f_t.push(transition_weights(pop, grid.node(k), &mut row));
            weights.extend_from_slice(&row);
        }
        let total = pop.total_participation();
        let mut appliance_mass = vec![0.0; pop.len()];
        for (i, t) in pop.transitions() {
            appliance_mass[i] += t.participation;
        }
        if total > 0.0 {
            appliance_mass.iter_mut().for_each(|p| *p /= total);
        }
        Ok(Evaluator {
            grid,
            config,
            weights,
            f_t,
            owners: transition_owners(pop),
            appliances: pop.len(),
            appliance_mass,
        })
    }

    pub fn grid(&self) -> &AlphaGrid {
        &self.grid
    }

    pub fn config(&self) -> &DdmConfig {
        &self.config
    }

    pub fn appliance_count(&self) -> usize {
        self.appliances
    }

    pub fn transition_count(&self) -> usize {
        self.owners.len()
    }

    /// Mixture density at every grid node.
    pub fn mixture(&self) -> &[f64] {
        &self.f_t
    }

    /// `π f(α)` of every transition at node `k`.
    pub fn weights_at(&self, k: usize) -> &[f64] {
        let m = self.owners.len();
        &self.weights[k * m..(k + 1) * m]
    }

    /// Transition posterior at node `k` (uniform where unsupported).
    pub fn posterior_at(&self, k: usize) -> Vec<f64> {
        let m = self.owners.len();
        let row = &self.weights[k * m..(k + 1) * m];
        let f_t = self.f_t[k];
        if f_t > self.config.floor {
            row.iter().map(|w| w / f_t).collect()
        } else {
            vec![1.0 / m as f64; m]
        }
    }

    fn check(&self, partition: &Partition) -> Result<()> {
        if partition.len() != self.appliances {
            return Err(Error::InvalidPartition(alloc::format!(
                "partition covers {} appliances, population has {}",
                partition.len(),
                self.appliances
            )));
        }
        Ok(())
    }

    /// `e_α` in nats at every node.
    fn entropy_curve_nats(&self, partition: &Partition) -> Vec<f64> {
        let m = self.owners.len();
        let mut scratch = EntropyScratch::default();
        self.f_t
            .iter()
            .enumerate()
            .map(|(k, &f_t)| {
                partitioned_entropy_nats(
                    &self.weights[k * m..(k + 1) * m],
                    f_t,
                    &self.owners,
                    partition,
                    self.config.floor,
                    &mut scratch,
                )
            })
            .collect()
    }

    /// `e_α` in the configured base at every node.
    pub fn entropy_curve(&self, partition: &Partition) -> Result<Vec<f64>> {
        self.check(partition)?;
        let base = self.config.base;
        Ok(self.entropy_curve_nats(partition).into_iter().map(|e| base.from_nats(e)).collect())
    }

    /// Metric in nats on the full grid and on every other node.
    pub fn ddm_nats_with_coarse(&self, partition: &Partition) -> Result<(f64, f64)> {
        self.check(partition)?;
        let integrand: Vec<f64> = self
            .entropy_curve_nats(partition)
            .iter()
            .zip(&self.f_t)
            .map(|(e, f)| e * f)
            .collect();
        Ok(quadrature::simpson_with_coarse(&integrand, self.grid.step()))
    }

    /// Metric value only, in the configured base.
    pub fn ddm_value(&self, partition: &Partition) -> Result<f64> {
        let (fine, _) = self.ddm_nats_with_coarse(partition)?;
        Ok(self.config.base.from_nats(fine))
    }

    pub fn ddm(&self, partition: &Partition) -> Result<DdmReport> {
        self.check(partition)?;
        let base = self.config.base;
        let curve = self.entropy_curve_nats(partition);
        let integrand: Vec<f64> = curve.iter().zip(&self.f_t).map(|(e, f)| e * f).collect();
        let (fine, coarse) = quadrature::simpson_with_coarse(&integrand, self.grid.step());
        let ddm = base.from_nats(fine);
        let err = libm::fabs(base.from_nats(fine) - base.from_nats(coarse));

        let mut per_block_mass = vec![0.0; partition.block_count()];
        for (i, p) in self.appliance_mass.iter().enumerate() {
            per_block_mass[partition.block_of(i)] += p;
        }
        let unsupported_nodes = self.f_t.iter().filter(|&&f| !(f > self.config.floor)).count();
        let warning = (err > self.config.tolerance).then(|| {
            alloc::format!(
                "quadrature error estimate {err:.3e} exceeds tolerance {:.1e}; increase the grid size",
                self.config.tolerance
            )
        });
        Ok(DdmReport {
            ddm: ddm.max(0.0),
            base,
            per_block_mass,
            alpha_grid: self.grid.nodes(),
            e_alpha: curve.into_iter().map(|e| base.from_nats(e)).collect(),
            quadrature_error_estimate: err,
            unsupported_nodes,
            warning,
        })
    }
}

/// Metric of the whole population behind one meter.
pub fn ddm_single(pop: &AppliancePopulation, grid: AlphaGrid, config: DdmConfig) -> Result<DdmReport> {
    Evaluator::with_grid(pop, grid, config)?.ddm(&Partition::single_block(pop.len()))
}

/// Metric with one meter per block of `partition`.
pub fn ddm_partitioned(
    pop: &AppliancePopulation,
    partition: &Partition,
    grid: AlphaGrid,
    config: DdmConfig,
) -> Result<DdmReport> {
    Evaluator::with_grid(pop, grid, config)?.ddm(partition)
}

/// Single-block metric in each supported log base, ordered as
/// [`LogBase::ALL`].
pub fn base_sweep(pop: &AppliancePopulation, config: DdmConfig) -> Result<Vec<(LogBase, f64)>> {
    let eval = Evaluator::new(pop, DdmConfig { base: LogBase::E, ..config })?;
    let nats = eval.ddm_value(&Partition::single_block(pop.len()))?;
    Ok(LogBase::ALL.iter().map(|&b| (b, b.from_nats(nats))).collect())
}

/// Base whose value lies closest to `target`.
pub fn best_fit_base(sweep: &[(LogBase, f64)], target: f64) -> Option<(LogBase, f64)> {
    sweep
        .iter()
        .copied()
        .min_by(|a, b| libm::fabs(a.1 - target).total_cmp(&libm::fabs(b.1 - target)))
}
