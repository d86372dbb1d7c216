//! Monte-Carlo estimate of the metric, independent of the quadrature path:
//! draw a transition by participation, draw its event value, average `e_α`
//! under importance weights.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::ddm::LogBase;
use crate::error::{Error, Result};
use crate::model::{AppliancePopulation, PowerDistribution, TransitionModel};
use crate::partition::Partition;

pub const MIN_SAMPLES: usize = 10_000;

/// Scale factor on each component's spread in the widened proposal.
pub const WIDEN: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl MonteCarloEstimate {
    /// Whether `value` lies within `k` standard errors of the estimate.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        libm::fabs(self.mean - value) <= k * self.stderr
    }
}

pub(crate) enum Sampler<'a> {
    Gaussian(Normal<f64>),
    Empirical { grid: &'a [f64], density: &'a [f64], cdf: Vec<f64> },
}

impl<'a> Sampler<'a> {
    pub(crate) fn new(dist: &'a PowerDistribution) -> Result<Self> {
        match dist {
            PowerDistribution::Gaussian { mean, std } => Normal::new(*mean, *std)
                .map(Sampler::Gaussian)
                .map_err(|_| Error::InvalidDistribution(alloc::format!("bad gaussian ({mean}, {std})"))),
            PowerDistribution::Empirical { grid, density } => {
                let mut cdf = Vec::with_capacity(grid.len());
                let mut acc = 0.0;
                cdf.push(0.0);
                for k in 1..grid.len() {
                    acc += 0.5 * (grid[k] - grid[k - 1]) * (density[k] + density[k - 1]);
                    cdf.push(acc);
                }
                Ok(Sampler::Empirical { grid, density, cdf })
            }
        }
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Gaussian(n) => n.sample(rng),
            Sampler::Empirical { grid, density, cdf } => {
                let total = *cdf.last().expect("non-empty");
                let u = rng.random::<f64>() * total;
                let seg = cdf.partition_point(|&c| c < u).clamp(1, grid.len() - 1);
                let (x0, x1) = (grid[seg - 1], grid[seg]);
                let (d0, d1) = (density[seg - 1], density[seg]);
                let h = x1 - x0;
                // invert the linear density d0 + (d1 - d0) x / h on [0, h]
                let target = u - cdf[seg - 1];
                let a = (d1 - d0) / (2.0 * h);
                let disc = (d0 * d0 + 4.0 * a * target).max(0.0);
                let denom = d0 + libm::sqrt(disc);
                let x = if denom > 0.0 { 2.0 * target / denom } else { 0.5 * h };
                x0 + x.clamp(0.0, h)
            }
        }
    }
}

/// `Σ_k P(S_k | α) H(T | α, S_k)` evaluated term by term from the
/// normalized posterior.
fn block_entropy(transitions: &[&TransitionModel], blocks: &[Vec<usize>], alpha: f64, post: &mut Vec<f64>) -> f64 {
    post.clear();
    post.extend(transitions.iter().map(|t| t.participation * t.distribution.pdf(alpha)));
    let f_t: f64 = post.iter().sum();
    if !(f_t > 0.0) {
        return 0.0;
    }
    post.iter_mut().for_each(|p| *p /= f_t);
    let mut e = 0.0;
    for block in blocks {
        let mass: f64 = block.iter().map(|&t| post[t]).sum();
        if mass <= 0.0 {
            continue;
        }
        let h: f64 = block
            .iter()
            .map(|&t| post[t] / mass)
            .filter(|&q| q > 0.0)
            .map(|q| -q * libm::log(q))
            .sum();
        e += mass * h;
    }
    e
}

/// Spread used for the widened proposal component.
fn spread(dist: &PowerDistribution) -> f64 {
    match dist {
        PowerDistribution::Gaussian { std, .. } => *std,
        PowerDistribution::Empirical { grid, density } => {
            let m = dist.mean();
            let sq: Vec<f64> = grid.iter().zip(density).map(|(g, d)| (g - m) * (g - m) * d).collect();
            libm::sqrt(crate::model::trapezoid(grid, &sq)).max(grid[1] - grid[0])
        }
    }
}

/// Self-normalized importance-sampling estimate of `∫ f_T e_α`.
///
/// Half of the draws come from `f_T` itself and half from a copy of it with
/// every component widened by [`WIDEN`], so that the low-density overlap
/// regions between distant transitions are visited. Weights are
/// `f_T / q` with `q` the equal blend of the two, hence bounded by 2.
pub fn ddm_monte_carlo(
    pop: &AppliancePopulation,
    partition: &Partition,
    n_samples: usize,
    seed: u64,
    base: LogBase,
) -> Result<MonteCarloEstimate> {
    if n_samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(alloc::format!(
            "need at least {MIN_SAMPLES} samples, got {n_samples}"
        )));
    }
    if partition.len() != pop.len() {
        return Err(Error::InvalidPartition(alloc::format!(
            "partition covers {} appliances, population has {}",
            partition.len(),
            pop.len()
        )));
    }
    let transitions: Vec<_> = pop.transitions().map(|(_, t)| t).collect();
    let total: f64 = transitions.iter().map(|t| t.participation).sum();
    if !(total > 0.0) {
        return Err(Error::DegeneratePopulation);
    }
    let weights: Vec<f64> = transitions.iter().map(|t| t.participation / total).collect();
    let mut cumulative = Vec::with_capacity(transitions.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        cumulative.push(acc);
    }
    let samplers = transitions
        .iter()
        .map(|t| Sampler::new(&t.distribution))
        .collect::<Result<Vec<_>>>()?;
    let wide: Vec<PowerDistribution> = transitions
        .iter()
        .map(|t| PowerDistribution::gaussian(t.distribution.mean(), WIDEN * spread(&t.distribution)))
        .collect::<Result<_>>()?;
    let wide_samplers = wide.iter().map(Sampler::new).collect::<Result<Vec<_>>>()?;
    let blocks: Vec<Vec<usize>> = {
        let owners: Vec<usize> = pop.transitions().map(|(i, _)| i).collect();
        partition
            .blocks()
            .iter()
            .map(|apps| (0..owners.len()).filter(|t| apps.contains(&owners[*t])).collect())
            .collect()
    };
    let density = |alpha: f64, dists: &mut dyn Iterator<Item = &PowerDistribution>| -> f64 {
        dists.zip(&weights).map(|(d, w)| w * d.pdf(alpha)).sum()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut post = Vec::with_capacity(transitions.len());
    let mut draws = Vec::with_capacity(n_samples);
    let (mut sum_w, mut sum_we) = (0.0, 0.0);
    for _ in 0..n_samples {
        let widened = rng.random::<bool>();
        let u = rng.random::<f64>();
        let pick = cumulative
            .partition_point(|&c| c <= u)
            .min(transitions.len() - 1);
        let alpha = if widened {
            wide_samplers[pick].sample(&mut rng)
        } else {
            samplers[pick].sample(&mut rng)
        };
        let f = density(alpha, &mut transitions.iter().map(|t| &t.distribution));
        let g = density(alpha, &mut wide.iter());
        let q = 0.5 * (f + g);
        let w = if q > 0.0 { f / q } else { 0.0 };
        let e = if w > 0.0 { block_entropy(&transitions, &blocks, alpha, &mut post) } else { 0.0 };
        sum_w += w;
        sum_we += w * e;
        draws.push((w, e));
    }
    let mean = sum_we / sum_w;
    // delta-method variance of the ratio estimator
    let var: f64 = draws
        .iter()
        .map(|(w, e)| {
            let r = w * (e - mean);
            r * r
        })
        .sum::<f64>()
        / (sum_w * sum_w);
    let stderr = libm::sqrt(var * n_samples as f64 / (n_samples - 1) as f64);
    Ok(MonteCarloEstimate {
        mean: base.from_nats(mean),
        stderr: base.from_nats(stderr),
        samples: n_samples,
    })
}
