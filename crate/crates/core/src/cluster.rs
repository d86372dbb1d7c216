//! One-dimensional k-means (Lloyd iterations, k-means++ seeding) and elbow
//! selection of the cluster count.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    pub k: usize,
    pub centroids: Vec<f64>,
    /// Cluster index per input point.
    pub assignment: Vec<usize>,
    /// Sum of squared distances to the cluster means.
    pub cost: f64,
    /// Cost after every Lloyd iteration; non-increasing.
    pub cost_trace: Vec<f64>,
}

impl ClusteringResult {
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignment {
            sizes[a] += 1;
        }
        sizes
    }

    pub fn members<'a>(&'a self, points: &'a [f64], cluster: usize) -> impl Iterator<Item = f64> + 'a {
        points
            .iter()
            .zip(&self.assignment)
            .filter(move |(_, &a)| a == cluster)
            .map(|(&p, _)| p)
    }
}

/// Cluster means of an assignment (NaN for empty clusters).
pub fn cluster_means(points: &[f64], assignment: &[usize], k: usize) -> Vec<f64> {
    let mut sums = vec![0.0; k];
    let mut counts = vec![0usize; k];
    for (&p, &a) in points.iter().zip(assignment) {
        sums[a] += p;
        counts[a] += 1;
    }
    sums.iter()
        .zip(&counts)
        .map(|(s, &c)| if c == 0 { f64::NAN } else { s / c as f64 })
        .collect()
}

/// Within-cluster sum of squares around each cluster's own mean.
pub fn assignment_cost(points: &[f64], assignment: &[usize], k: usize) -> f64 {
    let means = cluster_means(points, assignment, k);
    points
        .iter()
        .zip(assignment)
        .map(|(&p, &a)| (p - means[a]) * (p - means[a]))
        .sum()
}

fn nearest(p: f64, centroids: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, &x) in centroids.iter().enumerate() {
        let d = (p - x) * (p - x);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

fn seed_plus_plus(points: &[f64], k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..points.len())]);
    let mut dist: Vec<f64> = points.iter().map(|&p| (p - centroids[0]) * (p - centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = dist.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in dist.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                acc += d;
                pick = Some(i);
                if acc >= target {
                    break;
                }
            }
            points[pick.expect("positive total has a positive term")]
        } else {
            points[rng.random_range(0..points.len())]
        };
        centroids.push(next);
        for (d, &p) in dist.iter_mut().zip(points) {
            *d = d.min((p - next) * (p - next));
        }
    }
    centroids
}

/// Gives every empty cluster the point farthest from its centroid among
/// clusters with more than one member. Never increases the cost.
fn fill_empty(points: &[f64], assignment: &mut [usize], centroids: &mut [f64]) {
    let k = centroids.len();
    loop {
        let mut sizes = vec![0usize; k];
        for &a in assignment.iter() {
            sizes[a] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let mut donor = None;
        let mut far = -1.0;
        for (i, (&p, &a)) in points.iter().zip(assignment.iter()).enumerate() {
            if sizes[a] > 1 {
                let d = (p - centroids[a]) * (p - centroids[a]);
                if d > far {
                    far = d;
                    donor = Some(i);
                }
            }
        }
        let i = donor.expect("k <= points leaves a cluster with a spare member");
        assignment[i] = empty;
        centroids[empty] = points[i];
    }
}

/// Lloyd iterations from a k-means++ seeding; deterministic given `seed`.
pub fn kmeans(points: &[f64], k: usize, seed: u64) -> Result<ClusteringResult> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    if k > points.len() {
        return Err(Error::TooFewPoints {
            points: points.len(),
            k,
        });
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidArgument("points must be finite".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_plus_plus(points, k, &mut rng);
    let mut assignment: Vec<usize> = points.iter().map(|&p| nearest(p, &centroids)).collect();
    fill_empty(points, &mut assignment, &mut centroids);
    let mut cost_trace = vec![assignment_cost(points, &assignment, k)];

    for _ in 0..MAX_ITERATIONS {
        centroids = cluster_means(points, &assignment, k);
        let mut next: Vec<usize> = points.iter().map(|&p| nearest(p, &centroids)).collect();
        fill_empty(points, &mut next, &mut centroids);
        if next == assignment {
            break;
        }
        assignment = next;
        cost_trace.push(assignment_cost(points, &assignment, k));
    }
    let centroids = cluster_means(points, &assignment, k);
    let cost = assignment_cost(points, &assignment, k);
    Ok(ClusteringResult {
        k,
        centroids,
        assignment,
        cost,
        cost_trace,
    })
}

fn restart_seed(seed: u64, k: usize, restart: usize) -> u64 {
    // splitmix64 step over the combined key
    let mut z = seed
        .wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add((restart as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Lowest-cost result over `restarts` seeds (first wins ties).
pub fn kmeans_best_of(points: &[f64], k: usize, seed: u64, restarts: usize) -> Result<ClusteringResult> {
    let mut best: Option<ClusteringResult> = None;
    for r in 0..restarts.max(1) {
        let run = kmeans(points, k, restart_seed(seed, k, r))?;
        if best.as_ref().is_none_or(|b| run.cost < b.cost) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElbowConfig {
    pub k_max: usize,
    /// Minimum fractional cost reduction for accepting one more cluster.
    pub min_drop: f64,
    pub restarts: usize,
}

impl Default for ElbowConfig {
    fn default() -> Self {
        ElbowConfig {
            k_max: 8,
            min_drop: 0.75,
            restarts: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElbowResult {
    pub k: usize,
    /// Best cost for K = 1, 2, ... as far as the search went.
    pub costs: Vec<f64>,
    pub clustering: ClusteringResult,
}

/// Grows K while each extra cluster removes at least `min_drop` of the
/// remaining cost; stops once the cost is numerically zero.
pub fn elbow_select(points: &[f64], config: &ElbowConfig, seed: u64) -> Result<ElbowResult> {
    if points.is_empty() {
        return Err(Error::TooFewPoints { points: 0, k: 1 });
    }
    let mut current = kmeans_best_of(points, 1, seed, config.restarts)?;
    let mut costs = vec![current.cost];
    if points.len() < 2 {
        return Ok(ElbowResult {
            k: 1,
            costs,
            clustering: current,
        });
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let k_max = config.k_max.max(1).min(sorted.len());
    let scale: f64 = points.iter().map(|p| p * p).sum::<f64>().max(1.0);

    while current.k < k_max {
        if current.cost <= 1e-12 * scale {
            break;
        }
        let next = kmeans_best_of(points, current.k + 1, seed, config.restarts)?;
        costs.push(next.cost);
        if next.cost > (1.0 - config.min_drop) * current.cost {
            break;
        }
        current = next;
    }
    Ok(ElbowResult {
        k: current.k,
        costs,
        clustering: current,
    })
}

pub fn elbow_select_k(points: &[f64], config: &ElbowConfig, seed: u64) -> usize {
    elbow_select(points, config, seed).map_or(1, |r| r.k)
}
