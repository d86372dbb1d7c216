//! Per-transition power distributions and participation indices.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::PowerDistribution;

pub const DEFAULT_SIGMA_MIN: f64 = 1.0;
pub const DEFAULT_BIN_WIDTH: f64 = 5.0;
pub const DEFAULT_WINDOW: usize = 5;

/// Sample mean and sample standard deviation (n - 1), floored at `sigma_min`.
/// A single point gets `sigma_min`.
pub fn fit_gaussian(points: &[f64], sigma_min: f64) -> Result<PowerDistribution> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("cannot fit a distribution to no points".into()));
    }
    if !(sigma_min > 0.0) {
        return Err(Error::InvalidArgument("sigma_min must be > 0".into()));
    }
    // sort so the result does not depend on input order
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let std = if sorted.len() < 2 {
        sigma_min
    } else {
        let ss: f64 = sorted.iter().map(|p| (p - mean) * (p - mean)).sum();
        libm::sqrt(ss / (n - 1.0)).max(sigma_min)
    };
    PowerDistribution::gaussian(mean, std)
}

/// Triangular weights `1, 2, .., (w + 1) / 2, .., 2, 1` for odd `w`.
pub fn triangular_weights(window: usize) -> Vec<f64> {
    let half = window / 2;
    (0..window)
        .map(|i| (half + 1 - i.abs_diff(half)) as f64)
        .collect()
}

/// Histogram of the points smoothed by a triangular weighted moving average,
/// normalized to unit integral. Grid points are bin centers.
pub fn fit_wma_empirical(points: &[f64], bin_width: f64, window: usize) -> Result<PowerDistribution> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("cannot fit a distribution to no points".into()));
    }
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::InvalidArgument(alloc::format!("bin width must be > 0, got {bin_width}")));
    }
    if window % 2 == 0 {
        return Err(Error::InvalidArgument(alloc::format!("window length must be odd, got {window}")));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidArgument("points must be finite".into()));
    }
    let lo_pt = points.iter().copied().fold(f64::INFINITY, f64::min);
    let hi_pt = points.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let half = window / 2;
    let pad = (half + 1).max(3);

    // bins are centered on lo_pt + k * bin_width so a single point sits on a center
    let inner = libm::round((hi_pt - lo_pt) / bin_width) as usize + 1;
    let bins = inner + 2 * pad;
    let origin = lo_pt - pad as f64 * bin_width;
    let mut counts = vec![0.0; bins];
    for &p in points {
        let idx = libm::round((p - origin) / bin_width) as usize;
        counts[idx.min(bins - 1)] += 1.0;
    }

    let weights = triangular_weights(window);
    let wsum: f64 = weights.iter().sum();
    let mut smoothed = vec![0.0; bins];
    for (i, s) in smoothed.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, &w) in weights.iter().enumerate() {
            match (i + k).checked_sub(half) {
                Some(j) if j < bins => acc += w * counts[j],
                _ => {}
            }
        }
        *s = acc / wsum;
    }

    let grid: Vec<f64> = (0..bins).map(|k| origin + k as f64 * bin_width).collect();
    // first and last bins are zero, so the trapezoid integral is sum * width
    let mass: f64 = smoothed.iter().sum::<f64>() * bin_width;
    let density = smoothed.iter().map(|s| s / mass).collect();
    PowerDistribution::empirical(grid, density)
}

/// Participation index per transition: its event count over all events.
pub fn participation_indices(counts: &[Vec<u64>]) -> Result<Vec<Vec<f64>>> {
    let total: u64 = counts.iter().flatten().sum();
    if total == 0 {
        return Err(Error::NoEvents);
    }
    let total = total as f64;
    Ok(counts
        .iter()
        .map(|row| row.iter().map(|&c| c as f64 / total).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::trapezoid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn gaussian_two_points() {
        let d = fit_gaussian(&[199.0, 201.0], DEFAULT_SIGMA_MIN).unwrap();
        assert_eq!(d, PowerDistribution::Gaussian { mean: 200.0, std: core::f64::consts::SQRT_2 });
    }

    #[test]
    fn gaussian_floor() {
        let d = fit_gaussian(&[400.0, 400.0], DEFAULT_SIGMA_MIN).unwrap();
        assert_eq!(d, PowerDistribution::Gaussian { mean: 400.0, std: 1.0 });
        let d = fit_gaussian(&[123.0], DEFAULT_SIGMA_MIN).unwrap();
        assert_eq!(d, PowerDistribution::Gaussian { mean: 123.0, std: 1.0 });
    }

    #[test]
    fn gaussian_recovers_microwave_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let normal = Normal::new(1500.0, 10.0).unwrap();
        let pts: Vec<f64> = (0..10_000).map(|_| normal.sample(&mut rng)).collect();
        let PowerDistribution::Gaussian { mean, std } = fit_gaussian(&pts, 1.0).unwrap() else {
            unreachable!()
        };
        assert!((mean - 1500.0).abs() < 0.5, "{mean}");
        assert!((std - 10.0).abs() < 0.5, "{std}");
    }

    #[test]
    fn gaussian_is_order_invariant() {
        let a = [3.0, 1.5, 900.25, 7.0, 1e-3];
        let mut b = a;
        b.reverse();
        assert_eq!(fit_gaussian(&a, 1.0).unwrap(), fit_gaussian(&b, 1.0).unwrap());
    }

    #[test]
    fn weights_are_triangular() {
        assert_eq!(triangular_weights(1), vec![1.0]);
        assert_eq!(triangular_weights(5), vec![1.0, 2.0, 3.0, 2.0, 1.0]);
    }

    #[test]
    fn wma_single_point_is_triangle() {
        let d = fit_wma_empirical(&[100.0], 10.0, 1).unwrap();
        let PowerDistribution::Empirical { grid, density } = &d else { unreachable!() };
        let nonzero: Vec<(f64, f64)> = grid
            .iter()
            .zip(density)
            .filter(|(_, &v)| v > 0.0)
            .map(|(&g, &v)| (g, v))
            .collect();
        assert_eq!(nonzero, vec![(100.0, 0.1)]);
        assert_eq!(d.pdf(100.0), 0.1);
        assert!((d.pdf(95.0) - 0.05).abs() < 1e-15);
        assert_eq!(d.pdf(110.0), 0.0);
        assert!((trapezoid(grid, density) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wma_preserves_mirror_symmetry() {
        let pts = [100.0, 100.0, 105.0, 140.0, 175.0, 180.0, 180.0];
        let d = fit_wma_empirical(&pts, 5.0, 5).unwrap();
        let PowerDistribution::Empirical { grid, density } = &d else { unreachable!() };
        let n = density.len();
        for i in 0..n {
            assert!((density[i] - density[n - 1 - i]).abs() < 1e-15);
        }
        assert!((grid[0] + grid[n - 1] - 280.0).abs() < 1e-9);
        assert!(density[0] == 0.0 && density[n - 1] == 0.0);
    }

    #[test]
    fn wma_rejects_even_window() {
        assert!(fit_wma_empirical(&[1.0], 5.0, 4).is_err());
        assert!(fit_wma_empirical(&[1.0], 0.0, 5).is_err());
        assert!(fit_wma_empirical(&[], 5.0, 5).is_err());
    }

    #[test]
    fn participation_examples() {
        assert_eq!(
            participation_indices(&[vec![5], vec![15]]).unwrap(),
            vec![vec![0.25], vec![0.75]]
        );
        assert_eq!(participation_indices(&[vec![9]]).unwrap(), vec![vec![1.0]]);
        assert_eq!(participation_indices(&[vec![0], vec![]]), Err(Error::NoEvents));
    }

    #[test]
    fn participation_reproduces_rounded_fixture() {
        let pi = participation_indices(&crate::fixtures::three_appliance_counts()).unwrap();
        let expected = [[0.193, 0.096].as_slice(), &[0.322, 0.258], &[0.129]];
        for (row, exp) in pi.iter().zip(expected) {
            for (p, e) in row.iter().zip(exp) {
                assert!((p * 0.998 - e).abs() < 1e-12, "{p} vs {e}");
            }
        }
        let total: f64 = pi.iter().flatten().sum();
        assert!((total - 1.0).abs() < 1e-15);
    }
}
