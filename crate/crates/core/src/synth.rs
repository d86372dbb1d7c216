//! Synthetic training signals drawn from a known population.
//!
//! Pulses are shared among transitions in proportion to their participation
//! (largest-remainder rounding) and played in shuffled order. Each pulse draws
//! a power level from its distribution and switches the owning appliance
//! from 0 W to that level and back. Every pulse therefore produces one
//! rising and one falling event of (almost) the same magnitude, and event
//! frequencies follow the participation indices.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::model::AppliancePopulation;
use crate::oracle::Sampler;
use crate::signal::PowerSignal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub pulses: usize,
    /// Standard deviation of the meter noise on plateaus (W).
    pub noise_std: f64,
    pub sample_period: f64,
    /// Inclusive range of idle and plateau lengths, in samples.
    pub min_run: usize,
    pub max_run: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            pulses: 1500,
            noise_std: 0.5,
            sample_period: 1.0,
            min_run: 3,
            max_run: 8,
            seed: 7,
        }
    }
}

/// One signal per appliance, in population order.
pub fn synthesize_signals(pop: &AppliancePopulation, config: &SynthConfig) -> Result<Vec<PowerSignal>> {
    if config.min_run == 0 || config.max_run < config.min_run {
        return Err(Error::InvalidArgument("run lengths must satisfy 1 <= min_run <= max_run".into()));
    }
    let noise = Normal::new(0.0, config.noise_std.max(0.0))
        .map_err(|_| Error::InvalidArgument("noise_std must be finite".into()))?;
    let transitions: Vec<_> = pop.transitions().collect();
    let total: f64 = transitions.iter().map(|(_, t)| t.participation).sum();
    if !(total > 0.0) {
        return Err(Error::DegeneratePopulation);
    }
    let samplers = transitions
        .iter()
        .map(|(_, t)| Sampler::new(&t.distribution))
        .collect::<Result<Vec<_>>>()?;
    let quotas: Vec<f64> = transitions
        .iter()
        .map(|(_, t)| t.participation / total * config.pulses as f64)
        .collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| libm::floor(*q) as usize).collect();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| (quotas[b] - libm::floor(quotas[b])).total_cmp(&(quotas[a] - libm::floor(quotas[a]))));
    let short = config.pulses - counts.iter().sum::<usize>();
    for &j in order.iter().take(short) {
        counts[j] += 1;
    }
    let mut schedule: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(j, &c)| core::iter::repeat_n(j, c))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    schedule.shuffle(&mut rng);
    let mut traces: Vec<Vec<f64>> = vec![Vec::new(); pop.len()];
    for pick in schedule {
        let owner = transitions[pick].0;
        let level = samplers[pick].sample(&mut rng).max(1.0);
        let trace = &mut traces[owner];
        let idle = rng.random_range(config.min_run..=config.max_run);
        trace.extend(core::iter::repeat_n(0.0, idle));
        let on = rng.random_range(config.min_run..=config.max_run);
        for _ in 0..on {
            trace.push(level + noise.sample(&mut rng));
        }
    }
    pop.appliances()
        .iter()
        .zip(traces)
        .map(|(a, mut trace)| {
            trace.extend(core::iter::repeat_n(0.0, config.min_run.max(2)));
            PowerSignal::new(a.id.clone(), config.sample_period, trace)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rising_edges(trace: &[f64]) -> usize {
        trace.windows(2).filter(|w| w[0] == 0.0 && w[1] != 0.0).count()
    }

    #[test]
    fn pulses_follow_participation_exactly() {
        let pop = crate::fixtures::three_appliances();
        let total = pop.total_participation();
        let signals = synthesize_signals(&pop, &SynthConfig { pulses: 1000, ..Default::default() }).unwrap();
        let counts: Vec<usize> = signals.iter().map(|s| rising_edges(&s.samples)).collect();
        assert_eq!(counts.iter().sum::<usize>(), 1000);
        for (a, c) in pop.appliances().iter().zip(&counts) {
            let share: f64 = a.transitions.iter().map(|t| t.participation).sum::<f64>() / total;
            assert!((*c as f64 - share * 1000.0).abs() <= 2.0, "{} {c}", a.id);
        }
    }

    #[test]
    fn same_seed_same_signals() {
        let pop = crate::fixtures::three_appliances();
        let cfg = SynthConfig { pulses: 50, ..Default::default() };
        assert_eq!(synthesize_signals(&pop, &cfg).unwrap(), synthesize_signals(&pop, &cfg).unwrap());
    }
}
