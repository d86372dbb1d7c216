//! Training signals to appliance population: detect events, cluster their
//! magnitudes per appliance, fit one distribution per cluster and derive
//! participation indices from the cluster sizes.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::cluster::{self, ElbowConfig};
use crate::error::{Error, Result};
use crate::event::{self, DetectorConfig, EventRecord};
use crate::fit;
use crate::model::{Appliance, AppliancePopulation, PowerDistribution, TransitionModel};
use crate::signal::PowerSignal;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistKind {
    Gaussian,
    /// Triangular weighted moving average over a histogram.
    Wma { bin_width: f64, window: usize },
}

impl DistKind {
    pub fn wma_default() -> Self {
        DistKind::Wma {
            bin_width: fit::DEFAULT_BIN_WIDTH,
            window: fit::DEFAULT_WINDOW,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractConfig {
    pub detector: DetectorConfig,
    pub elbow: ElbowConfig,
    pub dist: DistKind,
    pub sigma_min: f64,
    /// Cluster rising and falling events separately.
    pub cluster_signed: bool,
    pub seed: u64,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            detector: DetectorConfig::default(),
            elbow: ElbowConfig::default(),
            dist: DistKind::Gaussian,
            sigma_min: fit::DEFAULT_SIGMA_MIN,
            cluster_signed: false,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedTransition {
    pub distribution: PowerDistribution,
    pub events: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApplianceExtraction {
    pub id: String,
    pub events: Vec<EventRecord>,
    /// Sorted by mean power.
    pub transitions: Vec<ExtractedTransition>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    NoEvents { appliance: String },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::NoEvents { appliance } => write!(
                f,
                "appliance {appliance:?} has no events in the training data and is left out of the population"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationBuild {
    pub population: AppliancePopulation,
    pub extractions: Vec<ApplianceExtraction>,
    pub warnings: Vec<Warning>,
}

fn appliance_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn cluster_group(
    magnitudes: &[f64],
    config: &ExtractConfig,
    seed: u64,
    out: &mut Vec<ExtractedTransition>,
) -> Result<()> {
    if magnitudes.is_empty() {
        return Ok(());
    }
    let elbow = cluster::elbow_select(magnitudes, &config.elbow, seed)?;
    let clustering = elbow.clustering;
    for c in 0..clustering.k {
        let members: Vec<f64> = clustering.members(magnitudes, c).collect();
        if members.is_empty() {
            continue;
        }
        let distribution = match config.dist {
            DistKind::Gaussian => fit::fit_gaussian(&members, config.sigma_min)?,
            DistKind::Wma { bin_width, window } => fit::fit_wma_empirical(&members, bin_width, window)?,
        };
        out.push(ExtractedTransition {
            distribution,
            events: members.len() as u64,
        });
    }
    Ok(())
}

/// Events and transitions of one appliance signal.
pub fn extract_appliance(signal: &PowerSignal, config: &ExtractConfig, index: usize) -> Result<ApplianceExtraction> {
    let events = event::detect_events(signal, &config.detector);
    let seed = appliance_seed(config.seed, index);
    let mut transitions = Vec::new();
    if config.cluster_signed {
        let on: Vec<f64> = events.iter().filter(|e| e.delta_watts > 0.0).map(|e| e.magnitude_watts).collect();
        let off: Vec<f64> = events.iter().filter(|e| e.delta_watts < 0.0).map(|e| e.magnitude_watts).collect();
        cluster_group(&on, config, seed, &mut transitions)?;
        cluster_group(&off, config, seed ^ 1, &mut transitions)?;
    } else {
        cluster_group(&event::event_magnitudes(&events), config, seed, &mut transitions)?;
    }
    transitions.sort_by(|a, b| a.distribution.mean().total_cmp(&b.distribution.mean()));
    Ok(ApplianceExtraction {
        id: signal.appliance_id.clone(),
        events,
        transitions,
    })
}

/// Participation from cross-appliance event counts. Appliances without
/// events are dropped with a warning.
pub fn assemble(extractions: Vec<ApplianceExtraction>) -> Result<PopulationBuild> {
    let counts: Vec<Vec<u64>> = extractions
        .iter()
        .map(|x| x.transitions.iter().map(|t| t.events).collect())
        .collect();
    let pi = fit::participation_indices(&counts)?;
    let mut warnings = Vec::new();
    let mut appliances = Vec::new();
    for (x, row) in extractions.iter().zip(&pi) {
        if x.transitions.is_empty() {
            warnings.push(Warning::NoEvents {
                appliance: x.id.clone(),
            });
            continue;
        }
        appliances.push(Appliance::new(
            x.id.clone(),
            x.transitions
                .iter()
                .zip(row)
                .map(|(t, &p)| TransitionModel::new(t.distribution.clone(), p))
                .collect(),
        ));
    }
    let population = AppliancePopulation::new(appliances);
    let violations = population.validate(crate::model::STRICT_TOLERANCE);
    if !violations.is_empty() {
        return Err(Error::InvalidPopulation(violations));
    }
    Ok(PopulationBuild {
        population,
        extractions,
        warnings,
    })
}

pub fn build_population(signals: &[PowerSignal], config: &ExtractConfig) -> Result<PopulationBuild> {
    if signals.is_empty() {
        return Err(Error::InvalidArgument("need at least one signal".into()));
    }
    let extractions = signals
        .iter()
        .enumerate()
        .map(|(i, s)| extract_appliance(s, config, i))
        .collect::<Result<Vec<_>>>()?;
    assemble(extractions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn pulses(id: &str, levels: &[f64]) -> PowerSignal {
        let mut s = vec![0.0; 4];
        for &l in levels {
            s.extend([l; 4]);
            s.extend([0.0; 4]);
        }
        PowerSignal::new(id, 1.0, s).unwrap()
    }

    #[test]
    fn two_appliances_two_modes() {
        let a = pulses("fridge", &[100.0, 100.0, 100.0, 101.0, 99.0]);
        let b = pulses("kettle", &[2000.0, 2001.0, 1999.0, 2000.0]);
        let build = build_population(&[a, b], &ExtractConfig::default()).unwrap();
        let pop = &build.population;
        assert_eq!(pop.transition_count(), 2);
        let means: Vec<f64> = pop.transitions().map(|(_, t)| t.distribution.mean()).collect();
        assert!((means[0] - 100.0).abs() < 2.0);
        assert!((means[1] - 2000.0).abs() < 2.0);
        let pis: Vec<f64> = pop.transitions().map(|(_, t)| t.participation).collect();
        assert!((pis[0] - 10.0 / 18.0).abs() < 1e-12);
        assert!(build.warnings.is_empty());
    }

    #[test]
    fn idle_appliance_is_left_out() {
        let a = pulses("used", &[500.0, 500.0]);
        let idle = PowerSignal::new("idle", 1.0, vec![0.0; 20]).unwrap();
        let build = build_population(&[a, idle], &ExtractConfig::default()).unwrap();
        assert_eq!(build.population.len(), 1);
        assert_eq!(build.warnings, vec![Warning::NoEvents { appliance: "idle".into() }]);
        assert!((build.population.total_participation() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn all_idle_is_an_error() {
        let idle = PowerSignal::new("idle", 1.0, vec![0.0; 20]).unwrap();
        assert_eq!(build_population(&[idle], &ExtractConfig::default()), Err(Error::NoEvents));
    }

    #[test]
    fn signed_clustering_splits_on_and_off() {
        let a = pulses("a", &[300.0, 300.0, 300.0]);
        let config = ExtractConfig { cluster_signed: true, ..Default::default() };
        let build = build_population(&[a], &config).unwrap();
        assert_eq!(build.population.transition_count(), 2);
    }

    #[test]
    fn wma_distributions_validate() {
        let a = pulses("a", &[300.0, 310.0, 305.0, 295.0]);
        let config = ExtractConfig { dist: DistKind::wma_default(), ..Default::default() };
        let build = build_population(&[a], &config).unwrap();
        assert!(matches!(
            build.population.appliances()[0].transitions[0].distribution,
            PowerDistribution::Empirical { .. }
        ));
    }
}
