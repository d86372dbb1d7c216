//! Population JSON.
//!
//! ```json
//! { "appliances": [ { "id": "fridge", "transitions": [
//!     { "dist": { "type": "gaussian", "mean": 200, "std": 20 }, "pi": 0.4 },
//!     { "dist": { "type": "empirical", "grid": [..], "density": [..] }, "pi": 0.6 } ] } ] }
//! ```

use std::fs;
use std::path::Path;

use ddm_core::model::{FILE_TOLERANCE, STRICT_TOLERANCE};
use ddm_core::{Appliance, AppliancePopulation, PowerDistribution, TransitionModel};
use serde::{Deserialize, Serialize};

use crate::error::{KitError, Result};
use crate::json::round_sig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum DistDto {
    Gaussian { mean: f64, std: f64 },
    Empirical { grid: Vec<f64>, density: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDto {
    pub dist: DistDto,
    pub pi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApplianceDto {
    pub id: String,
    pub transitions: Vec<TransitionDto>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationDto {
    pub appliances: Vec<ApplianceDto>,
}

impl From<&AppliancePopulation> for PopulationDto {
    fn from(pop: &AppliancePopulation) -> Self {
        let r = |x: f64| round_sig(x);
        PopulationDto {
            appliances: pop
                .appliances()
                .iter()
                .map(|a| ApplianceDto {
                    id: a.id.clone(),
                    transitions: a
                        .transitions
                        .iter()
                        .map(|t| TransitionDto {
                            dist: match &t.distribution {
                                PowerDistribution::Gaussian { mean, std } => DistDto::Gaussian {
                                    mean: r(*mean),
                                    std: r(*std),
                                },
                                PowerDistribution::Empirical { grid, density } => DistDto::Empirical {
                                    grid: grid.iter().copied().map(r).collect(),
                                    density: density.iter().copied().map(r).collect(),
                                },
                            },
                            pi: r(t.participation),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl PopulationDto {
    /// Builds the population without checking it.
    pub fn to_population(&self) -> AppliancePopulation {
        AppliancePopulation::new(
            self.appliances
                .iter()
                .map(|a| {
                    Appliance::new(
                        a.id.clone(),
                        a.transitions
                            .iter()
                            .map(|t| {
                                let dist = match &t.dist {
                                    DistDto::Gaussian { mean, std } => PowerDistribution::Gaussian {
                                        mean: *mean,
                                        std: *std,
                                    },
                                    DistDto::Empirical { grid, density } => PowerDistribution::Empirical {
                                        grid: grid.clone(),
                                        density: density.clone(),
                                    },
                                };
                                TransitionModel::new(dist, t.pi)
                            })
                            .collect(),
                    )
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedPopulation {
    pub population: AppliancePopulation,
    /// Set when the participation indices were rescaled to sum to 1.
    pub renormalized_from: Option<f64>,
}

/// Parses and validates a population. Participation within the file
/// tolerance of 1 is rescaled; anything else that breaks an invariant is
/// an error listing every violation.
pub fn parse_population(text: &str, origin: &Path) -> Result<LoadedPopulation> {
    let dto: PopulationDto =
        serde_json::from_str(text).map_err(|e| KitError::Parse {
            path: origin.to_path_buf(),
            line: e.line() as u64,
            message: e.to_string(),
        })?;
    let pop = dto.to_population();
    let violations = pop.validate(FILE_TOLERANCE);
    if !violations.is_empty() {
        return Err(ddm_core::Error::InvalidPopulation(violations).into());
    }
    if pop.validate(STRICT_TOLERANCE).is_empty() {
        return Ok(LoadedPopulation {
            population: pop,
            renormalized_from: None,
        });
    }
    let total = pop.total_participation();
    log::warn!(
        "{}: participation sums to {total}; rescaled to 1",
        origin.display()
    );
    Ok(LoadedPopulation {
        population: pop.renormalize()?,
        renormalized_from: Some(total),
    })
}

pub fn read_population(path: &Path) -> Result<LoadedPopulation> {
    let text = fs::read_to_string(path).map_err(|e| KitError::io(path, e))?;
    parse_population(&text, path)
}

pub fn population_json(pop: &AppliancePopulation) -> String {
    let mut s = serde_json::to_string_pretty(&PopulationDto::from(pop)).expect("population serializes");
    s.push('\n');
    s
}

pub fn write_population(pop: &AppliancePopulation, path: &Path) -> Result<()> {
    fs::write(path, population_json(pop)).map_err(|e| KitError::io(path, e))
}
