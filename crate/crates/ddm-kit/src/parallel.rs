//! Multi-threaded drivers around the core algorithms. Results match the
//! sequential versions exactly.

use ddm_core::extract::{self, ExtractConfig, PopulationBuild};
use ddm_core::optimize::{self, LandscapeRow, OptimizeConfig, Optimization};
use ddm_core::partition::enumerate_partitions;
use ddm_core::{ConstraintSet, Evaluator, PowerSignal};
use rayon::prelude::*;

const CHUNK: usize = 8192;

/// Same result as [`optimize::optimize`]. Pruned runs go through it.
pub fn optimize(eval: &Evaluator, constraints: &ConstraintSet, config: &OptimizeConfig) -> ddm_core::Result<Optimization> {
    if config.prune || !(config.unit_cost >= 0.0 && config.unit_cost.is_finite()) {
        return optimize::optimize(eval, constraints, config);
    }
    let mut partitions = enumerate_partitions(eval.appliance_count(), constraints)?;
    let mut landscape: Vec<LandscapeRow> = Vec::new();
    loop {
        let chunk: Vec<_> = partitions.by_ref().take(CHUNK).collect();
        if chunk.is_empty() {
            break;
        }
        let rows = chunk
            .into_par_iter()
            .map(|p| eval.ddm_value(&p).map(|ddm| LandscapeRow { partition: p, ddm }))
            .collect::<ddm_core::Result<Vec<_>>>()?;
        landscape.extend(rows);
    }
    Ok(Optimization {
        rows: optimize::summarize(&landscape, config.unit_cost),
        landscape,
        skipped: 0,
    })
}

/// Same result as [`extract::build_population`], one appliance per task.
pub fn build_population(signals: &[PowerSignal], config: &ExtractConfig) -> ddm_core::Result<PopulationBuild> {
    if signals.is_empty() {
        return extract::build_population(signals, config);
    }
    let extractions = signals
        .par_iter()
        .enumerate()
        .map(|(i, s)| extract::extract_appliance(s, config, i))
        .collect::<ddm_core::Result<Vec<_>>>()?;
    extract::assemble(extractions)
}
