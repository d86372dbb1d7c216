//! Exhaustive partition search: lowest metric per meter count.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::ddm::Evaluator;
use crate::error::{Error, Result};
use crate::partition::{enumerate_partitions, ConstraintSet, Partition};

pub const DEFAULT_UNIT_COST: f64 = 200.0;
pub const DEFAULT_KNEE_EPSILON: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeConfig {
    pub unit_cost: f64,
    /// Skip partitions that a refinement already proves cannot win.
    pub prune: bool,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            unit_cost: DEFAULT_UNIT_COST,
            prune: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeRow {
    pub partition: Partition,
    pub ddm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffRow {
    pub meters: usize,
    pub min_ddm: f64,
    pub argmin: Partition,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimization {
    /// One row per meter count that has a feasible partition, ascending.
    pub rows: Vec<TradeoffRow>,
    /// Evaluated partitions in code order.
    pub landscape: Vec<LandscapeRow>,
    pub skipped: usize,
}

/// True when `a` should replace incumbent `b`: lower metric, then smaller code.
pub fn better(a: &LandscapeRow, b: &LandscapeRow) -> bool {
    match a.ddm.total_cmp(&b.ddm) {
        core::cmp::Ordering::Less => true,
        core::cmp::Ordering::Equal => a.partition.code() < b.partition.code(),
        core::cmp::Ordering::Greater => false,
    }
}

/// Per-meter-count minima of a landscape. Independent of row order.
pub fn summarize(landscape: &[LandscapeRow], unit_cost: f64) -> Vec<TradeoffRow> {
    let mut best: BTreeMap<usize, &LandscapeRow> = BTreeMap::new();
    for row in landscape {
        let b = row.partition.block_count();
        match best.get(&b) {
            Some(cur) if !better(row, cur) => {}
            _ => {
                best.insert(b, row);
            }
        }
    }
    best.into_iter()
        .map(|(meters, row)| TradeoffRow {
            meters,
            min_ddm: row.ddm,
            argmin: row.partition.clone(),
            cost: meters as f64 * unit_cost,
        })
        .collect()
}

/// Evaluates every feasible partition of the evaluator's population.
pub fn optimize(eval: &Evaluator, constraints: &ConstraintSet, config: &OptimizeConfig) -> Result<Optimization> {
    if !(config.unit_cost >= 0.0 && config.unit_cost.is_finite()) {
        return Err(Error::InvalidArgument("unit cost must be a finite non-negative number".into()));
    }
    let n = eval.appliance_count();
    let partitions = enumerate_partitions(n, constraints)?;
    if !config.prune {
        let landscape = partitions
            .map(|p| eval.ddm_value(&p).map(|ddm| LandscapeRow { partition: p, ddm }))
            .collect::<Result<Vec<_>>>()?;
        return Ok(Optimization {
            rows: summarize(&landscape, config.unit_cost),
            landscape,
            skipped: 0,
        });
    }

    let mut by_blocks: BTreeMap<usize, Vec<Partition>> = BTreeMap::new();
    for p in partitions {
        by_blocks.entry(p.block_count()).or_default().push(p);
    }
    let mut known: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
    let mut landscape = Vec::new();
    let mut skipped = 0;
    for (_, group) in by_blocks.into_iter().rev() {
        let mut incumbent: Option<f64> = None;
        for p in group {
            if let Some(best) = incumbent {
                if refinement_bound(&p, &known).is_some_and(|lb| lb > best) {
                    skipped += 1;
                    continue;
                }
            }
            let ddm = eval.ddm_value(&p)?;
            incumbent = Some(incumbent.map_or(ddm, |b| b.min(ddm)));
            known.insert(p.code().to_vec(), ddm);
            landscape.push(LandscapeRow { partition: p, ddm });
        }
    }
    landscape.sort_by(|a, b| a.partition.code().cmp(b.partition.code()));
    Ok(Optimization {
        rows: summarize(&landscape, config.unit_cost),
        landscape,
        skipped,
    })
}

/// Largest known metric among the partitions obtained by moving one
/// appliance of a shared block into a block of its own. Any of them refines
/// `p`, so `p` scores at least this much.
fn refinement_bound(p: &Partition, known: &BTreeMap<Vec<u8>, f64>) -> Option<f64> {
    let sizes = p.blocks().iter().map(Vec::len).collect::<Vec<_>>();
    let fresh = p.block_count();
    let mut bound: Option<f64> = None;
    let mut labels: Vec<usize> = p.code().iter().map(|&c| c as usize).collect();
    for i in 0..p.len() {
        let own = labels[i];
        if sizes[own] < 2 {
            continue;
        }
        labels[i] = fresh;
        let split = Partition::canonical(&labels);
        labels[i] = own;
        if let Some(&d) = known.get(split.code()) {
            bound = Some(bound.map_or(d, |b: f64| b.max(d)));
        }
    }
    bound
}

/// Smallest meter count whose best metric is within `epsilon` (relative to
/// the single-meter value) of the best metric at the largest meter count.
pub fn knee_recommendation(rows: &[TradeoffRow], epsilon: f64) -> Option<usize> {
    let last = rows.iter().max_by_key(|r| r.meters)?;
    let first = rows.iter().min_by_key(|r| r.meters)?;
    let scale = first.min_ddm.max(f64::MIN_POSITIVE);
    rows.iter()
        .filter(|r| r.min_ddm - last.min_ddm <= epsilon * scale)
        .map(|r| r.meters)
        .min()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ddm::DdmConfig;
    use crate::fixtures;
    use alloc::string::ToString;
    use alloc::vec;

    fn three_appliance_eval() -> Evaluator {
        Evaluator::new(&fixtures::three_appliances().renormalize().unwrap(), DdmConfig::default()).unwrap()
    }

    #[test]
    fn three_appliance_tradeoff() {
        let opt = optimize(&three_appliance_eval(), &ConstraintSet::default(), &OptimizeConfig::default()).unwrap();
        assert_eq!(opt.landscape.len(), 5);
        let meters: Vec<usize> = opt.rows.iter().map(|r| r.meters).collect();
        assert_eq!(meters, vec![1, 2, 3]);
        let costs: Vec<f64> = opt.rows.iter().map(|r| r.cost).collect();
        assert_eq!(costs, vec![200.0, 400.0, 600.0]);
        assert_eq!(opt.rows[1].argmin.to_string(), "1,3|2");
        assert!((opt.rows[1].min_ddm - opt.rows[2].min_ddm).abs() < 0.01);
        assert_eq!(knee_recommendation(&opt.rows, DEFAULT_KNEE_EPSILON), Some(2));
    }

    #[test]
    fn must_link_restricts_two_meter_choice() {
        let c = ConstraintSet { must_link: vec![(0, 1)], ..Default::default() };
        let opt = optimize(&three_appliance_eval(), &c, &OptimizeConfig::default()).unwrap();
        assert_eq!(opt.rows.len(), 2);
        assert_eq!(opt.rows[1].argmin.to_string(), "1,2|3");
    }

    #[test]
    fn pruning_keeps_minima() {
        let eval = Evaluator::new(&fixtures::redd_seven(), DdmConfig { intervals: 1024, ..Default::default() }).unwrap();
        let full = optimize(&eval, &ConstraintSet::default(), &OptimizeConfig::default()).unwrap();
        let pruned = optimize(&eval, &ConstraintSet::default(), &OptimizeConfig { prune: true, ..Default::default() }).unwrap();
        assert_eq!(full.rows, pruned.rows);
        assert_eq!(pruned.landscape.len() + pruned.skipped, 877);
        assert!(pruned.skipped > 0);
    }

    fn row(meters: usize, ddm: f64) -> TradeoffRow {
        TradeoffRow {
            meters,
            min_ddm: ddm,
            argmin: Partition::singletons(meters),
            cost: 0.0,
        }
    }

    #[test]
    fn knee_examples() {
        assert_eq!(knee_recommendation(&[row(1, 0.24), row(2, 0.12), row(3, 0.12)], 0.05), Some(2));
        assert_eq!(knee_recommendation(&[row(1, 1.0), row(2, 0.6), row(3, 0.3), row(4, 0.0)], 0.05), Some(4));
        assert_eq!(knee_recommendation(&[row(1, 0.7)], 0.05), Some(1));
        assert_eq!(knee_recommendation(&[], 0.05), None);
    }

    #[test]
    fn ties_prefer_smaller_code() {
        let a = LandscapeRow { partition: Partition::from_code(vec![0, 1, 1]).unwrap(), ddm: 0.5 };
        let b = LandscapeRow { partition: Partition::from_code(vec![0, 0, 1]).unwrap(), ddm: 0.5 };
        let rows = summarize(&[a, b], 1.0);
        assert_eq!(rows[0].argmin.code(), &[0, 0, 1]);
    }
}
