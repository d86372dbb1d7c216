//! JSON, CSV and markdown artifacts.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use ddm_core::ddm::{best_fit_base, DdmReport, LogBase};
use ddm_core::optimize::{knee_recommendation, LandscapeRow, Optimization, TradeoffRow};
use ddm_core::{AppliancePopulation, Evaluator, Partition, PowerDistribution};
use serde::Serialize;

use crate::error::{KitError, Result};
use crate::json::{round_all, round_sig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DdmJson {
    pub ddm: f64,
    pub base: &'static str,
    pub partition: String,
    pub blocks: Vec<Vec<String>>,
    pub per_block_mass: Vec<f64>,
    pub grid_intervals: usize,
    pub quadrature_error_estimate: f64,
    pub unsupported_nodes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub base_sweep: Vec<BaseValue>,
    pub alpha_grid: Vec<f64>,
    pub f_t: Vec<f64>,
    pub e_alpha: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaseValue {
    pub base: &'static str,
    pub ddm: f64,
}

fn block_ids(pop: &AppliancePopulation, p: &Partition) -> Vec<Vec<String>> {
    p.blocks()
        .iter()
        .map(|b| b.iter().map(|&i| pop.appliances()[i].id.clone()).collect())
        .collect()
}

pub fn ddm_json(
    pop: &AppliancePopulation,
    eval: &Evaluator,
    partition: &Partition,
    report: &DdmReport,
    sweep: &[(LogBase, f64)],
) -> DdmJson {
    DdmJson {
        ddm: round_sig(report.ddm),
        base: report.base.name(),
        partition: partition.to_string(),
        blocks: block_ids(pop, partition),
        per_block_mass: round_all(&report.per_block_mass),
        grid_intervals: eval.grid().intervals(),
        quadrature_error_estimate: round_sig(report.quadrature_error_estimate),
        unsupported_nodes: report.unsupported_nodes,
        warning: report.warning.clone(),
        base_sweep: sweep
            .iter()
            .map(|&(base, ddm)| BaseValue {
                base: base.name(),
                ddm: round_sig(ddm),
            })
            .collect(),
        alpha_grid: round_all(&report.alpha_grid),
        f_t: round_all(eval.mixture()),
        e_alpha: round_all(&report.e_alpha),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeoffRowJson {
    pub meters: usize,
    pub min_ddm: f64,
    pub partition: String,
    pub blocks: Vec<Vec<String>>,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeoffJson {
    pub base: &'static str,
    pub appliances: Vec<String>,
    pub unit_cost: f64,
    pub evaluated: usize,
    pub skipped: usize,
    pub rows: Vec<TradeoffRowJson>,
    pub knee_epsilon: f64,
    pub recommended_meters: Option<usize>,
}

pub fn tradeoff_json(
    pop: &AppliancePopulation,
    base: LogBase,
    opt: &Optimization,
    unit_cost: f64,
    knee_epsilon: f64,
) -> TradeoffJson {
    TradeoffJson {
        base: base.name(),
        appliances: pop.appliances().iter().map(|a| a.id.clone()).collect(),
        unit_cost: round_sig(unit_cost),
        evaluated: opt.landscape.len(),
        skipped: opt.skipped,
        rows: opt
            .rows
            .iter()
            .map(|r: &TradeoffRow| TradeoffRowJson {
                meters: r.meters,
                min_ddm: round_sig(r.min_ddm),
                partition: r.argmin.to_string(),
                blocks: block_ids(pop, &r.argmin),
                cost: round_sig(r.cost),
            })
            .collect(),
        knee_epsilon,
        recommended_meters: knee_recommendation(&opt.rows, knee_epsilon),
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| KitError::format(path, e.to_string()))
}

fn finish(path: &Path, mut w: csv::Writer<std::fs::File>) -> Result<()> {
    w.flush().map_err(|e| KitError::io(path, e))
}

fn num(x: f64) -> String {
    round_sig(x).to_string()
}

/// `code,b,ddm`, one row per evaluated partition.
pub fn write_landscape(path: &Path, landscape: &[LandscapeRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let err = |e: csv::Error| KitError::format(path, e.to_string());
    w.write_record(["code", "b", "ddm"]).map_err(err)?;
    for row in landscape {
        w.write_record([
            row.partition.code_string(),
            row.partition.block_count().to_string(),
            num(row.ddm),
        ])
        .map_err(err)?;
    }
    finish(path, w)
}

/// `alpha,f_t` followed by one weighted density column per transition.
pub fn write_mixture_curves(path: &Path, pop: &AppliancePopulation, eval: &Evaluator) -> Result<()> {
    let mut w = csv_writer(path)?;
    let err = |e: csv::Error| KitError::format(path, e.to_string());
    let mut header = vec!["alpha".to_owned(), "f_t".to_owned()];
    for a in pop.appliances() {
        for j in 0..a.transitions.len() {
            header.push(format!("{}.{}", a.id, j + 1));
        }
    }
    w.write_record(&header).map_err(err)?;
    let grid = eval.grid();
    for k in 0..grid.node_count() {
        let mut row = vec![num(grid.node(k)), num(eval.mixture()[k])];
        row.extend(eval.weights_at(k).iter().map(|&x| num(x)));
        w.write_record(&row).map_err(err)?;
    }
    finish(path, w)
}

/// `alpha` followed by one `e_alpha` column per labelled partition.
pub fn write_entropy_curves(path: &Path, eval: &Evaluator, partitions: &[(String, Partition)]) -> Result<()> {
    let curves = partitions
        .iter()
        .map(|(_, p)| eval.entropy_curve(p))
        .collect::<ddm_core::Result<Vec<_>>>()?;
    let mut w = csv_writer(path)?;
    let err = |e: csv::Error| KitError::format(path, e.to_string());
    let mut header = vec!["alpha".to_owned()];
    header.extend(partitions.iter().map(|(label, _)| label.clone()));
    w.write_record(&header).map_err(err)?;
    for k in 0..eval.grid().node_count() {
        let mut row = vec![num(eval.grid().node(k))];
        row.extend(curves.iter().map(|c| num(c[k])));
        w.write_record(&row).map_err(err)?;
    }
    finish(path, w)
}

/// `meters,min_ddm,cost,partition`.
pub fn write_tradeoff_curve(path: &Path, rows: &[TradeoffRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let err = |e: csv::Error| KitError::format(path, e.to_string());
    w.write_record(["meters", "min_ddm", "cost", "partition"]).map_err(err)?;
    for r in rows {
        w.write_record([r.meters.to_string(), num(r.min_ddm), num(r.cost), r.argmin.to_string()])
            .map_err(err)?;
    }
    finish(path, w)
}

/// A published value to compare the single-meter metric against.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub label: String,
    pub value: f64,
}

impl FromStr for Reference {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (label, value) = s
            .rsplit_once('=')
            .ok_or_else(|| format!("expected LABEL=VALUE, got {s:?}"))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| format!("reference value {value:?} is not a number"))?;
        Ok(Reference {
            label: label.trim().to_owned(),
            value,
        })
    }
}

pub struct ReportInput<'a> {
    pub population: &'a AppliancePopulation,
    pub renormalized_from: Option<f64>,
    pub evaluator: &'a Evaluator,
    pub single: &'a DdmReport,
    pub sweep: &'a [(LogBase, f64)],
    pub optimization: &'a Optimization,
    pub unit_cost: f64,
    pub knee_epsilon: f64,
    pub references: &'a [Reference],
    /// Landscapes longer than this are summarized rather than listed.
    pub max_listed: usize,
}

fn fmt_dist(d: &PowerDistribution) -> (String, String, String) {
    match d {
        PowerDistribution::Gaussian { mean, std } => ("gaussian".into(), format!("{mean:.1}"), format!("{std:.1}")),
        PowerDistribution::Empirical { grid, .. } => (
            format!("empirical ({} points)", grid.len()),
            format!("{:.1}", d.mean()),
            "-".into(),
        ),
    }
}

fn named(pop: &AppliancePopulation, p: &Partition) -> String {
    block_ids(pop, p)
        .iter()
        .map(|b| format!("{{{}}}", b.join(", ")))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn markdown(input: &ReportInput<'_>) -> String {
    let pop = input.population;
    let eval = input.evaluator;
    let base = eval.config().base;
    let opt = input.optimization;
    let mut s = String::new();
    let _ = writeln!(s, "# Disaggregation difficulty report\n");
    let _ = writeln!(
        s,
        "{} appliances, {} transitions. Entropy base: {}. Quadrature: Simpson, {} intervals on [{:.1}, {:.1}] W.\n",
        pop.len(),
        pop.transition_count(),
        base.name(),
        eval.grid().intervals(),
        eval.grid().lo(),
        eval.grid().hi()
    );
    if let Some(total) = input.renormalized_from {
        let _ = writeln!(s, "Participation indices summed to {total} and were rescaled to 1.\n");
    }

    let _ = writeln!(s, "## Population\n");
    let _ = writeln!(s, "| # | appliance | transition | distribution | mean (W) | std (W) | pi |");
    let _ = writeln!(s, "|---|---|---|---|---|---|---|");
    for (i, a) in pop.appliances().iter().enumerate() {
        for (j, t) in a.transitions.iter().enumerate() {
            let (kind, mean, std) = fmt_dist(&t.distribution);
            let _ = writeln!(
                s,
                "| {} | {} | {} | {kind} | {mean} | {std} | {:.4} |",
                i + 1,
                a.id,
                j + 1,
                t.participation
            );
        }
    }

    let _ = writeln!(s, "\n## Metric per partition\n");
    if opt.landscape.len() <= input.max_listed {
        let _ = writeln!(s, "| partition | blocks | meters | DDM |");
        let _ = writeln!(s, "|---|---|---|---|");
        for row in &opt.landscape {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {:.4} |",
                row.partition,
                named(pop, &row.partition),
                row.partition.block_count(),
                row.ddm
            );
        }
    } else {
        let _ = writeln!(
            s,
            "{} partitions evaluated ({} skipped by pruning); the full landscape is in the landscape CSV.",
            opt.landscape.len(),
            opt.skipped
        );
    }

    let _ = writeln!(s, "\n## Trade-off\n");
    let _ = writeln!(s, "| meters | min DDM | best partition | cost |");
    let _ = writeln!(s, "|---|---|---|---|");
    for r in &opt.rows {
        let _ = writeln!(
            s,
            "| {} | {:.4} | {} ({}) | {:.2} |",
            r.meters,
            r.min_ddm,
            named(pop, &r.argmin),
            r.argmin,
            r.cost
        );
    }
    match knee_recommendation(&opt.rows, input.knee_epsilon) {
        Some(b) => {
            let _ = writeln!(
                s,
                "\nRecommended meter count: {b} (smallest count within {} of the best achievable metric, relative to the single-meter value).",
                input.knee_epsilon
            );
        }
        None => {
            let _ = writeln!(s, "\nNo feasible partition.");
        }
    }

    let _ = writeln!(s, "\n## Single-meter metric by log base\n");
    let _ = writeln!(s, "| base | DDM |");
    let _ = writeln!(s, "|---|---|");
    for (b, v) in input.sweep {
        let _ = writeln!(s, "| {} | {:.4} |", b.name(), v);
    }
    if !input.references.is_empty() {
        let _ = writeln!(s, "\n## Reference comparison\n");
        let _ = writeln!(s, "| reference | value | this run ({}) | difference | closest base |", base.name());
        let _ = writeln!(s, "|---|---|---|---|---|");
        for r in input.references {
            let closest = best_fit_base(input.sweep, r.value)
                .map_or("-".to_owned(), |(b, v)| format!("{} ({v:.4})", b.name()));
            let _ = writeln!(
                s,
                "| {} | {} | {:.4} | {:+.4} | {closest} |",
                r.label,
                r.value,
                input.single.ddm,
                input.single.ddm - r.value
            );
        }
        let mismatched: Vec<&Reference> = input
            .references
            .iter()
            .filter(|r| (input.single.ddm - r.value).abs() > 0.05)
            .collect();
        if !mismatched.is_empty() {
            let labels: Vec<&str> = mismatched.iter().map(|r| r.label.as_str()).collect();
            let _ = writeln!(
                s,
                "\nDiscrepancy: the single-meter metric differs from {} by more than 0.05.",
                labels.join(", ")
            );
        }
        let lo = input.references.iter().min_by(|a, b| a.value.total_cmp(&b.value));
        let hi = input.references.iter().max_by(|a, b| a.value.total_cmp(&b.value));
        if let (Some(lo), Some(hi)) = (lo, hi) {
            if hi.value - lo.value > 0.05 {
                let _ = writeln!(
                    s,
                    "\nDiscrepancy: the references disagree with each other ({} = {}, {} = {}, spread {:.4}).",
                    lo.label,
                    lo.value,
                    hi.label,
                    hi.value,
                    hi.value - lo.value
                );
            }
        }
    }

    let _ = writeln!(s, "\n## Numerics\n");
    let _ = writeln!(
        s,
        "Single-meter quadrature error estimate: {:.3e}; grid nodes without mixture support: {}.",
        input.single.quadrature_error_estimate, input.single.unsupported_nodes
    );
    if let Some(w) = &input.single.warning {
        let _ = writeln!(s, "\nWarning: {w}");
    }
    s
}
