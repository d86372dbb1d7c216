//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::time::{Duration, Instant};

use ddm_core::ddm::{base_sweep, best_fit_base, DdmConfig, LogBase};
use ddm_core::extract::{build_population, ExtractConfig};
use ddm_core::optimize::{optimize, OptimizeConfig};
use ddm_core::oracle::ddm_monte_carlo;
use ddm_core::partition::enumerate_partitions;
use ddm_core::synth::{synthesize_signals, SynthConfig};
use ddm_core::{fixtures, Appliance, AppliancePopulation, ConstraintSet, Evaluator, Partition, TransitionModel};
use ddm_kit::report::{markdown, Reference, ReportInput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn config(base: LogBase) -> DdmConfig {
    DdmConfig { base, ..Default::default() }
}

fn three() -> AppliancePopulation {
    fixtures::three_appliances().renormalize().unwrap()
}

fn part(s: &str) -> Partition {
    s.parse().unwrap()
}

fn random_population(rng: &mut ChaCha8Rng) -> AppliancePopulation {
    let n = rng.random_range(2..=7);
    let apps = (0..n)
        .map(|i| {
            let m = rng.random_range(1..=3);
            Appliance::new(
                format!("a{i}"),
                (0..m)
                    .map(|_| {
                        let mu = rng.random_range(50.0..=4000.0);
                        let sigma = rng.random_range(5.0..=60.0);
                        let pi = rng.random_range(0.01..=1.0);
                        TransitionModel::gaussian(mu, sigma, pi).unwrap()
                    })
                    .collect(),
            )
        })
        .collect();
    AppliancePopulation::new(apps).renormalize().unwrap()
}

fn random_populations(count: usize, seed: u64) -> Vec<AppliancePopulation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_population(&mut rng)).collect()
}

/// A partition with at least one shared block, and a strict refinement.
fn refinement_pair(n: usize, rng: &mut ChaCha8Rng) -> (Partition, Partition) {
    let coarse = loop {
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let p = Partition::canonical(&labels);
        if p.block_count() < n {
            break p;
        }
    };
    let mut fine: Vec<usize> = coarse.code().iter().map(|&c| 2 * c as usize + rng.random_range(0..2)).collect();
    if Partition::canonical(&fine) == coarse {
        let shared = coarse.blocks().into_iter().find(|b| b.len() > 1).unwrap();
        fine[*shared.last().unwrap()] = 2 * n + 1;
    }
    let fine = Partition::canonical(&fine);
    assert!(fine.refines(&coarse) && fine != coarse);
    (coarse, fine)
}

fn criterion_two(base: LogBase) -> (bool, String) {
    let eval = Evaluator::new(&three(), config(base)).unwrap();
    let v = |s: &str| eval.ddm_value(&part(s)).unwrap();
    let single = v("1,2,3");
    let two = [v("1|2,3"), v("1,3|2"), v("1,2|3")];
    let full = v("1|2|3");
    let single_max = two.iter().chain([&full]).all(|&x| single > x);
    let strict_min = two[1] < two[0] && two[1] < two[2];
    let full_le = two.iter().all(|&x| full <= x);
    (
        single_max && strict_min && full_le,
        format!(
            "{}: {{123}}={single:.4} {{1}}{{23}}={:.4} {{13}}{{2}}={:.4} {{12}}{{3}}={:.4} {{1}}{{2}}{{3}}={full:.4}",
            base.name(),
            two[0],
            two[1],
            two[2]
        ),
    )
}

fn criterion_three(base: LogBase) -> (bool, String) {
    let eval = Evaluator::new(&three(), config(base)).unwrap();
    let opt = optimize(&eval, &ConstraintSet::default(), &OptimizeConfig::default()).unwrap();
    let costs: Vec<f64> = opt.rows.iter().map(|r| r.cost).collect();
    let mins: Vec<f64> = opt.rows.iter().map(|r| r.min_ddm).collect();
    let ok = costs == [200.0, 400.0, 600.0] && (mins[1] - mins[2]).abs() <= 0.01;
    (
        ok,
        format!(
            "{}: min ddm {:.4}/{:.4}/{:.4}, |d2-d3|={:.4}, costs {costs:?}",
            base.name(),
            mins[0],
            mins[1],
            mins[2],
            (mins[1] - mins[2]).abs()
        ),
    )
}

/// Returns (pass, detail, worst violation).
fn criterion_four() -> (bool, String) {
    let pops = random_populations(200, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut cases = 0;
    let mut held = 0;
    let mut worst = f64::NEG_INFINITY;
    for pop in &pops {
        let eval = Evaluator::new(pop, config(LogBase::E)).unwrap();
        for _ in 0..5 {
            let (coarse, fine) = refinement_pair(pop.len(), &mut rng);
            let dc = eval.ddm_value(&coarse).unwrap();
            let df = eval.ddm_value(&fine).unwrap();
            cases += 1;
            let all_bases = LogBase::ALL
                .iter()
                .all(|b| b.from_nats(df) <= b.from_nats(dc) + 1e-9);
            if all_bases {
                held += 1;
            }
            worst = worst.max(df - dc);
        }
    }
    (
        cases == 1000 && held == cases,
        format!("{held}/{cases} refinement pairs hold in every base, max(finer - coarser) = {worst:.3e}"),
    )
}

fn criterion_five() -> (bool, String) {
    let mut cases: Vec<(AppliancePopulation, Partition)> = vec![(three(), Partition::single_block(3))];
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for pop in random_populations(20, 5) {
        let labels: Vec<usize> = (0..pop.len()).map(|_| rng.random_range(0..pop.len())).collect();
        cases.push((pop, Partition::canonical(&labels)));
    }
    let results: Vec<(f64, f64, f64)> = cases
        .par_iter()
        .enumerate()
        .map(|(i, (pop, p))| {
            let quad = Evaluator::new(pop, config(LogBase::E)).unwrap().ddm_value(p).unwrap();
            let mc = ddm_monte_carlo(pop, p, 1_000_000, 500 + i as u64, LogBase::E).unwrap();
            (quad, mc.mean, mc.stderr)
        })
        .collect();
    let agree = results.iter().filter(|(q, m, s)| (q - m).abs() <= 3.0 * s).count();
    let worst = results
        .iter()
        .map(|(q, m, s)| (q - m).abs() / s)
        .fold(0.0, f64::max);
    let (q0, m0, s0) = results[0];
    let misses: Vec<String> = results
        .iter()
        .enumerate()
        .filter(|(_, (q, m, s))| (q - m).abs() > 3.0 * s)
        .map(|(i, (q, m, s))| format!("#{i} quad {q:.3e} MC {m:.3e} +- {s:.1e}"))
        .collect();
    (
        agree == results.len(),
        format!(
            "{agree}/{} agree within 3 stderr (worst {worst:.2} stderr); three-appliance quad {q0:.5} vs MC {m0:.5} +- {s0:.5}{}",
            results.len(),
            if misses.is_empty() { String::new() } else { format!("; misses {}", misses.join(", ")) }
        ),
    )
}

fn convergence_gap(pop: &AppliancePopulation) -> f64 {
    let single = Partition::single_block(pop.len());
    let a = Evaluator::new(pop, DdmConfig { intervals: 4096, ..Default::default() })
        .unwrap()
        .ddm_value(&single)
        .unwrap();
    let b = Evaluator::new(pop, DdmConfig { intervals: 8192, ..Default::default() })
        .unwrap()
        .ddm_value(&single)
        .unwrap();
    (a - b).abs()
}

fn identical_pair() -> AppliancePopulation {
    AppliancePopulation::new(vec![
        Appliance::new("a", vec![TransitionModel::gaussian(1000.0, 20.0, 0.5).unwrap()]),
        Appliance::new("b", vec![TransitionModel::gaussian(1000.0, 20.0, 0.5).unwrap()]),
    ])
}

fn one_transition_each() -> AppliancePopulation {
    AppliancePopulation::new(
        [(200.0, 20.0, 0.3), (220.0, 15.0, 0.3), (260.0, 30.0, 0.2), (1000.0, 40.0, 0.2)]
            .iter()
            .enumerate()
            .map(|(i, &(m, s, p))| Appliance::new(format!("s{i}"), vec![TransitionModel::gaussian(m, s, p).unwrap()]))
            .collect(),
    )
}

fn separated() -> AppliancePopulation {
    AppliancePopulation::new(vec![
        Appliance::new(
            "a",
            vec![
                TransitionModel::gaussian(100.0, 10.0, 0.25).unwrap(),
                TransitionModel::gaussian(400.0, 10.0, 0.25).unwrap(),
            ],
        ),
        Appliance::new("b", vec![TransitionModel::gaussian(700.0, 10.0, 0.5).unwrap()]),
    ])
}

fn criterion_six(extra: &[AppliancePopulation]) -> (bool, String) {
    let mut pops = vec![three(), fixtures::redd_seven(), identical_pair(), one_transition_each(), separated()];
    pops.extend(random_populations(200, 4));
    pops.extend(random_populations(20, 5));
    pops.extend(extra.iter().cloned());
    let gaps: Vec<f64> = pops.par_iter().map(convergence_gap).collect();
    let worst = gaps.iter().copied().fold(0.0, f64::max);
    (
        worst <= 1e-4,
        format!("{} populations, max |DDM(4096) - DDM(8192)| = {worst:.3e}", pops.len()),
    )
}

fn criterion_seven() -> (bool, String) {
    let count = |n| enumerate_partitions(n, &ConstraintSet::default()).unwrap().count();
    let (a, b, c) = (count(3), count(7), count(8));
    (a == 5 && b == 877 && c == 4140, format!("N=3: {a}, N=7: {b}, N=8: {c}"))
}

fn criterion_eight() -> (bool, String) {
    let pop = fixtures::redd_seven();
    let start = Instant::now();
    let eval = Evaluator::new(&pop, config(LogBase::E)).unwrap();
    let opt = optimize(&eval, &ConstraintSet::default(), &OptimizeConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let single = eval.ddm(&Partition::single_block(7)).unwrap();
    let sweep = base_sweep(&pop, config(LogBase::E)).unwrap();
    let references = [
        Reference { label: "published single-meter value A".into(), value: 0.38 },
        Reference { label: "published single-meter value B".into(), value: 0.32 },
    ];
    let md = markdown(&ReportInput {
        population: &pop,
        renormalized_from: None,
        evaluator: &eval,
        single: &single,
        sweep: &sweep,
        optimization: &opt,
        unit_cost: 200.0,
        knee_epsilon: 0.05,
        references: &references,
        max_listed: 64,
    });
    let documented = md.contains("| published single-meter value A | 0.38 |")
        && md.contains("| published single-meter value B | 0.32 |")
        && md.contains("Discrepancy");

    let land = &opt.landscape;
    let single_value = land[0].ddm;
    let single_is_max = land[1..].iter().all(|r| r.ddm <= single_value + 1e-12);
    let full = land.iter().find(|r| r.partition.block_count() == 7).unwrap().ddm;
    let full_is_min = land.iter().all(|r| full <= r.ddm + 1e-12);
    let rows_monotone = opt.rows.windows(2).all(|w| w[1].min_ddm <= w[0].min_ddm + 1e-9);
    let mut pairs = 0usize;
    let mut violations = 0usize;
    for c in land {
        for f in land {
            if f.partition != c.partition && f.partition.refines(&c.partition) {
                pairs += 1;
                if f.ddm > c.ddm + 1e-9 {
                    violations += 1;
                }
            }
        }
    }
    let best = best_fit_base(&sweep, 0.38).unwrap();
    let pass = land.len() == 877
        && elapsed < Duration::from_secs(10)
        && documented
        && single_is_max
        && full_is_min
        && rows_monotone
        && violations == 0;
    (
        pass,
        format!(
            "{}-partition search {:.2}s; single-meter {:.4} nats ({} {:.4}) vs published 0.38/0.32, discrepancy in report {documented}; single max {single_is_max}, singletons min {full_is_min}, per-b minima monotone {rows_monotone}, {violations} violations in {pairs} refinement pairs",
            land.len(),
            elapsed.as_secs_f64(),
            single.ddm,
            best.0.name(),
            best.1
        ),
    )
}

fn criterion_nine() -> (bool, String, Option<AppliancePopulation>) {
    let start = Instant::now();
    let truth = three();
    let signals = synthesize_signals(&truth, &SynthConfig { pulses: 12_000, ..Default::default() }).unwrap();
    let build = build_population(&signals, &ExtractConfig::default()).unwrap();
    let events: usize = build.extractions.iter().map(|x| x.events.len()).sum();
    let got = &build.population;
    if got.len() != 3 || got.transition_count() != 5 {
        return (
            false,
            format!("{events} events, recovered {} transitions, expected 5", got.transition_count()),
            None,
        );
    }
    let mut mean_err: f64 = 0.0;
    let mut pi_err: f64 = 0.0;
    for (a, b) in truth.appliances().iter().zip(got.appliances()) {
        if a.transitions.len() != b.transitions.len() {
            return (false, format!("appliance {} has {} transitions", b.id, b.transitions.len()), None);
        }
        for (x, y) in a.transitions.iter().zip(&b.transitions) {
            mean_err = mean_err.max((x.distribution.mean() - y.distribution.mean()).abs());
            pi_err = pi_err.max((x.participation - y.participation).abs());
        }
    }
    let p = Partition::single_block(3);
    let d_truth = Evaluator::new(&truth, config(LogBase::E)).unwrap().ddm_value(&p).unwrap();
    let d_got = Evaluator::new(got, config(LogBase::E)).unwrap().ddm_value(&p).unwrap();
    let elapsed = start.elapsed();
    let pass = events >= 2000
        && mean_err <= 3.0
        && pi_err <= 0.02
        && (d_truth - d_got).abs() <= 0.03
        && elapsed < Duration::from_secs(30);
    (
        pass,
        format!(
            "{events} events, 5 transitions, max |mean err| {mean_err:.2} W, max |pi err| {pi_err:.4}, DDM {d_got:.4} vs {d_truth:.4}, {:.2}s",
            elapsed.as_secs_f64()
        ),
        Some(got.clone()),
    )
}

fn criterion_ten() -> (bool, String) {
    let ln2 = std::f64::consts::LN_2;
    let id = identical_pair();
    let d_id = Evaluator::new(&id, config(LogBase::E)).unwrap().ddm_value(&Partition::single_block(2)).unwrap();
    let each = one_transition_each();
    let d_each = Evaluator::new(&each, config(LogBase::E))
        .unwrap()
        .ddm_value(&Partition::singletons(4))
        .unwrap();
    let sep = separated();
    let d_sep = Evaluator::new(&sep, config(LogBase::E)).unwrap().ddm_value(&Partition::single_block(2)).unwrap();
    (
        (d_id - ln2).abs() <= 1e-6 && d_each <= 1e-9 && d_sep < 1e-3,
        format!(
            "identical pair {d_id:.9} (ln 2 = {ln2:.9}), transition per block {d_each:.1e}, separated {d_sep:.2e}"
        ),
    )
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();

    let per_base2: Vec<(bool, String)> = LogBase::ALL.iter().map(|&b| criterion_two(b)).collect();
    let per_base3: Vec<(bool, String)> = LogBase::ALL.iter().map(|&b| criterion_three(b)).collect();
    let start4 = Instant::now();
    let (ok4, detail4) = criterion_four();
    let t4 = start4.elapsed();
    let ok4 = ok4 && t4 < Duration::from_secs(60);
    let qualitative = per_base2.iter().all(|r| r.0) && per_base3.iter().all(|r| r.0) && ok4;

    let start1 = Instant::now();
    let eval = Evaluator::new(&three(), config(LogBase::E)).unwrap();
    let natural = eval.ddm_value(&Partition::single_block(3)).unwrap();
    let t1 = start1.elapsed();
    let in_tol = (natural - 0.24).abs() <= 0.05;
    let c1 = if in_tol {
        outcome(t1 < Duration::from_secs(1), format!("natural-log DDM {natural:.4} in 0.24 +- 0.05 ({:.3}s)", t1.as_secs_f64()))
    } else {
        let sweep = base_sweep(&three(), DdmConfig::default()).unwrap();
        let (best, value) = best_fit_base(&sweep, 0.24).unwrap();
        let listed: Vec<String> = sweep.iter().map(|(b, v)| format!("{}={v:.4}", b.name())).collect();
        outcome(
            qualitative && (value - 0.24).abs() <= 0.05 && t1 < Duration::from_secs(1),
            format!(
                "natural-log DDM {natural:.4} outside 0.24 +- 0.05; base sweep [{}], best fit base {} ({value:.4}); criteria 2-4 hold in every base: {qualitative} ({:.3}s)",
                listed.join(", "),
                best.name(),
                t1.as_secs_f64()
            ),
        )
    };
    results.push((1, "single-meter DDM of the three-appliance fixture", c1));
    results.push((
        2,
        "partition ordering",
        outcome(
            per_base2.iter().all(|r| r.0),
            per_base2.iter().map(|r| r.1.clone()).collect::<Vec<_>>().join("; "),
        ),
    ));
    results.push((
        3,
        "meter / cost trade-off",
        outcome(
            per_base3.iter().all(|r| r.0),
            per_base3.iter().map(|r| r.1.clone()).collect::<Vec<_>>().join("; "),
        ),
    ));
    results.push((4, "refinement monotonicity", outcome(ok4, format!("{detail4} ({:.2}s)", t4.as_secs_f64()))));

    let start5 = Instant::now();
    let (ok5, detail5) = criterion_five();
    let t5 = start5.elapsed();
    results.push((
        5,
        "Monte-Carlo oracle agreement",
        outcome(ok5 && t5 < Duration::from_secs(120), format!("{detail5} ({:.2}s)", t5.as_secs_f64())),
    ));

    let (ok9, detail9, extracted) = criterion_nine();
    let extra: Vec<AppliancePopulation> = extracted.into_iter().collect();
    let (ok6, detail6) = criterion_six(&extra);
    results.push((6, "quadrature convergence", outcome(ok6, detail6)));
    let (ok7, detail7) = criterion_seven();
    results.push((7, "partition counts", outcome(ok7, detail7)));
    let (ok8, detail8) = criterion_eight();
    results.push((8, "seven-appliance household fixture", outcome(ok8, detail8)));
    results.push((9, "signal-to-population round trip", outcome(ok9, detail9)));
    let (ok10, detail10) = criterion_ten();
    results.push((10, "degenerate limits", outcome(ok10, detail10)));

    results.sort_by_key(|r| r.0);
    println!();
    let mut failed = 0;
    for (n, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("criterion {n:>2} {tag}  {name}: {}", o.detail);
    }
    println!("\nacceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
