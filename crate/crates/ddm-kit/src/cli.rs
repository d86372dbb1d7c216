use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ddm_core::cluster::ElbowConfig;
use ddm_core::ddm::{base_sweep, DdmConfig, LogBase};
use ddm_core::event::{detect_events, DetectorConfig, DEFAULT_DEAD_BAND};
use ddm_core::extract::{DistKind, ExtractConfig, DEFAULT_SEED};
use ddm_core::fit;
use ddm_core::optimize::{OptimizeConfig, DEFAULT_KNEE_EPSILON, DEFAULT_UNIT_COST};
use ddm_core::quadrature::DEFAULT_INTERVALS;
use ddm_core::{AppliancePopulation, ConstraintSet, Evaluator, Partition};

use crate::error::{KitError, Result};
use crate::ingest::{self, CsvOptions, InputFormat, DEFAULT_GAP_FACTOR};
use crate::json::to_pretty;
use crate::population::{read_population, write_population, LoadedPopulation};
use crate::report::{self, Reference, ReportInput};
use crate::parallel;

#[derive(Debug, Parser)]
#[command(
    name = "ddm-kit",
    version,
    about = "Disaggregation difficulty of appliance sets for event-based load monitoring",
    arg_required_else_help = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect steady-state transitions in power signals
    Detect(DetectArgs),
    /// Build a population (transition distributions and participation) from training signals
    Extract(ExtractArgs),
    /// Evaluate the metric for one partition
    Ddm(DdmArgs),
    /// Evaluate every partition and report the per-meter-count optimum
    Optimize(OptimizeArgs),
    /// Markdown summary with population, landscape, trade-off and curves
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Redd,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DistArg {
    Gaussian,
    Wma,
}

#[derive(Debug, Args)]
pub struct CsvArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    /// Timestamp column (default: first column)
    #[arg(long)]
    pub timestamp_col: Option<String>,
    /// Comma-separated power columns (default: all others)
    #[arg(long, value_delimiter = ',')]
    pub power_cols: Vec<String>,
    /// Resampling period in seconds (default: median timestamp step)
    #[arg(long)]
    pub period: Option<f64>,
    /// Holes longer than this many periods are excluded from detection
    #[arg(long, default_value_t = DEFAULT_GAP_FACTOR)]
    pub gap_factor: f64,
}

impl CsvArgs {
    fn options(&self) -> CsvOptions {
        CsvOptions {
            format: match self.format {
                FormatArg::Csv => InputFormat::Csv,
                FormatArg::Redd => InputFormat::Redd,
            },
            timestamp_col: self.timestamp_col.clone(),
            power_cols: self.power_cols.clone(),
            period: self.period,
            gap_factor: self.gap_factor,
        }
    }
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Signal file or directory of signal files
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Events CSV (default: standard output)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub csv: CsvArgs,
    /// Pairs below this power on both sides score zero
    #[arg(long, default_value_t = DEFAULT_DEAD_BAND)]
    pub dead_band: f64,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Directory of per-appliance signal files, or one wide file
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Population JSON
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub csv: CsvArgs,
    #[arg(long, value_enum, default_value = "gaussian")]
    pub dist: DistArg,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Cluster rising and falling events separately
    #[arg(long)]
    pub cluster_signed: bool,
    #[arg(long, default_value_t = DEFAULT_DEAD_BAND)]
    pub dead_band: f64,
    /// Lower bound on fitted standard deviations (W)
    #[arg(long, default_value_t = fit::DEFAULT_SIGMA_MIN)]
    pub sigma_min: f64,
    /// Histogram bin width for --dist wma (W)
    #[arg(long, default_value_t = fit::DEFAULT_BIN_WIDTH)]
    pub bin_width: f64,
    /// Smoothing window in bins for --dist wma (odd)
    #[arg(long, default_value_t = fit::DEFAULT_WINDOW)]
    pub window: usize,
    /// Largest cluster count tried per appliance
    #[arg(long, default_value_t = ElbowConfig::default().k_max)]
    pub k_max: usize,
    /// Minimum fractional cost drop for one more cluster
    #[arg(long, default_value_t = ElbowConfig::default().min_drop)]
    pub min_drop: f64,
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    /// Population JSON
    #[arg(long)]
    pub pop: PathBuf,
    /// Entropy log base: e, 2 or 10
    #[arg(long, default_value = "e")]
    pub base: LogBase,
    /// Simpson intervals (rounded up to a multiple of 4, at least 64)
    #[arg(long, default_value_t = DEFAULT_INTERVALS)]
    pub grid_n: usize,
}

impl MetricArgs {
    fn config(&self) -> DdmConfig {
        DdmConfig {
            base: self.base,
            intervals: self.grid_n,
            ..Default::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct DdmArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    /// Blocks separated by `|`, members by `,`; appliance ids or 1-based
    /// positions (default: everything behind one meter)
    #[arg(long)]
    pub partition: Option<String>,
    /// Report JSON (default: standard output)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write `alpha,f_t,e_alpha` to this CSV
    #[arg(long)]
    pub curves: Option<PathBuf>,
    /// Include the single-meter value in every log base
    #[arg(long)]
    pub sweep: bool,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Appliances that must share a meter, `a,b` (repeatable)
    #[arg(long = "must-link")]
    pub must_link: Vec<String>,
    /// Appliances that must not share a meter, `a,b` (repeatable)
    #[arg(long = "cannot-link")]
    pub cannot_link: Vec<String>,
    /// Largest number of meters considered
    #[arg(long)]
    pub max_meters: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_UNIT_COST)]
    pub unit_cost: f64,
    /// Skip partitions whose refinements already rule them out
    #[arg(long)]
    pub prune: bool,
    #[arg(long, default_value_t = DEFAULT_KNEE_EPSILON)]
    pub knee_epsilon: f64,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Trade-off JSON (default: standard output)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Landscape CSV `code,b,ddm`
    #[arg(long)]
    pub landscape: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Published single-meter value to compare against, `label=value` (repeatable)
    #[arg(long = "reference")]
    pub references: Vec<Reference>,
    /// Markdown report (default: standard output)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Machine-readable companion: single-meter report plus trade-off
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Directory for plot-ready CSV curves
    #[arg(long)]
    pub curves_dir: Option<PathBuf>,
    /// List every partition when there are at most this many
    #[arg(long, default_value_t = 64)]
    pub max_listed: usize,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| KitError::io(path, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| KitError::io("<stdout>", e)),
    }
}

/// Appliance index from an id or, failing that, a 1-based position.
fn resolve(pop: &AppliancePopulation, token: &str) -> Result<usize> {
    let token = token.trim();
    if let Some(i) = pop.position(token) {
        return Ok(i);
    }
    match token.parse::<usize>() {
        Ok(k) if (1..=pop.len()).contains(&k) => Ok(k - 1),
        _ => Err(KitError::Usage(format!(
            "{token:?} is neither an appliance id nor a position in 1..={}",
            pop.len()
        ))),
    }
}

pub fn parse_partition(pop: &AppliancePopulation, text: &str) -> Result<Partition> {
    let blocks = text
        .split('|')
        .map(|b| b.split(',').map(|t| resolve(pop, t)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Partition::from_blocks(&blocks, pop.len()).map_err(|e| KitError::Usage(e.to_string()))
}

fn parse_pairs(pop: &AppliancePopulation, pairs: &[String]) -> Result<Vec<(usize, usize)>> {
    pairs
        .iter()
        .map(|p| match p.split_once(',') {
            Some((a, b)) => Ok((resolve(pop, a)?, resolve(pop, b)?)),
            None => Err(KitError::Usage(format!("expected a pair `a,b`, got {p:?}"))),
        })
        .collect()
}

impl SearchArgs {
    fn constraints(&self, pop: &AppliancePopulation) -> Result<ConstraintSet> {
        Ok(ConstraintSet {
            must_link: parse_pairs(pop, &self.must_link)?,
            cannot_link: parse_pairs(pop, &self.cannot_link)?,
            max_meters: self.max_meters,
        })
    }

    fn config(&self) -> OptimizeConfig {
        OptimizeConfig {
            unit_cost: self.unit_cost,
            prune: self.prune,
        }
    }
}

fn load(metric: &MetricArgs) -> Result<(LoadedPopulation, Evaluator)> {
    let loaded = read_population(&metric.pop)?;
    let eval = Evaluator::new(&loaded.population, metric.config())?;
    Ok((loaded, eval))
}

fn detect(args: &DetectArgs) -> Result<()> {
    let signals = ingest::load_path(&args.input, &args.csv.options())?;
    let config = DetectorConfig { dead_band: args.dead_band };
    let mut w = csv::Writer::from_writer(Vec::new());
    let many = signals.len() > 1;
    let header: &[&str] = if many { &["appliance", "index", "delta_w"] } else { &["index", "delta_w"] };
    w.write_record(header).expect("in-memory write");
    for s in &signals {
        let events = detect_events(s, &config);
        log::info!("{}: {} events", s.appliance_id, events.len());
        for e in events {
            let mut row = Vec::with_capacity(3);
            if many {
                row.push(s.appliance_id.clone());
            }
            row.push(e.sample_index.to_string());
            row.push(e.delta_watts.to_string());
            w.write_record(&row).expect("in-memory write");
        }
    }
    let bytes = w.into_inner().expect("in-memory flush");
    emit(args.out.as_deref(), &String::from_utf8(bytes).expect("utf-8 csv"))
}

fn extract(args: &ExtractArgs) -> Result<()> {
    let signals = ingest::load_path(&args.input, &args.csv.options())?;
    let config = ExtractConfig {
        detector: DetectorConfig { dead_band: args.dead_band },
        elbow: ElbowConfig {
            k_max: args.k_max,
            min_drop: args.min_drop,
            ..Default::default()
        },
        dist: match args.dist {
            DistArg::Gaussian => DistKind::Gaussian,
            DistArg::Wma => DistKind::Wma {
                bin_width: args.bin_width,
                window: args.window,
            },
        },
        sigma_min: args.sigma_min,
        cluster_signed: args.cluster_signed,
        seed: args.seed,
    };
    let build = parallel::build_population(&signals, &config)?;
    for w in &build.warnings {
        log::warn!("{w}");
    }
    for x in &build.extractions {
        log::info!("{}: {} events, {} transitions", x.id, x.events.len(), x.transitions.len());
    }
    write_population(&build.population, &args.out)
}

fn ddm(args: &DdmArgs) -> Result<()> {
    let (loaded, eval) = load(&args.metric)?;
    let pop = &loaded.population;
    let partition = match &args.partition {
        Some(text) => parse_partition(pop, text)?,
        None => Partition::single_block(pop.len()),
    };
    let rep = eval.ddm(&partition)?;
    if let Some(w) = &rep.warning {
        log::warn!("{w}");
    }
    let sweep = if args.sweep { base_sweep(pop, *eval.config())? } else { Vec::new() };
    if let Some(path) = &args.curves {
        report::write_entropy_curves(path, &eval, &[("e_alpha".to_owned(), partition.clone())])?;
    }
    let json = report::ddm_json(pop, &eval, &partition, &rep, &sweep);
    emit(args.out.as_deref(), &to_pretty(&json))
}

fn optimize(args: &OptimizeArgs) -> Result<()> {
    let (loaded, eval) = load(&args.metric)?;
    let pop = &loaded.population;
    let opt = parallel::optimize(&eval, &args.search.constraints(pop)?, &args.search.config())?;
    if let Some(path) = &args.landscape {
        report::write_landscape(path, &opt.landscape)?;
    }
    let json = report::tradeoff_json(pop, args.metric.base, &opt, args.search.unit_cost, args.search.knee_epsilon);
    emit(args.out.as_deref(), &to_pretty(&json))
}

#[derive(serde::Serialize)]
struct ReportJson {
    single: report::DdmJson,
    tradeoff: report::TradeoffJson,
}

fn full_report(args: &ReportArgs) -> Result<()> {
    let (loaded, eval) = load(&args.metric)?;
    let pop = &loaded.population;
    let single_partition = Partition::single_block(pop.len());
    let single = eval.ddm(&single_partition)?;
    let sweep = base_sweep(pop, *eval.config())?;
    let opt = parallel::optimize(&eval, &args.search.constraints(pop)?, &args.search.config())?;
    let text = report::markdown(&ReportInput {
        population: pop,
        renormalized_from: loaded.renormalized_from,
        evaluator: &eval,
        single: &single,
        sweep: &sweep,
        optimization: &opt,
        unit_cost: args.search.unit_cost,
        knee_epsilon: args.search.knee_epsilon,
        references: &args.references,
        max_listed: args.max_listed,
    });
    if let Some(dir) = &args.curves_dir {
        fs::create_dir_all(dir).map_err(|e| KitError::io(dir, e))?;
        report::write_mixture_curves(&dir.join("mixture.csv"), pop, &eval)?;
        let labelled: Vec<(String, Partition)> = opt
            .rows
            .iter()
            .map(|r| (format!("b{}:{}", r.meters, r.argmin), r.argmin.clone()))
            .collect();
        report::write_entropy_curves(&dir.join("entropy.csv"), &eval, &labelled)?;
        report::write_tradeoff_curve(&dir.join("tradeoff.csv"), &opt.rows)?;
        report::write_landscape(&dir.join("landscape.csv"), &opt.landscape)?;
    }
    if let Some(path) = &args.json {
        let json = ReportJson {
            single: report::ddm_json(pop, &eval, &single_partition, &single, &sweep),
            tradeoff: report::tradeoff_json(pop, args.metric.base, &opt, args.search.unit_cost, args.search.knee_epsilon),
        };
        emit(Some(path), &to_pretty(&json))?;
    }
    emit(args.out.as_deref(), &text)
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Detect(a) => detect(a),
        Command::Extract(a) => extract(a),
        Command::Ddm(a) => ddm(a),
        Command::Optimize(a) => optimize(a),
        Command::Report(a) => full_report(a),
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
