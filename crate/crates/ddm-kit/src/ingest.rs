//! Power time series from CSV or REDD channel files onto a uniform grid.

use std::fs;
use std::path::{Path, PathBuf};

use ddm_core::PowerSignal;
use rayon::prelude::*;

use crate::error::{KitError, Result};

pub const DEFAULT_GAP_FACTOR: f64 = 5.0;

/// Column headers that name a quantity rather than an appliance; a signal
/// read from such a column takes the file stem as its id.
const GENERIC_HEADERS: [&str; 6] = ["w", "watts", "power", "p", "value", "watt"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputFormat {
    /// Header row, one timestamp column and one or more power columns.
    #[default]
    Csv,
    /// Whitespace-separated `unix_ts watts` lines without header.
    Redd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvOptions {
    pub format: InputFormat,
    /// Defaults to the first column.
    pub timestamp_col: Option<String>,
    /// Defaults to every column except the timestamp.
    pub power_cols: Vec<String>,
    /// Output period in seconds; defaults to the median timestamp step.
    pub period: Option<f64>,
    /// Holes longer than this many periods are flagged as gaps.
    pub gap_factor: f64,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            format: InputFormat::Csv,
            timestamp_col: None,
            power_cols: Vec::new(),
            period: None,
            gap_factor: DEFAULT_GAP_FACTOR,
        }
    }
}

/// Irregular readings of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    pub id: String,
    pub timestamps: Vec<f64>,
    pub watts: Vec<f64>,
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "signal".to_owned())
}

fn parse_num(path: &Path, line: u64, field: &str, what: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| KitError::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{what} {field:?} is not a finite number"),
        })
}

fn check_monotonic(path: &Path, line: u64, prev: Option<f64>, t: f64) -> Result<()> {
    match prev {
        Some(p) if t <= p => Err(KitError::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("non-monotonic timestamp {t} after {p}"),
        }),
        _ => Ok(()),
    }
}

fn read_redd(path: &Path, text: &str) -> Result<Vec<RawSeries>> {
    let mut series = RawSeries {
        id: stem(path),
        timestamps: Vec::new(),
        watts: Vec::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i as u64 + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 2 {
            return Err(KitError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("expected `unix_ts watts`, got {} fields", fields.len()),
            });
        }
        let t = parse_num(path, line, fields[0], "timestamp")?;
        check_monotonic(path, line, series.timestamps.last().copied(), t)?;
        series.timestamps.push(t);
        series.watts.push(parse_num(path, line, fields[1], "power")?);
    }
    Ok(vec![series])
}

fn read_table(path: &Path, text: &str, opts: &CsvOptions) -> Result<Vec<RawSeries>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| KitError::format(path, format!("cannot read header row: {e}")))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| KitError::format(path, format!("no column named {name:?}")))
    };
    let t_col = match &opts.timestamp_col {
        Some(name) => column(name)?,
        None => 0,
    };
    let p_cols: Vec<usize> = if opts.power_cols.is_empty() {
        (0..headers.len()).filter(|&c| c != t_col).collect()
    } else {
        opts.power_cols.iter().map(|c| column(c)).collect::<Result<_>>()?
    };
    if p_cols.is_empty() {
        return Err(KitError::format(path, "no power columns"));
    }
    let ids: Vec<String> = p_cols
        .iter()
        .map(|&c| {
            let h = headers[c].to_owned();
            if p_cols.len() == 1 && GENERIC_HEADERS.contains(&h.to_ascii_lowercase().as_str()) {
                stem(path)
            } else {
                h
            }
        })
        .collect();
    let mut timestamps = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); p_cols.len()];
    for record in reader.records() {
        let record = record.map_err(|e| KitError::Parse {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |c: usize| {
            record.get(c).ok_or_else(|| KitError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("missing column {}", c + 1),
            })
        };
        let t = parse_num(path, line, field(t_col)?, "timestamp")?;
        check_monotonic(path, line, timestamps.last().copied(), t)?;
        timestamps.push(t);
        for (out, &c) in columns.iter_mut().zip(&p_cols) {
            out.push(parse_num(path, line, field(c)?, "power")?);
        }
    }
    Ok(ids
        .into_iter()
        .zip(columns)
        .map(|(id, watts)| RawSeries {
            id,
            timestamps: timestamps.clone(),
            watts,
        })
        .collect())
}

/// Raw channels of one file.
pub fn read_series(path: &Path, opts: &CsvOptions) -> Result<Vec<RawSeries>> {
    let text = fs::read_to_string(path).map_err(|e| KitError::io(path, e))?;
    match opts.format {
        InputFormat::Redd => read_redd(path, &text),
        InputFormat::Csv => read_table(path, &text, opts),
    }
}

fn median_step(timestamps: &[f64]) -> Option<f64> {
    let mut steps: Vec<f64> = timestamps.windows(2).map(|w| w[1] - w[0]).collect();
    if steps.is_empty() {
        return None;
    }
    steps.sort_by(f64::total_cmp);
    Some(steps[steps.len() / 2])
}

/// Forward-fills a raw series onto `t0 + k * period`. Grid points inside a
/// hole wider than `gap_factor * period` are recorded as gaps.
pub fn to_uniform(raw: &RawSeries, period: Option<f64>, gap_factor: f64) -> Result<PowerSignal> {
    let ts = &raw.timestamps;
    let native = median_step(ts).ok_or_else(|| {
        ddm_core::Error::InvalidSignal(format!("{}: need at least 2 readings, got {}", raw.id, ts.len()))
    })?;
    let period = period.unwrap_or(native);
    if !(period > 0.0 && period.is_finite()) {
        return Err(KitError::Usage(format!("period must be > 0, got {period}")));
    }
    if period < native * (1.0 - 1e-9) {
        return Err(ddm_core::Error::UpsamplingUnsupported { native, target: period }.into());
    }
    let eps = 1e-9 * period;
    let t0 = ts[0];
    let count = ((ts[ts.len() - 1] - t0) / period + 1e-9).floor() as usize + 1;
    let max_hole = gap_factor * period;
    let mut samples = Vec::with_capacity(count);
    let mut gaps: Vec<std::ops::Range<usize>> = Vec::new();
    let mut j = 0;
    for k in 0..count {
        let tk = t0 + k as f64 * period;
        while j + 1 < ts.len() && ts[j + 1] <= tk + eps {
            j += 1;
        }
        samples.push(raw.watts[j]);
        let filled = tk - ts[j] > eps;
        if filled && j + 1 < ts.len() && ts[j + 1] - ts[j] > max_hole {
            match gaps.last_mut() {
                Some(g) if g.end == k => g.end = k + 1,
                _ => gaps.push(k..k + 1),
            }
        }
    }
    if !gaps.is_empty() {
        let n: usize = gaps.iter().map(|g| g.len()).sum();
        log::warn!("{}: {} gap(s) covering {n} samples excluded from event detection", raw.id, gaps.len());
    }
    Ok(PowerSignal::with_gaps(raw.id.clone(), period, samples, gaps)?)
}

/// Every channel of one file, on a uniform grid.
pub fn load_csv(path: &Path, opts: &CsvOptions) -> Result<Vec<PowerSignal>> {
    read_series(path, opts)?
        .iter()
        .map(|raw| to_uniform(raw, opts.period, opts.gap_factor))
        .collect()
}

/// Data files of a directory in name order (`.csv`, `.dat`, `.txt`).
pub fn list_inputs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| KitError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| matches!(e, "csv" | "dat" | "txt"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(KitError::format(dir, "no .csv, .dat or .txt files"));
    }
    Ok(files)
}

/// Signals of a file, or of every data file in a directory.
pub fn load_path(path: &Path, opts: &CsvOptions) -> Result<Vec<PowerSignal>> {
    if !path.is_dir() {
        return load_csv(path, opts);
    }
    let per_file = list_inputs(path)?
        .par_iter()
        .map(|p| load_csv(p, opts))
        .collect::<Result<Vec<_>>>()?;
    let signals: Vec<PowerSignal> = per_file.into_iter().flatten().collect();
    let mut ids: Vec<&str> = signals.iter().map(|s| s.appliance_id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(KitError::format(path, format!("appliance id {:?} appears in more than one file", w[0])));
    }
    Ok(signals)
}

/// Wide CSV `t,<id>,...` of equally long, equally sampled signals.
pub fn write_csv(signals: &[PowerSignal], path: &Path) -> Result<()> {
    let first = signals
        .first()
        .ok_or_else(|| KitError::Usage("nothing to write".into()))?;
    if signals
        .iter()
        .any(|s| s.len() != first.len() || s.sample_period != first.sample_period)
    {
        return Err(KitError::Usage("signals differ in length or period".into()));
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| KitError::format(path, e.to_string()))?;
    let csv_err = |e: csv::Error| KitError::format(path, e.to_string());
    let mut header = vec!["t".to_owned()];
    header.extend(signals.iter().map(|s| s.appliance_id.clone()));
    w.write_record(&header).map_err(csv_err)?;
    for k in 0..first.len() {
        let mut row = vec![(k as f64 * first.sample_period).to_string()];
        row.extend(signals.iter().map(|s| s.samples[k].to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| KitError::io(path, e))
}
