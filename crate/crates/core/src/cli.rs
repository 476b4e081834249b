//! The `hrplab` command line.
//!
//! Every subcommand also takes `--config <path>`: a flat `key=value` file whose
//! keys are long flag names (`lookback=60`, `downturns-only=true`). Flags given
//! on the command line win over the file.

use std::ffi::OsString;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use indexmap::IndexMap;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::allocation::{self, AllocationConfig, Method, SideRule};
use crate::backtest::{run_backtest, BacktestConfig, BacktestReport};
use crate::error::{Error, ErrorKind, Result};
use crate::estimation::{self, AssetMatrix, CorrelationMatrix};
use crate::hcluster::{self, LinkageTree, Seriation, TreeExport};
use crate::market_data::{
    self, excess_returns, lookback_window, FactorSeries, Month, ReturnsPanel, RiskFreeSeries,
    SyntheticSpec,
};
use crate::report::{self, HeatmapOrder, TableFormat, TableOptions};

/// Set to any value to turn off ANSI styling of tables.
pub const NO_COLOR_ENV: &str = "HRPLAB_NO_COLOR";

#[derive(Debug, Parser)]
#[command(
    name = "hrplab",
    version,
    about = "Hierarchical-clustering portfolio allocation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded synthetic market (returns.csv, rf.csv, factors.csv).
    Gen(GenArgs),
    /// Weights for one date as JSON.
    Allocate(AllocateArgs),
    /// Rolling buy-and-hold backtest; writes a JSON report.
    Backtest(BacktestArgs),
    /// Metrics table from a backtest report.
    Report(ReportArgs),
    /// Single-linkage dendrogram as SVG plus the tree as JSON.
    Dendrogram(DendrogramArgs),
    /// Matrix heatmap as SVG, in original or seriated order.
    Heatmap(HeatmapArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArg {
    /// key=value file mirroring the long flags
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Directory holding returns.csv, rf.csv and factors.csv
    #[arg(long, value_name = "DIR")]
    pub data: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub returns: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub rf: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub factors: Option<PathBuf>,
}

impl DataArgs {
    fn given(&self) -> bool {
        self.data.is_some() || self.returns.is_some()
    }

    fn path(&self, explicit: &Option<PathBuf>, file: &str, flag: &str) -> Result<PathBuf> {
        explicit
            .clone()
            .or_else(|| self.data.as_ref().map(|d| d.join(file)))
            .ok_or_else(|| Error::InvalidArgument(format!("no {file}: pass --{flag} or --data")))
    }

    fn returns(&self) -> Result<ReturnsPanel> {
        market_data::load_returns_csv(self.path(&self.returns, "returns.csv", "returns")?)
    }

    fn rf(&self) -> Result<RiskFreeSeries> {
        market_data::load_riskfree_csv(self.path(&self.rf, "rf.csv", "rf")?)
    }

    fn factors(&self) -> Result<FactorSeries> {
        market_data::load_factors_csv(self.path(&self.factors, "factors.csv", "factors")?)
    }

    /// Excess returns over the look-back ending just before `as_of` (default:
    /// the month after the panel's last row).
    fn lookback(&self, as_of: Option<Month>, lookback: usize) -> Result<(Month, ReturnsPanel)> {
        let panel = self.returns()?;
        let rf = self.rf()?;
        let as_of = match as_of {
            Some(m) => m,
            None => panel
                .dates()
                .last()
                .ok_or_else(|| Error::Data("empty returns panel".into()))?
                .next(),
        };
        let lb = lookback_window(&panel, as_of, lookback)?;
        Ok((as_of, excess_returns(&lb, &rf)?))
    }
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_month(s: &str) -> std::result::Result<Month, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long, default_value_t = 10)]
    pub assets: usize,
    #[arg(long, default_value_t = 3)]
    pub sectors: usize,
    #[arg(long, default_value_t = 252)]
    pub months: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// First month (YYYY-MM)
    #[arg(long, value_parser = parse_month)]
    pub start: Option<Month>,
    #[arg(long)]
    pub beta_min: Option<f64>,
    #[arg(long)]
    pub beta_max: Option<f64>,
    #[arg(long)]
    pub loading_min: Option<f64>,
    #[arg(long)]
    pub loading_max: Option<f64>,
    #[arg(long)]
    pub idio_vol: Option<f64>,
    #[arg(long)]
    pub sector_vol: Option<f64>,
    #[arg(long)]
    pub market_vol: Option<f64>,
    /// Constant monthly risk-free rate
    #[arg(long = "rf-rate")]
    pub rf_rate: Option<f64>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Overwrite existing files
    #[arg(long)]
    pub force: bool,
}

impl GenArgs {
    pub fn spec(&self) -> SyntheticSpec {
        let d = SyntheticSpec::default();
        SyntheticSpec {
            n_assets: self.assets,
            n_sectors: self.sectors,
            n_months: self.months,
            seed: self.seed,
            market_beta_range: (
                self.beta_min.unwrap_or(d.market_beta_range.0),
                self.beta_max.unwrap_or(d.market_beta_range.1),
            ),
            sector_loading_range: (
                self.loading_min.unwrap_or(d.sector_loading_range.0),
                self.loading_max.unwrap_or(d.sector_loading_range.1),
            ),
            idio_vol: self.idio_vol.unwrap_or(d.idio_vol),
            sector_vol: self.sector_vol.unwrap_or(d.sector_vol),
            market_vol: self.market_vol.unwrap_or(d.market_vol),
            rf_const: self.rf_rate.unwrap_or(d.rf_const),
            start: self.start.unwrap_or(d.start),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct AllocateArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = "hrp", value_parser = parse_method)]
    pub method: Method,
    #[arg(long, default_value_t = 12)]
    pub lookback: usize,
    /// Allocation date (YYYY-MM); defaults to the month after the last row
    #[arg(long, value_parser = parse_month)]
    pub as_of: Option<Month>,
    /// momentum, long, or file:<path> (CSV with asset,side)
    #[arg(long, default_value = "momentum")]
    pub sides: String,
    /// Covariance shrinkage delta in [0, 1]
    #[arg(long, default_value_t = 0.0)]
    pub shrink: f64,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BacktestArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[command(flatten)]
    pub data: DataArgs,
    /// Comma-separated: hrp, gmv, tangency, equal
    #[arg(long, default_value = "hrp,gmv,equal")]
    pub methods: String,
    #[arg(long, default_value_t = 12)]
    pub lookback: usize,
    #[arg(long, default_value_t = 3)]
    pub hold: usize,
    #[arg(long, default_value = "momentum")]
    pub sides: String,
    #[arg(long, default_value_t = 0.0)]
    pub shrink: f64,
    #[arg(long, value_parser = parse_month)]
    pub start: Option<Month>,
    #[arg(long, value_parser = parse_month)]
    pub end: Option<Month>,
    /// A month is a downturn when mkt_rf is below this
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub downturn_threshold: f64,
    /// Report metrics over downturn months only
    #[arg(long)]
    pub downturns_only: bool,
    /// Worker threads (default: number of processors)
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub jobs: Option<u32>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// table, csv or json
    #[arg(long, default_value = "table")]
    pub format: String,
    /// Add market benchmark rows
    #[arg(long)]
    pub market: bool,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DendrogramArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_parser = parse_month)]
    pub as_of: Option<Month>,
    #[arg(long, default_value_t = 12)]
    pub lookback: usize,
    #[arg(long, default_value_t = 0.0)]
    pub shrink: f64,
    #[arg(long, value_name = "PATH")]
    pub svg: PathBuf,
    /// Tree JSON (default: the SVG path with a .json extension)
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct HeatmapArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_parser = parse_month)]
    pub as_of: Option<Month>,
    #[arg(long, default_value_t = 12)]
    pub lookback: usize,
    #[arg(long, default_value_t = 0.0)]
    pub shrink: f64,
    /// correlation, covariance or distance (data inputs only)
    #[arg(long, default_value = "correlation")]
    pub kind: String,
    /// original or seriated
    #[arg(long, default_value = "original")]
    pub order: String,
    /// Labelled matrix CSV instead of data inputs
    #[arg(long, value_name = "PATH")]
    pub matrix: Option<PathBuf>,
    /// Tree JSON (from `dendrogram`) giving the seriation for --matrix
    #[arg(long, value_name = "PATH")]
    pub tree: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub svg: PathBuf,
}

/// Failure of a CLI invocation.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags; also carries `--help` / `--version` output (exit 0).
    Usage(clap::Error),
    Run(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) if !e.use_stderr() => 0,
            CliError::Usage(_) => 1,
            CliError::Run(e) => match e.kind() {
                ErrorKind::Validation => 1,
                ErrorKind::Data => 2,
                ErrorKind::Numerical => 3,
            },
        }
    }

    /// One `error: ...` line (or the help text for `--help`).
    pub fn message(&self) -> String {
        match self {
            CliError::Usage(e) if !e.use_stderr() => e.to_string(),
            CliError::Usage(e) => {
                let text = e.to_string();
                let first = text.lines().next().unwrap_or("usage error").trim();
                let first = first.strip_prefix("error:").unwrap_or(first).trim();
                format!("error: {first}")
            }
            CliError::Run(e) => format!("error: {}", e.to_string().replace('\n', " ")),
        }
    }
}

fn command() -> clap::Command {
    let mut cmd = Cli::command();
    let names: Vec<String> = cmd
        .get_subcommands()
        .map(|s| s.get_name().to_string())
        .collect();
    for n in names {
        cmd = cmd.mut_subcommand(n, |s| s.args_override_self(true));
    }
    cmd
}

/// Strips `--config <path>` / `--config=<path>` from `args`, returning the path.
fn take_config(args: &mut Vec<OsString>) -> std::result::Result<Option<PathBuf>, CliError> {
    let mut found = None;
    let mut i = 0;
    while i < args.len() {
        let a = args[i].to_string_lossy().into_owned();
        if a == "--config" {
            let v = args.get(i + 1).cloned().ok_or_else(|| {
                CliError::Run(Error::InvalidArgument("--config needs a path".into()))
            })?;
            found = Some(PathBuf::from(v));
            args.drain(i..i + 2);
        } else if let Some(v) = a.strip_prefix("--config=") {
            found = Some(PathBuf::from(v));
            args.remove(i);
        } else if a == "--" {
            break;
        } else {
            i += 1;
        }
    }
    Ok(found)
}

/// Turns a key=value file into flags for subcommand `sub`.
fn config_flags(path: &Path, sub: &clap::Command) -> Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(path, format!("line {}: expected key=value", n + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()) && key != "config")
            .ok_or_else(|| Error::parse(path, format!("line {}: unknown key {key:?}", n + 1)))?;
        if arg.get_action().takes_values() {
            out.push(format!("--{key}").into());
            out.push(value.into());
        } else {
            match value {
                "true" | "yes" | "1" | "" => out.push(format!("--{key}").into()),
                "false" | "no" | "0" => {}
                other => {
                    return Err(Error::parse(
                        path,
                        format!("line {}: {key} expects true or false, got {other:?}", n + 1),
                    ))
                }
            }
        }
    }
    Ok(out)
}

/// Parses `args` (including the program name), merging any `--config` file.
pub fn parse_args<I, T>(args: I) -> std::result::Result<Cli, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let mut args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let config = take_config(&mut args)?;
    let cmd = command();
    if let Some(path) = config {
        let sub_name = args
            .get(1)
            .map(|s| s.to_string_lossy().into_owned())
            .ok_or_else(|| {
                CliError::Run(Error::InvalidArgument("--config needs a subcommand".into()))
            })?;
        let sub = cmd.find_subcommand(&sub_name).ok_or_else(|| {
            CliError::Run(Error::InvalidArgument(format!(
                "unknown subcommand {sub_name:?}"
            )))
        })?;
        let extra = config_flags(&path, sub)?;
        args.splice(2..2, extra);
    }
    let matches = cmd.try_get_matches_from(args).map_err(CliError::Usage)?;
    Cli::from_arg_matches(&matches).map_err(CliError::Usage)
}

/// Entry point used by the binary: parses, runs and reports. Returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let result = parse_args(args).and_then(|cli| run(&cli).map_err(CliError::from));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let code = e.exit_code();
            if code == 0 {
                print!("{}", e.message());
            } else {
                eprintln!("{}", e.message());
            }
            code
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// `momentum`, `long`, or `file:<path>`.
pub fn parse_side_rule(s: &str) -> Result<SideRule> {
    match s {
        "momentum" | "momentum_sign" => Ok(SideRule::MomentumSign),
        "long" | "all_long" => Ok(SideRule::AllLong),
        _ => match s.strip_prefix("file:") {
            Some(p) => load_sides_csv(Path::new(p)).map(SideRule::Explicit),
            None => Err(Error::InvalidArgument(format!(
                "unknown side rule {s:?}; expected momentum, long or file:<path>"
            ))),
        },
    }
}

/// `asset,side` rows with side `1`/`+1`/`long` or `-1`/`short`.
fn load_sides_csv(path: &Path) -> Result<IndexMap<String, i8>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(path, e.to_string()))?;
    let mut map = IndexMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, e.to_string()))?;
        let line = i + 2;
        let (asset, side) = match (rec.get(0), rec.get(1)) {
            (Some(a), Some(s)) if !a.is_empty() => (a, s),
            _ => {
                return Err(Error::parse(
                    path,
                    format!("row {line}: expected asset,side"),
                ))
            }
        };
        let side = match side {
            "1" | "+1" | "long" => 1,
            "-1" | "short" => -1,
            other => {
                return Err(Error::parse(
                    path,
                    format!("row {line}: side for {asset} must be 1 or -1, got {other:?}"),
                ))
            }
        };
        if map.insert(asset.to_string(), side).is_some() {
            return Err(Error::parse(
                path,
                format!("row {line}: duplicate asset {asset}"),
            ));
        }
    }
    Ok(map)
}

/// Reads the `asset,<id>,...` layout written by [`AssetMatrix::write_csv`].
pub fn load_matrix_csv(path: &Path) -> Result<CorrelationMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(path, e.to_string()))?;
    let header = rdr
        .headers()
        .map_err(|e| Error::parse(path, e.to_string()))?
        .clone();
    let assets: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let n = assets.len();
    if n == 0 {
        return Err(Error::parse(path, "malformed header: no asset columns"));
    }
    let mut m = DMatrix::zeros(n, n);
    let mut rows = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, e.to_string()))?;
        if i >= n {
            return Err(Error::parse(path, format!("more than {n} rows")));
        }
        if rec.get(0) != Some(assets[i].as_str()) {
            return Err(Error::parse(
                path,
                format!(
                    "row {}: expected asset {}, got {:?}",
                    i + 2,
                    assets[i],
                    rec.get(0).unwrap_or("")
                ),
            ));
        }
        for j in 0..n {
            let raw = rec.get(j + 1).unwrap_or("");
            let v: f64 = raw.parse().map_err(|_| {
                Error::parse(
                    path,
                    format!("row {}, column {}: not a number: {raw:?}", i + 2, assets[j]),
                )
            })?;
            if !v.is_finite() {
                return Err(Error::parse(
                    path,
                    format!("row {}, column {}: non-finite", i + 2, assets[j]),
                ));
            }
            m[(i, j)] = v;
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::parse(path, format!("{rows} rows for {n} columns")));
    }
    Ok(CorrelationMatrix { assets, matrix: m })
}

fn check_shrink(delta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&delta) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "--shrink must be in [0, 1], got {delta}"
        )))
    }
}

#[derive(Serialize)]
struct AllocationOutput<'a> {
    method: &'static str,
    as_of: Month,
    lookback: usize,
    assets: &'a [String],
    weights: &'a [f64],
    sides: Vec<i8>,
    gross: f64,
    net: f64,
}

fn run_gen(a: &GenArgs) -> Result<()> {
    let spec = a.spec();
    spec.validate()?;
    let files = ["returns.csv", "rf.csv", "factors.csv"].map(|f| a.out.join(f));
    if !a.force {
        if let Some(p) = files.iter().find(|p| p.exists()) {
            return Err(Error::InvalidArgument(format!(
                "{} exists; pass --force to overwrite",
                p.display()
            )));
        }
    }
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let (panel, rf, factors) = market_data::generate_synthetic(&spec)?;
    market_data::write_returns_csv(&panel, &files[0])?;
    market_data::write_riskfree_csv(&rf, &files[1])?;
    market_data::write_factors_csv(&factors, &files[2])
}

fn run_allocate(a: &AllocateArgs) -> Result<()> {
    check_shrink(a.shrink)?;
    let side_rule = parse_side_rule(&a.sides)?;
    let (as_of, lb) = a.data.lookback(a.as_of, a.lookback)?;
    if a.method.needs_inverse() && a.shrink == 0.0 && lb.n_assets() >= lb.n_months() {
        return Err(Error::Numerical(format!(
            "{} needs the inverse of a singular covariance: {} assets with {} look-back months; pass --shrink > 0",
            a.method,
            lb.n_assets(),
            lb.n_months()
        )));
    }
    let cfg = AllocationConfig {
        method: a.method,
        side_rule,
        shrinkage_delta: a.shrink,
    };
    let w = allocation::allocate(&lb, &cfg)?;
    let out = AllocationOutput {
        method: w.method.tag(),
        as_of,
        lookback: a.lookback,
        assets: &w.assets,
        weights: &w.weights,
        sides: w.signs(),
        gross: w.gross_exposure(),
        net: w.net_exposure(),
    };
    let mut text = serde_json::to_string_pretty(&out).expect("serialisable");
    text.push('\n');
    emit(a.out.as_deref(), &text)
}

pub fn backtest_config(a: &BacktestArgs) -> Result<BacktestConfig> {
    let methods = a
        .methods
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Method>>>()?;
    let cfg = BacktestConfig {
        lookback_months: a.lookback,
        hold_months: a.hold,
        methods,
        side_rule: parse_side_rule(&a.sides)?,
        shrinkage_delta: a.shrink,
        start: a.start,
        end: a.end,
        downturn_threshold: a.downturn_threshold,
        downturns_only: a.downturns_only,
        jobs: a.jobs.map_or(0, |j| j as usize),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn run_backtest_cmd(a: &BacktestArgs) -> Result<()> {
    let cfg = backtest_config(a)?;
    let panel = a.data.returns()?;
    let rf = a.data.rf()?;
    let factors = a.data.factors()?;
    let report = run_backtest(&panel, &rf, &factors, &cfg)?;
    emit(a.out.as_deref(), &report.to_json())
}

fn run_report(a: &ReportArgs) -> Result<()> {
    let format: TableFormat = a.format.parse()?;
    let text = std::fs::read_to_string(&a.input).map_err(|e| Error::io(&a.input, e))?;
    let report = BacktestReport::from_json(&text)?;
    let styled = format == TableFormat::Table
        && a.out.is_none()
        && std::env::var_os(NO_COLOR_ENV).is_none()
        && std::io::stdout().is_terminal();
    let opts = TableOptions {
        styled,
        include_market: a.market,
    };
    emit(
        a.out.as_deref(),
        &report::render_table(&report, format, opts),
    )
}

fn run_dendrogram(a: &DendrogramArgs) -> Result<()> {
    check_shrink(a.shrink)?;
    let (_, lb) = a.data.lookback(a.as_of, a.lookback)?;
    let cov = estimation::shrink(&estimation::sample_covariance(&lb)?, a.shrink)?;
    let dist = estimation::distance_matrix(&estimation::correlation(&cov)?);
    let tree = hcluster::single_linkage(&dist)?;
    let labels = lb.assets().to_vec();
    let svg = report::render_dendrogram_svg(&tree, &labels)?;
    let json_path = a
        .json
        .clone()
        .unwrap_or_else(|| a.svg.with_extension("json"));
    let mut json = serde_json::to_string_pretty(&tree.to_export(&labels)?).expect("serialisable");
    json.push('\n');
    write(&a.svg, &svg)?;
    write(&json_path, &json)
}

fn load_tree(path: &Path) -> Result<(LinkageTree, Vec<String>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let export: TreeExport =
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
    export.into_tree()
}

fn run_heatmap(a: &HeatmapArgs) -> Result<()> {
    let seriated = match a.order.as_str() {
        "original" => false,
        "seriated" => true,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown order {other:?}; expected original or seriated"
            )))
        }
    };
    check_shrink(a.shrink)?;
    let svg = if let Some(mpath) = &a.matrix {
        if a.data.given() {
            return Err(Error::InvalidArgument(
                "pass either --matrix or data inputs, not both".into(),
            ));
        }
        let m = load_matrix_csv(mpath)?;
        let seriation = match (&a.tree, seriated) {
            (Some(tpath), true) => {
                let (tree, labels) = load_tree(tpath)?;
                if labels != m.assets {
                    return Err(Error::UniverseMismatch(format!(
                        "tree {} and matrix {} list different assets",
                        tpath.display(),
                        mpath.display()
                    )));
                }
                Some(hcluster::quasi_diagonalize(&tree)?)
            }
            (None, true) => return Err(Error::InvalidArgument(
                "--order seriated needs clustering inputs: --tree with --matrix, or data inputs"
                    .into(),
            )),
            (_, false) => None,
        };
        render(&m, seriated, seriation.as_ref())?
    } else {
        if !a.data.given() {
            let what = if seriated {
                "--order seriated needs clustering inputs: "
            } else {
                ""
            };
            return Err(Error::InvalidArgument(format!(
                "{what}pass --data (or --returns/--rf) or --matrix"
            )));
        }
        let (_, lb) = a.data.lookback(a.as_of, a.lookback)?;
        let cov = estimation::shrink(&estimation::sample_covariance(&lb)?, a.shrink)?;
        let corr = estimation::correlation(&cov)?;
        let dist = estimation::distance_matrix(&corr);
        let seriation = if seriated {
            Some(hcluster::quasi_diagonalize(&hcluster::single_linkage(
                &dist,
            )?)?)
        } else {
            None
        };
        match a.kind.as_str() {
            "correlation" => render(&corr, seriated, seriation.as_ref())?,
            "covariance" => render(&cov, seriated, seriation.as_ref())?,
            "distance" => render(&dist, seriated, seriation.as_ref())?,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown kind {other:?}; expected correlation, covariance or distance"
                )))
            }
        }
    };
    write(&a.svg, &svg)
}

fn render<M: AssetMatrix>(m: &M, seriated: bool, s: Option<&Seriation>) -> Result<String> {
    let order = if seriated {
        HeatmapOrder::Seriated(s)
    } else {
        HeatmapOrder::Original
    };
    report::render_heatmap_svg(m, order)
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Gen(a) => run_gen(a),
        Command::Allocate(a) => run_allocate(a),
        Command::Backtest(a) => run_backtest_cmd(a),
        Command::Report(a) => run_report(a),
        Command::Dendrogram(a) => run_dendrogram(a),
        Command::Heatmap(a) => run_heatmap(a),
    }
}
