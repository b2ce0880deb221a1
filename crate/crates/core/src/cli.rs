//! Command-line front end: `analyze`, `simulate`, `oracle` and `sweep`.
//!
//! Parameter flags take a single value, a comma list (`1,2,4`) or an
//! inclusive range (`1..5`). Rows come out in canonical order, sorted by
//! `(M, L, B_peak)` and then policy, whatever order the cells finish in.
//!
//! Exit codes: 0 success, 2 invalid configuration or usage, 3 oracle budget
//! refusal, 4 internal invariant violation, 1 I/O failure.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{min_distortion, DistortionFormulaReport};
use crate::channel::RngSeed;
use crate::domain::{validate_config, BlockConfig, DistortionValue};
use crate::error::Error;
use crate::oracle::{minimize_over_policies, DEFAULT_BUDGET};
use crate::policy::{Mode, PolicySpec};
use crate::simulate::{run_experiment, SimulationReport};

/// Version of the row layouts below. Bump when a column changes.
pub const SCHEMA_VERSION: u32 = 1;

/// Column order of `simulate` and `sweep` CSV output.
pub const SIMULATION_COLUMNS: [&str; 11] = [
    "m",
    "l",
    "b_peak",
    "policy",
    "mode",
    "blocks",
    "seed",
    "empirical_distortion",
    "std_error",
    "theoretical_distortion",
    "zero_distortion",
];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Budget(Error),
    #[error("{0}")]
    Internal(Error),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Internal(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        match err {
            Error::BudgetExceeded { .. } => CliError::Budget(err),
            Error::Invariant(_) | Error::InconsistentTrajectory => CliError::Internal(err),
            other => CliError::Config(other),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(err: csv::Error) -> Self {
        CliError::Io(io::Error::other(err))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        CliError::Usage(format!("json: {err}"))
    }
}

/// Set of integer parameter values: `4`, `1,2,4` or `1..5` (inclusive).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueList(pub Vec<u32>);

impl FromStr for ValueList {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let mut values = Vec::new();
        for part in s.split(',').map(str::trim) {
            if let Some((lo, hi)) = part.split_once("..") {
                let hi = hi.strip_prefix('=').unwrap_or(hi);
                let lo: u32 = lo.parse().map_err(|_| format!("bad range start in {part:?}"))?;
                let hi: u32 = hi.parse().map_err(|_| format!("bad range end in {part:?}"))?;
                values.extend(lo..=hi);
            } else {
                values.push(part.parse().map_err(|_| format!("bad value {part:?}"))?);
            }
        }
        Ok(ValueList(values))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "bbp", version, about = "Beam-pointing channel: closed-form distortion, simulation and exhaustive search")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimum distortion and probe schedule per configuration.
    Analyze(AnalyzeArgs),
    /// Monte Carlo estimate of the average per-block distortion.
    Simulate(SimulateArgs),
    /// Exhaustive minimization over deterministic policies.
    Oracle(OracleArgs),
    /// Simulation over the cartesian product of parameter ranges and policies.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Number of directions M.
    #[arg(long)]
    pub m: Option<ValueList>,
    /// Channel uses per block L.
    #[arg(long)]
    pub l: Option<ValueList>,
    /// Peak input weight.
    #[arg(long = "b-peak")]
    pub b_peak: Option<ValueList>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Comma-separated policies: optimal, sweep, random:<w>, idle.
    #[arg(long, default_value = "optimal")]
    pub policy: String,
    #[arg(long, default_value = "canonical")]
    pub mode: String,
    #[arg(long, default_value_t = 100_000)]
    pub blocks: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Largest number of reduced policy trees to enumerate.
    #[arg(long, env = "BBP_ORACLE_BUDGET", default_value_t = DEFAULT_BUDGET)]
    pub budget: u128,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// JSON experiment file; replaces the grid and run flags.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Experiment description, as given by flags or a JSON file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub m: Vec<u32>,
    pub l: Vec<u32>,
    pub b_peak: Vec<u32>,
    #[serde(default = "default_policies")]
    pub policies: Vec<String>,
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default = "default_blocks")]
    pub blocks: u64,
    #[serde(default)]
    pub seed: u64,
}

fn default_policies() -> Vec<String> {
    vec!["optimal".into()]
}

fn default_mode() -> String {
    "canonical".into()
}

fn default_blocks() -> u64 {
    100_000
}

impl ExperimentSpec {
    pub fn from_flags(grid: &GridArgs, run: Option<&RunArgs>) -> Result<Self, CliError> {
        let take = |v: &Option<ValueList>, flag: &str| {
            v.clone().map(|l| l.0).ok_or_else(|| CliError::Usage(format!("--{flag} is required")))
        };
        let (policies, mode, blocks, seed) = match run {
            Some(r) => (r.policy.split(',').map(|s| s.trim().to_string()).collect(), r.mode.clone(), r.blocks, r.seed),
            None => (default_policies(), default_mode(), default_blocks(), 0),
        };
        Ok(ExperimentSpec {
            m: take(&grid.m, "m")?,
            l: take(&grid.l, "l")?,
            b_peak: take(&grid.b_peak, "b-peak")?,
            policies,
            mode,
            blocks,
            seed,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let file = File::open(path)?;
        Ok(serde_json::from_reader(file)?)
    }

    /// Validated configurations in canonical order.
    pub fn configs(&self) -> Result<Vec<BlockConfig>, CliError> {
        if self.m.is_empty() || self.l.is_empty() || self.b_peak.is_empty() {
            return Err(CliError::Usage("empty parameter range".into()));
        }
        let mut out = BTreeSet::new();
        for &m in &self.m {
            for &l in &self.l {
                for &b in &self.b_peak {
                    out.insert(validate_config(m, l, b)?);
                }
            }
        }
        Ok(out.into_iter().collect())
    }

    pub fn policies(&self) -> Result<Vec<PolicySpec>, CliError> {
        if self.policies.is_empty() {
            return Err(CliError::Usage("no policy given".into()));
        }
        let set: BTreeSet<PolicySpec> = self.policies.iter().map(|p| p.parse()).collect::<Result<_, _>>()?;
        Ok(set.into_iter().collect())
    }

    pub fn mode(&self) -> Result<Mode, CliError> {
        Ok(self.mode.parse()?)
    }
}

/// One `analyze` row; rationals as `p/q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeRow {
    pub m: u32,
    pub l: u32,
    pub b_peak: u32,
    pub schedule: String,
    pub feasible_schedule: String,
    pub d_min: DistortionValue,
    pub d_min_decimal: f64,
    pub terms: String,
    pub residual: DistortionValue,
    pub feasible_value: DistortionValue,
    pub zero_distortion: bool,
}

impl From<&DistortionFormulaReport> for AnalyzeRow {
    fn from(r: &DistortionFormulaReport) -> Self {
        let join = |items: Vec<String>| items.join(" ");
        AnalyzeRow {
            m: r.cfg.m(),
            l: r.cfg.l(),
            b_peak: r.cfg.b_peak(),
            schedule: join(
                r.schedule.exact.iter().map(|c| DistortionValue::from_rational(c.clone()).to_string()).collect(),
            ),
            feasible_schedule: join(r.schedule.feasible.iter().map(u32::to_string).collect()),
            d_min: r.d_min.clone(),
            d_min_decimal: r.d_min.to_f64(),
            terms: join(r.terms.iter().map(DistortionValue::to_string).collect()),
            residual: r.residual.clone(),
            feasible_value: r.feasible_value.clone(),
            zero_distortion: r.zero_distortion,
        }
    }
}

/// One `simulate` / `sweep` row, columns as in [`SIMULATION_COLUMNS`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRow {
    pub m: u32,
    pub l: u32,
    pub b_peak: u32,
    pub policy: String,
    pub mode: Mode,
    pub blocks: u64,
    pub seed: u64,
    pub empirical_distortion: f64,
    pub std_error: f64,
    pub theoretical_distortion: f64,
    pub zero_distortion: bool,
}

impl From<&SimulationReport> for SimulationRow {
    fn from(r: &SimulationReport) -> Self {
        SimulationRow {
            m: r.cfg.m(),
            l: r.cfg.l(),
            b_peak: r.cfg.b_peak(),
            policy: r.policy.clone(),
            mode: r.mode,
            blocks: r.blocks,
            seed: r.seed.0,
            empirical_distortion: r.mean_distortion,
            std_error: r.std_error,
            theoretical_distortion: r.theoretical.d_min.to_f64(),
            zero_distortion: r.theoretical.zero_distortion,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub m: u32,
    pub l: u32,
    pub b_peak: u32,
    pub oracle_min: DistortionValue,
    pub formula: DistortionValue,
    pub equal: bool,
    pub policies_evaluated: u64,
    /// Argmin tree as `history:{probe}` pairs, `-` for the empty history.
    pub argmin: String,
}

/// JSON document emitted by `simulate` and `sweep`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationDocument {
    pub schema_version: u32,
    pub reports: Vec<SimulationReport>,
}

/// JSON document emitted by `analyze`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeDocument {
    pub schema_version: u32,
    pub reports: Vec<DistortionFormulaReport>,
}

/// JSON document emitted by `oracle`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleDocument {
    pub schema_version: u32,
    pub rows: Vec<OracleRow>,
}

pub fn cmd_analyze(spec: &ExperimentSpec) -> Result<Vec<DistortionFormulaReport>, CliError> {
    spec.configs()?
        .par_iter()
        .map(|cfg| min_distortion(cfg).map_err(CliError::from))
        .collect()
}

pub fn cmd_simulate(spec: &ExperimentSpec) -> Result<Vec<SimulationReport>, CliError> {
    let mode = spec.mode()?;
    let configs = spec.configs()?;
    let policies = spec.policies()?;
    if spec.blocks == 0 {
        return Err(CliError::Config(Error::NoBlocks));
    }
    let cells: Vec<(BlockConfig, PolicySpec)> =
        configs.iter().flat_map(|&cfg| policies.iter().map(move |&p| (cfg, p))).collect();
    cells
        .par_iter()
        .map(|(cfg, p)| {
            let policy = p.build(cfg, mode)?;
            Ok(run_experiment(cfg, policy.as_ref(), spec.blocks, RngSeed(spec.seed))?)
        })
        .collect()
}

pub fn cmd_oracle(spec: &ExperimentSpec, budget: u128) -> Result<Vec<OracleRow>, CliError> {
    spec.configs()?
        .iter()
        .map(|cfg| {
            let result = minimize_over_policies(cfg, budget)?;
            let formula = min_distortion(cfg)?.d_min;
            Ok(OracleRow {
                m: cfg.m(),
                l: cfg.l(),
                b_peak: cfg.b_peak(),
                equal: result.min_distortion == formula,
                oracle_min: result.min_distortion,
                formula,
                policies_evaluated: result.policies_evaluated as u64,
                argmin: result.argmin_tree.render(),
            })
        })
        .collect()
}

pub fn cmd_sweep(spec: &ExperimentSpec) -> Result<Vec<SimulationReport>, CliError> {
    cmd_simulate(spec)
}

fn write_csv<T: Serialize>(rows: &[T], out: &mut dyn Write) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(doc: &T, out: &mut dyn Write) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, doc)?;
    writeln!(out)?;
    Ok(())
}

fn emit_simulation(reports: &[SimulationReport], format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    match format {
        Format::Csv => write_csv(&reports.iter().map(SimulationRow::from).collect::<Vec<_>>(), out),
        Format::Json => write_json(&SimulationDocument { schema_version: SCHEMA_VERSION, reports: reports.to_vec() }, out),
    }
}

fn with_output(args: &OutputArgs, out: &mut dyn Write, body: impl FnOnce(&mut dyn Write) -> Result<(), CliError>) -> Result<(), CliError> {
    match &args.output {
        Some(path) => {
            let mut file = io::BufWriter::new(File::create(path)?);
            body(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => body(out),
    }
}

/// Parses `args` (program name first) and runs the subcommand, writing
/// results to `out` unless `--output` redirects them.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            write!(out, "{e}")?;
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    match cli.command {
        Command::Analyze(args) => {
            let spec = ExperimentSpec::from_flags(&args.grid, None)?;
            let reports = cmd_analyze(&spec)?;
            with_output(&args.out, out, |w| match args.out.format {
                Format::Csv => write_csv(&reports.iter().map(AnalyzeRow::from).collect::<Vec<_>>(), w),
                Format::Json => write_json(&AnalyzeDocument { schema_version: SCHEMA_VERSION, reports }, w),
            })
        }
        Command::Simulate(args) => {
            let spec = ExperimentSpec::from_flags(&args.grid, Some(&args.run))?;
            let reports = cmd_simulate(&spec)?;
            with_output(&args.out, out, |w| emit_simulation(&reports, args.out.format, w))
        }
        Command::Oracle(args) => {
            let spec = ExperimentSpec::from_flags(&args.grid, None)?;
            let rows = cmd_oracle(&spec, args.budget)?;
            with_output(&args.out, out, |w| match args.out.format {
                Format::Csv => write_csv(&rows, w),
                Format::Json => write_json(&OracleDocument { schema_version: SCHEMA_VERSION, rows }, w),
            })
        }
        Command::Sweep(args) => {
            let spec = match &args.spec {
                Some(path) => ExperimentSpec::from_file(path)?,
                None => ExperimentSpec::from_flags(&args.grid, Some(&args.run))?,
            };
            let reports = cmd_sweep(&spec)?;
            with_output(&args.out, out, |w| emit_simulation(&reports, args.out.format, w))
        }
    }
}
