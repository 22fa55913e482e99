//! Command-line experiments: each run writes its outputs and a manifest into a run
//! directory, and `report` re-runs a manifest and compares the outputs byte for byte.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Serialize, Serializer};

mod commands;
pub mod output;
pub mod plot;

pub use output::{read_manifest, ExperimentManifest, RunWriter, MANIFEST_FILE};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] fermat_chabauty::Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    /// A re-run did not reproduce the recorded outputs.
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(fermat_chabauty::Error::PrecisionExhausted(_)) => 3,
            CliError::Core(_) | CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

/// Inclusive integer range written `a:b` (or a single `a`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexRange {
    pub start: i64,
    pub end: i64,
}

impl FromStr for IndexRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<i64>().map_err(|_| format!("bad range {s:?}, expected a:b"));
        let (start, end) = match s.split_once(':') {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => (parse(s)?, parse(s)?),
        };
        if start > end {
            return Err(format!("empty range {s:?}"));
        }
        Ok(Self { start, end })
    }
}

impl fmt::Display for IndexRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start, self.end)
    }
}

impl Serialize for IndexRange {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl IndexRange {
    pub fn unsigned(&self, what: &str) -> Result<(u64, u64), CliError> {
        if self.start < 0 {
            return Err(CliError::Usage(format!("{what} range must be non-negative, got {self}")));
        }
        Ok((self.start as u64, self.end as u64))
    }
}

#[derive(Debug, Parser)]
#[command(name = "fermat-chabauty", version, about = "Chabauty limits of Fermat spirals: predictions, measurements, empty rectangles")]
pub struct Cli {
    /// Run directory for outputs and manifest.json [default: runs/<command>]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaChoice {
    Limit,
    Finite,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CfArgs {
    /// rat:p/q, quad:a,b,c,d for (a+b√d)/c, or dec:<digits>@<bits>
    #[arg(long)]
    pub alpha: String,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TripletArgs {
    #[arg(long)]
    pub alpha: String,
    #[arg(long, default_value = "1:20")]
    pub j: IndexRange,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpiralArgs {
    #[arg(long)]
    pub alpha: String,
    /// Index range; mutually exclusive with --radius
    #[arg(long, conflicts_with = "radius")]
    pub n: Option<IndexRange>,
    /// All points with |x_n| <= radius
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub n_min: u64,
    /// Also write spiral.svg
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PatchArgs {
    #[arg(long)]
    pub alpha: String,
    #[arg(long)]
    pub center: u64,
    #[arg(long, default_value_t = 8.0)]
    pub window: f64,
    #[arg(long, default_value_t = 1)]
    pub n_min: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DeltaArgs {
    #[arg(long)]
    pub alpha: String,
    /// Center index of the first patch
    #[arg(long)]
    pub first: u64,
    /// Center index of the second patch
    #[arg(long)]
    pub second: u64,
    #[arg(long, default_value_t = 8.0)]
    pub window: f64,
    #[arg(long, default_value_t = 1)]
    pub n_min: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PredictArgs {
    #[arg(long)]
    pub alpha: String,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Rotation in radians
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    /// Convergent index selecting the triplet's residue class
    #[arg(long, default_value_t = 1)]
    pub j: usize,
    /// Explicit triplet; overrides --j when all three are given
    #[arg(long, requires_all = ["c", "ctilde"])]
    pub beta: Option<f64>,
    #[arg(long, requires_all = ["beta", "ctilde"], allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(long, requires_all = ["beta", "c"], allow_hyphen_values = true)]
    pub ctilde: Option<f64>,
    /// Radius of the plotted lattice balls
    #[arg(long, default_value_t = 8.0)]
    pub window: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EmpiricalArgs {
    #[arg(long)]
    pub alpha: String,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value = "10:24")]
    pub j: IndexRange,
    #[arg(long, default_value_t = 8.0)]
    pub window: f64,
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = BetaChoice::Limit)]
    pub beta_mode: BetaChoice,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OrbitArgs {
    #[arg(long)]
    pub alpha: String,
    /// Base center index; defaults to the center for --j
    #[arg(long, conflicts_with = "j")]
    pub center: Option<u64>,
    #[arg(long)]
    pub j: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value = "0:20", allow_hyphen_values = true)]
    pub b: IndexRange,
    #[arg(long, default_value_t = 8.0)]
    pub window: f64,
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ForestArgs {
    #[arg(long)]
    pub alpha: String,
    /// Radius of the searched region
    #[arg(long, default_value_t = 5000.0)]
    pub radius: f64,
    /// Rectangle width
    #[arg(long, default_value_t = 0.2)]
    pub eps: f64,
    #[arg(long, value_delimiter = ',', default_value = "10,20,40")]
    pub lengths: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub n_min: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DensityArgs {
    #[arg(long, value_delimiter = ',', default_value = "10,100,1000")]
    pub r: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub n_min: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DeloneArgs {
    #[arg(long)]
    pub alpha: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub center_x: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub center_y: f64,
    /// Radius of the sampled disc
    #[arg(long, default_value_t = 50.0)]
    pub window: f64,
    /// Grid step for the covering estimate
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    #[arg(long, default_value_t = 1)]
    pub n_min: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReportArgs {
    /// Run directory holding manifest.json
    #[arg(long)]
    pub run: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Partial quotients and convergents
    Cf(CfArgs),
    /// Triplets, identity residuals and limit triplets
    Triplets(TripletArgs),
    /// Spiral points as CSV
    Spiral(SpiralArgs),
    /// Recentered window around one spiral point
    Patch(PatchArgs),
    /// Chabauty distance between two recentered windows
    Delta(DeltaArgs),
    /// Predicted limit lattice for a triplet, scale and rotation
    Predict(PredictArgs),
    /// Empirical patches against predicted lattices along the centers n_j
    Empirical(EmpiricalArgs),
    /// Proof-form versus theorem-form distances and verdict
    CompareForms(EmpiricalArgs),
    /// Fitted lattices along n + b against rotations of the base fit
    Orbit(OrbitArgs),
    /// Empty-rectangle witnesses
    Forest(ForestArgs),
    /// Counting-measure density ratio
    Density(DensityArgs),
    /// Packing and covering estimates on a disc
    Delone(DeloneArgs),
    /// Re-run a manifest and compare outputs byte for byte
    Report(ReportArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Cf(_) => "cf",
            Command::Triplets(_) => "triplets",
            Command::Spiral(_) => "spiral",
            Command::Patch(_) => "patch",
            Command::Delta(_) => "delta",
            Command::Predict(_) => "predict",
            Command::Empirical(_) => "empirical",
            Command::CompareForms(_) => "compare-forms",
            Command::Orbit(_) => "orbit",
            Command::Forest(_) => "forest",
            Command::Density(_) => "density",
            Command::Delone(_) => "delone",
            Command::Report(_) => "report",
        }
    }
}

/// Arguments with any `--out` removed, as recorded in the manifest.
fn strip_out(args: &[String]) -> Vec<String> {
    let mut kept = Vec::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--out" {
            it.next();
        } else if !a.starts_with("--out=") {
            kept.push(a.clone());
        }
    }
    kept
}

/// Runs the command; `argv` excludes the program name.
pub fn execute(cli: &Cli, argv: &[String]) -> Result<Option<ExperimentManifest>, CliError> {
    if let Command::Report(a) = &cli.command {
        commands::report(&a.run)?;
        return Ok(None);
    }
    let dir = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("runs").join(cli.command.name()));
    let mut writer = RunWriter::create(&dir)?;
    let manifest = commands::dispatch(&cli.command, strip_out(argv), &mut writer)?;
    Ok(Some(writer.finish(manifest)?))
}

/// Full entry point; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli, args.get(1..).unwrap_or(&[])) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
