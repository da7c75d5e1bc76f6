use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use edgedist::painleve::SolverConfig;

#[derive(Debug, Parser)]
#[command(name = "edgedist", version, about = "Edge eigenvalue distributions of the Gaussian ensembles")]
pub struct Cli {
    /// Emit one JSON document instead of CSV.
    #[arg(long, global = true)]
    pub json: bool,

    /// Write to this file (atomically) instead of standard output.
    #[arg(short = 'o', long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    #[command(flatten)]
    pub solver: SolverArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long = "solver.x-right", global = true, default_value_t = SolverConfig::default().x_right, allow_negative_numbers = true)]
    pub x_right: f64,
    #[arg(long = "solver.x-left", global = true, default_value_t = SolverConfig::default().x_left, allow_negative_numbers = true)]
    pub x_left: f64,
    #[arg(long = "solver.patch-point", global = true, default_value_t = SolverConfig::default().patch_point, allow_negative_numbers = true)]
    pub patch_point: f64,
    #[arg(long = "solver.x-min", global = true, default_value_t = SolverConfig::default().x_min, allow_negative_numbers = true)]
    pub x_min: f64,
    #[arg(long = "solver.grid-step", global = true, default_value_t = SolverConfig::default().grid_step)]
    pub grid_step: f64,
    #[arg(long = "solver.jet-order", global = true, default_value_t = SolverConfig::default().jet_order)]
    pub jet_order: usize,
    #[arg(long = "solver.ode-tolerance", global = true, default_value_t = SolverConfig::default().ode_tolerance)]
    pub ode_tolerance: f64,
}

impl SolverArgs {
    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            x_right: self.x_right,
            x_left: self.x_left,
            patch_point: self.patch_point,
            x_min: self.x_min,
            grid_step: self.grid_step,
            jet_order: self.jet_order,
            ode_tolerance: self.ode_tolerance,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate F and its density on an s-grid.
    Table(TableArgs),
    /// Mean, standard deviation, skewness and excess kurtosis.
    Moments(MomentsArgs),
    /// Monte-Carlo edge-scaled eigenvalues of a random matrix ensemble.
    Simulate(SimulateArgs),
    /// Monte-Carlo largest eigenvalues of real Wishart matrices.
    Wishart(WishartArgs),
    /// Percentile report for previously simulated samples.
    Percentiles(PercentilesArgs),
    /// Run the numerical self-checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, value_parser = ["1", "2", "4"])]
    pub beta: String,
    /// Eigenvalue indices, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub m: Vec<usize>,
    /// Evaluate at a single point instead of a grid.
    #[arg(long, allow_negative_numbers = true)]
    pub s: Option<f64>,
    #[arg(long, default_value_t = -13.0, allow_negative_numbers = true)]
    pub s_min: f64,
    #[arg(long, default_value_t = 6.0, allow_negative_numbers = true)]
    pub s_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub s_step: f64,
    /// Report β = 4 in the Tracy–Widom (Mehta) normalization.
    #[arg(long)]
    pub tw_convention: bool,
    /// Also write the Painlevé solution grid as CSV to this path.
    #[arg(long, value_name = "PATH")]
    pub dump_solution: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[arg(long, value_parser = ["1", "2", "4"])]
    pub beta: String,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub m: Vec<usize>,
    #[arg(long)]
    pub tw_convention: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnsembleArg {
    Goe,
    Gue,
    Gse,
    Wishart,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub ensemble: EnsembleArg,
    /// Matrix dimension (quaternion rows for GSE).
    #[arg(long)]
    pub n: Option<usize>,
    /// Wishart sample count (rows of X).
    #[arg(long)]
    pub rows: Option<usize>,
    /// Wishart dimension (columns of X).
    #[arg(long)]
    pub cols: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    pub reps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub top_k: usize,
    /// Compare against the limiting law at these probabilities.
    #[arg(long, value_delimiter = ',')]
    pub percentiles: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct WishartArgs {
    #[arg(long)]
    pub rows: usize,
    #[arg(long)]
    pub cols: usize,
    #[arg(long, default_value_t = 1000)]
    pub reps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub top_k: usize,
    #[arg(long, value_delimiter = ',')]
    pub percentiles: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct PercentilesArgs {
    /// CSV with a `rep,k,lhat` block, as written by `simulate`.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    #[arg(long, value_parser = ["1", "2", "4"], default_value = "1")]
    pub beta: String,
    #[arg(long, value_delimiter = ',', default_value = "0.90,0.95,0.99")]
    pub percentiles: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Interlacing,
    Oracle,
    Asymptotics,
    Aj,
    All,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub check: Check,
    /// Interlacing index; both 1 and 2 are checked when omitted.
    #[arg(long)]
    pub m: Option<usize>,
}
