//! Command-line front end: argument parsing, commands, and run manifests.

pub mod commands;
pub mod io;
pub mod manifest;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fairglasso::{LipschitzMode, PenaltyKind, SolverConfig, StepRule};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Output(String),
    #[error(transparent)]
    Core(#[from] fairglasso::Error),
}

#[derive(Debug, Clone, Parser, PartialEq)]
#[command(name = "fairglasso", version, about = "Sparse precision estimation with fairness penalties")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, PartialEq)]
pub enum Command {
    /// Estimate a precision matrix from observations.
    Estimate(EstimateArgs),
    /// Run a synthetic experiment sweep.
    Synth(SynthArgs),
    /// Compute metrics for an existing precision matrix.
    Eval(EvalArgs),
    /// Time the solver across problem sizes.
    Bench(BenchArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PenaltyArg {
    None,
    Group,
    Node,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LipschitzArg {
    Exact,
    Upper,
}

#[derive(Debug, Clone, Args, PartialEq)]
pub struct SolverArgs {
    /// Off-diagonal l1 weight.
    #[arg(long, default_value_t = 0.0)]
    pub mu1: f64,
    /// Bias penalty weight.
    #[arg(long, default_value_t = 0.0)]
    pub mu2: f64,
    #[arg(long, value_enum, default_value_t = PenaltyArg::Group)]
    pub penalty: PenaltyArg,
    /// Loading inside the log-determinant.
    #[arg(long, default_value_t = 1e-4)]
    pub epsilon: f64,
    /// Bound on the squared spectral norm; derived from the data when omitted.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Lipschitz constant for the group penalty.
    #[arg(long, value_enum, default_value_t = LipschitzArg::Upper)]
    pub lipschitz: LipschitzArg,
    /// Use the fixed global step instead of backtracking.
    #[arg(long)]
    pub fixed_step: bool,
}

impl SolverArgs {
    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            mu1: self.mu1,
            mu2: self.mu2,
            epsilon: self.epsilon,
            alpha: self.alpha,
            penalty: match self.penalty {
                PenaltyArg::None => PenaltyKind::None,
                PenaltyArg::Group => PenaltyKind::GroupDp,
                PenaltyArg::Node => PenaltyKind::NodeDp,
            },
            max_iter: self.max_iter,
            tol: self.tol,
            lipschitz_mode: match self.lipschitz {
                LipschitzArg::Exact => LipschitzMode::Exact,
                LipschitzArg::Upper => LipschitzMode::UpperBound,
            },
            step: if self.fixed_step { StepRule::Lipschitz } else { StepRule::default() },
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args, PartialEq)]
pub struct EstimateArgs {
    /// CSV with one observation per row and one variable per column.
    pub observations: PathBuf,
    /// One group label per line, one line per variable.
    pub groups: PathBuf,
    /// The observations file starts with a header row.
    #[arg(long)]
    pub header: bool,
    /// Do not subtract column means before forming the covariance.
    #[arg(long)]
    pub no_center: bool,
    /// Divide the covariance by n - 1 instead of n.
    #[arg(long)]
    pub unbiased_cov: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Output prefix.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    Bias,
    Dim,
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    /// Sign-balanced Erdos-Renyi graphs.
    Er,
    /// The bundled karate-club graph.
    Karate,
}

#[derive(Debug, Clone, Args, PartialEq)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub scenario: ScenarioArg,
    #[arg(long, value_enum, default_value_t = SourceArg::Er)]
    pub source: SourceArg,
    /// Node counts (comma separated); only the dim scenario uses more than the first.
    #[arg(long, value_delimiter = ',', default_value = "50")]
    pub p: Vec<usize>,
    /// Sample sizes; only the sample scenario uses more than the first.
    #[arg(long, value_delimiter = ',', default_value = "2000")]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.4,0.5")]
    pub betas: Vec<f64>,
    #[arg(long, default_value_t = 2)]
    pub g: usize,
    /// Seeds per grid point.
    #[arg(long, default_value_t = 5)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub base_seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "GL,FGL,NFGL,RWGL-150,RWGL-300")]
    pub methods: Vec<String>,
    /// Fixed l1 weight; by default it is `mu1_scale * sqrt(ln p / n)`.
    #[arg(long)]
    pub mu1: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub mu1_scale: f64,
    /// Candidate bias weights for FGL; the lowest-error one is kept.
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    pub fgl_mu2: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "10,100,1000")]
    pub nfgl_mu2: Vec<f64>,
    #[arg(long, default_value_t = 10.0)]
    pub avg_degree: f64,
    #[arg(long, default_value_t = 1.0)]
    pub diag_load: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Write zero instead of wall-clock times, making the output reproducible byte for byte.
    #[arg(long)]
    pub no_timing: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, PartialEq)]
pub struct EvalArgs {
    /// Precision estimate as a dense CSV matrix.
    pub theta: PathBuf,
    /// One group label per line.
    pub groups: PathBuf,
    /// Ground-truth precision, enables normalized_error.
    #[arg(long)]
    pub theta0: Option<PathBuf>,
    /// Covariance, enables model_fit.
    #[arg(long)]
    pub sigma: Option<PathBuf>,
    /// Matrix files start with a header row.
    #[arg(long)]
    pub header: bool,
    /// Edge threshold for sign ratios; defaults to 1e-6 times the largest off-diagonal magnitude.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, PartialEq)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "50,100,200")]
    pub p: Vec<usize>,
    /// Repetitions per size; the median time is reported.
    #[arg(long, default_value_t = 3)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Iterations per solve; every solve runs exactly this many unless it stalls.
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    /// Bias weights to time, one method per value.
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    pub mu2: Vec<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub mu1: f64,
    /// Observations per variable in the generated data.
    #[arg(long, default_value_t = 10)]
    pub samples_per_node: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, PartialEq)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Write to a different prefix than the recorded run.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Estimate(_) => "estimate",
            Command::Synth(_) => "synth",
            Command::Eval(_) => "eval",
            Command::Bench(_) => "bench",
            Command::Replay(_) => "replay",
        }
    }
}

/// Parses `args` (without the program name) and runs the command.
pub fn run_args(args: &[String]) -> Result<(), CliError> {
    let argv = std::iter::once("fairglasso".to_string()).chain(args.iter().cloned());
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Input(e.to_string()))?;
    commands::execute(&cli.command, args)
}
