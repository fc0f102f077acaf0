use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{ModelKind, SamplerKind};

#[derive(Debug, Parser)]
#[command(
    name = "zani",
    version,
    about = "Zero-&-N-inflated multinomial and Dirichlet-multinomial models for count-compositional data"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Random seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for studies (defaults to the number of CPUs).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// TOML run configuration; flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (falls back to $ZANI_OUT_DIR, then ./zani-out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a dataset from a model.
    Simulate(SimulateArgs),
    /// Fit a model to a dataset by MCMC.
    Fit(FitArgs),
    /// Evaluate probabilities and moments; prints CSV to standard output.
    Eval {
        #[command(subcommand)]
        query: EvalCommand,
    },
    /// Run a simulation study.
    Study(StudyArgs),
}

/// Model parameters, from a TOML file and/or inline flags (flags win).
#[derive(Debug, Clone, Default, Args)]
pub struct ParamsArgs {
    /// TOML file with `model`, `theta` or `alpha`, and `zeta`.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// Comma-separated category probabilities.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Option<Vec<f64>>,
    /// Comma-separated Dirichlet concentrations.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha: Option<Vec<f64>>,
    /// Comma-separated zero-inflation probabilities.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub zeta: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: ParamsArgs,
    /// Number of observations.
    #[arg(long = "n")]
    pub n: usize,
    /// Trials per observation.
    #[arg(long)]
    pub trials: u64,
    /// File name of the dataset inside the output directory.
    #[arg(long, default_value = "data.csv")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Dataset CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    #[arg(long, value_enum)]
    pub alpha_sampler: Option<SamplerKind>,
    /// Random-walk step on log(alpha).
    #[arg(long)]
    pub mh_step: Option<f64>,
    /// Adapt the random-walk step during burn-in.
    #[arg(long)]
    pub mh_adapt: bool,
    #[arg(long)]
    pub slice_width: Option<f64>,
    #[arg(long)]
    pub slice_max_steps: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Joint probability of one count vector.
    Pmf {
        #[command(flatten)]
        params: ParamsArgs,
        /// Comma-separated counts.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y: Vec<i64>,
        /// Declared trials (defaults to the sum of the counts).
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Marginal probabilities of single categories.
    Marginal {
        #[command(flatten)]
        params: ParamsArgs,
        #[arg(long)]
        trials: u64,
        /// Category, numbered from 1 (default: all).
        #[arg(long)]
        category: Option<usize>,
        /// Single count value (default: the whole grid 0..=trials).
        #[arg(long)]
        k: Option<u64>,
    },
    /// Means, variances, covariances, dispersion and zero-inflation indices.
    Moments {
        #[command(flatten)]
        params: ParamsArgs,
        #[arg(long)]
        trials: u64,
    },
    /// Moment generating function (ZANIM only).
    Mgf {
        #[command(flatten)]
        params: ParamsArgs,
        /// Comma-separated argument vector.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        t: Vec<f64>,
        #[arg(long)]
        trials: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StudyName {
    /// Compare the three alpha samplers on replicated ZANIDM data.
    SamplerComparison,
    /// Fit four models to data from the ZANIM and ZANIDM processes.
    DgpRecovery,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    Desk,
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Design {
    /// theta = (0.05, 0.70, 0.25), alpha = (2, 28, 10).
    Standard,
    /// theta = (1/3, 1/3, 1/3), alpha = (1, 1, 1).
    Balanced,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    #[arg(value_enum)]
    pub name: StudyName,
    #[arg(long, value_enum, default_value = "desk")]
    pub scale: Scale,
    /// Required for the long-running paper scale.
    #[arg(long)]
    pub confirm: bool,
    /// Parameter design for dgp-recovery.
    #[arg(long, value_enum, default_value = "standard")]
    pub design: Design,
    /// Override the number of replicates.
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Override the iterations of every fit.
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
}
