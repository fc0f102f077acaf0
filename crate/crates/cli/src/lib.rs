//! Command-line front end for `zani-core`: simulate datasets, fit models,
//! evaluate distributions and run simulation studies.

pub mod cli;
pub mod commands;
pub mod config;
pub mod io;
pub mod params;

use std::fmt;
use std::path::PathBuf;

use anyhow::Result;

pub use cli::Cli;
use cli::Command;
use config::FileConfig;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const USER_ERROR: u8 = 2;
    pub const NUMERICAL: u8 = 3;
}

/// A study finished but too many of its runs failed.
#[derive(Debug)]
pub struct StudyFailure {
    pub failed: usize,
    pub total: usize,
}

impl fmt::Display for StudyFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} of {} study runs failed", self.failed, self.total)
    }
}

impl std::error::Error for StudyFailure {}

/// Settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Context {
    pub seed: Option<u64>,
    pub jobs: usize,
    pub out: PathBuf,
    pub file: FileConfig,
}

impl Context {
    pub fn seed(&self) -> u64 {
        self.seed
            .or(self.file.mcmc.seed)
            .unwrap_or(config::DEFAULT_SEED)
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let g = cli.global;
    let file = match &g.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let jobs = g
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        anyhow::bail!("--jobs must be positive");
    }
    let ctx = Context {
        seed: g.seed,
        jobs,
        out: config::resolve_out_dir(g.out.as_deref(), &file),
        file,
    };
    match cli.command {
        Command::Simulate(args) => commands::simulate::run(&ctx, &args),
        Command::Fit(args) => commands::fit::run(&ctx, &args),
        Command::Eval { query } => commands::eval::run(&query, &mut std::io::stdout().lock()),
        Command::Study(args) => commands::study::run(&ctx, &args),
    }
}

/// Numerical failures map to 3, everything else to 2.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err.chain().any(|e| {
        e.downcast_ref::<StudyFailure>().is_some()
            || matches!(
                e.downcast_ref::<zani_core::Error>(),
                Some(zani_core::Error::Numerical { .. })
            )
    });
    if numerical {
        exit::NUMERICAL
    } else {
        exit::USER_ERROR
    }
}
