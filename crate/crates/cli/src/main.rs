//! `synergy`: simulate prediction pools, score candidate ensembles, select
//! the best teams and inspect individual predictions.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "synergy",
    version,
    about = "Diversity-driven ensemble selection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic pool with planted complementary structure.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Score every candidate team; write scatter CSVs and a correlation report.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Rank teams by one metric and evaluate the top K.
    Select {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Show how one team handled one sample.
    Inspect {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        inspect: InspectArgs,
    },
}

#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// Pool manifest (JSON).
    #[arg(long)]
    pub pool: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated metrics: ck,qs,bd,gd,kw,sq.
    #[arg(long)]
    pub metrics: Option<String>,
    /// Ranking metric for `select`.
    #[arg(long)]
    pub metric: Option<String>,
    /// soft | majority
    #[arg(long)]
    pub consensus: Option<String>,
    /// Evaluate on a seeded subset of at most this many negative samples.
    #[arg(long)]
    pub neg_cap: Option<usize>,
    #[arg(long)]
    pub w_epsilon: Option<f64>,
    #[arg(long)]
    pub w_alpha: Option<f64>,
    #[arg(long)]
    pub min_size: Option<usize>,
    #[arg(long)]
    pub max_size: Option<usize>,
    #[arg(long)]
    pub topk: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file supplying any of these flags; flags given explicitly win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Score the pairwise and non-pairwise measures on every sample instead
    /// of the samples some member gets wrong.
    #[arg(long)]
    pub full_set: bool,
    /// pearson | spearman
    #[arg(long)]
    pub correlation: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct SimArgs {
    #[arg(long)]
    pub models: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub classes: Option<usize>,
    /// Number of archetype groups (models join round-robin).
    #[arg(long)]
    pub groups: Option<usize>,
    /// Within-group error coupling.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Cross-group complementarity.
    #[arg(long)]
    pub complement: Option<f64>,
    #[arg(long)]
    pub peak_mass: Option<f64>,
    #[arg(long)]
    pub acc_min: Option<f64>,
    #[arg(long)]
    pub acc_max: Option<f64>,
    /// Full generator spec as JSON; overrides the shape flags above.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct InspectArgs {
    /// Team key, e.g. 139 (or 1-3-12 for pools over ten models).
    #[arg(long)]
    pub team: Option<String>,
    #[arg(long)]
    pub sample: Option<String>,
}

/// Failure classes mapped to process exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or references to things that do not exist (exit 2).
    Usage(anyhow::Error),
    /// Data or computation failure (exit 1).
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn usage(msg: impl std::fmt::Display) -> Self {
        Self::Usage(anyhow::anyhow!("{msg}"))
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Self::Runtime(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { common, sim } => commands::simulate(common, sim),
        Command::Evaluate { common } => commands::evaluate(common),
        Command::Select { common } => commands::select(common),
        Command::Inspect { common, inspect } => commands::inspect(common, inspect),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
