//! Command-line front end for the `hybridbn` library.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hybridbn::averaging::AveragingError;
use hybridbn::data::DataError;
use hybridbn::graph::GraphError;
use hybridbn::model::{ModelError, Score};
use hybridbn::search::SearchError;
use hybridbn::validation::ValidationError;

use crate::config::Strategy;

/// Invalid invocation or configuration (exit code 1).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(name = "hybridbn", version, about = "Hybrid Bayesian network learning from mixed data")]
pub struct Cli {
    /// Run configuration file (TOML).
    #[arg(short, long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; replaces the search, averaging and cv seeds.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct DataArgs {
    /// Data CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Discrete column (repeatable); used when the config lists no columns.
    #[arg(long = "discrete", value_name = "COLUMN")]
    pub discrete: Vec<String>,
}

#[derive(Debug, Args, Default)]
pub struct ConstraintArgs {
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyArg>,
    /// Blacklist file: `from,to` per line.
    #[arg(long)]
    pub blacklist: Option<PathBuf>,
    /// Whitelist file: `a,b` (either direction) or `a->b` per line.
    #[arg(long)]
    pub whitelist: Option<PathBuf>,
    /// Domain map file: `indicator,domain` per line.
    #[arg(long)]
    pub domains: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum StrategyArg {
    None,
    Strategy1,
    Strategy2,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::None => Strategy::None,
            StrategyArg::Strategy1 => Strategy::Strategy1,
            StrategyArg::Strategy2 => Strategy::Strategy2,
        }
    }
}

#[derive(Debug, Args, Default)]
pub struct SearchArgs {
    #[arg(long, value_parser = parse_score)]
    pub score: Option<Score>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub perturbation_size: Option<usize>,
    #[arg(long)]
    pub max_parents: Option<usize>,
}

fn parse_score(s: &str) -> Result<Score, String> {
    s.parse()
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Impute missing cells and normalise continuous columns.
    Preprocess {
        #[command(flatten)]
        data: DataArgs,
        /// Neighbours used for imputation.
        #[arg(long)]
        neighbors: Option<usize>,
        /// Impute only; leave values untransformed.
        #[arg(long)]
        no_transform: bool,
    },
    /// Learn one network by hill-climbing.
    Learn {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        constraints: ConstraintArgs,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Learn networks on bootstrap replicates and average them.
    Average {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        constraints: ConstraintArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long)]
        strength_threshold: Option<f64>,
        #[arg(long)]
        direction_threshold: Option<f64>,
    },
    /// Components, degrees, connections, influence and domain reports.
    Analyze {
        /// `learn.json` or `averaged.json` from an earlier run.
        #[arg(long)]
        graph: PathBuf,
        /// Node whose influence set is reported (repeatable).
        #[arg(long = "source", value_name = "NODE")]
        sources: Vec<String>,
        /// Domain map file: `indicator,domain` per line.
        #[arg(long)]
        domains: Option<PathBuf>,
    },
    /// K-fold cross-validated posterior mean squared error.
    Cv {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        constraints: ConstraintArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Fixed structure (`learn.json` or `averaged.json`).
        #[arg(long, conflicts_with = "relearn")]
        structure: Option<PathBuf>,
        /// Relearn the structure on every training split.
        #[arg(long)]
        relearn: bool,
        /// With --relearn, average over bootstrap replicates per fold.
        #[arg(long, requires = "relearn")]
        bootstrap: bool,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        standardize: bool,
    },
    /// Rank earlier runs by BIC, AIC and posterior MSE.
    Compare {
        /// Run output directories.
        #[arg(required = true, num_args = 2..)]
        runs: Vec<PathBuf>,
    },
}

fn model_code(e: &ModelError) -> u8 {
    match e {
        ModelError::InsufficientRows { .. } | ModelError::EmptyConfiguration { .. } | ModelError::NoObservations => 3,
        _ => 2,
    }
}

fn search_code(e: &SearchError) -> u8 {
    match e {
        SearchError::DegenerateScore => 3,
        SearchError::Model(m) => model_code(m),
        SearchError::Inadmissible(_) | SearchError::UnmappedNode(_) | SearchError::Parse { .. } => 1,
        SearchError::Graph(_) | SearchError::Data(_) => 2,
    }
}

fn averaging_code(e: &AveragingError) -> u8 {
    match e {
        AveragingError::Search { source, .. } => search_code(source),
        AveragingError::Config(_) => 1,
        _ => 2,
    }
}

/// Exit code for an error: 1 usage, 2 data, 3 numerical failure.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<SearchError>() {
            return search_code(e);
        }
        if let Some(e) = cause.downcast_ref::<ModelError>() {
            return model_code(e);
        }
        if let Some(e) = cause.downcast_ref::<AveragingError>() {
            return averaging_code(e);
        }
        if let Some(e) = cause.downcast_ref::<ValidationError>() {
            return match e {
                ValidationError::Folds { .. } | ValidationError::TooFewModels => 1,
                ValidationError::Model(m) => model_code(m),
                ValidationError::Search(s) => search_code(s),
                ValidationError::Averaging(a) => averaging_code(a),
                _ => 2,
            };
        }
        if cause.downcast_ref::<DataError>().is_some() || cause.downcast_ref::<GraphError>().is_some() {
            return 2;
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn })
        .parse_default_env()
        .init();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
