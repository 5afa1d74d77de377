//! `smartaug` — augment segmentation datasets, search augmentation
//! strategies, analyze trial ledgers, preview operations, and generate
//! synthetic datasets.
//!
//! Exit codes: 0 success, 2 usage/config error, 3 data/ledger error,
//! 4 evaluator protocol failure.

mod commands;

use clap::{Parser, Subcommand};
use smartaug::ErrorCategory;
use std::path::PathBuf;

pub(crate) const EXTERNAL_PROTOCOL_HELP: &str = "\
External evaluator contract (--evaluator external:<command>):
  1. smartaug writes an input file: JSON
       {\"config\": <strategy config>, \"seed\": <int>, \"out\": \"<path>\"}
  2. It invokes `<command> <input-path>` and waits (default timeout 600 s).
  3. The command trains with the given augmentation strategy and seed, then
     writes JSON {\"miou\": <real in [0, 1]>} to the \"out\" path and
     exits 0.
Nonzero exits, malformed results and timeouts are recorded as failed
trials; the search continues.";

#[derive(Parser)]
#[command(
    name = "smartaug",
    version,
    about = "Segmentation-aware data augmentation and strategy search",
    after_help = "Run `smartaug <command> --help` for per-command flags."
)]
struct Cli {
    /// Root RNG seed; identical flags always produce identical outputs.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// JSON file with fallback values for --seed and --jobs.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Verbose logging.
    #[arg(long, global = true)]
    verbose: bool,

    /// Cap for the worker thread pool.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write augmented image/mask pairs for one or more epochs, plus a
    /// plans.jsonl replay log.
    Augment(commands::augment::AugmentArgs),
    /// Search an augmentation strategy space against an evaluator.
    #[command(after_help = EXTERNAL_PROTOCOL_HELP)]
    Search(commands::search::SearchArgs),
    /// Summarize a trial ledger: best config, top-3 mean, marginals.
    Analyze(commands::analyze::AnalyzeArgs),
    /// Render a before/after panel for one operation at one magnitude.
    Preview(commands::preview::PreviewArgs),
    /// Generate a synthetic segmentation dataset.
    Synth(commands::synth::SynthArgs),
}

/// Fallback values loadable from the global --config file.
#[derive(Debug, Default, serde::Deserialize)]
struct FileConfig {
    seed: Option<u64>,
    jobs: Option<usize>,
}

fn main() {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let code = match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

/// CLI-level error carrying its exit code.
#[derive(Debug)]
pub(crate) struct CliError {
    message: String,
    code: i32,
}

impl CliError {
    pub(crate) fn config(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: 2,
        }
    }

    pub(crate) fn data(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: 3,
        }
    }

    pub(crate) fn protocol(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: 4,
        }
    }

    fn exit_code(&self) -> i32 {
        self.code
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<smartaug::Error> for CliError {
    fn from(e: smartaug::Error) -> Self {
        let code = match e.category() {
            ErrorCategory::Config => 2,
            ErrorCategory::Data => 3,
            ErrorCategory::Protocol => 4,
        };
        CliError {
            message: e.to_string(),
            code,
        }
    }
}

pub(crate) type CliResult = Result<(), CliError>;

fn run(cli: Cli) -> CliResult {
    let file_cfg: FileConfig = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let seed = cli.seed.or(file_cfg.seed);
    if let Some(jobs) = cli.jobs.or(file_cfg.jobs) {
        if let Err(e) = smartaug::set_worker_threads(jobs) {
            log::warn!("{e}");
        }
    }
    match cli.command {
        Command::Augment(args) => commands::augment::run(args, seed),
        Command::Search(args) => commands::search::run(args, seed),
        Command::Analyze(args) => commands::analyze::run(args),
        Command::Preview(args) => commands::preview::run(args),
        Command::Synth(args) => commands::synth::run(args, seed),
    }
}
