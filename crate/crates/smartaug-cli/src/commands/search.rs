//! `smartaug search`: suggest-evaluate-record until the budget is spent.

use crate::{CliError, CliResult};
use clap::Args;
use smartaug::data::synthetic::{build_memory_dataset, SyntheticFlavor, SyntheticSpec};
use smartaug::data::{DatasetManifest, MemoryDataset};
use smartaug::eval::{
    ExternalEvaluator, ExternalSpec, ProxyEvaluator, ProxyOptions, TrialEvaluator,
};
use smartaug::search::{
    render_text, run_search, summarize_ledger, SearchConfig, SearchMethod, SearchSpace,
};
use std::path::PathBuf;

#[derive(Args)]
pub struct SearchArgs {
    /// Strategy space: smart | rand.
    #[arg(long)]
    space: String,

    /// Search method: bo | random | grid (grid requires --space rand).
    #[arg(long)]
    method: String,

    /// Trial budget; resuming an existing ledger runs only the remainder.
    #[arg(long, default_value_t = 50)]
    budget: u64,

    /// Trial evaluator: `proxy` or `external:<command>`.
    #[arg(long, default_value = "proxy")]
    evaluator: String,

    /// Trial ledger path (JSON Lines, append-only).
    #[arg(long)]
    ledger: PathBuf,

    /// Dataset root for the proxy evaluator. Without it a built-in
    /// synthetic dataset is generated in memory.
    #[arg(long)]
    data: Option<PathBuf>,

    /// Record real per-trial wall time in the ledger. Off by default so
    /// ledger bytes stay reproducible run-to-run.
    #[arg(long)]
    timing: bool,
}

/// The in-memory dataset used when `--evaluator proxy` has no `--data`.
/// Fixed generator seed: the search `--seed` drives trial streams only.
fn builtin_dataset() -> smartaug::Result<MemoryDataset> {
    build_memory_dataset(&SyntheticSpec {
        images: 12,
        width: 32,
        height: 24,
        classes: 3,
        shapes_per_image: 3,
        flavor: SyntheticFlavor::ColorSignal,
        noise: 12,
        seed: 7,
    })
}

pub fn run(args: SearchArgs, seed: Option<u64>) -> CliResult {
    let space = SearchSpace::parse(&args.space)?;
    let method = SearchMethod::parse(&args.method)?;
    let mut cfg = SearchConfig::new(method, space, args.budget, seed.unwrap_or(0))?;
    cfg.measure_time = args.timing;

    let evaluator: Box<dyn TrialEvaluator> = if args.evaluator == "proxy" {
        let dataset = match &args.data {
            Some(root) => MemoryDataset::from_manifest(&DatasetManifest::load(root)?)?,
            None => builtin_dataset()?,
        };
        Box::new(ProxyEvaluator::new(dataset, ProxyOptions::default())?)
    } else if let Some(command) = args.evaluator.strip_prefix("external:") {
        let spec = ExternalSpec::from_command_line(command).ok_or_else(|| {
            CliError::config("`external:` needs a command, e.g. external:python3 train.py")
        })?;
        Box::new(ExternalEvaluator::new(spec))
    } else {
        return Err(CliError::config(format!(
            "unknown evaluator `{}`; use `proxy` or `external:<command>`",
            args.evaluator
        )));
    };

    let ledger = run_search(&cfg, evaluator.as_ref(), &args.ledger)?;
    match summarize_ledger(ledger.records()) {
        // Partial failures are normal long-running-search behavior; the
        // summary notes them and the exit stays 0.
        Ok(report) => {
            print!("{}", render_text(&report));
            Ok(())
        }
        // Every single trial failing means the evaluator never once spoke
        // the protocol: report it as a protocol failure.
        Err(smartaug::Error::EmptyLedger) => Err(CliError::protocol(format!(
            "all {} trials failed; see {} for per-trial diagnostics",
            ledger.len(),
            args.ledger.display()
        ))),
        Err(e) => Err(e.into()),
    }
}
