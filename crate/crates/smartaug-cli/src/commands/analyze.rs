//! `smartaug analyze`: summarize a trial ledger.

use crate::{CliError, CliResult};
use clap::Args;
use smartaug::search::{render_text, summarize_ledger, Ledger};
use std::path::PathBuf;

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Trial ledger path.
    #[arg(long)]
    ledger: PathBuf,

    /// Optional JSON report output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: AnalyzeArgs) -> CliResult {
    let ledger = Ledger::load(&args.ledger)?;
    let report = summarize_ledger(ledger.records())?;
    print!("{}", render_text(&report));
    if let Some(out) = &args.out {
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::data(format!("encode report: {e}")))?;
        std::fs::write(out, json).map_err(|e| CliError::data(format!("{}: {e}", out.display())))?;
        println!("report written to {}", out.display());
    }
    Ok(())
}
