//! `smartaug augment`: run a strategy over a dataset split for N epochs,
//! writing PNG pairs under `out/epoch_<e>/` and a `plans.jsonl` replay log.

use crate::{CliError, CliResult};
use clap::Args;
use smartaug::data::{DatasetManifest, EpochStream, PlanRecord, PreprocessSpec, Split};
use smartaug::strategy::{EpochClock, StrategyConfig};
use std::io::Write;
use std::path::PathBuf;

#[derive(Args)]
pub struct AugmentArgs {
    /// Dataset root (train/val/test with images/ and masks/).
    #[arg(long)]
    data: PathBuf,

    /// Strategy config JSON file.
    #[arg(long)]
    strategy: PathBuf,

    /// Number of epochs to materialize.
    #[arg(long, default_value_t = 1)]
    epochs: u64,

    /// Output directory; must not already contain files.
    #[arg(long)]
    out: PathBuf,

    /// Split to augment.
    #[arg(long, default_value = "train")]
    split: String,

    /// Optional crop-or-downsize target, e.g. 128x128. Without it items
    /// pass through at native resolution.
    #[arg(long)]
    target: Option<String>,
}

pub fn run(args: AugmentArgs, seed: Option<u64>) -> CliResult {
    let manifest = DatasetManifest::load(&args.data)?;
    let strategy_text = std::fs::read_to_string(&args.strategy)
        .map_err(|e| CliError::config(format!("{}: {e}", args.strategy.display())))?;
    let mut strategy =
        StrategyConfig::from_json(&strategy_text).map_err(|e| CliError::config(e.to_string()))?;
    if let Some(s) = seed {
        strategy.seed = s;
    }
    let split = Split::parse(&args.split)?;
    let pre = match &args.target {
        Some(t) => {
            let (w, h) = super::parse_size(t)?;
            Some(PreprocessSpec::new(w, h)?)
        }
        None => None,
    };
    if args.epochs == 0 {
        return Err(CliError::config("--epochs must be at least 1"));
    }
    let occupied = args.out.exists()
        && std::fs::read_dir(&args.out)
            .map(|mut d| d.next().is_some())
            .unwrap_or(false);
    if occupied {
        return Err(CliError::config(format!(
            "output directory {} is not empty",
            args.out.display()
        )));
    }

    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::data(format!("{}: {e}", args.out.display())))?;
    match write_epochs(&args, &manifest, &strategy, split, pre) {
        Ok(written) => {
            println!(
                "wrote {written} augmented pairs over {} epoch(s) to {}",
                args.epochs,
                args.out.display()
            );
            Ok(())
        }
        Err(e) => {
            // No partial outputs on failure.
            let _ = std::fs::remove_dir_all(&args.out);
            Err(e)
        }
    }
}

fn write_epochs(
    args: &AugmentArgs,
    manifest: &DatasetManifest,
    strategy: &StrategyConfig,
    split: Split,
    pre: Option<PreprocessSpec>,
) -> Result<usize, CliError> {
    let plans_path = args.out.join("plans.jsonl");
    let mut plans = std::fs::File::create(&plans_path)
        .map_err(|e| CliError::data(format!("{}: {e}", plans_path.display())))?;
    let mut written = 0usize;
    for epoch in 0..args.epochs {
        let clock = EpochClock::new(epoch, args.epochs)?;
        let stream = EpochStream::new(manifest, split, pre, strategy, clock, strategy.seed)?;
        let items = stream.collect_all()?;
        let epoch_dir = args.out.join(format!("epoch_{epoch}"));
        let image_dir = epoch_dir.join("images");
        let mask_dir = epoch_dir.join("masks");
        for dir in [&image_dir, &mask_dir] {
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::data(format!("{}: {e}", dir.display())))?;
        }
        for item in items {
            let file = format!("{}.png", item.name);
            item.image.write_png(&image_dir.join(&file))?;
            item.mask.write_png(&mask_dir.join(&file))?;
            let record = PlanRecord {
                epoch,
                index: item.index,
                name: item.name,
                preprocess: item.preprocess,
                plan: item.plan,
            };
            let json = serde_json::to_string(&record)
                .map_err(|e| CliError::data(format!("plan log: {e}")))?;
            writeln!(plans, "{json}")
                .map_err(|e| CliError::data(format!("{}: {e}", plans_path.display())))?;
            written += 1;
        }
    }
    plans
        .flush()
        .map_err(|e| CliError::data(format!("{}: {e}", plans_path.display())))?;
    Ok(written)
}
