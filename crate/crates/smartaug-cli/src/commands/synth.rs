//! `smartaug synth`: write a synthetic segmentation dataset.

use crate::{CliError, CliResult};
use clap::Args;
use smartaug::data::synthetic::{write_dataset, SyntheticFlavor, SyntheticSpec};
use std::path::PathBuf;

#[derive(Args)]
pub struct SynthArgs {
    /// Output dataset root.
    #[arg(long)]
    out: PathBuf,

    /// Full generator spec as a JSON file; overrides the individual flags.
    #[arg(long)]
    spec: Option<PathBuf>,

    /// Total image count (split 70/15/15).
    #[arg(long, default_value_t = 20)]
    images: u32,

    /// Canvas size, e.g. 64x48.
    #[arg(long, default_value = "64x48")]
    size: String,

    /// Class count including background.
    #[arg(long, default_value_t = 3)]
    classes: usize,

    /// Shapes per image.
    #[arg(long, default_value_t = 3)]
    shapes: u32,

    /// Flavor: color_signal | color_nuisance.
    #[arg(long, default_value = "color_signal")]
    flavor: String,

    /// Per-pixel channel noise amplitude.
    #[arg(long, default_value_t = 12)]
    noise: u8,
}

pub fn run(args: SynthArgs, seed: Option<u64>) -> CliResult {
    let spec = match &args.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
            let mut spec: SyntheticSpec = serde_json::from_str(&text)
                .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            spec
        }
        None => {
            let (width, height) = super::parse_size(&args.size)?;
            let flavor = match args.flavor.as_str() {
                "color_signal" => SyntheticFlavor::ColorSignal,
                "color_nuisance" => SyntheticFlavor::ColorNuisance,
                other => {
                    return Err(CliError::config(format!(
                        "unknown flavor `{other}`; use color_signal or color_nuisance"
                    )))
                }
            };
            SyntheticSpec {
                images: args.images,
                width,
                height,
                classes: args.classes,
                shapes_per_image: args.shapes,
                flavor,
                noise: args.noise,
                seed: seed.unwrap_or(0),
            }
        }
    };
    let manifest = write_dataset(&spec, &args.out)?;
    println!(
        "wrote {} items (k={}) to {}",
        manifest.items().len(),
        manifest.k,
        args.out.display()
    );
    Ok(())
}
