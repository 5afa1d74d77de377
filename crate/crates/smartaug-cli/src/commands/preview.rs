//! `smartaug preview`: before/after panel for one op at one magnitude,
//! with the mask blended over both sides (fill regions show up magenta).

use crate::{CliError, CliResult};
use clap::Args;
use smartaug::raster::{
    apply_plan, AugPlan, LabelMask, Magnitude, OpName, PlanStep, Raster, Sign, DEFAULT_IGNORE_INDEX,
};
use std::path::PathBuf;

#[derive(Args)]
pub struct PreviewArgs {
    /// Input image PNG.
    #[arg(long)]
    image: PathBuf,

    /// Input mask PNG (pixel value = class index).
    #[arg(long)]
    mask: PathBuf,

    /// Operation name, e.g. Rotate, Solarize, Identity.
    #[arg(long)]
    op: String,

    /// Magnitude in [0, 30].
    #[arg(long, default_value_t = 15)]
    magnitude: i64,

    /// Direction for signed ops: 1 or -1.
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    sign: i8,

    /// Output panel PNG.
    #[arg(long)]
    out: PathBuf,
}

const OVERLAY: [[u8; 3]; 8] = [
    [0, 0, 0],
    [255, 60, 60],
    [60, 220, 60],
    [80, 80, 255],
    [250, 230, 60],
    [60, 230, 230],
    [230, 130, 40],
    [160, 60, 230],
];
const IGNORE_COLOR: [u8; 3] = [255, 0, 255];

pub fn run(args: PreviewArgs) -> CliResult {
    let op = OpName::parse(&args.op).map_err(|_| {
        let names: Vec<&str> = OpName::ALL.iter().map(|o| o.as_str()).collect();
        CliError::config(format!(
            "unknown op `{}`; valid names: {}",
            args.op,
            names.join(", ")
        ))
    })?;
    let magnitude = u8::try_from(args.magnitude)
        .ok()
        .and_then(|v| Magnitude::new(v).ok())
        .ok_or_else(|| CliError::config(format!("magnitude {} outside [0, 30]", args.magnitude)))?;
    let sign = Sign::try_from(args.sign)?;

    let image = Raster::read_png(&args.image)?;
    let mask = LabelMask::read_png(&args.mask, DEFAULT_IGNORE_INDEX)?;
    let plan = AugPlan::of_steps(vec![PlanStep::Op {
        name: op,
        magnitude,
        sign,
    }]);
    let (aug_img, aug_mask) = apply_plan(&plan, &image, &mask)?;

    let before = shade(&image, &mask);
    let after = shade(&aug_img, &aug_mask);
    let panel = side_by_side(&before, &after);
    panel.write_png(&args.out)?;
    println!(
        "wrote {} ({} magnitude {} sign {:+})",
        args.out.display(),
        op,
        magnitude,
        i8::from(sign)
    );
    Ok(())
}

/// Blends the class overlay into an RGB copy of the image.
fn shade(image: &Raster, mask: &LabelMask) -> Raster {
    let (w, h) = (image.width(), image.height());
    let mut out = Raster::filled(w, h, 3, 0).expect("small panel");
    for y in 0..h {
        for x in 0..w {
            let rgb = match image.channels() {
                1 => [image.get(x, y, 0); 3],
                _ => [image.get(x, y, 0), image.get(x, y, 1), image.get(x, y, 2)],
            };
            let label = mask.get(x, y);
            let tint = if label == mask.ignore_index() {
                Some(IGNORE_COLOR)
            } else if label as usize != 0 {
                Some(OVERLAY[label as usize % OVERLAY.len()])
            } else {
                None
            };
            for c in 0..3 {
                let v = match tint {
                    Some(t) => ((rgb[c as usize] as u16 + t[c as usize] as u16) / 2) as u8,
                    None => rgb[c as usize],
                };
                out.set(x, y, c, v);
            }
        }
    }
    out
}

/// Joins two same-height panels with a thin separator column.
fn side_by_side(left: &Raster, right: &Raster) -> Raster {
    let gap = 4u32;
    let w = left.width() + gap + right.width();
    let h = left.height().max(right.height());
    let mut out = Raster::filled(w, h, 3, 128).expect("small panel");
    for (dst_x, src) in [(0, left), (left.width() + gap, right)] {
        for y in 0..src.height() {
            for x in 0..src.width() {
                for c in 0..3 {
                    out.set(dst_x + x, y, c, src.get(x, y, c));
                }
            }
        }
    }
    out
}
