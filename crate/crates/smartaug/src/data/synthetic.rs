//! Synthetic segmentation datasets for tests and desk-scale search.
//!
//! Two flavors with opposite augmentation preferences:
//!
//! * `color_signal` — random rectangles and discs whose colors identify the
//!   class over a noisy background. Color is the discriminative feature, so
//!   heavy color augmentation destroys the signal.
//! * `color_nuisance` — horizontal class bands (position is the true
//!   signal); the training split tints each band with a class-correlated
//!   color but evaluation splits rotate the tints, so a model that trusts
//!   color is misled and heavy color augmentation helps.

use super::{DatasetManifest, MemoryDataset, Split};
use crate::error::{Error, Result};
use crate::raster::{LabelMask, Raster, DEFAULT_IGNORE_INDEX};
use crate::rng;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Parameters of the synthetic generator; serialized as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    /// Total image count, split 70/15/15 into train/val/test.
    pub images: u32,
    pub width: u32,
    pub height: u32,
    /// Class count including the background class 0. At most 9.
    pub classes: usize,
    #[serde(default = "default_shapes_per_image")]
    pub shapes_per_image: u32,
    #[serde(default)]
    pub flavor: SyntheticFlavor,
    /// Uniform per-pixel channel noise amplitude.
    #[serde(default = "default_noise")]
    pub noise: u8,
    #[serde(default)]
    pub seed: u64,
}

fn default_shapes_per_image() -> u32 {
    3
}

fn default_noise() -> u8 {
    12
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticFlavor {
    #[default]
    ColorSignal,
    ColorNuisance,
}

/// Class base colors; class 0 is the dark noisy background.
const PALETTE: [[u8; 3]; 9] = [
    [40, 40, 40],
    [230, 60, 60],
    [60, 200, 60],
    [60, 60, 230],
    [230, 230, 60],
    [60, 220, 220],
    [220, 60, 220],
    [240, 140, 40],
    [140, 40, 240],
];

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.images < 3 {
            return Err(Error::InvalidConfig(format!(
                "need at least 3 images for the three splits, got {}",
                self.images
            )));
        }
        if self.classes < 2 || self.classes > PALETTE.len() - 1 {
            return Err(Error::InvalidConfig(format!(
                "class count {} outside [2, {}]",
                self.classes,
                PALETTE.len() - 1
            )));
        }
        let min_side = self.width.min(self.height);
        if min_side < 8 {
            return Err(Error::CanvasTooSmall {
                width: self.width,
                height: self.height,
                min: 8,
            });
        }
        if self.noise > 60 {
            return Err(Error::InvalidConfig(format!(
                "noise amplitude {} too large (max 60)",
                self.noise
            )));
        }
        Ok(())
    }

    /// 70/15/15 split sizes; train and val are never empty.
    pub fn split_sizes(&self) -> (u32, u32, u32) {
        let n = self.images;
        let train = (n * 70 / 100).max(1);
        let val = (n * 15 / 100).max(1).min(n - train);
        let test = n - train - val;
        (train, val, test)
    }

    fn split_of(&self, index: u32) -> Split {
        let (train, val, _) = self.split_sizes();
        if index < train {
            Split::Train
        } else if index < train + val {
            Split::Val
        } else {
            Split::Test
        }
    }
}

fn noisy(base: u8, noise: u8, rng: &mut impl Rng) -> u8 {
    let n = noise as i32;
    let v = base as i32 + rng.random_range(-n..=n);
    v.clamp(0, 255) as u8
}

fn paint_pixel(img: &mut Raster, x: u32, y: u32, color: [u8; 3], noise: u8, rng: &mut impl Rng) {
    for c in 0..3 {
        img.set(x, y, c, noisy(color[c as usize], noise, rng));
    }
}

fn generate_color_signal(spec: &SyntheticSpec, index: u32) -> (Raster, LabelMask) {
    let (w, h) = (spec.width, spec.height);
    let mut rng = rng::stream(spec.seed, &[index as u64]);
    let mut img = Raster::filled(w, h, 3, 0).unwrap();
    let mut mask = LabelMask::filled(w, h, 0, DEFAULT_IGNORE_INDEX).unwrap();
    for y in 0..h {
        for x in 0..w {
            paint_pixel(&mut img, x, y, PALETTE[0], spec.noise, &mut rng);
        }
    }
    let min_side = w.min(h);
    let min_r = (min_side / 8).max(2);
    let max_r = (min_side / 4).max(min_r + 1);
    for j in 0..spec.shapes_per_image {
        // Cycle classes so every class appears when shapes >= classes - 1.
        let class = 1 + (j as usize % (spec.classes - 1));
        let disc: bool = rng.random();
        let rx = rng.random_range(min_r..=max_r);
        let ry = if disc {
            rx
        } else {
            rng.random_range(min_r..=max_r)
        };
        let cx = rng.random_range(rx..w - rx);
        let cy = rng.random_range(ry..h - ry);
        for y in cy - ry..=cy + ry {
            for x in cx - rx..=cx + rx {
                let inside = if disc {
                    let dx = x as f64 - cx as f64;
                    let dy = y as f64 - cy as f64;
                    dx * dx + dy * dy <= (rx as f64) * (rx as f64)
                } else {
                    true
                };
                if inside {
                    paint_pixel(&mut img, x, y, PALETTE[class], spec.noise, &mut rng);
                    mask.set(x, y, class as u8);
                }
            }
        }
    }
    (img, mask)
}

fn generate_color_nuisance(spec: &SyntheticSpec, index: u32) -> (Raster, LabelMask) {
    let (w, h) = (spec.width, spec.height);
    let k = spec.classes;
    let mut rng = rng::stream(spec.seed, &[index as u64]);
    // Training images tint band c with palette color c+... identity shift;
    // evaluation images rotate the tints by a random nonzero shift so the
    // color-class correlation breaks between train and val/test.
    let shift = match spec.split_of(index) {
        Split::Train => 0,
        _ => rng.random_range(1..k),
    };
    let mut img = Raster::filled(w, h, 3, 0).unwrap();
    let mut mask = LabelMask::filled(w, h, 0, DEFAULT_IGNORE_INDEX).unwrap();
    for y in 0..h {
        let band = ((y as usize * k) / h as usize).min(k - 1);
        // Tints use the shape palette; k <= 8 keeps the rotation in range
        // and a nonzero shift can never wrap back to the identity tinting.
        let tint = PALETTE[1 + (band + shift) % k];
        for x in 0..w {
            paint_pixel(&mut img, x, y, tint, spec.noise, &mut rng);
            mask.set(x, y, band as u8);
        }
    }
    (img, mask)
}

/// Generates one image/mask pair; deterministic given (spec.seed, index).
pub fn generate_pair(spec: &SyntheticSpec, index: u32) -> (Raster, LabelMask) {
    match spec.flavor {
        SyntheticFlavor::ColorSignal => generate_color_signal(spec, index),
        SyntheticFlavor::ColorNuisance => generate_color_nuisance(spec, index),
    }
}

/// Builds the whole dataset in memory.
pub fn build_memory_dataset(spec: &SyntheticSpec) -> Result<MemoryDataset> {
    spec.validate()?;
    let mut train = Vec::new();
    let mut val = Vec::new();
    for i in 0..spec.images {
        let pair = generate_pair(spec, i);
        match spec.split_of(i) {
            Split::Train => train.push(pair),
            Split::Val => val.push(pair),
            Split::Test => {}
        }
    }
    Ok(MemoryDataset {
        train,
        val,
        k: spec.classes,
        ignore_index: DEFAULT_IGNORE_INDEX,
    })
}

/// Writes the dataset as PNG pairs under `root` plus a `dataset.json`
/// sidecar, then loads it back through the validating manifest loader.
/// Byte-identical for the same spec.
pub fn write_dataset(spec: &SyntheticSpec, root: &Path) -> Result<DatasetManifest> {
    spec.validate()?;
    for split in Split::ALL {
        for sub in ["images", "masks"] {
            let dir = root.join(split.as_str()).join(sub);
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
    }
    for i in 0..spec.images {
        let (img, mask) = generate_pair(spec, i);
        let split = spec.split_of(i);
        let name = format!("img_{i:04}.png");
        img.write_png(&root.join(split.as_str()).join("images").join(&name))?;
        mask.write_png(&root.join(split.as_str()).join("masks").join(&name))?;
    }
    let info = super::DatasetInfo {
        k: spec.classes,
        ignore_index: DEFAULT_IGNORE_INDEX,
    };
    let info_path = root.join("dataset.json");
    std::fs::write(
        &info_path,
        serde_json::to_string_pretty(&info).expect("serializable"),
    )
    .map_err(|e| Error::io(&info_path, e))?;
    DatasetManifest::load(root)
}
