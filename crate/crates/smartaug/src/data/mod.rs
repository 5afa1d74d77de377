//! Dataset ingestion, preprocessing and seeded epoch streams.
//!
//! Datasets live on disk as `root/{train,val,test}/{images,masks}` with
//! matching PNG filenames; `root/dataset.json` may pin the class count and
//! ignore index (otherwise they are inferred by scanning the masks).
//!
//! Per training epoch, [`EpochStream`] yields every item of a split once in
//! seeded-shuffled order: preprocess (random crop or downsize), sample an
//! [`AugPlan`] for the epoch, apply it. The random stream of an item depends
//! only on (seed, epoch, item index), so items can be computed in parallel
//! or replayed individually without changing any output.

pub mod synthetic;

use crate::error::{Error, Result};
use crate::raster::{
    apply_plan, resize_bilinear, resize_nearest, AugPlan, LabelMask, Raster, DEFAULT_IGNORE_INDEX,
};
use crate::rng;
use crate::strategy::{EpochClock, StrategyConfig};
use rand::Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Dataset split names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Result<Split> {
        Split::ALL
            .iter()
            .copied()
            .find(|sp| sp.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown split `{s}`")))
    }
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One validated image/mask pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestItem {
    pub image: PathBuf,
    pub mask: PathBuf,
    pub split: Split,
    pub width: u32,
    pub height: u32,
}

impl ManifestItem {
    /// File stem shared by the image and mask.
    pub fn name(&self) -> String {
        self.image
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    }

    pub fn load(&self, ignore_index: u8) -> Result<(Raster, LabelMask)> {
        let image = Raster::read_png(&self.image)?;
        let mask = LabelMask::read_png(&self.mask, ignore_index)?;
        mask.check_paired(&image)?;
        Ok((image, mask))
    }
}

/// Optional `dataset.json` sidecar pinning class count and ignore index.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub k: usize,
    #[serde(default = "default_ignore")]
    pub ignore_index: u8,
}

fn default_ignore() -> u8 {
    DEFAULT_IGNORE_INDEX
}

/// A validated dataset: item list, class count, ignore index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub root: PathBuf,
    items: Vec<ManifestItem>,
    pub k: usize,
    pub ignore_index: u8,
}

impl DatasetManifest {
    /// Scans and validates `root/{train,val,test}/{images,masks}`.
    ///
    /// Every image must have a mask of the same filename and dimensions and
    /// every file must decode; all problems are reported together. Items are
    /// ordered by split (train, val, test) then lexicographically by name.
    pub fn load(root: &Path) -> Result<Self> {
        let info: Option<DatasetInfo> = {
            let p = root.join("dataset.json");
            if p.exists() {
                let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
                Some(
                    serde_json::from_str(&text)
                        .map_err(|e| Error::json(p.display().to_string(), e))?,
                )
            } else {
                None
            }
        };
        let ignore_index = info
            .as_ref()
            .map(|i| i.ignore_index)
            .unwrap_or(DEFAULT_IGNORE_INDEX);

        let mut items = Vec::new();
        let mut problems = Vec::new();
        let mut max_label = 0u8;
        for split in Split::ALL {
            let image_dir = root.join(split.as_str()).join("images");
            let mask_dir = root.join(split.as_str()).join("masks");
            let images = list_pngs(&image_dir)?;
            let masks = list_pngs(&mask_dir)?;
            if split == Split::Train && images.is_empty() {
                return Err(Error::EmptySplit("train".into()));
            }
            let mask_names: BTreeMap<String, PathBuf> =
                masks.iter().map(|p| (file_name(p), p.clone())).collect();
            let image_names: std::collections::BTreeSet<String> =
                images.iter().map(|p| file_name(p)).collect();
            for m in &masks {
                if !image_names.contains(&file_name(m)) {
                    problems.push(format!("{}: mask has no matching image", m.display()));
                }
            }
            for image in images {
                let name = file_name(&image);
                let Some(mask) = mask_names.get(&name) else {
                    problems.push(format!("{}: image has no matching mask", image.display()));
                    continue;
                };
                let img = match Raster::read_png(&image) {
                    Ok(i) => i,
                    Err(e) => {
                        problems.push(e.to_string());
                        continue;
                    }
                };
                let msk = match LabelMask::read_png(mask, ignore_index) {
                    Ok(m) => m,
                    Err(e) => {
                        problems.push(e.to_string());
                        continue;
                    }
                };
                if img.width() != msk.width() || img.height() != msk.height() {
                    problems.push(format!(
                        "{} is {}x{} but {} is {}x{}",
                        image.display(),
                        img.width(),
                        img.height(),
                        mask.display(),
                        msk.width(),
                        msk.height()
                    ));
                    continue;
                }
                for &l in msk.labels() {
                    if l != ignore_index {
                        max_label = max_label.max(l);
                    }
                }
                items.push(ManifestItem {
                    image,
                    mask: mask.clone(),
                    split,
                    width: img.width(),
                    height: img.height(),
                });
            }
        }
        if !problems.is_empty() {
            return Err(Error::ManifestErrors(problems));
        }
        let k = match info {
            Some(i) => i.k,
            None => max_label as usize + 1,
        };
        Ok(DatasetManifest {
            root: root.to_path_buf(),
            items,
            k,
            ignore_index,
        })
    }

    pub fn items(&self) -> &[ManifestItem] {
        &self.items
    }

    pub fn split_items(&self, split: Split) -> Vec<&ManifestItem> {
        self.items.iter().filter(|i| i.split == split).collect()
    }
}

fn list_pngs(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.exists() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("png"))
        {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Crop-or-downsize preprocessing to a fixed target resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreprocessSpec {
    pub target: (u32, u32),
    /// Probability of the crop branch; the rest downsizes.
    #[serde(default = "default_crop_probability")]
    pub crop_probability: f64,
}

fn default_crop_probability() -> f64 {
    0.5
}

impl PreprocessSpec {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        let spec = PreprocessSpec {
            target: (width, height),
            crop_probability: 0.5,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let (w, h) = self.target;
        if w == 0 || h == 0 || w > 4096 || h > 4096 {
            return Err(Error::InvalidConfig(format!(
                "preprocess target {w}x{h} outside [1, 4096] per side"
            )));
        }
        if !(self.crop_probability.is_finite() && (0.0..=1.0).contains(&self.crop_probability)) {
            return Err(Error::InvalidConfig(format!(
                "crop probability {} outside [0, 1]",
                self.crop_probability
            )));
        }
        Ok(())
    }
}

/// The resolved preprocessing decision, recorded for replay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum PreprocessRecord {
    Crop {
        x: u32,
        y: u32,
        width: u32,
        height: u32,
    },
    Downsize {
        width: u32,
        height: u32,
    },
}

/// Draws the crop-or-downsize decision and applies it.
///
/// The crop branch picks a uniform valid offset; sources smaller than the
/// target fall back to the downsize branch. Runs before any augmentation.
pub fn preprocess(
    image: &Raster,
    mask: &LabelMask,
    spec: &PreprocessSpec,
    rng: &mut impl Rng,
) -> Result<(Raster, LabelMask, PreprocessRecord)> {
    mask.check_paired(image)?;
    let (tw, th) = spec.target;
    let var: f64 = rng.random();
    let crop_branch = var < spec.crop_probability;
    if crop_branch {
        if image.width() >= tw && image.height() >= th {
            let x = rng.random_range(0..=image.width() - tw);
            let y = rng.random_range(0..=image.height() - th);
            let record = PreprocessRecord::Crop {
                x,
                y,
                width: tw,
                height: th,
            };
            let (i, m) = apply_preprocess_record(image, mask, &record)?;
            return Ok((i, m, record));
        }
        log::warn!(
            "crop target {tw}x{th} larger than source {}x{}; falling back to downsize",
            image.width(),
            image.height()
        );
    }
    let record = PreprocessRecord::Downsize {
        width: tw,
        height: th,
    };
    let (i, m) = apply_preprocess_record(image, mask, &record)?;
    Ok((i, m, record))
}

/// Replays a recorded preprocessing decision; bit-deterministic.
pub fn apply_preprocess_record(
    image: &Raster,
    mask: &LabelMask,
    record: &PreprocessRecord,
) -> Result<(Raster, LabelMask)> {
    match *record {
        PreprocessRecord::Crop {
            x,
            y,
            width,
            height,
        } => {
            if x + width > image.width() || y + height > image.height() {
                return Err(Error::InvalidConfig(format!(
                    "crop {width}x{height}+{x}+{y} outside source {}x{}",
                    image.width(),
                    image.height()
                )));
            }
            let ch = image.channels();
            let mut data = Vec::with_capacity((width * height * ch) as usize);
            let mut labels = Vec::with_capacity((width * height) as usize);
            for yy in y..y + height {
                for xx in x..x + width {
                    for c in 0..ch {
                        data.push(image.get(xx, yy, c));
                    }
                    labels.push(mask.get(xx, yy));
                }
            }
            Ok((
                Raster::new(width, height, ch, data)?,
                LabelMask::new(width, height, labels, mask.ignore_index())?,
            ))
        }
        PreprocessRecord::Downsize { width, height } => Ok((
            resize_bilinear(image, width, height),
            resize_nearest(mask, width, height),
        )),
    }
}

/// One line of an augmentation replay log (`plans.jsonl`): everything
/// needed to reproduce a written pair from its source item, bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub epoch: u64,
    /// Item index within its split (manifest order).
    pub index: usize,
    /// File stem of the source pair.
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preprocess: Option<PreprocessRecord>,
    pub plan: AugPlan,
}

impl PlanRecord {
    /// Replays the recorded preprocess decision and plan on a source pair.
    pub fn replay(&self, image: &Raster, mask: &LabelMask) -> Result<(Raster, LabelMask)> {
        let (pre_img, pre_mask) = match &self.preprocess {
            Some(record) => apply_preprocess_record(image, mask, record)?,
            None => (image.clone(), mask.clone()),
        };
        apply_plan(&self.plan, &pre_img, &pre_mask)
    }
}

/// One fully processed training example.
#[derive(Debug, Clone)]
pub struct StreamItem {
    /// Stable index of the item within its split (manifest order).
    pub index: usize,
    /// File stem, empty for in-memory items.
    pub name: String,
    pub image: Raster,
    pub mask: LabelMask,
    pub preprocess: Option<PreprocessRecord>,
    pub plan: AugPlan,
}

/// Preprocesses and augments one item with its (seed, epoch, index) stream.
pub fn process_item(
    image: &Raster,
    mask: &LabelMask,
    pre: Option<&PreprocessSpec>,
    strategy: &StrategyConfig,
    clock: &EpochClock,
    seed: u64,
    index: usize,
) -> Result<(Raster, LabelMask, Option<PreprocessRecord>, AugPlan)> {
    let mut rng = rng::stream(seed, &[clock.epoch(), index as u64]);
    let (pre_img, pre_mask, record) = match pre {
        Some(spec) => {
            let (i, m, r) = preprocess(image, mask, spec, &mut rng)?;
            (i, m, Some(r))
        }
        None => (image.clone(), mask.clone(), None),
    };
    let plan = strategy.sample_plan(clock, &mut rng);
    let (img, msk) = apply_plan(&plan, &pre_img, &pre_mask)?;
    Ok((img, msk, record, plan))
}

/// One epoch over a dataset split: every item once, seeded-shuffled order.
pub struct EpochStream<'a> {
    manifest: &'a DatasetManifest,
    items: Vec<&'a ManifestItem>,
    order: Vec<usize>,
    pre: Option<PreprocessSpec>,
    strategy: &'a StrategyConfig,
    clock: EpochClock,
    seed: u64,
}

impl<'a> EpochStream<'a> {
    pub fn new(
        manifest: &'a DatasetManifest,
        split: Split,
        pre: Option<PreprocessSpec>,
        strategy: &'a StrategyConfig,
        clock: EpochClock,
        seed: u64,
    ) -> Result<Self> {
        let items = manifest.split_items(split);
        if items.is_empty() {
            return Err(Error::EmptySplit(split.to_string()));
        }
        if let Some(p) = &pre {
            p.validate()?;
        }
        strategy.validate()?;
        // The shuffle gets its own stream, disjoint from item streams.
        let mut order: Vec<usize> = (0..items.len()).collect();
        let mut shuffle_rng = rng::stream(seed, &[clock.epoch(), u64::MAX]);
        for i in (1..order.len()).rev() {
            let j = shuffle_rng.random_range(0..=i);
            order.swap(i, j);
        }
        Ok(EpochStream {
            manifest,
            items,
            order,
            pre,
            strategy,
            clock,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Computes the item at shuffled position `pos`; independent of any
    /// other position.
    pub fn item(&self, pos: usize) -> Result<StreamItem> {
        let index = self.order[pos];
        let item = self.items[index];
        let (image, mask) = item.load(self.manifest.ignore_index)?;
        let (img, msk, record, plan) = process_item(
            &image,
            &mask,
            self.pre.as_ref(),
            self.strategy,
            &self.clock,
            self.seed,
            index,
        )?;
        Ok(StreamItem {
            index,
            name: item.name(),
            image: img,
            mask: msk,
            preprocess: record,
            plan,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = Result<StreamItem>> + '_ {
        (0..self.len()).map(move |pos| self.item(pos))
    }

    /// Materializes the whole epoch, in stream order. Computed in parallel
    /// when the `parallel` feature is enabled; the output is identical
    /// either way.
    pub fn collect_all(&self) -> Result<Vec<StreamItem>> {
        #[cfg(feature = "parallel")]
        {
            (0..self.len())
                .into_par_iter()
                .map(|pos| self.item(pos))
                .collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            self.iter().collect()
        }
    }
}

/// A dataset loaded into memory, the form the proxy evaluator consumes.
#[derive(Debug, Clone)]
pub struct MemoryDataset {
    pub train: Vec<(Raster, LabelMask)>,
    pub val: Vec<(Raster, LabelMask)>,
    pub k: usize,
    pub ignore_index: u8,
}

impl MemoryDataset {
    pub fn from_manifest(manifest: &DatasetManifest) -> Result<Self> {
        let load_split = |split: Split| -> Result<Vec<(Raster, LabelMask)>> {
            manifest
                .split_items(split)
                .into_iter()
                .map(|item| item.load(manifest.ignore_index))
                .collect()
        };
        Ok(MemoryDataset {
            train: load_split(Split::Train)?,
            val: load_split(Split::Val)?,
            k: manifest.k,
            ignore_index: manifest.ignore_index,
        })
    }
}
