//! Trial evaluators and metrics.
//!
//! mIoU aggregates one confusion matrix over the whole mask sequence
//! (dataset-level, not per-image averaged); `ignore_index` pixels are never
//! scored. Class weights follow inverse pixel frequency, normalized over the
//! classes actually present.

pub mod external;
pub mod proxy;

pub use external::{ExternalEvaluator, ExternalSpec};
pub use proxy::{ProxyEvaluator, ProxyOptions};

use crate::error::{Error, Result};
use crate::raster::LabelMask;
use crate::strategy::StrategyConfig;

/// Something that can score a strategy configuration.
///
/// A failure is a per-trial diagnostic, not a crate error: searches record
/// it and continue.
pub trait TrialEvaluator: Sync {
    fn evaluate(&self, cfg: &StrategyConfig, seed: u64) -> std::result::Result<f64, String>;
}

impl<F> TrialEvaluator for F
where
    F: Fn(&StrategyConfig, u64) -> std::result::Result<f64, String> + Sync,
{
    fn evaluate(&self, cfg: &StrategyConfig, seed: u64) -> std::result::Result<f64, String> {
        self(cfg, seed)
    }
}

/// Class-by-class pixel counts; rows are ground truth, columns predictions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    k: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::EmptyInput("class count must be positive".into()));
        }
        Ok(ConfusionMatrix {
            k,
            counts: vec![0; k * k],
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn count(&self, gt: usize, pred: usize) -> u64 {
        self.counts[gt * self.k + pred]
    }

    /// Total number of scored pixels.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Accumulates one mask pair. Ground-truth `ignore_index` pixels are
    /// skipped; all other labels (including predictions) must be `< k`.
    pub fn record(&mut self, gt: &LabelMask, pred: &LabelMask) -> Result<()> {
        if gt.width() != pred.width() || gt.height() != pred.height() {
            return Err(Error::DimensionMismatch {
                iw: pred.width(),
                ih: pred.height(),
                mw: gt.width(),
                mh: gt.height(),
            });
        }
        for (&g, &p) in gt.labels().iter().zip(pred.labels()) {
            if g == gt.ignore_index() {
                continue;
            }
            if g as usize >= self.k {
                return Err(Error::LabelOutOfRange {
                    label: g,
                    k: self.k,
                });
            }
            if p as usize >= self.k {
                return Err(Error::LabelOutOfRange {
                    label: p,
                    k: self.k,
                });
            }
            self.counts[g as usize * self.k + p as usize] += 1;
        }
        Ok(())
    }

    /// Per-class IoU; classes that never occur in truth or prediction are
    /// excluded from the mean.
    pub fn result(&self) -> Result<EvalResult> {
        let total = self.total();
        if total == 0 {
            return Err(Error::NoScoredPixels);
        }
        let mut per_class = Vec::with_capacity(self.k);
        let mut sum = 0.0;
        let mut present = 0usize;
        for c in 0..self.k {
            let tp = self.count(c, c);
            let row: u64 = (0..self.k).map(|p| self.count(c, p)).sum();
            let col: u64 = (0..self.k).map(|g| self.count(g, c)).sum();
            let denom = row + col - tp;
            if denom == 0 {
                per_class.push(None);
            } else {
                let iou = tp as f64 / denom as f64;
                per_class.push(Some(iou));
                sum += iou;
                present += 1;
            }
        }
        Ok(EvalResult {
            miou: sum / present as f64,
            per_class_iou: per_class,
            pixels_scored: total,
        })
    }
}

/// The outcome of a segmentation evaluation.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EvalResult {
    pub miou: f64,
    /// `None` marks classes absent from both truth and prediction.
    pub per_class_iou: Vec<Option<f64>>,
    pub pixels_scored: u64,
}

/// Mean IoU over a sequence of mask pairs, from one aggregated dataset-level
/// confusion matrix.
pub fn miou(pred: &[LabelMask], gt: &[LabelMask], k: usize) -> Result<EvalResult> {
    if pred.is_empty() || gt.is_empty() {
        return Err(Error::EmptyInput("mask sequence".into()));
    }
    if pred.len() != gt.len() {
        return Err(Error::InvalidConfig(format!(
            "prediction sequence has {} masks but ground truth has {}",
            pred.len(),
            gt.len()
        )));
    }
    let mut cm = ConfusionMatrix::new(k)?;
    for (p, g) in pred.iter().zip(gt) {
        cm.record(g, p)?;
    }
    cm.result()
}

/// Inverse-frequency class weights:
/// `w_c = total_scored / (present_classes * count_c)` for present classes,
/// 0 for absent ones. A uniform label field gets all-ones weights.
pub fn class_weights(masks: &[LabelMask], k: usize) -> Result<Vec<f64>> {
    if masks.is_empty() {
        return Err(Error::EmptyInput("mask sequence".into()));
    }
    let mut counts = vec![0u64; k];
    for mask in masks {
        for &l in mask.labels() {
            if l == mask.ignore_index() {
                continue;
            }
            if l as usize >= k {
                return Err(Error::LabelOutOfRange { label: l, k });
            }
            counts[l as usize] += 1;
        }
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::NoScoredPixels);
    }
    let present = counts.iter().filter(|&&c| c > 0).count();
    Ok(counts
        .iter()
        .map(|&c| {
            if c == 0 {
                0.0
            } else {
                total as f64 / (present as f64 * c as f64)
            }
        })
        .collect())
}
