//! The built-in proxy evaluator.
//!
//! A deliberately weak stand-in for full model training that makes strategy
//! search verifiable in seconds: per training epoch it augments the images
//! under the candidate strategy (the annealed strategy sees the epoch
//! clock), then runs a fixed number of full-batch gradient steps of a
//! weighted multinomial logistic regression on per-pixel features (channel
//! values, normalized coordinates, 3x3 local means). The score is mIoU on
//! the untouched validation split. It is a search testbed, not a claim of
//! equivalence to real segmentation training.
//!
//! Determinism: the score is a pure function of (config, dataset, seed).
//! Parallel runs accumulate per-image gradients in index order, so the
//! `parallel` feature never changes the result.

use super::{class_weights, miou, TrialEvaluator};
use crate::data::{process_item, MemoryDataset};
use crate::error::{Error, Result};
use crate::raster::{LabelMask, Raster};
use crate::strategy::{EpochClock, StrategyConfig};
#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Training-loop knobs; the defaults finish a trial in well under a second
/// on the bundled synthetic datasets.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ProxyOptions {
    pub epochs: u64,
    pub steps_per_epoch: u32,
    pub learning_rate: f64,
}

impl Default for ProxyOptions {
    fn default() -> Self {
        ProxyOptions {
            epochs: 3,
            steps_per_epoch: 40,
            learning_rate: 2.0,
        }
    }
}

/// Scores strategies by training a linear pixel classifier.
pub struct ProxyEvaluator {
    data: MemoryDataset,
    opts: ProxyOptions,
    class_w: Vec<f64>,
    feat_dim: usize,
}

impl ProxyEvaluator {
    pub fn new(data: MemoryDataset, opts: ProxyOptions) -> Result<Self> {
        if data.train.is_empty() || data.val.is_empty() {
            return Err(Error::EmptyInput(
                "proxy evaluator needs non-empty train and val splits".into(),
            ));
        }
        if data.k < 2 {
            return Err(Error::InvalidConfig(format!(
                "proxy evaluator needs k >= 2 classes, got {}",
                data.k
            )));
        }
        let channels = data.train[0].0.channels();
        for (img, mask) in data.train.iter().chain(&data.val) {
            if img.channels() != channels {
                return Err(Error::InvalidConfig(
                    "proxy evaluator needs a uniform channel count".into(),
                ));
            }
            mask.check_paired(img)?;
        }
        let train_masks: Vec<LabelMask> = data.train.iter().map(|(_, m)| m.clone()).collect();
        let class_w = class_weights(&train_masks, data.k)?;
        // channels + x + y + per-channel 3x3 mean + bias
        let feat_dim = channels as usize * 2 + 3;
        Ok(ProxyEvaluator {
            data,
            opts,
            class_w,
            feat_dim,
        })
    }

    pub fn dataset(&self) -> &MemoryDataset {
        &self.data
    }

    /// Per-pixel features for one image: raw channels / 255, x/(w-1),
    /// y/(h-1), clamped 3x3 box means / 255, constant bias.
    fn features(&self, image: &Raster) -> Vec<f64> {
        let (w, h, ch) = (image.width(), image.height(), image.channels());
        let d = self.feat_dim;
        let mut out = vec![0.0; w as usize * h as usize * d];
        for y in 0..h {
            for x in 0..w {
                let base = (y as usize * w as usize + x as usize) * d;
                let mut f = base;
                for c in 0..ch {
                    out[f] = image.get(x, y, c) as f64 / 255.0;
                    f += 1;
                }
                out[f] = if w > 1 {
                    x as f64 / (w - 1) as f64
                } else {
                    0.5
                };
                out[f + 1] = if h > 1 {
                    y as f64 / (h - 1) as f64
                } else {
                    0.5
                };
                f += 2;
                for c in 0..ch {
                    let mut acc = 0.0;
                    for dy in -1i64..=1 {
                        for dx in -1i64..=1 {
                            let sx = (x as i64 + dx).clamp(0, w as i64 - 1) as u32;
                            let sy = (y as i64 + dy).clamp(0, h as i64 - 1) as u32;
                            acc += image.get(sx, sy, c) as f64;
                        }
                    }
                    out[f] = acc / (9.0 * 255.0);
                    f += 1;
                }
                out[f] = 1.0;
            }
        }
        out
    }

    /// Gradient of the weighted cross-entropy over one image's scored
    /// pixels. Returns (gradient, weight mass).
    fn image_gradient(
        &self,
        weights: &[f64],
        feats: &[f64],
        labels: &[u8],
        ignore: u8,
    ) -> (Vec<f64>, f64) {
        let k = self.data.k;
        let d = self.feat_dim;
        let mut grad = vec![0.0; k * d];
        let mut mass = 0.0;
        let mut logits = vec![0.0; k];
        for (pix, &label) in labels.iter().enumerate() {
            if label == ignore {
                continue;
            }
            let wc = self.class_w[label as usize];
            if wc == 0.0 {
                continue;
            }
            let f = &feats[pix * d..(pix + 1) * d];
            let mut max = f64::NEG_INFINITY;
            for (c, l) in logits.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (j, &fj) in f.iter().enumerate() {
                    acc += weights[c * d + j] * fj;
                }
                *l = acc;
                max = max.max(acc);
            }
            let mut z = 0.0;
            for l in logits.iter_mut() {
                *l = (*l - max).exp();
                z += *l;
            }
            for c in 0..k {
                let p = logits[c] / z;
                let err = wc * (p - if c == label as usize { 1.0 } else { 0.0 });
                for (j, &fj) in f.iter().enumerate() {
                    grad[c * d + j] += err * fj;
                }
            }
            mass += wc;
        }
        (grad, mass)
    }

    fn predict(&self, weights: &[f64], image: &Raster) -> LabelMask {
        let k = self.data.k;
        let d = self.feat_dim;
        let feats = self.features(image);
        let pixels = image.width() as usize * image.height() as usize;
        let mut labels = Vec::with_capacity(pixels);
        for pix in 0..pixels {
            let f = &feats[pix * d..(pix + 1) * d];
            let mut best = 0usize;
            let mut best_score = f64::NEG_INFINITY;
            for c in 0..k {
                let mut acc = 0.0;
                for (j, &fj) in f.iter().enumerate() {
                    acc += weights[c * d + j] * fj;
                }
                if acc > best_score {
                    best_score = acc;
                    best = c;
                }
            }
            labels.push(best as u8);
        }
        LabelMask::new(
            image.width(),
            image.height(),
            labels,
            self.data.ignore_index,
        )
        .expect("constructed shape")
    }

    /// Trains on the augmented stream and scores validation mIoU.
    pub fn score(&self, cfg: &StrategyConfig, seed: u64) -> Result<f64> {
        cfg.validate()?;
        let k = self.data.k;
        let d = self.feat_dim;
        let mut weights = vec![0.0; k * d];
        for epoch in 0..self.opts.epochs {
            let clock = EpochClock::new(epoch, self.opts.epochs)?;
            // Augment every training item with its own (seed, epoch, index)
            // stream, in parallel when enabled; order is by item index.
            let process = |(index, (img, mask)): (usize, &(Raster, LabelMask))| -> Result<(Vec<f64>, Vec<u8>)> {
                let (aug_img, aug_mask, _, _) =
                    process_item(img, mask, None, cfg, &clock, seed, index)?;
                Ok((self.features(&aug_img), aug_mask.labels().to_vec()))
            };
            #[cfg(feature = "parallel")]
            let epoch_data: Vec<(Vec<f64>, Vec<u8>)> = self
                .data
                .train
                .par_iter()
                .enumerate()
                .map(process)
                .collect::<Result<_>>()?;
            #[cfg(not(feature = "parallel"))]
            let epoch_data: Vec<(Vec<f64>, Vec<u8>)> = self
                .data
                .train
                .iter()
                .enumerate()
                .map(process)
                .collect::<Result<_>>()?;

            for _ in 0..self.opts.steps_per_epoch {
                let per_image = |(feats, labels): &(Vec<f64>, Vec<u8>)| {
                    self.image_gradient(&weights, feats, labels, self.data.ignore_index)
                };
                #[cfg(feature = "parallel")]
                let parts: Vec<(Vec<f64>, f64)> = epoch_data.par_iter().map(per_image).collect();
                #[cfg(not(feature = "parallel"))]
                let parts: Vec<(Vec<f64>, f64)> = epoch_data.iter().map(per_image).collect();

                // Deterministic reduction: fixed image order.
                let mut grad = vec![0.0; k * d];
                let mut mass = 0.0;
                for (g, m) in parts {
                    for (acc, v) in grad.iter_mut().zip(&g) {
                        *acc += v;
                    }
                    mass += m;
                }
                if mass == 0.0 {
                    continue;
                }
                let step = self.opts.learning_rate / mass;
                for (w, g) in weights.iter_mut().zip(&grad) {
                    *w -= step * g;
                }
            }
        }
        let preds: Vec<LabelMask> = self
            .data
            .val
            .iter()
            .map(|(img, _)| self.predict(&weights, img))
            .collect();
        let gts: Vec<LabelMask> = self.data.val.iter().map(|(_, m)| m.clone()).collect();
        Ok(miou(&preds, &gts, k)?.miou)
    }
}

impl TrialEvaluator for ProxyEvaluator {
    fn evaluate(&self, cfg: &StrategyConfig, seed: u64) -> std::result::Result<f64, String> {
        match self.score(cfg, seed) {
            Ok(s) if s.is_finite() => Ok(s),
            Ok(s) => Err(format!("proxy produced non-finite score {s}")),
            Err(e) => Err(e.to_string()),
        }
    }
}
