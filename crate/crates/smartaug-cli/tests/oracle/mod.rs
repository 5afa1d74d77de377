//! Independent brute-force oracles for the acceptance suite.
//!
//! Everything here is written as naive per-pixel loops and explicit set
//! computations, separate from the library's kernels. These loops are the
//! pixel-level specification the kernels must reproduce bit-exactly, so
//! coordinate and weight arithmetic is spelled out in the same canonical
//! form the contract fixes (inverse mapping about the image center,
//! bilinear corners in 00/10/01/11 order, round-half-away-from-zero).

use smartaug::raster::{LabelMask, Magnitude, OpName, PlanStep, Raster, Sign};
use std::collections::HashSet;

fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

fn luma(r: u8, g: u8, b: u8) -> f64 {
    0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64
}

fn gray_at(img: &Raster, x: u32, y: u32) -> f64 {
    if img.channels() == 1 {
        img.get(x, y, 0) as f64
    } else {
        luma(img.get(x, y, 0), img.get(x, y, 1), img.get(x, y, 2))
    }
}

fn map_pixels(img: &Raster, f: impl Fn(u32, u32, u32, u8) -> u8) -> Raster {
    let mut out = img.clone();
    for y in 0..img.height() {
        for x in 0..img.width() {
            for c in 0..img.channels() {
                out.set(x, y, c, f(x, y, c, img.get(x, y, c)));
            }
        }
    }
    out
}

fn oracle_brightness(img: &Raster, factor: f64) -> Raster {
    map_pixels(img, |_, _, _, p| to_u8(p as f64 * factor))
}

fn oracle_contrast(img: &Raster, factor: f64) -> Raster {
    let mut sum = 0.0;
    for y in 0..img.height() {
        for x in 0..img.width() {
            sum += gray_at(img, x, y);
        }
    }
    let mean = (sum / (img.width() as f64 * img.height() as f64)).round();
    map_pixels(img, |_, _, _, p| to_u8(mean + (p as f64 - mean) * factor))
}

fn oracle_color(img: &Raster, factor: f64) -> Raster {
    if img.channels() == 1 {
        return img.clone();
    }
    map_pixels(img, |x, y, _, p| {
        let gray = gray_at(img, x, y);
        to_u8(gray + (p as f64 - gray) * factor)
    })
}

fn oracle_sharpness(img: &Raster, factor: f64) -> Raster {
    if img.width() < 3 || img.height() < 3 {
        return img.clone();
    }
    map_pixels(img, |x, y, c, p| {
        if x == 0 || y == 0 || x == img.width() - 1 || y == img.height() - 1 {
            return p;
        }
        let mut acc = 0.0;
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                let weight = if dx == 0 && dy == 0 { 5.0 } else { 1.0 };
                acc += weight * img.get((x as i64 + dx) as u32, (y as i64 + dy) as u32, c) as f64;
            }
        }
        let smooth = acc / 13.0;
        to_u8(smooth + (p as f64 - smooth) * factor)
    })
}

fn oracle_solarize(img: &Raster, threshold: f64) -> Raster {
    map_pixels(
        img,
        |_, _, _, p| {
            if (p as f64) >= threshold {
                255 - p
            } else {
                p
            }
        },
    )
}

fn oracle_autocontrast(img: &Raster) -> Raster {
    let ch = img.channels();
    let mut bounds = vec![(255u8, 0u8); ch as usize];
    for y in 0..img.height() {
        for x in 0..img.width() {
            for c in 0..ch {
                let p = img.get(x, y, c);
                let (lo, hi) = &mut bounds[c as usize];
                *lo = (*lo).min(p);
                *hi = (*hi).max(p);
            }
        }
    }
    map_pixels(img, |_, _, c, p| {
        let (lo, hi) = bounds[c as usize];
        if hi > lo {
            to_u8((p - lo) as f64 * 255.0 / (hi - lo) as f64)
        } else {
            p
        }
    })
}

fn oracle_equalize(img: &Raster) -> Raster {
    let ch = img.channels();
    let mut luts = Vec::new();
    for c in 0..ch {
        let mut hist = [0u64; 256];
        for y in 0..img.height() {
            for x in 0..img.width() {
                hist[img.get(x, y, c) as usize] += 1;
            }
        }
        let nonzero: Vec<u64> = hist.iter().copied().filter(|&v| v > 0).collect();
        let mut lut: Vec<u8> = (0..=255u8).collect();
        if nonzero.len() > 1 {
            let total: u64 = nonzero.iter().sum();
            let step = (total - nonzero[nonzero.len() - 1]) / 255;
            if step > 0 {
                let mut n = step / 2;
                for (i, slot) in lut.iter_mut().enumerate() {
                    *slot = (n / step).min(255) as u8;
                    n += hist[i];
                }
            }
        }
        luts.push(lut);
    }
    map_pixels(img, |_, _, c, p| luts[c as usize][p as usize])
}

/// Inverse affine map (output -> source) in the canonical row-major form
/// `[m0, m1, m2, m3, m4, m5]`.
struct InverseMap([f64; 6]);

impl InverseMap {
    fn about_center(lin: [f64; 4], w: u32, h: u32) -> Self {
        let cx = (w as f64 - 1.0) / 2.0;
        let cy = (h as f64 - 1.0) / 2.0;
        InverseMap([
            lin[0],
            lin[1],
            cx - lin[0] * cx - lin[1] * cy,
            lin[2],
            lin[3],
            cy - lin[2] * cx - lin[3] * cy,
        ])
    }

    fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let m = &self.0;
        (m[0] * x + m[1] * y + m[2], m[3] * x + m[4] * y + m[5])
    }
}

/// Naive warp: for every output pixel gather the bilinear corners
/// (fill 0) for the image and take the rounded-nearest source label
/// (fill ignore) for the mask.
fn oracle_warp(img: &Raster, mask: &LabelMask, inv: &InverseMap) -> (Raster, LabelMask) {
    let (w, h) = (img.width(), img.height());
    let mut out_img = img.clone();
    let mut out_mask = mask.clone();
    for y in 0..h {
        for x in 0..w {
            let (sx, sy) = inv.apply(x as f64, y as f64);
            for c in 0..img.channels() {
                let x0 = sx.floor();
                let y0 = sy.floor();
                let fx = sx - x0;
                let fy = sy - y0;
                let corners = [
                    (x0 as i64, y0 as i64, (1.0 - fx) * (1.0 - fy)),
                    (x0 as i64 + 1, y0 as i64, fx * (1.0 - fy)),
                    (x0 as i64, y0 as i64 + 1, (1.0 - fx) * fy),
                    (x0 as i64 + 1, y0 as i64 + 1, fx * fy),
                ];
                let mut acc = 0.0;
                for (xi, yi, wt) in corners {
                    if xi >= 0 && xi < w as i64 && yi >= 0 && yi < h as i64 {
                        acc += wt * img.get(xi as u32, yi as u32, c) as f64;
                    }
                }
                out_img.set(x, y, c, to_u8(acc));
            }
            let rx = sx.round() as i64;
            let ry = sy.round() as i64;
            let label = if rx >= 0 && rx < w as i64 && ry >= 0 && ry < h as i64 {
                mask.get(rx as u32, ry as u32)
            } else {
                mask.ignore_index()
            };
            out_mask.set(x, y, label);
        }
    }
    (out_img, out_mask)
}

fn oracle_rotate(img: &Raster, mask: &LabelMask, degrees: f64) -> (Raster, LabelMask) {
    let (s, c) = degrees.to_radians().sin_cos();
    let inv = InverseMap::about_center([c, s, -s, c], img.width(), img.height());
    oracle_warp(img, mask, &inv)
}

fn oracle_scale(img: &Raster, mask: &LabelMask, factor: f64) -> (Raster, LabelMask) {
    let inv_factor = 1.0 / factor;
    let inv = InverseMap::about_center(
        [inv_factor, 0.0, 0.0, inv_factor],
        img.width(),
        img.height(),
    );
    oracle_warp(img, mask, &inv)
}

fn oracle_hflip(img: &Raster, mask: &LabelMask) -> (Raster, LabelMask) {
    let w = img.width();
    let mut out_img = img.clone();
    let mut out_mask = mask.clone();
    for y in 0..img.height() {
        for x in 0..w {
            for c in 0..img.channels() {
                out_img.set(x, y, c, img.get(w - 1 - x, y, c));
            }
            out_mask.set(x, y, mask.get(w - 1 - x, y));
        }
    }
    (out_img, out_mask)
}

/// The magnitude-to-parameter contract, restated.
fn oracle_param(name: OpName, m: Magnitude, sign: Sign) -> f64 {
    let f = m.value() as f64 / 30.0;
    let s = match sign {
        Sign::Plus => 1.0,
        Sign::Minus => -1.0,
    };
    match name {
        OpName::Sharpness | OpName::Color | OpName::Contrast | OpName::Brightness => {
            1.0 + s * f * 0.9
        }
        OpName::Solarize => 256.0 - f * 256.0,
        OpName::Rotate => s * (f * 30.0),
        OpName::ShearX | OpName::ShearY => s * (f * 0.3),
        OpName::TranslateX | OpName::TranslateY => s * (f * 0.33),
        OpName::AutoContrast | OpName::Equalize | OpName::Identity => 0.0,
    }
}

/// Applies one magnitude-mapped operation the brute-force way.
pub fn oracle_apply_op(
    name: OpName,
    m: Magnitude,
    sign: Sign,
    img: &Raster,
    mask: &LabelMask,
) -> (Raster, LabelMask) {
    let param = oracle_param(name, m, sign);
    match name {
        OpName::Brightness => (oracle_brightness(img, param), mask.clone()),
        OpName::Contrast => (oracle_contrast(img, param), mask.clone()),
        OpName::Color => (oracle_color(img, param), mask.clone()),
        OpName::Sharpness => (oracle_sharpness(img, param), mask.clone()),
        OpName::Solarize => (oracle_solarize(img, param), mask.clone()),
        OpName::AutoContrast => (oracle_autocontrast(img), mask.clone()),
        OpName::Equalize => (oracle_equalize(img), mask.clone()),
        OpName::Identity => (img.clone(), mask.clone()),
        OpName::Rotate => oracle_rotate(img, mask, param),
        OpName::ShearX => {
            let inv = InverseMap::about_center([1.0, -param, 0.0, 1.0], img.width(), img.height());
            oracle_warp(img, mask, &inv)
        }
        OpName::ShearY => {
            let inv = InverseMap::about_center([1.0, 0.0, -param, 1.0], img.width(), img.height());
            oracle_warp(img, mask, &inv)
        }
        OpName::TranslateX => {
            let dx = param * img.width() as f64;
            let inv = InverseMap([1.0, 0.0, -dx, 0.0, 1.0, 0.0]);
            oracle_warp(img, mask, &inv)
        }
        OpName::TranslateY => {
            let dy = param * img.height() as f64;
            let inv = InverseMap([1.0, 0.0, 0.0, 0.0, 1.0, -dy]);
            oracle_warp(img, mask, &inv)
        }
    }
}

/// Applies one plan step (covers the baseline's continuous kernels too).
pub fn oracle_apply_step(step: &PlanStep, img: &Raster, mask: &LabelMask) -> (Raster, LabelMask) {
    match *step {
        PlanStep::Op {
            name,
            magnitude,
            sign,
        } => oracle_apply_op(name, magnitude, sign, img, mask),
        PlanStep::HFlip => oracle_hflip(img, mask),
        PlanStep::Rotate { degrees } => oracle_rotate(img, mask, degrees),
        PlanStep::Scale { factor } => oracle_scale(img, mask, factor),
    }
}

/// Brute-force mIoU: materialize TP/FP/FN pixel sets per class over the
/// whole sequence. Returns `None` when no pixel is scored.
pub fn oracle_miou(preds: &[LabelMask], gts: &[LabelMask], k: usize) -> Option<f64> {
    let mut gt_sets: Vec<HashSet<(usize, u32, u32)>> = vec![HashSet::new(); k];
    let mut pred_sets: Vec<HashSet<(usize, u32, u32)>> = vec![HashSet::new(); k];
    let mut scored = 0usize;
    for (i, (pred, gt)) in preds.iter().zip(gts).enumerate() {
        for y in 0..gt.height() {
            for x in 0..gt.width() {
                let g = gt.get(x, y);
                if g == gt.ignore_index() {
                    continue;
                }
                scored += 1;
                gt_sets[g as usize].insert((i, x, y));
                pred_sets[pred.get(x, y) as usize].insert((i, x, y));
            }
        }
    }
    if scored == 0 {
        return None;
    }
    let mut sum = 0.0;
    let mut present = 0usize;
    for c in 0..k {
        let tp = gt_sets[c].intersection(&pred_sets[c]).count();
        let fp = pred_sets[c].difference(&gt_sets[c]).count();
        let fn_ = gt_sets[c].difference(&pred_sets[c]).count();
        let union = tp + fp + fn_;
        if union > 0 {
            sum += tp as f64 / union as f64;
            present += 1;
        }
    }
    Some(sum / present as f64)
}
