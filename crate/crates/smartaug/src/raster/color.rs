//! Pixel-value kernels. These never touch the label mask.
//!
//! The enhancement kernels (Brightness, Contrast, Color, Sharpness) blend
//! between a degenerate image and the original: factor 0 yields the
//! degenerate image, 1 the original, and values beyond 1 extrapolate.
//! Arithmetic is f64 per sample with round-to-nearest and clamping to
//! [0, 255] at the end, so repeated application cannot wrap around.

use super::ops::{OpKind, OpName, OpSpec};
use super::Raster;
use crate::error::{Error, Result};

#[inline]
fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Rec. 601 luma; used as the grayscale degenerate for Contrast and Color.
#[inline]
fn luma(r: u8, g: u8, b: u8) -> f64 {
    0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64
}

fn gray_of(image: &Raster, idx: usize) -> f64 {
    if image.channels() == 1 {
        image.data()[idx] as f64
    } else {
        let base = idx * 3;
        let d = image.data();
        luma(d[base], d[base + 1], d[base + 2])
    }
}

/// Applies a color operation. Fails if the op is not a color op.
pub fn apply_color_op(op: &OpSpec, param: f64, image: &Raster) -> Result<Raster> {
    if op.kind != OpKind::Color {
        return Err(Error::KindMismatch {
            op: op.name.to_string(),
            expected: OpKind::Color.to_string(),
            actual: op.kind.to_string(),
        });
    }
    let out = match op.name {
        OpName::Brightness => brightness(image, param),
        OpName::Contrast => contrast(image, param),
        OpName::Color => color_balance(image, param),
        OpName::Sharpness => sharpness(image, param),
        OpName::Solarize => solarize(image, param),
        OpName::Equalize => equalize(image),
        OpName::AutoContrast => autocontrast(image),
        _ => unreachable!("kind checked above"),
    };
    Ok(out)
}

/// Blend toward black: `out = p * factor`.
fn brightness(image: &Raster, factor: f64) -> Raster {
    let data = image
        .data()
        .iter()
        .map(|&p| to_u8(p as f64 * factor))
        .collect();
    Raster::new(image.width(), image.height(), image.channels(), data).expect("same shape")
}

/// Blend toward the mean gray of the image: `out = mean + (p - mean) * factor`.
/// The mean is the rounded average luma over all pixels.
fn contrast(image: &Raster, factor: f64) -> Raster {
    let pixels = image.width() as usize * image.height() as usize;
    let mut sum = 0.0;
    for i in 0..pixels {
        sum += gray_of(image, i);
    }
    let mean = (sum / pixels as f64).round();
    let data = image
        .data()
        .iter()
        .map(|&p| to_u8(mean + (p as f64 - mean) * factor))
        .collect();
    Raster::new(image.width(), image.height(), image.channels(), data).expect("same shape")
}

/// Blend toward the per-pixel grayscale: `out = gray + (p - gray) * factor`.
/// A no-op on single-channel images.
fn color_balance(image: &Raster, factor: f64) -> Raster {
    if image.channels() == 1 {
        return image.clone();
    }
    let pixels = image.width() as usize * image.height() as usize;
    let mut data = Vec::with_capacity(image.data().len());
    for i in 0..pixels {
        let gray = gray_of(image, i);
        for c in 0..3 {
            let p = image.data()[i * 3 + c] as f64;
            data.push(to_u8(gray + (p - gray) * factor));
        }
    }
    Raster::new(image.width(), image.height(), image.channels(), data).expect("same shape")
}

/// Blend toward a 3x3-smoothed image. The smoothing kernel weights the
/// center 5 and neighbors 1 (total 13); border pixels are left unchanged.
fn sharpness(image: &Raster, factor: f64) -> Raster {
    let (w, h, ch) = (image.width(), image.height(), image.channels());
    let mut out = image.clone();
    if w < 3 || h < 3 {
        return out;
    }
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            for c in 0..ch {
                let mut acc = 0.0;
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        let weight = if dx == 0 && dy == 0 { 5.0 } else { 1.0 };
                        let px = (x as i64 + dx) as u32;
                        let py = (y as i64 + dy) as u32;
                        acc += weight * image.get(px, py, c) as f64;
                    }
                }
                let smooth = acc / 13.0;
                let p = image.get(x, y, c) as f64;
                out.set(x, y, c, to_u8(smooth + (p - smooth) * factor));
            }
        }
    }
    out
}

/// Inverts every sample >= threshold.
fn solarize(image: &Raster, threshold: f64) -> Raster {
    let data = image
        .data()
        .iter()
        .map(|&p| if (p as f64) >= threshold { 255 - p } else { p })
        .collect();
    Raster::new(image.width(), image.height(), image.channels(), data).expect("same shape")
}

/// Per-channel histogram equalization.
fn equalize(image: &Raster) -> Raster {
    let ch = image.channels() as usize;
    let pixels = image.width() as usize * image.height() as usize;
    let mut luts: Vec<[u8; 256]> = Vec::with_capacity(ch);
    for c in 0..ch {
        let mut hist = [0u64; 256];
        for i in 0..pixels {
            hist[image.data()[i * ch + c] as usize] += 1;
        }
        luts.push(equalize_lut(&hist));
    }
    let mut data = Vec::with_capacity(image.data().len());
    for i in 0..pixels {
        for c in 0..ch {
            data.push(luts[c][image.data()[i * ch + c] as usize]);
        }
    }
    Raster::new(image.width(), image.height(), image.channels(), data).expect("same shape")
}

/// Equalization lookup table: cumulative histogram scaled so the occupied
/// value mass spreads over [0, 255]. Flat or single-valued channels map to
/// the identity.
fn equalize_lut(hist: &[u64; 256]) -> [u8; 256] {
    let mut identity = [0u8; 256];
    for (i, v) in identity.iter_mut().enumerate() {
        *v = i as u8;
    }
    let nonzero: Vec<u64> = hist.iter().copied().filter(|&v| v > 0).collect();
    if nonzero.len() <= 1 {
        return identity;
    }
    let total: u64 = nonzero.iter().sum();
    let step = (total - nonzero[nonzero.len() - 1]) / 255;
    if step == 0 {
        return identity;
    }
    let mut lut = [0u8; 256];
    let mut n = step / 2;
    for i in 0..256 {
        lut[i] = (n / step).min(255) as u8;
        n += hist[i];
    }
    lut
}

/// Per-channel min/max stretch to [0, 255]. Flat channels are unchanged.
fn autocontrast(image: &Raster) -> Raster {
    let ch = image.channels() as usize;
    let pixels = image.width() as usize * image.height() as usize;
    let mut bounds = vec![(255u8, 0u8); ch];
    for i in 0..pixels {
        for (c, (lo, hi)) in bounds.iter_mut().enumerate() {
            let p = image.data()[i * ch + c];
            *lo = (*lo).min(p);
            *hi = (*hi).max(p);
        }
    }
    let mut data = Vec::with_capacity(image.data().len());
    for i in 0..pixels {
        for (c, &(lo, hi)) in bounds.iter().enumerate() {
            let p = image.data()[i * ch + c];
            data.push(if hi > lo {
                to_u8((p - lo) as f64 * 255.0 / (hi - lo) as f64)
            } else {
                p
            });
        }
    }
    Raster::new(image.width(), image.height(), image.channels(), data).expect("same shape")
}
