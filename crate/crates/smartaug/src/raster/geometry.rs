//! Label-preserving geometric kernels.
//!
//! Every geometric op is an affine warp applied identically to the image and
//! its mask: the image is resampled bilinearly with fill value 0, the mask
//! with nearest-neighbor and fill `ignore_index`, so warps never invent
//! fractional labels and downstream consumers can exclude the fill regions.
//! Output dimensions always equal input dimensions.

use super::ops::{OpKind, OpName, OpSpec};
use super::{LabelMask, Raster};
use crate::error::{Error, Result};
#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// A 2D affine map from output pixel coordinates to source coordinates,
/// stored row-major as `[m00, m01, m02, m10, m11, m12]`.
///
/// Pixel centers sit at integer coordinates; rotations, shears and scaling
/// are taken about the image center `((w-1)/2, (h-1)/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineTransform {
    inv: [f64; 6],
}

fn center(w: u32, h: u32) -> (f64, f64) {
    ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0)
}

impl AffineTransform {
    /// From the inverse (output -> source) linear part about a center point.
    fn about_center(lin: [f64; 4], cx: f64, cy: f64) -> Self {
        // source = L * (out - c) + c
        AffineTransform {
            inv: [
                lin[0],
                lin[1],
                cx - lin[0] * cx - lin[1] * cy,
                lin[2],
                lin[3],
                cy - lin[2] * cx - lin[3] * cy,
            ],
        }
    }

    /// Rotation of the content by `degrees` (positive turns x-axis toward
    /// y-axis, i.e. clockwise on screen) about the image center.
    pub fn rotation_about_center(degrees: f64, w: u32, h: u32) -> Self {
        let (cx, cy) = center(w, h);
        let (s, c) = degrees.to_radians().sin_cos();
        // Inverse rotation.
        Self::about_center([c, s, -s, c], cx, cy)
    }

    /// Horizontal shear by `factor` about the image center.
    pub fn shear_x(factor: f64, w: u32, h: u32) -> Self {
        let (cx, cy) = center(w, h);
        Self::about_center([1.0, -factor, 0.0, 1.0], cx, cy)
    }

    /// Vertical shear by `factor` about the image center.
    pub fn shear_y(factor: f64, w: u32, h: u32) -> Self {
        let (cx, cy) = center(w, h);
        Self::about_center([1.0, 0.0, -factor, 1.0], cx, cy)
    }

    /// Translation of the content by (dx, dy) pixels.
    pub fn translation(dx: f64, dy: f64) -> Self {
        AffineTransform {
            inv: [1.0, 0.0, -dx, 0.0, 1.0, -dy],
        }
    }

    /// Uniform scaling of the content by `factor` about the image center.
    /// Factors above 1 magnify (edges crop away), below 1 shrink (fill
    /// appears around the content).
    pub fn scaling_about_center(factor: f64, w: u32, h: u32) -> Self {
        let (cx, cy) = center(w, h);
        let inv = 1.0 / factor;
        Self::about_center([inv, 0.0, 0.0, inv], cx, cy)
    }

    #[inline]
    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let m = &self.inv;
        (m[0] * x + m[1] * y + m[2], m[3] * x + m[4] * y + m[5])
    }
}

#[inline]
fn bilinear_sample(image: &Raster, sx: f64, sy: f64, c: u32) -> f64 {
    let w = image.width() as i64;
    let h = image.height() as i64;
    let x0 = sx.floor();
    let y0 = sy.floor();
    let fx = sx - x0;
    let fy = sy - y0;
    let x0 = x0 as i64;
    let y0 = y0 as i64;
    let mut acc = 0.0;
    for (xi, yi, wt) in [
        (x0, y0, (1.0 - fx) * (1.0 - fy)),
        (x0 + 1, y0, fx * (1.0 - fy)),
        (x0, y0 + 1, (1.0 - fx) * fy),
        (x0 + 1, y0 + 1, fx * fy),
    ] {
        // Out-of-canvas neighbors contribute the fill value 0.
        if xi >= 0 && xi < w && yi >= 0 && yi < h {
            acc += wt * image.get(xi as u32, yi as u32, c) as f64;
        }
    }
    acc
}

fn warp_image_row(image: &Raster, t: &AffineTransform, y: u32, row: &mut [u8]) {
    let ch = image.channels();
    for x in 0..image.width() {
        let (sx, sy) = t.map(x as f64, y as f64);
        for c in 0..ch {
            row[(x * ch + c) as usize] =
                bilinear_sample(image, sx, sy, c).round().clamp(0.0, 255.0) as u8;
        }
    }
}

fn warp_mask_row(mask: &LabelMask, t: &AffineTransform, y: u32, row: &mut [u8]) {
    let w = mask.width() as i64;
    let h = mask.height() as i64;
    for x in 0..mask.width() {
        let (sx, sy) = t.map(x as f64, y as f64);
        let rx = sx.round() as i64;
        let ry = sy.round() as i64;
        row[x as usize] = if rx >= 0 && rx < w && ry >= 0 && ry < h {
            mask.get(rx as u32, ry as u32)
        } else {
            mask.ignore_index()
        };
    }
}

/// Sequential affine warp of a paired image and mask.
pub fn warp_affine_seq(
    image: &Raster,
    mask: &LabelMask,
    t: &AffineTransform,
) -> Result<(Raster, LabelMask)> {
    mask.check_paired(image)?;
    let (w, h, ch) = (image.width(), image.height(), image.channels());
    let mut img_data = vec![0u8; image.data().len()];
    let pitch = (w * ch) as usize;
    for (y, row) in img_data.chunks_mut(pitch).enumerate() {
        warp_image_row(image, t, y as u32, row);
    }
    let mut mask_data = vec![0u8; mask.labels().len()];
    for (y, row) in mask_data.chunks_mut(w as usize).enumerate() {
        warp_mask_row(mask, t, y as u32, row);
    }
    Ok((
        Raster::new(w, h, ch, img_data).expect("same shape"),
        LabelMask::new(w, h, mask_data, mask.ignore_index()).expect("same shape"),
    ))
}

/// Affine warp of a paired image and mask; row-parallel when the `parallel`
/// feature is enabled. Output is bit-identical to [`warp_affine_seq`].
pub fn warp_affine(
    image: &Raster,
    mask: &LabelMask,
    t: &AffineTransform,
) -> Result<(Raster, LabelMask)> {
    #[cfg(not(feature = "parallel"))]
    {
        warp_affine_seq(image, mask, t)
    }
    #[cfg(feature = "parallel")]
    {
        mask.check_paired(image)?;
        let (w, h, ch) = (image.width(), image.height(), image.channels());
        let mut img_data = vec![0u8; image.data().len()];
        let pitch = (w * ch) as usize;
        img_data
            .par_chunks_mut(pitch)
            .enumerate()
            .for_each(|(y, row)| warp_image_row(image, t, y as u32, row));
        let mut mask_data = vec![0u8; mask.labels().len()];
        mask_data
            .par_chunks_mut(w as usize)
            .enumerate()
            .for_each(|(y, row)| warp_mask_row(mask, t, y as u32, row));
        Ok((
            Raster::new(w, h, ch, img_data).expect("same shape"),
            LabelMask::new(w, h, mask_data, mask.ignore_index()).expect("same shape"),
        ))
    }
}

/// Exact horizontal mirror of a paired image and mask.
pub fn horizontal_flip(image: &Raster, mask: &LabelMask) -> Result<(Raster, LabelMask)> {
    mask.check_paired(image)?;
    let (w, h, ch) = (image.width(), image.height(), image.channels());
    let mut out = image.clone();
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                out.set(x, y, c, image.get(w - 1 - x, y, c));
            }
        }
    }
    let mut mout = mask.clone();
    for y in 0..h {
        for x in 0..w {
            mout.set(x, y, mask.get(w - 1 - x, y));
        }
    }
    Ok((out, mout))
}

/// Rescales content by `factor` on the same canvas: scale-up center-crops,
/// scale-down pads with fill/ignore_index.
pub fn scale_about_center(
    image: &Raster,
    mask: &LabelMask,
    factor: f64,
) -> Result<(Raster, LabelMask)> {
    if !(factor.is_finite() && factor > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "scale factor must be positive, got {factor}"
        )));
    }
    let t = AffineTransform::scaling_about_center(factor, image.width(), image.height());
    warp_affine(image, mask, &t)
}

/// Resizes an image to a new canvas with bilinear sampling. Source
/// coordinates use half-pixel centers and clamp to the edge, so a resize to
/// the same dimensions is the identity.
pub fn resize_bilinear(image: &Raster, tw: u32, th: u32) -> Raster {
    let (sw, sh, ch) = (image.width(), image.height(), image.channels());
    let sx_scale = sw as f64 / tw as f64;
    let sy_scale = sh as f64 / th as f64;
    let mut data = Vec::with_capacity(tw as usize * th as usize * ch as usize);
    for y in 0..th {
        let sy = ((y as f64 + 0.5) * sy_scale - 0.5).clamp(0.0, sh as f64 - 1.0);
        for x in 0..tw {
            let sx = ((x as f64 + 0.5) * sx_scale - 0.5).clamp(0.0, sw as f64 - 1.0);
            let x0 = sx.floor();
            let y0 = sy.floor();
            let fx = sx - x0;
            let fy = sy - y0;
            let x1 = (x0 as u32 + 1).min(sw - 1);
            let y1 = (y0 as u32 + 1).min(sh - 1);
            let (x0, y0) = (x0 as u32, y0 as u32);
            for c in 0..ch {
                let v = image.get(x0, y0, c) as f64 * (1.0 - fx) * (1.0 - fy)
                    + image.get(x1, y0, c) as f64 * fx * (1.0 - fy)
                    + image.get(x0, y1, c) as f64 * (1.0 - fx) * fy
                    + image.get(x1, y1, c) as f64 * fx * fy;
                data.push(v.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    Raster::new(tw, th, ch, data).expect("constructed shape")
}

/// Resizes a mask with nearest-neighbor sampling; cannot invent labels.
pub fn resize_nearest(mask: &LabelMask, tw: u32, th: u32) -> LabelMask {
    let (sw, sh) = (mask.width(), mask.height());
    let sx_scale = sw as f64 / tw as f64;
    let sy_scale = sh as f64 / th as f64;
    let mut labels = Vec::with_capacity(tw as usize * th as usize);
    for y in 0..th {
        let sy = (((y as f64 + 0.5) * sy_scale - 0.5).round()).clamp(0.0, sh as f64 - 1.0) as u32;
        for x in 0..tw {
            let sx =
                (((x as f64 + 0.5) * sx_scale - 0.5).round()).clamp(0.0, sw as f64 - 1.0) as u32;
            labels.push(mask.get(sx, sy));
        }
    }
    LabelMask::new(tw, th, labels, mask.ignore_index()).expect("constructed shape")
}

/// Applies a geometric operation at the given resolved parameter.
///
/// Parameter semantics: Rotate takes degrees, shears take shear factors,
/// translations take fractions of the corresponding image dimension.
pub fn apply_geometric_op(
    op: &OpSpec,
    param: f64,
    image: &Raster,
    mask: &LabelMask,
) -> Result<(Raster, LabelMask)> {
    if op.kind != OpKind::Geometric {
        return Err(Error::KindMismatch {
            op: op.name.to_string(),
            expected: OpKind::Geometric.to_string(),
            actual: op.kind.to_string(),
        });
    }
    mask.check_paired(image)?;
    let (w, h) = (image.width(), image.height());
    let t = match op.name {
        OpName::Rotate => AffineTransform::rotation_about_center(param, w, h),
        OpName::ShearX => AffineTransform::shear_x(param, w, h),
        OpName::ShearY => AffineTransform::shear_y(param, w, h),
        OpName::TranslateX => AffineTransform::translation(param * w as f64, 0.0),
        OpName::TranslateY => AffineTransform::translation(0.0, param * h as f64),
        _ => unreachable!("kind checked above"),
    };
    warp_affine(image, mask, &t)
}
