//! Image/mask data model, the augmentation operation kernels, and the
//! magnitude-to-parameter mapping.
//!
//! A [`Raster`] is an 8-bit grayscale or RGB image; a [`LabelMask`] carries
//! one class index per pixel plus a reserved `ignore_index` for pixels that
//! must be excluded from losses and metrics (geometric fill regions).
//! Color kernels act on the raster alone; geometric kernels warp raster and
//! mask with the same affine transform so labels stay aligned with content.

mod color;
mod geometry;
mod ops;
mod plan;

pub use color::apply_color_op;
pub use geometry::{
    apply_geometric_op, horizontal_flip, resize_bilinear, resize_nearest, scale_about_center,
    warp_affine, warp_affine_seq, AffineTransform,
};
pub use ops::{
    color_ops, geometric_ops, magnitude_to_param, op_spec, rand_ops, smartsampling_ops, Magnitude,
    OpKind, OpName, OpSpec, Sign,
};
pub use plan::{apply_plan, AugPlan, PlanStep};

use crate::error::{Error, Result};
use std::path::Path;

/// Default reserved label for pixels without a defined class.
pub const DEFAULT_IGNORE_INDEX: u8 = 255;

/// An 8-bit image, row-major, samples interleaved per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: u32,
    height: u32,
    channels: u32,
    data: Vec<u8>,
}

impl Raster {
    /// Builds a raster from raw samples, validating the shape invariant.
    pub fn new(width: u32, height: u32, channels: u32, data: Vec<u8>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::BadChannelCount(channels));
        }
        let expect = width as usize * height as usize * channels as usize;
        if data.len() != expect {
            return Err(Error::RasterShape {
                width,
                height,
                channels,
                len: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// A raster filled with a constant sample value.
    pub fn filled(width: u32, height: u32, channels: u32, value: u8) -> Result<Self> {
        let len = width as usize * height as usize * channels as usize;
        Self::new(width, height, channels, vec![value; len])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u32 {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub(crate) fn sample_index(&self, x: u32, y: u32, c: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * self.channels as usize + c as usize
    }

    /// Sample at (x, y) for channel c. Panics if out of bounds.
    #[inline]
    pub fn get(&self, x: u32, y: u32, c: u32) -> u8 {
        self.data[self.sample_index(x, y, c)]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, c: u32, value: u8) {
        let i = self.sample_index(x, y, c);
        self.data[i] = value;
    }

    /// Reads an 8-bit grayscale or RGB PNG.
    pub fn read_png(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|source| Error::Png {
            path: path.to_path_buf(),
            source,
        })?;
        match img {
            image::DynamicImage::ImageLuma8(buf) => {
                let (w, h) = buf.dimensions();
                Raster::new(w, h, 1, buf.into_raw())
            }
            image::DynamicImage::ImageRgb8(buf) => {
                let (w, h) = buf.dimensions();
                Raster::new(w, h, 3, buf.into_raw())
            }
            other => {
                // Normalize everything else (RGBA, 16-bit, ...) to RGB8.
                let buf = other.into_rgb8();
                let (w, h) = buf.dimensions();
                Raster::new(w, h, 3, buf.into_raw())
            }
        }
    }

    /// Writes the raster as a PNG (grayscale or RGB depending on channels).
    pub fn write_png(&self, path: &Path) -> Result<()> {
        let err = |source| Error::Png {
            path: path.to_path_buf(),
            source,
        };
        match self.channels {
            1 => image::GrayImage::from_raw(self.width, self.height, self.data.clone())
                .expect("shape invariant")
                .save(path)
                .map_err(err),
            3 => image::RgbImage::from_raw(self.width, self.height, self.data.clone())
                .expect("shape invariant")
                .save(path)
                .map_err(err),
            _ => unreachable!("channel invariant"),
        }
    }
}

/// Per-pixel class labels paired with a [`Raster`] of the same dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMask {
    width: u32,
    height: u32,
    labels: Vec<u8>,
    ignore_index: u8,
}

impl LabelMask {
    pub fn new(width: u32, height: u32, labels: Vec<u8>, ignore_index: u8) -> Result<Self> {
        let expect = width as usize * height as usize;
        if labels.len() != expect {
            return Err(Error::RasterShape {
                width,
                height,
                channels: 1,
                len: labels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            labels,
            ignore_index,
        })
    }

    pub fn filled(width: u32, height: u32, label: u8, ignore_index: u8) -> Result<Self> {
        let len = width as usize * height as usize;
        Self::new(width, height, vec![label; len], ignore_index)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn labels_mut(&mut self) -> &mut [u8] {
        &mut self.labels
    }

    pub fn ignore_index(&self) -> u8 {
        self.ignore_index
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.labels[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, label: u8) {
        self.labels[y as usize * self.width as usize + x as usize] = label;
    }

    /// Checks that this mask matches the paired raster's dimensions.
    pub fn check_paired(&self, image: &Raster) -> Result<()> {
        if self.width != image.width() || self.height != image.height() {
            return Err(Error::DimensionMismatch {
                iw: image.width(),
                ih: image.height(),
                mw: self.width,
                mh: self.height,
            });
        }
        Ok(())
    }

    /// Reads a single-channel PNG mask. Palette PNGs are read as raw palette
    /// indices (pixel value = class index); grayscale PNGs as sample values.
    pub fn read_png(path: &Path, ignore_index: u8) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut decoder = png::Decoder::new(std::io::BufReader::new(file));
        // Keep palette indices instead of expanding to RGB.
        decoder.set_transformations(png::Transformations::IDENTITY);
        let mut reader = decoder
            .read_info()
            .map_err(|e| png_err(path, e.to_string()))?;
        let mut buf = vec![0u8; reader.output_buffer_size().unwrap_or(0)];
        let info = reader
            .next_frame(&mut buf)
            .map_err(|e| png_err(path, e.to_string()))?;
        if info.bit_depth != png::BitDepth::Eight {
            return Err(png_err(
                path,
                format!("mask PNG must be 8-bit, got {:?}", info.bit_depth),
            ));
        }
        let (w, h) = (info.width, info.height);
        let pixels = w as usize * h as usize;
        let labels: Vec<u8> = match info.color_type {
            png::ColorType::Grayscale | png::ColorType::Indexed => {
                buf.truncate(pixels);
                buf
            }
            png::ColorType::GrayscaleAlpha => buf.chunks_exact(2).map(|p| p[0]).collect(),
            other => {
                return Err(png_err(
                    path,
                    format!("mask must be grayscale or palette PNG, got {other:?}"),
                ))
            }
        };
        LabelMask::new(w, h, labels, ignore_index)
    }

    /// Writes the mask as an 8-bit grayscale PNG (pixel value = class index).
    pub fn write_png(&self, path: &Path) -> Result<()> {
        image::GrayImage::from_raw(self.width, self.height, self.labels.clone())
            .expect("shape invariant")
            .save(path)
            .map_err(|source| Error::Png {
                path: path.to_path_buf(),
                source,
            })
    }
}

fn png_err(path: &Path, msg: String) -> Error {
    Error::Png {
        path: path.to_path_buf(),
        source: image::ImageError::IoError(std::io::Error::other(msg)),
    }
}
