//! Pixel- and mesh-level geometry: masks, mirroring, contour extraction,
//! constrained triangulation, inpainting and foot-variant stitching.
//!
//! Pixel `(x, y)` has its center at the continuous coordinate `(x, y)`; a pixel
//! therefore spans `[x - 0.5, x + 0.5] x [y - 0.5, y + 0.5]`.

mod contour;
mod foot;
mod inpaint;
mod mesh;
mod mirror;
mod rle;
mod triangulate;

pub use contour::{extract_contour, loop_area, simplify_loop, Contour};
pub(crate) use foot::foot_region;
pub use foot::{stitch_foot_variant, FootStitch};
pub use inpaint::inpaint;
pub use mesh::{MeshPoint, TexturedMesh, TriangleLocator};
#[cfg(test)]
pub(crate) use mesh::barycentric;
pub use mirror::{mirror_horizontal, reflect_mask, reflect_x};
pub use rle::{decode_rle, encode_rle, RunLength};
pub use triangulate::{loops_self_intersect, triangulate};

use crate::Vec2;
use image::RgbaImage;
use std::collections::VecDeque;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum RasterError {
    #[error("mask is empty")]
    EmptyInput,
    #[error("mask has {0} 4-connected components, expected 1")]
    Multiplicity(usize),
    #[error("reflection about x = {axis} leaves the {width}px canvas")]
    Bounds { axis: f64, width: u32 },
    #[error("mirror axis {0} is not on a pixel center or pixel edge")]
    Axis(f64),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    Dimension { expected: (u32, u32), found: (u32, u32) },
    #[error("inpainting has no known pixels to draw from")]
    InsufficientContext,
}

/// Axis-aligned pixel bounding box, inclusive on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelBox {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl PixelBox {
    pub fn width(&self) -> u32 {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> u32 {
        self.y1 - self.y0 + 1
    }
}

/// Row-major 1-bit raster.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl std::fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BinaryMask({}x{}, {} set)", self.width, self.height, self.count())
    }
}

impl BinaryMask {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self { width, height, bits }
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self, RasterError> {
        if bits.len() != width as usize * height as usize {
            return Err(RasterError::Geometry(format!(
                "{} bits for a {width}x{height} mask",
                bits.len()
            )));
        }
        Ok(Self { width, height, bits })
    }

    /// Occupancy from the alpha channel of an RGBA image (alpha > 0).
    pub fn from_alpha(image: &RgbaImage) -> Self {
        Self::from_fn(image.width(), image.height(), |x, y| image.get_pixel(x, y)[3] > 0)
    }

    /// Occupancy from a grayscale/RGBA image interpreted as 1-bit: any pixel with
    /// luminance >= 128 and non-zero alpha is set.
    pub fn from_image(image: &image::DynamicImage) -> Self {
        let rgba = image.to_rgba8();
        Self::from_fn(rgba.width(), rgba.height(), |x, y| {
            let p = rgba.get_pixel(x, y);
            let lum = (u32::from(p[0]) + u32::from(p[1]) + u32::from(p[2])) / 3;
            p[3] > 0 && lum >= 128
        })
    }

    /// 1-bit grayscale PNG-ready image (0 or 255).
    pub fn to_luma(&self) -> image::GrayImage {
        image::GrayImage::from_fn(self.width, self.height, |x, y| {
            image::Luma([if self.get(x, y) { 255 } else { 0 }])
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn size(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        x < self.width && y < self.height && self.bits[y as usize * self.width as usize + x as usize]
    }

    /// Signed lookup; out-of-range coordinates read as unset.
    #[inline]
    pub fn get_i(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && self.get(x as u32, y as u32)
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        let w = self.width as usize;
        self.bits[y as usize * w + x as usize] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    /// Set pixels in row-major order.
    pub fn iter_set(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width as usize;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(i, _)| ((i % w) as u32, (i / w) as u32))
    }

    pub fn bbox(&self) -> Option<PixelBox> {
        let mut b: Option<PixelBox> = None;
        for (x, y) in self.iter_set() {
            b = Some(match b {
                None => PixelBox { x0: x, y0: y, x1: x, y1: y },
                Some(b) => PixelBox {
                    x0: b.x0.min(x),
                    y0: b.y0.min(y),
                    x1: b.x1.max(x),
                    y1: b.y1.max(y),
                },
            });
        }
        b
    }

    /// Mean of set pixel centers.
    pub fn centroid(&self) -> Option<Vec2> {
        let mut sum = Vec2::zeros();
        let mut n = 0usize;
        for (x, y) in self.iter_set() {
            sum += Vec2::new(f64::from(x), f64::from(y));
            n += 1;
        }
        (n > 0).then(|| sum / n as f64)
    }

    fn zip(&self, other: &BinaryMask, f: impl Fn(bool, bool) -> bool) -> BinaryMask {
        assert_eq!(self.size(), other.size(), "mask size mismatch");
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    pub fn union(&self, other: &BinaryMask) -> BinaryMask {
        self.zip(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &BinaryMask) -> BinaryMask {
        self.zip(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &BinaryMask) -> BinaryMask {
        self.zip(other, |a, b| a && !b)
    }

    pub fn union_with(&mut self, other: &BinaryMask) {
        assert_eq!(self.size(), other.size(), "mask size mismatch");
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= *b;
        }
    }

    /// Number of pixels set in `self` but not in `other`.
    pub fn count_outside(&self, other: &BinaryMask) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| **a && !**b)
            .count()
    }

    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.count_outside(other) == 0
    }

    pub fn intersects(&self, other: &BinaryMask) -> bool {
        self.bits.iter().zip(&other.bits).any(|(a, b)| *a && *b)
    }

    /// 4-connected components, each as its own mask, in order of first pixel (row-major).
    pub fn components(&self) -> Vec<BinaryMask> {
        let (w, h) = (self.width as usize, self.height as usize);
        let mut label = vec![usize::MAX; w * h];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..w * h {
            if !self.bits[start] || label[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut comp = BinaryMask::new(self.width, self.height);
            label[start] = id;
            queue.push_back(start);
            while let Some(i) = queue.pop_front() {
                comp.bits[i] = true;
                let (x, y) = (i % w, i / w);
                let mut visit = |j: usize| {
                    if self.bits[j] && label[j] == usize::MAX {
                        label[j] = id;
                        queue.push_back(j);
                    }
                };
                if x > 0 {
                    visit(i - 1);
                }
                if x + 1 < w {
                    visit(i + 1);
                }
                if y > 0 {
                    visit(i - w);
                }
                if y + 1 < h {
                    visit(i + w);
                }
            }
            out.push(comp);
        }
        out
    }

    pub fn component_count(&self) -> usize {
        self.components().len()
    }

    /// Shift by an integer offset; pixels leaving the canvas are dropped.
    pub fn translated(&self, dx: i64, dy: i64) -> BinaryMask {
        let mut out = BinaryMask::new(self.width, self.height);
        for (x, y) in self.iter_set() {
            let (nx, ny) = (i64::from(x) + dx, i64::from(y) + dy);
            if nx >= 0 && ny >= 0 && nx < i64::from(self.width) && ny < i64::from(self.height) {
                out.set(nx as u32, ny as u32, true);
            }
        }
        out
    }

    /// Copy into a larger canvas at the given offset.
    pub fn padded(&self, new_width: u32, new_height: u32, ox: u32, oy: u32) -> BinaryMask {
        let mut out = BinaryMask::new(new_width, new_height);
        for (x, y) in self.iter_set() {
            out.set(x + ox, y + oy, true);
        }
        out
    }

    /// Sub-window `[x0, x0 + w) x [y0, y0 + h)` in signed source coordinates;
    /// pixels outside the source read as unset.
    pub fn window(&self, x0: i64, y0: i64, w: u32, h: u32) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| self.get_i(x0 + i64::from(x), y0 + i64::from(y)))
    }
}

/// Sub-window of an RGBA image in signed source coordinates; outside reads transparent.
pub fn rgba_window(image: &RgbaImage, x0: i64, y0: i64, w: u32, h: u32) -> RgbaImage {
    RgbaImage::from_fn(w, h, |x, y| {
        let (sx, sy) = (x0 + i64::from(x), y0 + i64::from(y));
        if sx >= 0 && sy >= 0 && sx < i64::from(image.width()) && sy < i64::from(image.height()) {
            *image.get_pixel(sx as u32, sy as u32)
        } else {
            image::Rgba([0, 0, 0, 0])
        }
    })
}

/// Keep pixels inside `mask`, clear everything else to transparent black.
pub fn masked(image: &RgbaImage, mask: &BinaryMask) -> RgbaImage {
    RgbaImage::from_fn(image.width(), image.height(), |x, y| {
        if mask.get(x, y) {
            *image.get_pixel(x, y)
        } else {
            image::Rgba([0, 0, 0, 0])
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components_are_four_connected() {
        // Two pixels touching only diagonally are separate components.
        let m = BinaryMask::from_fn(3, 3, |x, y| (x, y) == (0, 0) || (x, y) == (1, 1));
        assert_eq!(m.component_count(), 2);
        let m = BinaryMask::from_fn(3, 3, |x, y| (x, y) == (0, 0) || (x, y) == (1, 0));
        assert_eq!(m.component_count(), 1);
    }

    #[test]
    fn centroid_and_bbox() {
        let m = BinaryMask::from_fn(12, 12, |x, y| x < 10 && y < 10);
        assert_eq!(m.centroid().unwrap(), Vec2::new(4.5, 4.5));
        let b = m.bbox().unwrap();
        assert_eq!((b.x0, b.y0, b.x1, b.y1), (0, 0, 9, 9));
        assert!(BinaryMask::new(3, 3).centroid().is_none());
    }

    #[test]
    fn set_algebra() {
        let a = BinaryMask::from_fn(4, 1, |x, _| x < 2);
        let b = BinaryMask::from_fn(4, 1, |x, _| x >= 1);
        assert_eq!(a.intersection(&b).count(), 1);
        assert_eq!(a.union(&b).count(), 4);
        assert_eq!(a.difference(&b).count(), 1);
        assert_eq!(a.count_outside(&b), 1);
        assert!(!a.is_subset_of(&b));
        assert_eq!(a.translated(1, 0), BinaryMask::from_fn(4, 1, |x, _| x == 1 || x == 2));
    }
}
