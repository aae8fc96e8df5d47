use crate::annotation::AnnotationSet;
use crate::raster::{rgba_window, BinaryMask};
use crate::Vec2;
use image::RgbaImage;
use serde::{Deserialize, Serialize};

/// Vertical margin around the figure, in pixels.
pub const CANVAS_MARGIN: u32 = 2;

/// The working raster of a rig: the figure's bounding box grown by a small
/// margin and padded on both sides by the box width, so that mirrored
/// regions and mirrored feet always stay on the canvas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Canvas {
    /// Position of canvas pixel (0, 0) in source image pixels.
    pub x0: i64,
    pub y0: i64,
    pub width: u32,
    pub height: u32,
}

impl Canvas {
    pub fn for_mask(figure: &BinaryMask) -> Option<Self> {
        let b = figure.bbox()?;
        let (w, h) = (b.width(), b.height());
        Some(Self {
            x0: i64::from(b.x0) - i64::from(w) - i64::from(CANVAS_MARGIN),
            y0: i64::from(b.y0) - i64::from(CANVAS_MARGIN),
            width: 3 * w + 2 * CANVAS_MARGIN,
            height: h + 2 * CANVAS_MARGIN,
        })
    }

    pub fn size(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn offset(&self) -> Vec2 {
        Vec2::new(self.x0 as f64, self.y0 as f64)
    }

    pub fn mask(&self, m: &BinaryMask) -> BinaryMask {
        m.window(self.x0, self.y0, self.width, self.height)
    }

    pub fn image(&self, img: &RgbaImage) -> RgbaImage {
        rgba_window(img, self.x0, self.y0, self.width, self.height)
    }

    /// The annotation set re-expressed in canvas coordinates.
    pub fn annotations(&self, a: &AnnotationSet) -> AnnotationSet {
        let off = self.offset();
        let mut out = a.clone();
        out.keypoints = a.keypoints.map(|_, p| p - off);
        out.figure_mask = self.mask(&a.figure_mask);
        for s in &mut out.segments {
            s.mask = self.mask(&s.mask);
        }
        for p in &mut out.parts {
            if let Some(m) = &p.mask {
                p.mask = Some(self.mask(m));
            }
        }
        out
    }
}
