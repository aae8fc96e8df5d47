use super::{mirror_horizontal, BinaryMask, RasterError};
use crate::Vec2;
use image::{Rgba, RgbaImage};

/// A view mask and its textures with one foot mirrored in place.
#[derive(Debug, Clone, PartialEq)]
pub struct FootStitch {
    pub mask: BinaryMask,
    pub front: RgbaImage,
    pub back: RgbaImage,
    /// The foot (ankle) keypoint after reflection.
    pub ankle: Vec2,
    /// Mirror axis: the center of the leg's cross-section on the cut row.
    pub axis_x: f64,
    pub region: BinaryMask,
}

/// The part of `mask` below the knee-ankle midpoint that belongs to this leg,
/// together with the mirror axis.
pub(crate) fn foot_region(
    mask: &BinaryMask,
    ankle: Vec2,
    knee: Vec2,
) -> Result<(BinaryMask, f64), RasterError> {
    let mid = (ankle + knee) / 2.0;
    let cut = mid.y.ceil().max(0.0) as u32;
    if cut >= mask.height() {
        return Err(RasterError::Geometry("foot cut row lies below the canvas".into()));
    }
    let below = BinaryMask::from_fn(mask.width(), mask.height(), |x, y| y >= cut && mask.get(x, y));

    let mut runs = Vec::new();
    let mut x = 0;
    while x < mask.width() {
        if below.get(x, cut) {
            let start = x;
            while x < mask.width() && below.get(x, cut) {
                x += 1;
            }
            runs.push((start, x - 1));
        } else {
            x += 1;
        }
    }
    let gap = |&(a, b): &(u32, u32)| {
        let (a, b) = (f64::from(a), f64::from(b));
        if mid.x < a {
            a - mid.x
        } else if mid.x > b {
            mid.x - b
        } else {
            0.0
        }
    };
    let run = runs
        .iter()
        .min_by(|p, q| gap(p).total_cmp(&gap(q)))
        .copied()
        .ok_or_else(|| RasterError::Geometry("foot region is empty".into()))?;
    let region = below
        .components()
        .into_iter()
        .find(|c| c.get(run.0, cut))
        .expect("seam run belongs to a component");
    let axis = (f64::from(run.0) + f64::from(run.1)) / 2.0;
    Ok((region, axis))
}

/// Mirror the foot below the knee-ankle midpoint about the leg axis and
/// splice it back into the view mask and both textures.
///
/// The cut is the first pixel row at or below the midpoint; the foot region is
/// the connected part of the mask under the cut that contains the leg's
/// cross-section nearest the midpoint, and the axis is the center of that
/// cross-section. Pixels above the cut and in other limbs are untouched.
pub fn stitch_foot_variant(
    mask: &BinaryMask,
    front: &RgbaImage,
    back: &RgbaImage,
    ankle: Vec2,
    knee: Vec2,
) -> Result<FootStitch, RasterError> {
    for img in [front, back] {
        if img.dimensions() != mask.size() {
            return Err(RasterError::Dimension {
                expected: mask.size(),
                found: img.dimensions(),
            });
        }
    }
    let (region, axis_x) = foot_region(mask, ankle, knee)?;
    let splice = |img: &RgbaImage| -> Result<(BinaryMask, RgbaImage), RasterError> {
        let (reflected, layer) = mirror_horizontal(&region, img, axis_x)?;
        let mut out = img.clone();
        for (x, y) in region.iter_set() {
            out.put_pixel(x, y, Rgba([0, 0, 0, 0]));
        }
        for (x, y) in reflected.iter_set() {
            out.put_pixel(x, y, *layer.get_pixel(x, y));
        }
        Ok((reflected, out))
    };
    let (reflected, front) = splice(front)?;
    let (_, back) = splice(back)?;
    let mut new_mask = mask.difference(&region);
    new_mask.union_with(&reflected);
    Ok(FootStitch {
        mask: new_mask,
        front,
        back,
        ankle: Vec2::new(2.0 * axis_x - ankle.x, ankle.y),
        axis_x,
        region,
    })
}
