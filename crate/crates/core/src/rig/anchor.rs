use super::RigError;
use crate::annotation::Orientation;
use crate::raster::BinaryMask;
use crate::{Mat3, Vec2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Key view angle of the left key view (character looking left).
pub const KEY_LEFT: f64 = PI / 2.0;
/// Key view angle of the right key view.
pub const KEY_RIGHT: f64 = 3.0 * PI / 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyviewTransform {
    pub key_view_angle: f64,
    pub transform: Mat3,
}

impl KeyviewTransform {
    pub fn translation(&self) -> Vec2 {
        Vec2::new(self.transform[(0, 2)], self.transform[(1, 2)])
    }
}

pub fn translation_matrix(t: Vec2) -> Mat3 {
    Mat3::new(1.0, 0.0, t.x, 0.0, 1.0, t.y, 0.0, 0.0, 1.0)
}

/// Anchor point of a part region.
///
/// With a mask: the centroid for an unoriented part, the centroid moved onto
/// the right edge of the bounding box for a left-facing part and onto the left
/// edge for a right-facing one. Without a mask: the mean of the children's
/// anchors.
pub fn compute_anchor(
    mask: Option<&BinaryMask>,
    direction: Orientation,
    child_anchors: &[Vec2],
) -> Result<Vec2, RigError> {
    match mask {
        Some(m) => {
            let (c, b) = m
                .centroid()
                .zip(m.bbox())
                .ok_or_else(|| RigError::Structure("part mask is empty".into()))?;
            Ok(match direction {
                Orientation::None => c,
                Orientation::Left => Vec2::new(f64::from(b.x1) + 0.5, c.y),
                Orientation::Right => Vec2::new(f64::from(b.x0) - 0.5, c.y),
            })
        }
        None => {
            if child_anchors.is_empty() {
                return Err(RigError::Structure("maskless part has no children".into()));
            }
            Ok(child_anchors.iter().sum::<Vec2>() / child_anchors.len() as f64)
        }
    }
}

/// Largest integer shift `d` (in direction `step`) reachable by moving one
/// pixel at a time while `keep(d)` holds for every intermediate shift.
fn sweep(part: &BinaryMask, step: i64, limit: i64, keep: impl Fn(&[(i64, i64)], i64) -> bool) -> i64 {
    let pixels: Vec<(i64, i64)> = part.iter_set().map(|(x, y)| (i64::from(x), i64::from(y))).collect();
    let mut d = 0;
    while d < limit && keep(&pixels, step * (d + 1)) {
        d += 1;
    }
    d
}

/// The two key-view translations of a part: at the left key view the part
/// slides left until it would leave its parent region, at the right key view
/// it slides right. Parts that are not enclosed slide at most one part width;
/// parts that start partly outside their parent slide (at most one part width)
/// while they still overlap it. Returns the transforms for the left and right
/// key views.
pub fn compute_keyview_transforms(
    part: &BinaryMask,
    parent: &BinaryMask,
    enclosed: bool,
) -> Result<[KeyviewTransform; 2], RigError> {
    let b = part
        .bbox()
        .ok_or_else(|| RigError::Structure("part mask is empty".into()))?;
    let width = i64::from(b.width());
    let canvas = i64::from(part.width());
    let inside = part.is_subset_of(parent);
    let distance = |step: i64| {
        if inside {
            let limit = if enclosed { canvas } else { width };
            sweep(part, step, limit, |px, dx| px.iter().all(|&(x, y)| parent.get_i(x + dx, y)))
        } else {
            sweep(part, step, width, |px, dx| px.iter().any(|&(x, y)| parent.get_i(x + dx, y)))
        }
    };
    let (left, right) = (distance(-1), distance(1));
    if left == 0 && right == 0 {
        log::warn!("translating part cannot move inside its parent");
    }
    Ok([
        KeyviewTransform {
            key_view_angle: KEY_LEFT,
            transform: translation_matrix(Vec2::new(-(left as f64), 0.0)),
        },
        KeyviewTransform {
            key_view_angle: KEY_RIGHT,
            transform: translation_matrix(Vec2::new(right as f64, 0.0)),
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> BinaryMask {
        BinaryMask::from_fn(16, 16, |x, y| x < 10 && y < 10)
    }

    #[test]
    fn anchor_rules() {
        let m = square();
        assert_eq!(compute_anchor(Some(&m), Orientation::None, &[]).unwrap(), Vec2::new(4.5, 4.5));
        assert_eq!(compute_anchor(Some(&m), Orientation::Left, &[]).unwrap(), Vec2::new(9.5, 4.5));
        assert_eq!(compute_anchor(Some(&m), Orientation::Right, &[]).unwrap(), Vec2::new(-0.5, 4.5));
        let kids = [Vec2::new(0.0, 0.0), Vec2::new(2.0, 4.0)];
        assert_eq!(compute_anchor(None, Orientation::None, &kids).unwrap(), Vec2::new(1.0, 2.0));
        assert!(compute_anchor(None, Orientation::None, &[]).is_err());
    }

    fn disc(w: u32, cx: f64, cy: f64, r: f64) -> BinaryMask {
        BinaryMask::from_fn(w, w, |x, y| (f64::from(x) - cx).powi(2) + (f64::from(y) - cy).powi(2) <= r * r)
    }

    #[test]
    fn eye_in_head_slides_to_contact() {
        let head = disc(64, 32.0, 32.0, 20.0);
        let eye = disc(64, 32.0, 32.0, 3.0);
        let [l, r] = compute_keyview_transforms(&eye, &head, true).unwrap();
        // Independent oracle: shift the eye one pixel at a time by brute force.
        let mut d = 0;
        while eye.translated(-(d + 1), 0).count() == eye.count()
            && eye.translated(-(d + 1), 0).is_subset_of(&head)
        {
            d += 1;
        }
        assert_eq!(l.translation(), Vec2::new(-(d as f64), 0.0));
        // Continuous geometry: 20 - 3 = 17, up to a pixel of discretisation.
        assert!((l.translation().x + 17.0).abs() <= 1.0);
        assert_eq!(r.translation().x, -l.translation().x);
        assert_eq!(l.key_view_angle, KEY_LEFT);
        assert_eq!(r.key_view_angle, KEY_RIGHT);
    }

    #[test]
    fn open_parts_are_capped_at_their_width() {
        let band = BinaryMask::from_fn(80, 10, |_, _| true);
        let part = BinaryMask::from_fn(80, 10, |x, y| (36..=41).contains(&x) && (3..=5).contains(&y));
        let [l, r] = compute_keyview_transforms(&part, &band, false).unwrap();
        assert_eq!(l.translation().x, -6.0);
        assert_eq!(r.translation().x, 6.0);
        let [l, _] = compute_keyview_transforms(&part, &band, true).unwrap();
        assert_eq!(l.translation().x, -36.0);
    }

    #[test]
    fn stuck_part_gets_zero_translation() {
        let parent = BinaryMask::from_fn(10, 3, |x, _| (2..=5).contains(&x));
        let part = parent.clone();
        let [l, r] = compute_keyview_transforms(&part, &parent, true).unwrap();
        assert_eq!((l.translation().x, r.translation().x), (0.0, 0.0));
    }
}
