use super::DeformedMesh;
use crate::rig::{translation_matrix, CharacterView};
use crate::{Mat3, Vec2};

fn rotation_matrix(angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Rotation angle of the linear map taking a rest triangle onto its deformed
/// copy, from the polar decomposition of that map. `None` if either triangle
/// is degenerate or the map flips orientation.
pub fn triangle_rotation(rest: [Vec2; 3], deformed: [Vec2; 3]) -> Option<f64> {
    let r = nalgebra::Matrix2::from_columns(&[rest[1] - rest[0], rest[2] - rest[0]]);
    let d = nalgebra::Matrix2::from_columns(&[deformed[1] - deformed[0], deformed[2] - deformed[0]]);
    let scale = r.norm().max(1e-300);
    if r.determinant().abs() < 1e-12 * scale * scale {
        return None;
    }
    let a = d * r.try_inverse()?;
    let det = a.determinant();
    if !(det > 1e-9 * a.norm_squared()) {
        return None;
    }
    Some((a[(1, 0)] - a[(0, 1)]).atan2(a[(0, 0)] + a[(1, 1)]))
}

/// Final transform of every part, mapping rest canvas coordinates of its
/// layer to output coordinates: the anchor, shifted by the part's
/// view-dependent translation, is carried along by the deformed mesh and the
/// layer turns with the anchor's triangle. Parts whose triangle collapsed
/// keep `previous` (or the undeformed placement).
pub fn place_parts(
    deformed: &DeformedMesh,
    view: &CharacterView,
    variant: usize,
    translations: &[Vec2],
    previous: Option<&[Mat3]>,
) -> Vec<Mat3> {
    let var = &view.variants[variant];
    let rest = &var.mesh;
    view.parts
        .iter()
        .enumerate()
        .map(|(i, part)| {
            let a = part.anchor;
            let t = translations.get(i).copied().unwrap_or_else(Vec2::zeros);
            let attach = part.attachments[variant];
            let tri = rest.triangles[attach.triangle as usize];
            let r = tri.map(|v| rest.vertices[v as usize]);
            let d = tri.map(|v| deformed.vertices[v as usize]);
            let fallback = || {
                previous
                    .and_then(|p| p.get(i).copied())
                    .unwrap_or_else(|| translation_matrix(t))
            };
            let Some(angle) = triangle_rotation(r, d) else {
                return fallback();
            };
            let (moved, _) = var.locator.locate_or_nearest(rest, a + t);
            let p = moved.position(&deformed.vertices, &rest.triangles);
            translation_matrix(p) * rotation_matrix(angle) * translation_matrix(-a)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_of_rigid_turn() {
        let rest = [Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(0.0, 1.0)];
        let a = 0.7f64;
        let rot = |v: Vec2| Vec2::new(v.x * a.cos() - v.y * a.sin(), v.x * a.sin() + v.y * a.cos()) + Vec2::new(5.0, 1.0);
        let got = triangle_rotation(rest, rest.map(rot)).unwrap();
        assert!((got - a).abs() < 1e-12);
        assert!(triangle_rotation(rest, [Vec2::zeros(); 3]).is_none());
    }
}
