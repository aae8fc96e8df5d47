use super::RetargetError;
use crate::{Vec2, Vec3};

/// (right, up) basis of the plane with normal `n`: up is world up projected
/// into the plane, right = up × n. `None` when `n` is vertical.
pub fn plane_basis(n: Vec3) -> Option<(Vec3, Vec3)> {
    let y = Vec3::y();
    let up = y - n * y.dot(&n);
    let len = up.norm();
    if len < 1e-9 {
        return None;
    }
    let up = up / len;
    Some((up.cross(&n), up))
}

/// Project a 3D bone onto the plane with normal `n` and return its planar
/// orientation α = atan2(P_y, P_x) together with P. `None` when the bone is
/// parallel to `n` (or the plane has no up direction); callers hold the
/// previous α in that case.
pub fn project_bone(v: Vec3, n: Vec3) -> Option<(f64, Vec2)> {
    let (right, up) = plane_basis(n)?;
    let p = Vec2::new(v.dot(&right), v.dot(&up));
    if p.norm() <= 1e-9 * v.norm().max(f64::MIN_POSITIVE) {
        return None;
    }
    Some((p.y.atan2(p.x), p))
}

/// ∂α/∂P for α = atan2(P_y, P_x).
pub fn jacobian_alpha(p: Vec2) -> Result<[f64; 2], RetargetError> {
    let r2 = p.norm_squared();
    if r2 == 0.0 {
        return Err(RetargetError::Singular);
    }
    Ok([-p.y / r2, p.x / r2])
}
