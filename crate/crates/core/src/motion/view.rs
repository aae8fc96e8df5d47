use super::kinematics::Pose;
use super::map::ResolvedMap;
use super::MotionError;
use crate::{JointName, Vec2, Vec3};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Ground vectors are (x, z) pairs.
pub fn ground(v: Vec3) -> Vec2 {
    Vec2::new(v.x, v.z)
}

pub fn from_ground(g: Vec2) -> Vec3 {
    Vec3::new(g.x, 0.0, g.y)
}

/// Camera position over time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CameraTrack {
    Static { position: Vec3 },
    PerFrame { positions: Vec<Vec3> },
    /// Circles the skeleton root at `radius`, `height` above the ground,
    /// starting in front of it (+z) and turning counterclockwise seen from above.
    Orbit {
        radius: f64,
        height: f64,
        degrees_per_second: f64,
        #[serde(default)]
        start_degrees: f64,
    },
}

impl CameraTrack {
    pub fn position(&self, frame: usize, time: f64, root: Vec3) -> Vec3 {
        match self {
            CameraTrack::Static { position } => *position,
            CameraTrack::PerFrame { positions } => positions[frame.min(positions.len().saturating_sub(1))],
            CameraTrack::Orbit {
                radius,
                height,
                degrees_per_second,
                start_degrees,
            } => {
                let phi = (start_degrees + degrees_per_second * time).to_radians();
                Vec3::new(root.x + radius * phi.sin(), *height, root.z + radius * phi.cos())
            }
        }
    }

    pub fn validate(&self) -> Result<(), MotionError> {
        let finite = |v: &Vec3| v.iter().all(|c| c.is_finite());
        let ok = match self {
            CameraTrack::Static { position } => finite(position),
            CameraTrack::PerFrame { positions } => !positions.is_empty() && positions.iter().all(finite),
            CameraTrack::Orbit {
                radius,
                height,
                degrees_per_second,
                start_degrees,
            } => *radius > 0.0 && [height, degrees_per_second, start_degrees].iter().all(|v| v.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(MotionError::Config("camera track has non-finite or empty values".into()))
        }
    }
}

/// Unit ground direction from the camera to the root.
pub fn root_view_vector(camera: Vec3, root: Vec3) -> Result<Vec2, MotionError> {
    let g = ground(root - camera);
    let n = g.norm();
    if !(n > 1e-9) {
        return Err(MotionError::DegenerateView);
    }
    Ok(g / n)
}

/// Ground projection of the frontal-plane normal through both shoulders and
/// the mid-hip, pointing out of the chest. `None` when the torso is
/// degenerate or lies flat.
pub fn skeleton_forward(pose: &Pose, map: &ResolvedMap) -> Option<Vec2> {
    let ls = pose.get(map.get(JointName::LeftShoulder));
    let rs = pose.get(map.get(JointName::RightShoulder));
    let hip = (pose.get(map.get(JointName::LeftHip)) + pose.get(map.get(JointName::RightHip))) / 2.0;
    let n = (rs - ls).cross(&(hip - ls));
    let g = ground(n);
    let scale = (rs - ls).norm() * (hip - ls).norm();
    if !(g.norm() > 1e-6 * scale) || scale == 0.0 {
        return None;
    }
    Some(g.normalize())
}

/// [`skeleton_forward`] with fallback to the previous frame's value.
pub fn skeleton_forward_or(pose: &Pose, map: &ResolvedMap, previous: Option<Vec2>) -> Result<Vec2, MotionError> {
    skeleton_forward(pose, map)
        .or(previous)
        .ok_or(MotionError::DegenerateTorso)
}

/// Heading of a ground vector, counterclockwise seen from above.
fn heading(v: Vec2) -> f64 {
    (-v.y).atan2(v.x)
}

pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Counterclockwise angle from the root-view vector to the forward vector, in
/// [0, 2π). π means the character faces the camera.
pub fn view_angle(root_view: Vec2, forward: Vec2) -> f64 {
    wrap_angle(heading(forward) - heading(root_view))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn root_view_examples() {
        let v = root_view_vector(Vec3::new(0.0, 2.0, 5.0), Vec3::new(0.0, 1.0, 0.0)).unwrap();
        assert!((v - Vec2::new(0.0, -1.0)).norm() < 1e-15);
        let v = root_view_vector(Vec3::new(3.0, 0.0, 4.0), Vec3::zeros()).unwrap();
        assert!((v - Vec2::new(-0.6, -0.8)).norm() < 1e-15);
        assert!(matches!(
            root_view_vector(Vec3::new(0.0, 3.0, 0.0), Vec3::zeros()),
            Err(MotionError::DegenerateView)
        ));
    }

    #[test]
    fn view_angle_labels() {
        let rv = Vec2::new(0.0, -1.0);
        assert!((view_angle(rv, -rv) - PI).abs() < 1e-12);
        assert_eq!(view_angle(rv, rv), 0.0);
        // Rotating (x, z) counterclockwise from above maps x toward -z.
        let ccw = |v: Vec2, a: f64| Vec2::new(v.x * a.cos() + v.y * a.sin(), -v.x * a.sin() + v.y * a.cos());
        assert!((view_angle(rv, ccw(rv, FRAC_PI_2)) - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn orbit_starts_in_front() {
        let c = CameraTrack::Orbit {
            radius: 4.0,
            height: 1.5,
            degrees_per_second: 90.0,
            start_degrees: 0.0,
        };
        assert!((c.position(0, 0.0, Vec3::zeros()) - Vec3::new(0.0, 1.5, 4.0)).norm() < 1e-12);
        assert!((c.position(0, 1.0, Vec3::zeros()) - Vec3::new(4.0, 1.5, 0.0)).norm() < 1e-12);
    }
}
