//! BVH motion, forward kinematics and the view geometry between camera and skeleton.

mod bvh;
mod kinematics;
mod map;
mod view;

pub use bvh::{emit_bvh, parse_bvh, BvhJoint, Channel, MotionClip, SkeletonHierarchy};
pub use kinematics::{forward_kinematics, Pose};
pub use map::{JointMap, ResolvedMap};
pub use view::{
    from_ground, ground, root_view_vector, skeleton_forward, skeleton_forward_or, view_angle, wrap_angle,
    CameraTrack,
};

use crate::{JointName, Vec3};
use std::path::Path;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MotionError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("frame {frame}: expected {expected} channel values, found {found}")]
    ChannelCount { frame: usize, expected: usize, found: usize },
    #[error("frame {frame} out of range ({frames} frames)")]
    FrameOutOfRange { frame: usize, frames: usize },
    #[error("unmapped joints: {}", .0.join(", "))]
    Unmapped(Vec<String>),
    #[error("camera ground position coincides with the root")]
    DegenerateView,
    #[error("torso is degenerate on the first frame")]
    DegenerateTorso,
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

/// A parsed clip bound to the character skeleton through a resolved joint map.
#[derive(Debug, Clone)]
pub struct SkeletalMotion {
    pub hierarchy: SkeletonHierarchy,
    pub clip: MotionClip,
    pub map: ResolvedMap,
}

impl SkeletalMotion {
    pub fn new(hierarchy: SkeletonHierarchy, clip: MotionClip, map: &JointMap) -> Result<Self, MotionError> {
        let map = map.resolve(&hierarchy)?;
        Ok(Self { hierarchy, clip, map })
    }

    /// Parse BVH text and resolve it with `map`, or the first built-in naming
    /// scheme that fits.
    pub fn from_bvh(text: &str, map: Option<&JointMap>) -> Result<Self, MotionError> {
        let (h, c) = parse_bvh(text)?;
        let m = match map {
            Some(m) => m.clone(),
            None => JointMap::detect(&h)?,
        };
        Self::new(h, c, &m)
    }

    pub fn load(path: &Path, map: Option<&JointMap>) -> Result<Self, MotionError> {
        let text = std::fs::read_to_string(path).map_err(|e| MotionError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_bvh(&text, map)
    }

    pub fn frame_count(&self) -> usize {
        self.clip.len()
    }

    pub fn pose(&self, frame: usize) -> Result<Pose, MotionError> {
        forward_kinematics(&self.hierarchy, &self.clip, frame)
    }

    /// Character-joint positions of a pose.
    pub fn joints(&self, pose: &Pose) -> [Vec3; crate::skeleton::JOINT_COUNT] {
        JointName::ALL.map(|j| pose.get(self.map.get(j)))
    }

    /// Mean hip-knee-foot chain length over both legs at the first frame.
    pub fn leg_length(&self) -> Result<f64, MotionError> {
        let p = self.pose(0)?;
        let j = |n| p.get(self.map.get(n));
        let leg = |h, k, f| (j(k) - j(h)).norm() + (j(f) - j(k)).norm();
        Ok((leg(JointName::LeftHip, JointName::LeftKnee, JointName::LeftFoot)
            + leg(JointName::RightHip, JointName::RightKnee, JointName::RightFoot))
            / 2.0)
    }
}
