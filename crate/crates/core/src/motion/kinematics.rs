use super::bvh::{Channel, MotionClip, SkeletonHierarchy};
use super::MotionError;
use crate::Vec3;
use nalgebra::{Rotation3, Unit};

/// World positions of every hierarchy joint for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose {
    pub positions: Vec<Vec3>,
}

impl Pose {
    pub fn get(&self, i: usize) -> Vec3 {
        self.positions[i]
    }
}

fn axis(c: Channel) -> Unit<Vec3> {
    match c.axis() {
        0 => Vec3::x_axis(),
        1 => Vec3::y_axis(),
        _ => Vec3::z_axis(),
    }
}

/// Evaluate one frame: each joint's local transform is a translation by its
/// offset (plus any position channels) followed by its rotation channels
/// composed in file order.
pub fn forward_kinematics(h: &SkeletonHierarchy, clip: &MotionClip, frame: usize) -> Result<Pose, MotionError> {
    let row = clip.frames.get(frame).ok_or(MotionError::FrameOutOfRange {
        frame,
        frames: clip.frames.len(),
    })?;
    if row.len() != h.channel_count() {
        return Err(MotionError::ChannelCount {
            frame,
            expected: h.channel_count(),
            found: row.len(),
        });
    }
    Ok(pose_from_channels(h, row))
}

pub(crate) fn pose_from_channels(h: &SkeletonHierarchy, row: &[f64]) -> Pose {
    let mut rot: Vec<Rotation3<f64>> = Vec::with_capacity(h.len());
    let mut pos: Vec<Vec3> = Vec::with_capacity(h.len());
    for j in &h.joints {
        let mut t = j.offset;
        let mut r = Rotation3::identity();
        for (k, &c) in j.channels.iter().enumerate() {
            let v = row[j.channel_offset + k];
            if c.is_rotation() {
                r *= Rotation3::from_axis_angle(&axis(c), v.to_radians());
            } else {
                t[c.axis()] += v;
            }
        }
        match j.parent {
            None => {
                pos.push(t);
                rot.push(r);
            }
            Some(p) => {
                pos.push(pos[p] + rot[p] * t);
                rot.push(rot[p] * r);
            }
        }
    }
    Pose { positions: pos }
}
