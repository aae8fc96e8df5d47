//! Per-frame view-dependent retargeting of 3D skeletal motion onto a character rig.

mod config;
mod parts;
mod projection;
mod retargeter;
mod sphere;
mod switching;

pub use config::{Ablation, CostForm, RetargetConfig};
pub use parts::{effective_translations, interpolate_part_transform, lateral_factor};
pub use projection::{jacobian_alpha, plane_basis, project_bone};
pub use retargeter::{
    render_order, rest_pose, select_foot_variant, source_joint, update_root, FramePose2D, RetargetState, Retargeter,
    SkeletonJoints,
};
pub use sphere::{
    cross_track_distance, fibonacci_sphere, great_circle_distance, optimize_projection_plane, settle_projection_plane,
    PlaneCost,
    COHERENCE_SNAP,
};
pub use switching::{limb_swapped, select_view, texture_side, TextureSide};

use crate::motion::{CameraTrack, MotionError, SkeletalMotion};
use crate::rig::CharacterRig;

#[derive(Debug, thiserror::Error)]
pub enum RetargetError {
    #[error(transparent)]
    Motion(#[from] MotionError),
    #[error("config: {0}")]
    Config(String),
    #[error("limb is straight; its great circle is undefined")]
    UndefinedCircle,
    #[error("zero projected bone; the angle jacobian is singular")]
    Singular,
}

/// Retarget every frame of a clip.
pub fn retarget_clip(
    rig: &CharacterRig,
    motion: &SkeletalMotion,
    camera: &CameraTrack,
    config: &RetargetConfig,
    ablation: Ablation,
) -> Result<Vec<FramePose2D>, RetargetError> {
    camera.validate()?;
    let mut r = Retargeter::new(rig, config.clone(), ablation, motion.leg_length()?)?;
    let mut out = Vec::with_capacity(motion.frame_count());
    for f in 0..motion.frame_count() {
        let joints = motion.joints(&motion.pose(f)?);
        let root = joints[crate::JointName::RootHip.index()];
        let cam = camera.position(f, f as f64 * motion.clip.frame_time, root);
        out.push(r.step(&joints, cam)?);
    }
    Ok(out)
}
