//! Turn a single annotated figure drawing into a view-dependent 2.5D rig and
//! drive it with 3D skeletal motion.
//!
//! The pipeline is split into the modules below, roughly in data-flow order:
//!
//! * [`annotation`]: the semantic markup that accompanies a drawing.
//! * [`raster`]: pixel and mesh geometry (mirroring, contours, CDT, inpainting).
//! * [`rig`]: builds the two-view character model and reads/writes rig bundles.
//! * [`motion`]: BVH parsing, forward kinematics and view geometry.
//! * [`retarget`]: per-frame view-dependent retargeting, including the
//!   per-limb projection plane search.
//! * [`deform`]: ARAP deformation, part placement, compositing and frame packets.

pub mod annotation;
pub mod deform;
pub mod fixtures;
pub mod motion;
pub mod raster;
pub mod retarget;
pub mod rig;
pub mod skeleton;

/// 2D point or vector. Image-space values use x right, y down.
pub type Vec2 = nalgebra::Vector2<f64>;
/// 3D point or vector in the world frame (x right, y up, z toward the default camera).
pub type Vec3 = nalgebra::Vector3<f64>;
/// 3x3 homogeneous 2D transform.
pub type Mat3 = nalgebra::Matrix3<f64>;

pub use skeleton::{JointName, Limb, Side};
