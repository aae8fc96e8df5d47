//! ARAP deformation, part placement, compositing and frame packets.

mod arap;
mod composite;
mod packet;
mod place;
pub mod sparse;

pub use arap::{register_rest_mesh, ArapSystem, DeformedMesh, HANDLE_TOLERANCE, HANDLE_WEIGHT};
pub use composite::composite;
pub use packet::{FramePacket, Placement, PACKET_MAGIC, PACKET_VERSION};
pub use place::{place_parts, triangle_rotation};

use crate::retarget::FramePose2D;
use crate::rig::CharacterRig;
use crate::Mat3;

#[derive(Debug, thiserror::Error)]
pub enum DeformError {
    #[error("registration failed: {0}")]
    Registration(String),
    #[error("packet: {0}")]
    Packet(String),
}

/// Deform the pose's variant mesh to the retargeted joints and place its
/// parts. Returns the packet and the full-precision placements, which are
/// the fallback for collapsed attachment triangles on the next frame.
pub fn frame_packet(rig: &CharacterRig, pose: &FramePose2D, frame: u32, previous: Option<&[Mat3]>) -> (FramePacket, Vec<Mat3>) {
    let view = rig.view(pose.side);
    let var = &view.variants[pose.variant];
    let deformed = var.arap.solve(pose.joints.as_array());
    let placements = place_parts(&deformed, view, pose.variant, &pose.part_translations, previous);
    let f3 = |v: crate::Vec3| [v.x as f32, v.y as f32, v.z as f32];
    let packet = FramePacket {
        frame,
        theta: pose.theta as f32,
        side: pose.side,
        variant: var.key,
        texture: pose.texture,
        swapped: pose.swapped,
        plane_origin: f3(pose.plane_origin),
        plane_normal: f3(pose.plane_normal),
        vertices: deformed.vertices.iter().map(|v| [v.x as f32, v.y as f32]).collect(),
        placements: placements
            .iter()
            .enumerate()
            .filter(|(i, _)| view.parts[*i].layer.is_some())
            .map(|(i, m)| Placement::from_matrix(i, m))
            .collect(),
        order: pose.render_order.clone(),
    };
    (packet, placements)
}
