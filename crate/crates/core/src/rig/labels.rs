use crate::annotation::JointKeypoints;
use crate::raster::TexturedMesh;
use crate::{JointName, Vec2};

pub(crate) fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let d = b - a;
    let len2 = d.norm_squared();
    let t = if len2 > 0.0 { ((p - a).dot(&d) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + d * t)).norm()
}

/// Label each triangle with the bone (named by its child joint) nearest to the
/// triangle centroid. Exact ties go to the bone that comes first in joint
/// declaration order.
pub fn map_triangles_to_joints(mesh: &TexturedMesh, keypoints: &JointKeypoints) -> Vec<JointName> {
    let bones: Vec<(JointName, Vec2, Vec2)> = JointName::bones()
        .map(|j| (j, keypoints.get(j.parent().expect("bones have parents")), keypoints.get(j)))
        .collect();
    (0..mesh.triangles.len())
        .map(|t| {
            let c = mesh.centroid(t);
            let mut best = (bones[0].0, f64::INFINITY);
            for &(j, a, b) in &bones {
                let d = point_segment_distance(c, a, b);
                if d < best.1 {
                    best = (j, d);
                }
            }
            best.0
        })
        .collect()
}
