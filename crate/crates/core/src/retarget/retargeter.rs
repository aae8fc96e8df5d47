use super::config::{Ablation, RetargetConfig};
use super::parts::{effective_translations, interpolate_part_transform};
use super::projection::project_bone;
use super::sphere::{optimize_projection_plane, settle_projection_plane};
use super::switching::{limb_swapped, select_view, texture_side, TextureSide};
use super::RetargetError;
use crate::annotation::JointKeypoints;
use crate::motion::{from_ground, root_view_vector, skeleton_forward, view_angle};
use crate::rig::{CharacterRig, VariantKey};
use crate::skeleton::JOINT_COUNT;
use crate::{JointName, Limb, Mat3, Side, Vec2, Vec3};
use std::f64::consts::PI;

/// Character-joint positions of one skeleton frame, in world units.
pub type SkeletonJoints = [Vec3; JOINT_COUNT];

/// One retargeted frame on the character plane.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePose2D {
    pub theta: f64,
    pub side: Side,
    pub texture: TextureSide,
    pub swapped: bool,
    /// Requested foot sidedness.
    pub foot_key: VariantKey,
    /// Index of the drawn variant in the active view.
    pub variant: usize,
    /// Joint positions in canvas pixels.
    pub joints: JointKeypoints,
    /// Planar orientation of every bone (indexed by child joint; root entry unused).
    pub alphas: [f64; JOINT_COUNT],
    /// Per part (parallel to the view's parts): its own interpolated transform.
    pub part_transforms: Vec<Mat3>,
    /// Per part: accumulated translation including ancestor parts.
    pub part_translations: Vec<Vec2>,
    /// Bones, farthest first.
    pub render_order: Vec<JointName>,
    /// Ground position of the character plane, in pixels.
    pub plane_origin: Vec3,
    /// Character plane normal (toward the camera).
    pub plane_normal: Vec3,
    /// Projection plane normal used for each limb, in `Limb::ALL` order.
    pub limb_normals: [Vec3; 4],
    /// Some bone was parallel to its plane normal and kept its previous α.
    pub fallback: bool,
}

#[derive(Debug, Clone, Default)]
pub struct RetargetState {
    pub previous_normals: Option<[Vec3; 4]>,
    pub previous_forward: Option<Vec2>,
    pub previous_side: Option<Side>,
    pub previous_swap: Option<bool>,
    pub previous_texture: Option<TextureSide>,
    pub previous_alphas: Option<[f64; JOINT_COUNT]>,
    pub previous_feet: [Option<Side>; 2],
    pub previous_skeleton_root: Option<Vec3>,
    /// Ground position (x, z) and elevation (y) of the character root, pixels.
    pub root: Vec3,
}

/// Skeleton joint that drives a character joint under the current limb mapping.
pub fn source_joint(j: JointName, swapped: bool) -> JointName {
    if swapped {
        j.mirrored()
    } else {
        j
    }
}

/// Bones sorted by the depth of their skeleton midpoint along `v_c`,
/// farthest first; ties keep joint declaration order.
pub fn render_order(joints: &SkeletonJoints, v_c: Vec3, swapped: bool) -> Vec<JointName> {
    let depth = |b: JointName| {
        let a = joints[source_joint(b, swapped).index()];
        let p = joints[source_joint(b.parent().expect("bone"), swapped).index()];
        ((a + p) / 2.0).dot(&v_c)
    };
    let mut bones: Vec<(JointName, f64)> = JointName::bones().map(|b| (b, depth(b))).collect();
    bones.sort_by(|a, b| a.1.total_cmp(&b.1));
    bones.into_iter().map(|b| b.0).collect()
}

/// Foot sidedness follows where the knee points: the sign of the knee's x
/// offset from the hip-foot midpoint. A straight leg keeps the previous value.
pub fn select_foot_variant(joints: &JointKeypoints, previous: [Option<Side>; 2], default: VariantKey) -> VariantKey {
    let foot = |side: Side| {
        let (h, k, f) = match side {
            Side::Left => (JointName::LeftHip, JointName::LeftKnee, JointName::LeftFoot),
            Side::Right => (JointName::RightHip, JointName::RightKnee, JointName::RightFoot),
        };
        let mid = (joints.get(h) + joints.get(f)) / 2.0;
        let dx = joints.get(k).x - mid.x;
        let eps = 1e-9 * (joints.get(f) - joints.get(h)).norm().max(1.0);
        if dx > eps {
            Side::Right
        } else if dx < -eps {
            Side::Left
        } else {
            previous[side.index()].unwrap_or(default.foot(side))
        }
    };
    VariantKey::new(foot(Side::Left), foot(Side::Right))
}

/// Move the character root by the skeleton root velocity scaled by the leg-length ratio.
pub fn update_root(root: Vec3, velocity: Vec3, skeleton_leg: f64, rig_leg: f64) -> Result<Vec3, RetargetError> {
    if !(skeleton_leg > 0.0 && rig_leg > 0.0) {
        return Err(RetargetError::Config(format!(
            "leg lengths must be positive (skeleton {skeleton_leg}, rig {rig_leg})"
        )));
    }
    Ok(root + velocity * (rig_leg / skeleton_leg))
}

/// Per-frame view-dependent retargeting of one skeleton onto one rig.
#[derive(Debug, Clone)]
pub struct Retargeter<'a> {
    rig: &'a CharacterRig,
    pub config: RetargetConfig,
    pub ablation: Ablation,
    skeleton_leg: f64,
    state: RetargetState,
}

impl<'a> Retargeter<'a> {
    pub fn new(
        rig: &'a CharacterRig,
        config: RetargetConfig,
        ablation: Ablation,
        skeleton_leg: f64,
    ) -> Result<Self, RetargetError> {
        config.validate()?;
        if !(skeleton_leg > 0.0) || !(rig.leg_length > 0.0) {
            return Err(RetargetError::Config("leg lengths must be positive".into()));
        }
        Ok(Self {
            rig,
            config,
            ablation,
            skeleton_leg,
            state: RetargetState::default(),
        })
    }

    pub fn state(&self) -> &RetargetState {
        &self.state
    }

    pub fn reset(&mut self) {
        self.state = RetargetState::default();
    }

    pub fn scale(&self) -> f64 {
        self.rig.leg_length / self.skeleton_leg
    }

    /// View angle of a frame, before any ablation lock.
    pub fn view_angle_of(&self, joints: &SkeletonJoints, camera: Vec3) -> Result<(f64, Vec2, Vec2), RetargetError> {
        let root = joints[JointName::RootHip.index()];
        let rv = root_view_vector(camera, root)?;
        let fwd = forward_from_joints(joints)
            .or(self.state.previous_forward)
            .ok_or(crate::motion::MotionError::DegenerateTorso)?;
        Ok((view_angle(rv, fwd), rv, fwd))
    }

    pub fn step(&mut self, joints: &SkeletonJoints, camera: Vec3) -> Result<FramePose2D, RetargetError> {
        let cfg = &self.config;
        let (raw_theta, rv, fwd) = self.view_angle_of(joints, camera)?;
        let theta = if self.ablation.view_dependent { raw_theta } else { PI };
        let v_c = from_ground(-rv);
        let h = cfg.hysteresis;
        let side = select_view(theta, self.state.previous_side, h);
        let swapped = self.ablation.limb_swap && limb_swapped(theta, self.state.previous_swap, h);
        let texture = texture_side(theta, self.state.previous_texture, h);
        let view = self.rig.view(side);

        let bone = |b: JointName| {
            joints[source_joint(b, swapped).index()] - joints[source_joint(b.parent().expect("bone"), swapped).index()]
        };
        let history = self.state.previous_normals;
        let previous_normals = history.unwrap_or([v_c; 4]);
        let mut limb_normals = [v_c; 4];
        if self.ablation.plane_opt {
            for limb in Limb::ALL {
                let [_, hinge, distal] = limb.joints();
                let (u, l) = (bone(hinge), bone(distal));
                if u.norm() == 0.0 || l.norm() == 0.0 {
                    limb_normals[limb.index()] = previous_normals[limb.index()];
                    continue;
                }
                let (u, l) = (u.normalize(), l.normalize());
                limb_normals[limb.index()] = match history {
                    None => settle_projection_plane(u, l, v_c, cfg),
                    Some(prev) => {
                        let n = optimize_projection_plane(u, l, v_c, prev[limb.index()], cfg);
                        if n.dot(&v_c) < 0.0 {
                            -n
                        } else {
                            n
                        }
                    }
                };
            }
        }

        let rest = &view.keypoints;
        let rest_alpha = |b: JointName| {
            let d = rest.get(b) - rest.get(b.parent().expect("bone"));
            (-d.y).atan2(d.x)
        };
        let mut alphas = [0.0; JOINT_COUNT];
        let mut fallback = false;
        for b in JointName::bones() {
            let n = Limb::of_bone(b).map_or(v_c, |l| limb_normals[l.index()]);
            alphas[b.index()] = match project_bone(bone(b), n) {
                Some((a, _)) => a,
                None => {
                    fallback = true;
                    self.state
                        .previous_alphas
                        .map_or_else(|| rest_alpha(b), |p| p[b.index()])
                }
            };
        }

        let scale = self.scale();
        let skel_root = joints[JointName::RootHip.index()];
        let root = match self.state.previous_skeleton_root {
            None => Vec3::new(skel_root.x * scale, 0.0, skel_root.z * scale),
            Some(prev) => update_root(self.state.root, skel_root - prev, self.skeleton_leg, self.rig.leg_length)?,
        };
        let lengths = &view.bone_lengths;
        let mut pos = *rest;
        pos.set(JointName::RootHip, rest.get(JointName::RootHip) - Vec2::new(0.0, root.y));
        for b in JointName::bones() {
            let a = alphas[b.index()];
            let p = pos.get(b.parent().expect("bone"));
            pos.set(b, p + Vec2::new(a.cos(), -a.sin()) * lengths.get(b));
        }

        let base = view.variants[0].key;
        let foot_key = select_foot_variant(&pos, self.state.previous_feet, base);
        let variant = view.variant_for(foot_key);
        let levels = cfg.discrete_levels;
        let part_transforms = view
            .parts
            .iter()
            .map(|p| interpolate_part_transform(p, theta, levels))
            .collect();
        let part_translations = effective_translations(view, theta, levels);
        let order = render_order(joints, v_c, swapped);

        self.state = RetargetState {
            previous_normals: Some(limb_normals),
            previous_forward: Some(fwd),
            previous_side: Some(side),
            previous_swap: Some(swapped),
            previous_texture: Some(texture),
            previous_alphas: Some(alphas),
            previous_feet: [Some(foot_key.left), Some(foot_key.right)],
            previous_skeleton_root: Some(skel_root),
            root,
        };
        Ok(FramePose2D {
            theta,
            side,
            texture,
            swapped,
            foot_key,
            variant,
            joints: pos,
            alphas,
            part_transforms,
            part_translations,
            render_order: order,
            plane_origin: Vec3::new(root.x, 0.0, root.z),
            plane_normal: v_c,
            limb_normals,
            fallback,
        })
    }
}

fn forward_from_joints(j: &SkeletonJoints) -> Option<Vec2> {
    let pose = crate::motion::Pose { positions: j.to_vec() };
    let map = crate::motion::ResolvedMap {
        indices: std::array::from_fn(|i| i),
    };
    skeleton_forward(&pose, &map)
}


/// The authored pose of one view facing the camera (θ = π): rest keypoints,
/// base foot variant, untranslated parts.
pub fn rest_pose(rig: &CharacterRig, side: Side, config: &RetargetConfig) -> FramePose2D {
    let view = rig.view(side);
    let rest = view.keypoints;
    let mut alphas = [0.0; JOINT_COUNT];
    for b in JointName::bones() {
        let d = rest.get(b) - rest.get(b.parent().expect("bone"));
        alphas[b.index()] = (-d.y).atan2(d.x);
    }
    let v_c = Vec3::z();
    FramePose2D {
        theta: PI,
        side,
        texture: TextureSide::Front,
        swapped: false,
        foot_key: view.variants[0].key,
        variant: 0,
        joints: rest,
        alphas,
        part_transforms: view
            .parts
            .iter()
            .map(|p| interpolate_part_transform(p, PI, config.discrete_levels))
            .collect(),
        part_translations: effective_translations(view, PI, config.discrete_levels),
        render_order: JointName::bones().collect(),
        plane_origin: Vec3::zeros(),
        plane_normal: v_c,
        limb_normals: [v_c; 4],
        fallback: false,
    }
}
