use image::RgbaImage;
use proptest::prelude::*;
use std::f64::consts::PI;
use vdrig::deform::{composite, frame_packet, place_parts, DeformedMesh, FramePacket, Placement};
use vdrig::fixtures;
use vdrig::retarget::{rest_pose, Ablation, RetargetConfig, Retargeter, TextureSide};
use vdrig::rig::{build_rig, CharacterRig, RigConfig, VariantKey};
use vdrig::{JointName, Mat3, Side, Vec2};

fn rig() -> CharacterRig {
    let (a, img) = fixtures::figure(1);
    build_rig(&a, &img, &RigConfig::default()).unwrap()
}

fn rotate(v: Vec2, angle: f64) -> Vec2 {
    let (s, c) = angle.sin_cos();
    Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y)
}

fn max_error(a: &[Vec2], b: &[Vec2]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn part_index(r: &CharacterRig, side: Side, id: &str) -> usize {
    r.view(side).parts.iter().position(|p| p.id == id).unwrap()
}

fn rest_packet(r: &CharacterRig, side: Side) -> FramePacket {
    frame_packet(r, &rest_pose(r, side, &RetargetConfig::default()), 0, None).0
}

fn rgb(img: &RgbaImage, p: Vec2) -> [u8; 4] {
    img.get_pixel(p.x.round() as u32, p.y.round() as u32).0
}

#[test]
fn arap_reproduces_identity_translation_and_rotation() {
    let r = rig();
    for view in &r.views {
        for var in &view.variants {
            let sys = &var.arap;
            let rest = sys.rest_vertices().to_vec();
            let handles = sys.handle_rest_positions();
            assert_eq!(handles.len(), 16);

            let id = sys.solve(&handles);
            assert!(max_error(&id.vertices, &rest) < 1e-6);

            let t = Vec2::new(13.25, -7.5);
            let moved = sys.solve(&handles.iter().map(|h| h + t).collect::<Vec<_>>());
            let want: Vec<Vec2> = rest.iter().map(|v| v + t).collect();
            assert!(max_error(&moved.vertices, &want) < 1e-6);

            let c = handles.iter().sum::<Vec2>() / handles.len() as f64;
            let a = 30f64.to_radians();
            let turned = sys.solve(&handles.iter().map(|h| c + rotate(h - c, a)).collect::<Vec<_>>());
            let want: Vec<Vec2> = rest.iter().map(|v| c + rotate(v - c, a)).collect();
            let err = max_error(&turned.vertices, &want);
            assert!(err < 1e-3, "rotation error {err}");
        }
    }
}

#[test]
fn arap_solve_is_deterministic_and_moves_handles_to_targets() {
    let r = rig();
    let var = &r.view(Side::Left).variants[0];
    let mut targets = var.arap.handle_rest_positions();
    targets[JointName::LeftHand.index()] += Vec2::new(-10.0, -25.0);
    let a = var.arap.solve(&targets);
    assert_eq!(a, var.arap.solve(&targets));
    let tris = &var.mesh.triangles;
    for (h, t) in var.arap.handles().iter().zip(&targets) {
        assert!((h.position(&a.vertices, tris) - t).norm() < 1.0);
    }
}

#[test]
fn parts_follow_rigid_motions_of_the_mesh() {
    let r = rig();
    let view = r.view(Side::Left);
    let var = &view.variants[0];
    let rest = &var.mesh.vertices;
    let zero = vec![Vec2::zeros(); view.parts.len()];
    let rigid = |angle: f64, t: Vec2| {
        let m = Mat3::new(angle.cos(), -angle.sin(), t.x, angle.sin(), angle.cos(), t.y, 0.0, 0.0, 1.0);
        let d = DeformedMesh {
            vertices: rest.iter().map(|v| rotate(*v, angle) + t).collect(),
        };
        (m, d)
    };
    for (angle, t) in [(0.0, Vec2::zeros()), (0.0, Vec2::new(20.0, -4.0)), (PI / 2.0, Vec2::new(300.0, 10.0))] {
        let (want, d) = rigid(angle, t);
        for m in place_parts(&d, view, 0, &zero, None) {
            assert!((m - want).abs().max() < 1e-9, "{angle} {t:?}: {m}");
        }
    }
    // A translated part lands at the authored anchor plus its translation.
    let face = part_index(&r, Side::Left, "face");
    let mut shift = zero.clone();
    shift[face] = Vec2::new(6.0, 0.0);
    let (_, d) = rigid(0.0, Vec2::zeros());
    let m = place_parts(&d, view, 0, &shift, None)[face];
    let a = view.parts[face].anchor;
    assert!(((m * a.push(1.0)).xy() - a - shift[face]).norm() < 1e-9);
}

#[test]
fn collapsed_attachment_keeps_the_previous_placement() {
    let r = rig();
    let view = r.view(Side::Left);
    let d = DeformedMesh {
        vertices: vec![Vec2::new(5.0, 5.0); view.variants[0].mesh.vertices.len()],
    };
    let prev: Vec<Mat3> = (0..view.parts.len())
        .map(|i| Mat3::new_translation(&Vec2::new(i as f64, 1.0)))
        .collect();
    let zero = vec![Vec2::zeros(); view.parts.len()];
    assert_eq!(place_parts(&d, view, 0, &zero, Some(&prev)), prev);
}

fn psnr_inside(a: &RgbaImage, b: &RgbaImage, mask: &vdrig::raster::BinaryMask) -> f64 {
    let (mut se, mut n) = (0.0, 0usize);
    for (x, y, p) in a.enumerate_pixels() {
        if !mask.get(x, y) {
            continue;
        }
        let q = b.get_pixel(x, y);
        for c in 0..3 {
            se += (f64::from(p[c]) - f64::from(q[c])).powi(2);
        }
        n += 3;
    }
    let mse = se / n as f64;
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0f64 * 255.0 / mse).log10()
    }
}

#[test]
fn rest_pose_reproduces_the_drawing() {
    let (a, img) = fixtures::figure(1);
    let r = build_rig(&a, &img, &RigConfig::default()).unwrap();
    let source = r.canvas.image(&img);
    let mask = r.canvas.mask(&a.figure_mask);
    let out = composite(&r, &rest_packet(&r, Side::Left), None).unwrap();
    let psnr = psnr_inside(&out, &source, &mask);
    assert!(psnr > 35.0, "psnr {psnr}");
    // Outside the figure nothing is drawn.
    let stray = out
        .enumerate_pixels()
        .filter(|(x, y, p)| p[3] > 0 && !mask.get(*x, *y))
        .count();
    assert!(stray <= mask.count() / 100, "{stray} stray pixels");
}

#[test]
fn background_is_kept_and_checked() {
    let (a, img) = fixtures::figure(1);
    let r = build_rig(&a, &img, &RigConfig::default()).unwrap();
    let (w, h) = r.canvas.size();
    let bg = RgbaImage::from_pixel(w, h, image::Rgba([90, 120, 30, 255]));
    let p = rest_packet(&r, Side::Left);
    let out = composite(&r, &p, Some(&bg)).unwrap();
    assert!(out.pixels().all(|p| p[3] == 255));
    assert_eq!(out.get_pixel(0, 0), bg.get_pixel(0, 0));
    let plain = composite(&r, &p, None).unwrap();
    let mask = r.canvas.mask(&a.figure_mask);
    assert!(mask.iter_set().all(|(x, y)| out.get_pixel(x, y) == plain.get_pixel(x, y)));
    assert!(composite(&r, &p, Some(&RgbaImage::new(3, 3))).is_err());
}

#[test]
fn back_view_hides_the_face_features() {
    let r = rig();
    let off = r.canvas.offset();
    let eye = Vec2::new(70.0, 47.0) - off;
    let mouth = Vec2::new(80.0, 68.0) - off;
    let ink = [24, 24, 28, 255];
    let front = composite(&r, &rest_packet(&r, Side::Left), None).unwrap();
    assert_eq!(rgb(&front, eye), ink);

    let mut back = rest_packet(&r, Side::Left);
    back.texture = TextureSide::Back;
    let out = composite(&r, &back, None).unwrap();
    for p in [eye, mouth] {
        assert_eq!(rgb(&out, p)[3], 255);
        assert_ne!(rgb(&out, p), rgb(&front, p));
    }

    // A real frame seen from behind.
    let m = fixtures::motion(fixtures::t_pose_clip(1));
    let joints = m.joints(&m.pose(0).unwrap());
    let mut rt = Retargeter::new(&r, RetargetConfig::default(), Ablation::default(), m.leg_length().unwrap()).unwrap();
    let pose = rt.step(&joints, vdrig::Vec3::new(0.0, 30.0, -600.0)).unwrap();
    assert!(pose.theta < 0.01 || pose.theta > 2.0 * PI - 0.01);
    assert_eq!(pose.texture, TextureSide::Back);
    let (packet, _) = frame_packet(&r, &pose, 0, None);
    let img = composite(&r, &packet, None).unwrap();
    let view = r.view(packet.side);
    let eyes = view.parts[part_index(&r, packet.side, "eyes")].mask.as_ref().unwrap();
    let head = view.keypoints.get(JointName::HeadTop);
    // Sampled around where the eyes would be after the head moved.
    let shift = pose.joints.get(JointName::HeadTop) - head;
    let inked = eyes
        .iter_set()
        .filter(|&(x, y)| {
            let q = Vec2::new(f64::from(x), f64::from(y)) + shift;
            rgb(&img, q) == ink
        })
        .count();
    assert!(inked * 10 < eyes.count(), "{inked} of {} eye pixels inked", eyes.count());
}

#[test]
fn enclosed_parts_are_clipped_to_their_parent() {
    let r = rig();
    let eyes = part_index(&r, Side::Left, "eyes");
    let mut p = rest_packet(&r, Side::Left);
    let slot = p.placements.iter().position(|q| q.part as usize == eyes).unwrap();
    let t = Vec2::new(45.0, 0.0);
    let moved = Mat3::new_translation(&t) * p.placements[slot].matrix();
    p.placements[slot] = Placement::from_matrix(eyes, &moved);
    let target = Vec2::new(90.0, 47.0) - r.canvas.offset() + t;

    let clipped = composite(&r, &p, None).unwrap();
    assert_eq!(rgb(&clipped, target)[3], 0);

    let mut unclipped = r.clone();
    unclipped.views[Side::Left.index()].parts[eyes].clip = None;
    let free = composite(&unclipped, &p, None).unwrap();
    assert_eq!(rgb(&free, target), [24, 24, 28, 255]);
}

#[test]
fn nearer_bone_owns_the_overlap() {
    let r = rig();
    let view = r.view(Side::Left);
    let mut pose = rest_pose(&r, Side::Left, &RetargetConfig::default());
    // Lower the left arm and fold the forearm across the chest.
    let sh = pose.joints.get(JointName::LeftShoulder);
    let lens = &view.bone_lengths;
    let elbow = sh + Vec2::new(0.0, lens.get(JointName::LeftElbow));
    let hand = elbow - Vec2::new(lens.get(JointName::LeftHand), 0.0);
    pose.joints.set(JointName::LeftElbow, elbow);
    pose.joints.set(JointName::LeftHand, hand);
    let mid = (elbow + hand) / 2.0;
    let torso_last: Vec<JointName> = JointName::bones()
        .filter(|&b| b != JointName::Torso)
        .chain([JointName::Torso])
        .collect();
    let hand_last: Vec<JointName> = JointName::bones()
        .filter(|&b| b != JointName::LeftHand)
        .chain([JointName::LeftHand])
        .collect();
    let skin = [246, 208, 170, 255];
    let mut colors = Vec::new();
    for order in [torso_last, hand_last] {
        pose.render_order = order;
        let (packet, _) = frame_packet(&r, &pose, 0, None);
        let img = composite(&r, &packet, None).unwrap();
        colors.push(rgb(&img, mid));
    }
    assert_ne!(colors[0], skin);
    assert_eq!(colors[1], skin);
}

#[test]
fn compositing_is_deterministic() {
    let r = rig();
    let m = fixtures::motion(fixtures::walk_clip(60));
    let cam = vdrig::motion::CameraTrack::Static {
        position: fixtures::front_camera(),
    };
    let poses = vdrig::retarget::retarget_clip(&r, &m, &cam, &RetargetConfig::default(), Ablation::default()).unwrap();
    let mut prev = None;
    for (f, pose) in poses.iter().enumerate().step_by(7) {
        let (a, placed) = frame_packet(&r, pose, f as u32, prev.as_deref());
        let (b, _) = frame_packet(&r, pose, f as u32, prev.as_deref());
        assert_eq!(a.encode(), b.encode());
        assert_eq!(composite(&r, &a, None).unwrap(), composite(&r, &b, None).unwrap());
        prev = Some(placed);
    }
}

#[test]
fn packet_rejects_mismatched_meshes() {
    let r = rig();
    let mut p = rest_packet(&r, Side::Left);
    p.vertices.pop();
    assert!(composite(&r, &p, None).is_err());
    let mut p = rest_packet(&r, Side::Left);
    p.variant = VariantKey::new(Side::Right, Side::Right);
    p.vertices.clear();
    assert!(composite(&r, &p, None).is_err());
}

fn joint() -> impl Strategy<Value = JointName> {
    (1usize..16).prop_map(|i| JointName::from_index(i).unwrap())
}

fn side() -> impl Strategy<Value = Side> {
    prop_oneof![Just(Side::Left), Just(Side::Right)]
}

prop_compose! {
    fn packet()(
        frame in any::<u32>(),
        theta in 0f32..6.3,
        s in side(),
        l in side(),
        rt in side(),
        back in any::<bool>(),
        swapped in any::<bool>(),
        origin in prop::array::uniform3(-1e4f32..1e4),
        normal in prop::array::uniform3(-1f32..1.0),
        vertices in prop::collection::vec(prop::array::uniform2(-1e4f32..1e4), 0..64),
        placements in prop::collection::vec((any::<u16>(), prop::array::uniform9(-1e3f32..1e3)), 0..6),
        order in prop::collection::vec(joint(), 0..15),
    ) -> FramePacket {
        FramePacket {
            frame,
            theta,
            side: s,
            variant: VariantKey::new(l, rt),
            texture: if back { TextureSide::Back } else { TextureSide::Front },
            swapped,
            plane_origin: origin,
            plane_normal: normal,
            vertices,
            placements: placements.into_iter().map(|(part, transform)| Placement { part, transform }).collect(),
            order,
        }
    }
}

proptest! {
    #[test]
    fn packets_survive_both_encodings(p in packet()) {
        let bytes = p.encode();
        prop_assert_eq!(&FramePacket::decode(&bytes).unwrap(), &p);
        prop_assert_eq!(&FramePacket::from_json(&p.to_json()).unwrap(), &p);
        if !bytes.is_empty() {
            prop_assert!(FramePacket::decode(&bytes[..bytes.len() - 1]).is_err());
        }
    }
}
