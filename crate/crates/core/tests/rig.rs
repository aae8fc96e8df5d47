use std::collections::BTreeSet;
use vdrig::annotation::validate;
use vdrig::fixtures;
use vdrig::raster::BinaryMask;
use vdrig::rig::{build_rig, load_bundle, save_bundle, texture_file_name, CharacterRig, RigConfig, RigError, VariantKey};
use vdrig::{JointName, Side, Vec2};

fn rig(scale: u32) -> CharacterRig {
    let (a, img) = fixtures::figure(scale);
    build_rig(&a, &img, &RigConfig::default()).unwrap()
}

fn flip(m: &BinaryMask) -> BinaryMask {
    let w = m.width();
    BinaryMask::from_fn(w, m.height(), |x, y| m.get(w - 1 - x, y))
}

fn flip_key(k: VariantKey) -> VariantKey {
    VariantKey::new(k.left.opposite(), k.right.opposite())
}

#[test]
fn both_feet_oriented_gives_four_variants_and_eight_textures_per_view() {
    let r = rig(1);
    for side in [Side::Left, Side::Right] {
        let v = r.view(side);
        assert_eq!(v.variants.len(), 4);
        assert_eq!(v.texture_count(), 8);
        let keys: BTreeSet<String> = v.variants.iter().map(|x| x.key.code()).collect();
        assert_eq!(keys.len(), 4);
    }
    // The base variant keeps the feet as drawn (both pointing left).
    assert_eq!(r.view(Side::Left).variants[0].key.code(), "ll");
    assert_eq!(r.view(Side::Right).variants[0].key.code(), "ll");
}

#[test]
fn textures_cover_every_variant_mask() {
    let r = rig(1);
    for v in &r.views {
        for var in &v.variants {
            assert_eq!(var.front.dimensions(), r.canvas.size());
            for (x, y) in var.mask.iter_set() {
                assert!(var.front.get_pixel(x, y)[3] > 0, "front hole at {x},{y}");
                assert!(var.back.get_pixel(x, y)[3] > 0, "back hole at {x},{y}");
            }
            assert!(var.mesh.is_edge_connected());
            let area = var.mask.count() as f64;
            assert!((var.mesh.total_area() - area).abs() < 0.05 * area);
        }
    }
}

#[test]
fn mesh_triangles_respect_the_area_bound() {
    let (a, img) = fixtures::figure(1);
    let cfg = RigConfig { max_triangle_area: Some(60.0), ..RigConfig::default() };
    let r = build_rig(&a, &img, &cfg).unwrap();
    for v in &r.views {
        for var in &v.variants {
            for t in 0..var.mesh.triangles.len() {
                assert!(var.mesh.signed_area(t).abs() <= 60.0 + 1e-9);
            }
        }
    }
}

#[test]
fn back_texture_hides_the_face_features() {
    let r = rig(1);
    let v = r.view(Side::Left);
    let var = &v.variants[0];
    let eyes = v.parts.iter().find(|p| p.id == "eyes").unwrap();
    let mask = eyes.mask.as_ref().unwrap();
    let dark = |img: &image::RgbaImage| mask.iter_set().filter(|&(x, y)| img.get_pixel(x, y)[0] < 60).count();
    // Moving parts come from their own layers, so neither base texture keeps them.
    assert_eq!(dark(&var.front), 0);
    assert_eq!(dark(&var.back), 0);
    assert!(eyes.layer.is_some());
}

#[test]
fn no_cue_figure_has_identical_views() {
    let (a, img) = fixtures::no_cue_figure(1);
    let r = build_rig(&a, &img, &RigConfig::default()).unwrap();
    let (l, rr) = (r.view(Side::Left), r.view(Side::Right));
    assert_eq!(l.variants.len(), 1);
    assert_eq!(l.mask, rr.mask);
    assert_eq!(l.keypoints, rr.keypoints);
    for (a, b) in l.variants.iter().zip(&rr.variants) {
        assert_eq!(a.mask, b.mask);
        assert!(a.front == b.front && a.back == b.back, "textures differ");
        assert_eq!(a.mesh.vertices, b.mesh.vertices);
        assert_eq!(a.mesh.triangles, b.mesh.triangles);
    }
    for (p, q) in l.parts.iter().zip(&rr.parts) {
        assert_eq!(p.layer, q.layer);
        assert_eq!(p.anchor, q.anchor);
    }
}

#[test]
fn mirrored_drawing_swaps_the_views() {
    let (a, img) = fixtures::figure(1);
    let (m, mimg) = fixtures::mirrored(&a, &img);
    let r = build_rig(&a, &img, &RigConfig::default()).unwrap();
    let rm = build_rig(&m, &mimg, &RigConfig::default()).unwrap();
    let w = f64::from(r.canvas.width);
    for side in [Side::Left, Side::Right] {
        let (v, vm) = (r.view(side), rm.view(side.opposite()));
        assert_eq!(flip(&v.mask), vm.mask);
        for j in JointName::ALL {
            let p = v.keypoints.get(j);
            assert_eq!(Vec2::new(w - 1.0 - p.x, p.y), vm.keypoints.get(j), "{j}");
        }
        for var in &v.variants {
            let other = &vm.variants[vm.variant(flip_key(var.key)).unwrap()];
            assert_eq!(flip(&var.mask), other.mask, "{side} {}", var.key);
        }
    }
}

#[test]
fn mirroring_twice_is_the_identity() {
    let (a, img) = fixtures::figure(1);
    let (m, mimg) = fixtures::mirrored(&a, &img);
    let (back, bimg) = fixtures::mirrored(&m, &mimg);
    assert_eq!(back, a);
    assert_eq!(bimg, img);
}

#[test]
fn face_keyviews_slide_to_the_head_outline() {
    let r = rig(1);
    let v = r.view(Side::Left);
    let face = v.parts.iter().find(|p| p.id == "face").unwrap();
    let [kl, kr] = face.keyviews.unwrap();
    // Oracle: the union of the feature masks shifted one pixel at a time
    // while it stays inside the head segment region of this view.
    let features = v
        .parts
        .iter()
        .filter(|p| p.id != "face")
        .fold(BinaryMask::new(r.canvas.width, r.canvas.height), |acc, p| acc.union(p.mask.as_ref().unwrap()));
    let (region, _) = face.clip.clone().unwrap();
    let reach = |dir: i64| {
        let mut d = 0;
        loop {
            let s = features.translated(dir * (d + 1), 0);
            if s.count() == features.count() && s.is_subset_of(&region) {
                d += 1;
            } else {
                break d;
            }
        }
    };
    assert_eq!(kl.translation(), Vec2::new(-(reach(-1) as f64), 0.0));
    assert_eq!(kr.translation(), Vec2::new(reach(1) as f64, 0.0));
    assert!(kl.translation().x < -5.0);
}

#[test]
fn anchors_and_leg_length() {
    let r = rig(1);
    let kp = r.view(Side::Left).keypoints;
    let leg = |h, k, f| (kp.get(k) - kp.get(h)).norm() + (kp.get(f) - kp.get(k)).norm();
    let expect = (leg(JointName::LeftHip, JointName::LeftKnee, JointName::LeftFoot)
        + leg(JointName::RightHip, JointName::RightKnee, JointName::RightFoot))
        / 2.0;
    assert!((r.leg_length - expect).abs() < 1e-12);
    for v in &r.views {
        for p in &v.parts {
            if let Some(m) = &p.mask {
                assert!(m.centroid().is_some());
            }
            assert_eq!(p.attachments.len(), v.variants.len());
        }
    }
}

#[test]
fn degenerate_leg_is_unsupported() {
    let (mut a, img) = fixtures::figure(1);
    a.keypoints.set(JointName::RightKnee, a.keypoints.get(JointName::RightFoot));
    assert!(validate(&a).has("degenerate_leg"));
    assert!(matches!(build_rig(&a, &img, &RigConfig::default()), Err(RigError::UnsupportedFigure(_))));
    a.keypoints.set(JointName::RightKnee, Vec2::new(-10.0, 0.0));
    assert!(matches!(build_rig(&a, &img, &RigConfig::default()), Err(RigError::Validation(_))));
}

#[test]
fn bundle_round_trips() {
    let r = rig(1);
    let dir = tempfile::tempdir().unwrap();
    save_bundle(&r, dir.path()).unwrap();
    let pngs = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().contains(".var-"))
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with(".png"))
        .count();
    assert_eq!(pngs, 16);
    assert!(dir.path().join(texture_file_name(Side::Left, r.views[0].variants[0].key, true)).exists());
    let back = load_bundle(dir.path()).unwrap();
    assert_eq!(back.canvas, r.canvas);
    assert_eq!(back.leg_length, r.leg_length);
    for (v, w) in r.views.iter().zip(&back.views) {
        assert_eq!(v.keypoints, w.keypoints);
        assert_eq!(v.mask, w.mask);
        for (a, b) in v.variants.iter().zip(&w.variants) {
            assert_eq!(a.key, b.key);
            assert_eq!(a.mesh, b.mesh);
            assert!(a.front == b.front && a.back == b.back);
            let t: Vec<Vec2> = a.keypoints.as_array().iter().map(|p| p + Vec2::new(1.5, -2.0)).collect();
            assert_eq!(a.arap.solve(&t), b.arap.solve(&t));
        }
        for (p, q) in v.parts.iter().zip(&w.parts) {
            assert_eq!(p.anchor, q.anchor);
            assert_eq!(p.layer, q.layer);
            assert_eq!(p.attachments, q.attachments);
            assert_eq!(p.keyviews.map(|k| k.map(|t| t.translation())), q.keyviews.map(|k| k.map(|t| t.translation())));
            assert_eq!(p.clip, q.clip);
        }
    }
}

#[test]
fn corrupt_texture_is_a_decode_error() {
    let r = rig(1);
    let dir = tempfile::tempdir().unwrap();
    save_bundle(&r, dir.path()).unwrap();
    std::fs::write(dir.path().join(texture_file_name(Side::Left, r.views[0].variants[0].key, false)), b"not a png").unwrap();
    assert!(load_bundle(dir.path()).is_err());
}

#[test]
fn build_is_deterministic() {
    let (a, b) = (rig(1), rig(1));
    for (v, w) in a.views.iter().zip(&b.views) {
        for (x, y) in v.variants.iter().zip(&w.variants) {
            assert_eq!(x.mesh, y.mesh);
            assert!(x.front == y.front && x.back == y.back);
        }
    }
}
