//! Synthetic drawings and motion clips for tests, benchmarks and the bundled samples.

use crate::annotation::{
    AnnotationSet, FootAnnotation, JointKeypoints, Orientation, ParentRef, PartRegion, SilhouetteSegment, Translate,
};
use crate::motion::{Channel, JointMap, MotionClip, SkeletalMotion, SkeletonHierarchy};
use crate::raster::BinaryMask;
use crate::{JointName, Side, Vec2, Vec3};
use image::{Rgba, RgbaImage};
use nalgebra::Rotation3;
use std::f64::consts::PI;

/// Base canvas of the synthetic figure before scaling.
pub const FIGURE_SIZE: (u32, u32) = (160, 240);

fn disc(c: (f64, f64), r: f64) -> impl Fn(f64, f64) -> bool {
    move |x, y| (x - c.0).powi(2) + (y - c.1).powi(2) <= r * r
}

fn ellipse(c: (f64, f64), rx: f64, ry: f64) -> impl Fn(f64, f64) -> bool {
    move |x, y| ((x - c.0) / rx).powi(2) + ((y - c.1) / ry).powi(2) <= 1.0
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> impl Fn(f64, f64) -> bool {
    move |x, y| x >= x0 && x <= x1 && y >= y0 && y <= y1
}

fn capsule(a: (f64, f64), b: (f64, f64), r: f64) -> impl Fn(f64, f64) -> bool {
    move |x, y| {
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let t = (((x - a.0) * dx + (y - a.1) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
        (x - a.0 - t * dx).powi(2) + (y - a.1 - t * dy).powi(2) <= r * r
    }
}

/// Point inside triangle (any winding).
fn triangle(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> impl Fn(f64, f64) -> bool {
    move |x, y| {
        let s = |p: (f64, f64), q: (f64, f64)| (q.0 - p.0) * (y - p.1) - (q.1 - p.1) * (x - p.0);
        let (d1, d2, d3) = (s(a, b), s(b, c), s(c, a));
        !((d1 < 0.0 || d2 < 0.0 || d3 < 0.0) && (d1 > 0.0 || d2 > 0.0 || d3 > 0.0))
    }
}

const KEYPOINTS: [(f64, f64); 16] = [
    (80.0, 148.0),
    (80.0, 115.0),
    (80.0, 82.0),
    (80.0, 34.0),
    (96.0, 90.0),
    (128.0, 120.0),
    (140.0, 150.0),
    (64.0, 90.0),
    (32.0, 120.0),
    (20.0, 150.0),
    (92.0, 150.0),
    (95.0, 187.0),
    (98.0, 224.0),
    (68.0, 150.0),
    (65.0, 187.0),
    (62.0, 224.0),
];

const SKIN: [u8; 3] = [246, 208, 170];
const HAIR: [u8; 3] = [104, 62, 30];
const SHIRT_A: [u8; 3] = [58, 118, 204];
const SHIRT_B: [u8; 3] = [236, 200, 60];
const PANTS: [u8; 3] = [44, 52, 110];
const SHOES: [u8; 3] = [150, 40, 40];
const INK: [u8; 3] = [24, 24, 28];
const NOSE: [u8; 3] = [214, 140, 110];
const MOUTH: [u8; 3] = [200, 50, 60];

/// The synthetic test figure: head with an asymmetric hair cap and tuft,
/// striped shirt, bent arms, straight legs with both feet pointing left, and
/// a face (eyes, left-pointing nose, mouth) that slides toward the facing
/// side. `scale` multiplies every dimension of the 160×240 base drawing.
pub fn figure(scale: u32) -> (AnnotationSet, RgbaImage) {
    figure_with_cues(scale, true)
}

/// The same drawing with every orientation cue removed.
pub fn no_cue_figure(scale: u32) -> (AnnotationSet, RgbaImage) {
    figure_with_cues(scale, false)
}

fn figure_with_cues(scale: u32, cues: bool) -> (AnnotationSet, RgbaImage) {
    let s = f64::from(scale.max(1));
    let (w, h) = (FIGURE_SIZE.0 * scale.max(1), FIGURE_SIZE.1 * scale.max(1));
    let k = |i: usize| KEYPOINTS[i];

    let head = disc((80.0, 50.0), 28.0);
    let hair_cap = |x: f64, y: f64| disc((80.0, 50.0), 28.0)(x, y) && y < 32.0;
    let tuft = ellipse((104.0, 29.0), 11.0, 6.0);
    let hair = move |x: f64, y: f64| hair_cap(x, y) || tuft(x, y);
    let neck = rect(72.0, 70.0, 88.0, 86.0);
    let torso = rect(56.0, 84.0, 104.0, 152.0);
    let arm = |a: usize, b: usize, c: usize| {
        let (u, l) = (capsule(k(a), k(b), 6.0), capsule(k(b), k(c), 5.5));
        move |x: f64, y: f64| u(x, y) || l(x, y)
    };
    let (larm, rarm) = (arm(4, 5, 6), arm(7, 8, 9));
    let leg = |a: usize, b: usize, c: usize| {
        let (u, l) = (capsule(k(a), k(b), 7.0), capsule(k(b), k(c), 6.0));
        move |x: f64, y: f64| u(x, y) || l(x, y)
    };
    let (lleg, rleg) = (leg(10, 11, 12), leg(13, 14, 15));
    let shoe = |f: (f64, f64)| rect(f.0 - 16.0, 218.0, f.0 + 6.0, 232.0);
    let (lshoe, rshoe) = (shoe(k(12)), shoe(k(15)));

    let eyes = |x: f64, y: f64| disc((70.0, 47.0), 3.6)(x, y) || disc((90.0, 47.0), 3.6)(x, y);
    let nose = triangle((73.0, 59.0), (83.0, 54.0), (83.0, 63.0));
    let mouth = ellipse((80.0, 68.0), 7.5, 2.6);

    let at = |x: u32, y: u32| (f64::from(x) / s, f64::from(y) / s);
    let figure_mask = BinaryMask::from_fn(w, h, |x, y| {
        let (x, y) = at(x, y);
        head(x, y)
            || hair(x, y)
            || neck(x, y)
            || torso(x, y)
            || larm(x, y)
            || rarm(x, y)
            || lleg(x, y)
            || rleg(x, y)
            || lshoe(x, y)
            || rshoe(x, y)
    });
    let hair_mask = BinaryMask::from_fn(w, h, |x, y| {
        let (x, y) = at(x, y);
        hair(x, y)
    })
    .intersection(&figure_mask);
    let head_mask = BinaryMask::from_fn(w, h, |x, y| {
        let (x, y) = at(x, y);
        head(x, y)
    })
    .difference(&hair_mask);
    let body_mask = figure_mask.difference(&head_mask).difference(&hair_mask);
    let part_mask = |f: &dyn Fn(f64, f64) -> bool| {
        BinaryMask::from_fn(w, h, |x, y| {
            let (x, y) = at(x, y);
            f(x, y)
        })
        .intersection(&head_mask)
    };
    let eyes_mask = part_mask(&eyes);
    let nose_mask = part_mask(&nose);
    let mouth_mask = part_mask(&mouth);

    let mut img = RgbaImage::from_pixel(w, h, Rgba([255, 255, 255, 255]));
    for (px, py, p) in img.enumerate_pixels_mut() {
        if !figure_mask.get(px, py) {
            continue;
        }
        let (x, y) = at(px, py);
        let c = if eyes_mask.get(px, py) {
            INK
        } else if nose_mask.get(px, py) {
            NOSE
        } else if mouth_mask.get(px, py) {
            MOUTH
        } else if hair_mask.get(px, py) {
            HAIR
        } else if head_mask.get(px, py) || neck(x, y) && !torso(x, y) {
            SKIN
        } else if lshoe(x, y) || rshoe(x, y) {
            SHOES
        } else if torso(x, y) {
            if (y / 8.0).floor() as i64 % 2 == 0 {
                SHIRT_A
            } else {
                SHIRT_B
            }
        } else if larm(x, y) || rarm(x, y) {
            SKIN
        } else {
            PANTS
        };
        let edge = [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)]
            .iter()
            .any(|(dx, dy)| !figure_mask.get_i(i64::from(px) + dx, i64::from(py) + dy));
        let c = if edge { INK } else { c };
        *p = Rgba([c[0], c[1], c[2], 255]);
    }

    let keypoints = JointKeypoints::new(KEYPOINTS.map(|(x, y)| Vec2::new(x * s, y * s)));
    let cue = |o: Orientation| if cues { o } else { Orientation::None };
    let segments = vec![
        SilhouetteSegment {
            id: "body".into(),
            mask: body_mask,
            orientation: Orientation::None,
            parent: ParentRef::Figure,
        },
        SilhouetteSegment {
            id: "head".into(),
            mask: head_mask,
            orientation: Orientation::None,
            parent: ParentRef::Segment(0),
        },
        SilhouetteSegment {
            id: "hair".into(),
            mask: hair_mask,
            orientation: cue(Orientation::Left),
            parent: ParentRef::Segment(1),
        },
    ];
    let feature = |id: &str, mask: BinaryMask, direction: Orientation| PartRegion {
        id: id.into(),
        mask: Some(mask),
        translate: Translate::None,
        direction,
        enclosed: true,
        hide_on_back: true,
        parent: ParentRef::Part(0),
    };
    let parts = vec![
        PartRegion {
            id: "face".into(),
            mask: None,
            translate: Translate::Smooth,
            direction: Orientation::None,
            enclosed: true,
            hide_on_back: false,
            parent: ParentRef::Segment(1),
        },
        feature("eyes", eyes_mask, Orientation::None),
        feature("nose", nose_mask, cue(Orientation::Left)),
        feature("mouth", mouth_mask, Orientation::None),
    ];
    let foot = |side| FootAnnotation {
        side,
        present: true,
        orientation: cue(Orientation::Left),
    };
    let set = AnnotationSet {
        image: "figure.png".into(),
        keypoints,
        figure_mask,
        segments,
        parts,
        feet: [foot(Side::Left), foot(Side::Right)],
    };
    (set, img)
}

fn flip_mask(m: &BinaryMask) -> BinaryMask {
    let w = m.width();
    BinaryMask::from_fn(w, m.height(), |x, y| m.get(w - 1 - x, y))
}

/// Horizontal mirror image of an annotated drawing. Keypoints move with the
/// pixels but keep their names; every facing is flipped.
pub fn mirrored(a: &AnnotationSet, image: &RgbaImage) -> (AnnotationSet, RgbaImage) {
    let w = f64::from(a.size().0);
    let mut m = a.clone();
    m.keypoints = a.keypoints.map(|_, p| Vec2::new(w - 1.0 - p.x, p.y));
    m.figure_mask = flip_mask(&a.figure_mask);
    for s in &mut m.segments {
        s.mask = flip_mask(&s.mask);
        s.orientation = s.orientation.flipped();
    }
    for p in &mut m.parts {
        p.mask = p.mask.as_ref().map(flip_mask);
        p.direction = p.direction.flipped();
    }
    for f in &mut m.feet {
        f.orientation = f.orientation.flipped();
    }
    (m, image::imageops::flip_horizontal(image))
}

// ---------------------------------------------------------------------------
// Motion

/// Frame rate of the synthetic clips.
pub const CLIP_FPS: f64 = 30.0;

/// Root height of the synthetic skeleton standing straight.
pub const ROOT_HEIGHT: f64 = 38.0;

const ZYX: [Channel; 3] = [Channel::Zrotation, Channel::Yrotation, Channel::Xrotation];

/// CMU-named skeleton (centimetres, y up, facing +z, its left at +x).
pub fn skeleton() -> SkeletonHierarchy {
    let mut joints: Vec<crate::motion::BvhJoint> = Vec::new();
    let mut channel_offset = 0;
    let mut add = |name: &str, parent: Option<usize>, o: (f64, f64, f64), end: bool| {
        let channels = if end {
            vec![]
        } else if parent.is_none() {
            let mut c = vec![Channel::Xposition, Channel::Yposition, Channel::Zposition];
            c.extend(ZYX);
            c
        } else {
            ZYX.to_vec()
        };
        let n = channels.len();
        joints.push(crate::motion::BvhJoint {
            name: name.into(),
            parent,
            offset: Vec3::new(o.0, o.1, o.2),
            channels,
            channel_offset,
            end_site: end,
        });
        channel_offset += n;
        joints.len() - 1
    };
    let hips = add("Hips", None, (0.0, 0.0, 0.0), false);
    let spine = add("Spine", Some(hips), (0.0, 6.0, 0.0), false);
    let spine1 = add("Spine1", Some(spine), (0.0, 6.0, 0.0), false);
    let neck = add("Neck", Some(spine1), (0.0, 10.0, 0.0), false);
    let head = add("Head", Some(neck), (0.0, 4.0, 0.0), false);
    add("Head_end", Some(head), (0.0, 8.0, 0.0), true);
    for (side, sx) in [("Left", 1.0), ("Right", -1.0)] {
        let sh = add(&format!("{side}Shoulder"), Some(spine1), (2.0 * sx, 8.0, 0.0), false);
        let arm = add(&format!("{side}Arm"), Some(sh), (4.0 * sx, 0.0, 0.0), false);
        let fore = add(&format!("{side}ForeArm"), Some(arm), (10.0 * sx, 0.0, 0.0), false);
        let hand = add(&format!("{side}Hand"), Some(fore), (9.0 * sx, 0.0, 0.0), false);
        add(&format!("{side}Hand_end"), Some(hand), (3.0 * sx, 0.0, 0.0), true);
    }
    for (side, sx) in [("Left", 1.0), ("Right", -1.0)] {
        let up = add(&format!("{side}UpLeg"), Some(hips), (4.0 * sx, 0.0, 0.0), false);
        let leg = add(&format!("{side}Leg"), Some(up), (0.0, -18.0, 0.0), false);
        let foot = add(&format!("{side}Foot"), Some(leg), (0.0, -18.0, 0.0), false);
        add(&format!("{side}Foot_end"), Some(foot), (0.0, -2.0, 4.0), true);
    }
    SkeletonHierarchy { joints }
}

/// Channel values for one frame. `heading` turns the whole body about +y
/// (radians); `aims` gives, per joint name, the body-frame direction its
/// first child should point in. Unaimed joints keep their parent's frame.
fn pose_row(h: &SkeletonHierarchy, root: Vec3, heading: f64, aims: &[(&str, Vec3)]) -> Vec<f64> {
    let mut body: Vec<Rotation3<f64>> = Vec::with_capacity(h.len());
    let mut row = Vec::with_capacity(h.channel_count());
    for (i, j) in h.joints.iter().enumerate() {
        let parent_body = j.parent.map_or_else(Rotation3::identity, |p| body[p]);
        let aim = aims.iter().find(|(n, _)| *n == j.name).map(|(_, d)| d.normalize());
        let child = h.children(i).next();
        let local = match (aim, child) {
            (Some(d), Some(c)) if j.parent.is_some() => {
                let o = h.joints[c].offset.normalize();
                let m = parent_body.inverse() * d;
                Rotation3::rotation_between(&o, &m).unwrap_or_else(|| {
                    let perp = if o.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
                    Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(o.cross(&perp)), PI)
                })
            }
            _ => Rotation3::identity(),
        };
        body.push(parent_body * local);
        if j.end_site {
            continue;
        }
        if j.parent.is_none() {
            row.extend([root.x, root.y, root.z, 0.0, heading.to_degrees(), 0.0]);
        } else {
            let (rx, ry, rz) = local.euler_angles();
            row.extend([rz.to_degrees(), ry.to_degrees(), rx.to_degrees()]);
        }
    }
    row
}

fn clip(rows: Vec<Vec<f64>>) -> MotionClip {
    MotionClip {
        frame_time: 1.0 / CLIP_FPS,
        frames: rows,
    }
}

/// Direction hanging down, tilted `fwd` toward +z and `out` sideways (radians).
fn down(out: f64, fwd: f64) -> Vec3 {
    Vec3::new(out.sin() * fwd.cos(), -out.cos() * fwd.cos(), fwd.sin())
}

/// Sagittal leg aims for thigh swing `swing` (forward positive) and knee bend `bend`.
fn leg_aims(side: &'static str, swing: f64, bend: f64) -> [(String, Vec3); 2] {
    [
        (format!("{side}UpLeg"), Vec3::new(0.0, -swing.cos(), swing.sin())),
        (format!("{side}Leg"), Vec3::new(0.0, -(swing - bend).cos(), (swing - bend).sin())),
    ]
}

fn rows_for(h: &SkeletonHierarchy, frames: usize, f: impl Fn(usize) -> (Vec3, f64, Vec<(String, Vec3)>)) -> Vec<Vec<f64>> {
    (0..frames)
        .map(|i| {
            let (root, heading, aims) = f(i);
            let aims: Vec<(&str, Vec3)> = aims.iter().map(|(n, d)| (n.as_str(), *d)).collect();
            pose_row(h, root, heading, &aims)
        })
        .collect()
}

/// Walk cycle along a circle of radius 80 cm, one lap over the clip, with
/// one stride cycle per second. Seen from a static camera the view angle
/// sweeps a full turn.
pub fn walk_clip(frames: usize) -> (SkeletonHierarchy, MotionClip) {
    let h = skeleton();
    let n = frames.max(1) as f64;
    let rows = rows_for(&h, frames, |i| {
        let t = i as f64 / CLIP_FPS;
        let phi = 2.0 * PI * i as f64 / n;
        let root = Vec3::new(80.0 * (1.0 - phi.cos()), ROOT_HEIGHT - 0.6 * (4.0 * PI * t).cos().abs(), 80.0 * phi.sin());
        let g = 2.0 * PI * t;
        let swing = 0.45 * g.sin();
        let bend = |p: f64| 0.15 + 0.45 * (0.5 - 0.5 * (p + 1.0).cos());
        let mut aims: Vec<(String, Vec3)> = Vec::new();
        aims.extend(leg_aims("Left", swing, bend(g)));
        aims.extend(leg_aims("Right", -swing, bend(g + PI)));
        for (side, sx, ph) in [("Left", 1.0, PI), ("Right", -1.0, 0.0)] {
            let a = 0.35 * (g + ph).sin();
            aims.push((format!("{side}Arm"), down(0.2 * sx, a)));
            aims.push((format!("{side}ForeArm"), down(0.15 * sx, a + 0.35)));
        }
        (root, phi, aims)
    });
    (h, clip(rows))
}

/// Closest approach of the swept forearm to the camera direction, radians.
pub const ARM_SWEEP_MISS: f64 = 2.0 * PI / 180.0;

/// Left upper arm hanging straight down while the elbow raises the forearm
/// forward from 20° to 160° and back, 4° per frame, in a vertical plane
/// turned [`ARM_SWEEP_MISS`] off the camera direction (+z): halfway up the
/// forearm points almost straight at a camera in front.
pub fn arm_sweep_clip() -> (SkeletonHierarchy, MotionClip) {
    let h = skeleton();
    let steps: Vec<f64> = (0..=35).chain((0..35).rev()).map(|k| (20.0 + 4.0 * k as f64).to_radians()).collect();
    let rows = rows_for(&h, steps.len(), |i| {
        let t = steps[i];
        let b = ARM_SWEEP_MISS;
        let fore = Vec3::new(0.0, -t.cos(), 0.0) + Vec3::new(b.sin(), 0.0, b.cos()) * t.sin();
        let aims = vec![
            ("LeftArm".to_string(), Vec3::new(0.0, -1.0, 0.0)),
            ("LeftForeArm".to_string(), fore),
            ("RightArm".to_string(), down(-0.2, 0.0)),
            ("RightForeArm".to_string(), down(-0.2, 0.0)),
        ];
        (Vec3::new(0.0, ROOT_HEIGHT, 0.0), 0.0, aims)
    });
    (h, clip(rows))
}

/// Straight walk along +z with legs and arms moving only in the sagittal
/// plane: thigh swing ±35°, knee bend 25°–55°, so every limb has zero x extent.
pub fn walk_toward_camera_clip(frames: usize) -> (SkeletonHierarchy, MotionClip) {
    let h = skeleton();
    let rows = rows_for(&h, frames, |i| {
        let t = i as f64 / CLIP_FPS;
        let g = 2.0 * PI * t;
        let swing = 35f64.to_radians() * g.sin();
        let bend = |p: f64| (40.0 + 15.0 * (p + 0.5).sin()).to_radians();
        let mut aims: Vec<(String, Vec3)> = Vec::new();
        aims.extend(leg_aims("Left", swing, bend(g)));
        aims.extend(leg_aims("Right", -swing, bend(g + PI)));
        for (side, ph) in [("Left", PI), ("Right", 0.0)] {
            let a = 0.4 * (g + ph).sin();
            aims.push((format!("{side}Arm"), down(0.0, a)));
            aims.push((format!("{side}ForeArm"), down(0.0, a + 0.3)));
        }
        (Vec3::new(0.0, ROOT_HEIGHT, 1.5 * i as f64), 0.0, aims)
    });
    (h, clip(rows))
}

/// Arms straight out to the sides, legs straight down, standing still.
pub fn t_pose_clip(frames: usize) -> (SkeletonHierarchy, MotionClip) {
    let h = skeleton();
    let rows = rows_for(&h, frames, |_| (Vec3::new(0.0, ROOT_HEIGHT, 0.0), 0.0, Vec::new()));
    (h, clip(rows))
}

/// Resolve a synthetic clip with the CMU naming.
pub fn motion((h, c): (SkeletonHierarchy, MotionClip)) -> SkeletalMotion {
    SkeletalMotion::new(h, c, &JointMap::cmu()).expect("synthetic skeleton uses CMU names")
}

/// A camera straight in front of the origin at chest height.
pub fn front_camera() -> Vec3 {
    Vec3::new(0.0, 30.0, 600.0)
}

/// The keypoint of `j` in the base (scale 1) drawing.
pub fn base_keypoint(j: JointName) -> Vec2 {
    let (x, y) = KEYPOINTS[j.index()];
    Vec2::new(x, y)
}
