use super::anchor::{compute_anchor, compute_keyview_transforms};
use super::layout::{layout_view, leg_joints, ViewLayout};
use super::{
    map_triangles_to_joints, BoneLengths, BuiltPart, Canvas, CharacterRig, CharacterView, RigError,
    VariantKey, ViewVariant,
};
use crate::annotation::{validate, AnnotationSet, ParentRef, Translate};
use crate::deform::register_rest_mesh;
use crate::raster::{
    extract_contour, inpaint, masked, mirror_horizontal, simplify_loop, stitch_foot_variant, triangulate,
    BinaryMask, RasterError, TexturedMesh, TriangleLocator,
};
use crate::{JointName, Side, Vec2};
use image::{Rgba, RgbaImage};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RigConfig {
    /// Approximate number of triangles per variant mesh.
    pub target_triangles: usize,
    /// Explicit triangle area bound in pixels²; overrides `target_triangles`.
    pub max_triangle_area: Option<f64>,
    /// Contour simplification tolerance in pixels.
    pub simplify_tolerance: f64,
}

impl Default for RigConfig {
    fn default() -> Self {
        Self {
            target_triangles: 2000,
            max_triangle_area: None,
            simplify_tolerance: 0.5,
        }
    }
}

impl RigConfig {
    /// Triangles come out at roughly half the area bound after refinement.
    pub fn max_area_for(&self, figure_area: f64) -> f64 {
        self.max_triangle_area
            .unwrap_or_else(|| (2.0 * figure_area / self.target_triangles.max(1) as f64).max(2.0))
    }
}

/// Build both views of the character model from a validated annotation set.
pub fn build_rig(a: &AnnotationSet, image: &RgbaImage, cfg: &RigConfig) -> Result<CharacterRig, RigError> {
    if image.dimensions() != a.size() {
        return Err(RasterError::Dimension {
            expected: a.size(),
            found: image.dimensions(),
        }
        .into());
    }
    let report = validate(a);
    if report.has("degenerate_leg") {
        return Err(RigError::UnsupportedFigure(
            "a leg chain has zero length; only bipedal figures are supported".into(),
        ));
    }
    if !report.is_clean() {
        return Err(RigError::Validation(report));
    }
    let canvas = Canvas::for_mask(&a.figure_mask).ok_or(RasterError::EmptyInput)?;
    let ca = canvas.annotations(a);
    let img = masked(&canvas.image(image), &ca.figure_mask);
    let max_area = cfg.max_area_for(ca.figure_mask.count() as f64);

    let (left, right) = rayon::join(
        || build_view(&ca, &img, Side::Left, max_area, cfg),
        || build_view(&ca, &img, Side::Right, max_area, cfg),
    );
    let kp = &ca.keypoints;
    let leg = |s: Side| {
        let (hip, knee, foot) = match s {
            Side::Left => (JointName::LeftHip, JointName::LeftKnee, JointName::LeftFoot),
            Side::Right => (JointName::RightHip, JointName::RightKnee, JointName::RightFoot),
        };
        (kp.get(knee) - kp.get(hip)).norm() + (kp.get(foot) - kp.get(knee)).norm()
    };
    let leg_length = (leg(Side::Left) + leg(Side::Right)) / 2.0;
    Ok(CharacterRig {
        canvas,
        views: [left?, right?],
        leg_length,
        config: cfg.clone(),
    })
}

fn descendants(a: &AnnotationSet, r: ParentRef) -> Vec<usize> {
    let mut out = Vec::new();
    let mut stack = a.children(r);
    while let Some(c) = stack.pop() {
        if let ParentRef::Part(i) = c {
            if !out.contains(&i) {
                out.push(i);
                stack.extend(a.children(c));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Mask of a region within a view; maskless parts fall back to the nearest
/// masked ancestor.
fn view_region<'a>(a: &AnnotationSet, l: &'a ViewLayout, r: ParentRef) -> (&'a BinaryMask, Option<usize>) {
    let mut cur = r;
    loop {
        match cur {
            ParentRef::Figure => return (&l.mask, None),
            ParentRef::Segment(i) => return (&l.segments[i].0, None),
            ParentRef::Part(i) => {
                if let Some(m) = &l.parts[i].0 {
                    return (m, Some(i));
                }
                cur = a.parts[i].parent;
            }
        }
    }
}

pub(crate) fn build_mesh(mask: &BinaryMask, max_area: f64, tolerance: f64) -> Result<TexturedMesh, RasterError> {
    let contour = extract_contour(mask)?;
    let mut last = None;
    for tol in [tolerance, tolerance / 2.0, 0.0] {
        let simplify = |l: &Vec<Vec2>| if tol > 0.0 { simplify_loop(l, tol) } else { l.clone() };
        let outer = simplify(&contour.outer);
        let holes: Vec<Vec<Vec2>> = contour.holes.iter().map(simplify).collect();
        match triangulate(&outer, &holes, max_area) {
            Ok(m) => return Ok(m),
            Err(e) => last = Some(e),
        }
        if tol == 0.0 {
            break;
        }
    }
    Err(last.expect("at least one attempt"))
}

fn build_view(
    a: &AnnotationSet,
    img: &RgbaImage,
    side: Side,
    max_area: f64,
    cfg: &RigConfig,
) -> Result<CharacterView, RigError> {
    let layout = layout_view(a, side)?;
    let (w, h) = layout.mask.size();

    let mut base = img.clone();
    let mut vacated = BinaryMask::new(w, h);
    for r in &layout.reflections {
        let (refl, layer) = mirror_horizontal(&r.src, &base, r.axis)?;
        for (x, y) in r.src.iter_set() {
            base.put_pixel(x, y, Rgba([0, 0, 0, 0]));
        }
        for (x, y) in refl.iter_set() {
            base.put_pixel(x, y, *layer.get_pixel(x, y));
        }
        if !r.segment {
            vacated = vacated.union(&r.src).difference(&refl);
        } else {
            vacated = vacated.difference(&refl);
        }
    }
    let base = masked(&base, &layout.mask);

    let n = a.parts.len();
    let moving: Vec<bool> = (0..n)
        .map(|i| {
            a.parts[i].translate != Translate::None
                || a.ancestors(ParentRef::Part(i))
                    .iter()
                    .any(|r| matches!(r, ParentRef::Part(j) if a.parts[*j].translate != Translate::None))
        })
        .collect();

    let mut hole_front = vacated;
    for i in 0..n {
        if let (true, Some(m)) = (moving[i], &layout.parts[i].0) {
            hole_front.union_with(m);
        }
    }
    let hole_front = hole_front.intersection(&layout.mask);
    let mut hole_back = hole_front.clone();
    for i in 0..n {
        if let (false, true, Some(m)) = (moving[i], a.parts[i].hide_on_back, &layout.parts[i].0) {
            hole_back.union_with(m);
        }
    }
    let hole_back = hole_back.intersection(&layout.mask);
    let front = inpaint(&base, &hole_front)?;
    let back = inpaint(&base, &hole_back)?;

    // Anchors, children before parents.
    let mut anchors: Vec<Option<Vec2>> = vec![None; n];
    fn anchor_of(
        i: usize,
        a: &AnnotationSet,
        l: &ViewLayout,
        memo: &mut Vec<Option<Vec2>>,
    ) -> Result<Vec2, RigError> {
        if let Some(p) = memo[i] {
            return Ok(p);
        }
        let kids: Vec<usize> = a
            .children(ParentRef::Part(i))
            .into_iter()
            .filter_map(|c| match c {
                ParentRef::Part(j) => Some(j),
                _ => None,
            })
            .collect();
        let mut child_anchors = Vec::new();
        if l.parts[i].0.is_none() {
            for j in kids {
                child_anchors.push(anchor_of(j, a, l, memo)?);
            }
        }
        let p = compute_anchor(l.parts[i].0.as_ref(), l.parts[i].1, &child_anchors)
            .map_err(|e| RigError::Structure(format!("part `{}`: {e}", a.parts[i].id)))?;
        memo[i] = Some(p);
        Ok(p)
    }
    for i in 0..n {
        anchor_of(i, a, &layout, &mut anchors)?;
    }

    let mut parts = Vec::with_capacity(n);
    for (i, p) in a.parts.iter().enumerate() {
        let desc = descendants(a, ParentRef::Part(i));
        let own = layout.parts[i].0.clone();
        let region = match &own {
            Some(m) => m.clone(),
            None => {
                let mut u = BinaryMask::new(w, h);
                for &d in &desc {
                    if let Some(m) = &layout.parts[d].0 {
                        u.union_with(m);
                    }
                }
                u
            }
        };
        let keyviews = if p.translate != Translate::None {
            let (parent, _) = view_region(a, &layout, p.parent);
            Some(compute_keyview_transforms(&region, parent, p.enclosed).map_err(|e| {
                RigError::Structure(format!("part `{}`: {e}", p.id))
            })?)
        } else {
            None
        };
        let (layer, layer_origin) = match (&own, moving[i]) {
            (Some(m), true) => {
                let mut inner = BinaryMask::new(w, h);
                for &d in &desc {
                    if let Some(dm) = &layout.parts[d].0 {
                        inner.union_with(dm);
                    }
                }
                let inner = inner.intersection(m);
                let full = masked(&base, m);
                let filled = if inner.is_empty() {
                    full
                } else {
                    inpaint(&masked(&base, &m.difference(&inner)), &inner)
                        .map(|f| masked(&f, m))
                        .unwrap_or_else(|_| masked(&base, &m.difference(&inner)))
                };
                let b = m.bbox().expect("validated part masks are non-empty");
                let crop = image::imageops::crop_imm(&filled, b.x0, b.y0, b.width(), b.height()).to_image();
                (Some(crop), (b.x0, b.y0))
            }
            _ => (None, (0, 0)),
        };
        let clip = if p.enclosed && moving[i] {
            let (m, follow) = view_region(a, &layout, p.parent);
            Some((m.clone(), follow))
        } else {
            None
        };
        parts.push(BuiltPart {
            id: p.id.clone(),
            parent: p.parent,
            translate: p.translate,
            direction: layout.parts[i].1,
            enclosed: p.enclosed,
            hide_on_back: p.hide_on_back,
            mask: own,
            moving: moving[i],
            layer,
            layer_origin,
            anchor: anchors[i].expect("all anchors computed"),
            attachments: Vec::new(),
            keyviews,
            clip,
        });
    }

    let keys = layout.variant_keys();
    let variants: Vec<ViewVariant> = keys
        .par_iter()
        .map(|&key| build_variant(&layout, key, &front, &back, max_area, cfg))
        .collect::<Result<_, _>>()?;
    for part in &mut parts {
        part.attachments = variants
            .iter()
            .map(|v| v.locator.locate_or_nearest(&v.mesh, part.anchor).0)
            .collect();
    }

    Ok(CharacterView {
        side,
        keypoints: layout.keypoints,
        mask: layout.mask.clone(),
        bone_lengths: BoneLengths::from_keypoints(&layout.keypoints),
        variants,
        parts,
    })
}

fn build_variant(
    layout: &ViewLayout,
    key: VariantKey,
    front: &RgbaImage,
    back: &RgbaImage,
    max_area: f64,
    cfg: &RigConfig,
) -> Result<ViewVariant, RigError> {
    let mut mask = layout.mask.clone();
    let mut front = front.clone();
    let mut back = back.clone();
    let mut kp = layout.keypoints;
    for f in layout.feet_to_flip(key) {
        let (knee, foot) = leg_joints(f);
        let s = stitch_foot_variant(&mask, &front, &back, kp.get(foot), kp.get(knee))?;
        mask = s.mask;
        front = s.front;
        back = s.back;
        kp.set(foot, s.ankle);
    }
    let mut mesh = build_mesh(&mask, max_area, cfg.simplify_tolerance)?;
    mesh.triangle_joint = map_triangles_to_joints(&mesh, &kp);
    let arap = register_rest_mesh(&mesh, kp.as_array())?;
    let locator = TriangleLocator::new(&mesh);
    Ok(ViewVariant {
        key,
        mask,
        keypoints: kp,
        mesh,
        front,
        back,
        arap,
        locator,
    })
}
