use crate::annotation::{AnnotationSet, JointKeypoints, Orientation, ParentRef};
use crate::raster::{reflect_mask, BinaryMask, RasterError};
use crate::{JointName, Side, Vec2};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Which way each foot points in a mesh variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VariantKey {
    pub left: Side,
    pub right: Side,
}

impl VariantKey {
    pub fn new(left: Side, right: Side) -> Self {
        Self { left, right }
    }

    pub fn foot(&self, side: Side) -> Side {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
        }
    }

    /// Two-letter code such as `lr` (left foot faces left, right foot faces right).
    pub fn code(&self) -> String {
        format!("{}{}", self.left.letter(), self.right.letter())
    }

    pub fn from_code(code: &str) -> Option<Self> {
        let side = |c| match c {
            'l' => Some(Side::Left),
            'r' => Some(Side::Right),
            _ => None,
        };
        let mut it = code.chars();
        let k = Self::new(side(it.next()?)?, side(it.next()?)?);
        it.next().is_none().then_some(k)
    }

    pub fn index(&self) -> u8 {
        (self.left.index() * 2 + self.right.index()) as u8
    }

    pub fn from_index(i: u8) -> Option<Self> {
        let s = |b| if b == 0 { Side::Left } else { Side::Right };
        (i < 4).then(|| Self::new(s(i / 2), s(i % 2)))
    }
}

impl fmt::Display for VariantKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

/// One in-place horizontal reflection applied while building a view.
#[derive(Debug, Clone)]
pub(crate) struct Reflection {
    pub src: BinaryMask,
    pub axis: f64,
    pub segment: bool,
}

/// Mask-level description of one view: which regions were mirrored and where
/// every mask and keypoint ends up.
#[derive(Debug, Clone)]
pub(crate) struct ViewLayout {
    pub side: Side,
    pub mask: BinaryMask,
    pub keypoints: JointKeypoints,
    pub segments: Vec<(BinaryMask, Orientation)>,
    pub parts: Vec<(Option<BinaryMask>, Orientation)>,
    /// Facing of each present, oriented foot (indexed by side).
    pub feet: [Option<Side>; 2],
    pub reflections: Vec<Reflection>,
}

pub(crate) fn pixel_of(p: Vec2) -> (i64, i64) {
    (p.x.round() as i64, p.y.round() as i64)
}

fn subtree(a: &AnnotationSet, r: ParentRef) -> Vec<ParentRef> {
    let mut out = vec![r];
    let mut i = 0;
    while i < out.len() {
        for c in a.children(out[i]) {
            if !out.contains(&c) {
                out.push(c);
            }
        }
        i += 1;
    }
    out
}

/// Mirror every region facing away from `side`, together with everything
/// nested under it, about the vertical center line of its bounding box.
/// Regions are visited top-down so a region whose facing flipped with its
/// ancestor is examined again with its new facing.
pub(crate) fn layout_view(a: &AnnotationSet, side: Side) -> Result<ViewLayout, RasterError> {
    let mut v = ViewLayout {
        side,
        mask: a.figure_mask.clone(),
        keypoints: a.keypoints,
        segments: a.segments.iter().map(|s| (s.mask.clone(), s.orientation)).collect(),
        parts: a.parts.iter().map(|p| (p.mask.clone(), p.direction)).collect(),
        feet: [a.feet[0].oriented(), a.feet[1].oriented()],
        reflections: Vec::new(),
    };
    let away = Orientation::from(side.opposite());
    let mut queue = a.children(ParentRef::Figure);
    let mut visited = Vec::new();
    while let Some(r) = queue.first().copied() {
        queue.remove(0);
        if visited.contains(&r) {
            continue;
        }
        visited.push(r);
        let facing = match r {
            ParentRef::Segment(i) => v.segments[i].1,
            ParentRef::Part(i) => v.parts[i].1,
            ParentRef::Figure => Orientation::None,
        };
        if facing == away {
            reflect_region(a, &mut v, r)?;
        }
        let mut kids = a.children(r);
        kids.append(&mut queue);
        queue = kids;
    }
    Ok(v)
}

fn reflect_region(a: &AnnotationSet, v: &mut ViewLayout, r: ParentRef) -> Result<(), RasterError> {
    let members = subtree(a, r);
    let (w, h) = v.mask.size();
    let mut src = BinaryMask::new(w, h);
    let mut seg_src = BinaryMask::new(w, h);
    for m in &members {
        match *m {
            ParentRef::Segment(i) => {
                src.union_with(&v.segments[i].0);
                seg_src.union_with(&v.segments[i].0);
            }
            ParentRef::Part(i) => {
                if let Some(mask) = &v.parts[i].0 {
                    src.union_with(mask);
                }
            }
            ParentRef::Figure => {}
        }
    }
    let Some(b) = src.bbox() else {
        return Ok(());
    };
    let axis = (f64::from(b.x0) + f64::from(b.x1)) / 2.0;
    for m in &members {
        match *m {
            ParentRef::Segment(i) => {
                let s = &mut v.segments[i];
                s.0 = reflect_mask(&s.0, axis)?;
                s.1 = s.1.flipped();
            }
            ParentRef::Part(i) => {
                let p = &mut v.parts[i];
                if let Some(mask) = &p.0 {
                    p.0 = Some(reflect_mask(mask, axis)?);
                }
                p.1 = p.1.flipped();
            }
            ParentRef::Figure => {}
        }
    }
    let reflected = reflect_mask(&src, axis)?;
    let segment = matches!(r, ParentRef::Segment(_));
    if segment {
        for j in JointName::ALL {
            let p = v.keypoints.get(j);
            let (x, y) = pixel_of(p);
            if seg_src.get_i(x, y) {
                v.keypoints.set(j, Vec2::new(2.0 * axis - p.x, p.y));
                if j == JointName::LeftFoot || j == JointName::RightFoot {
                    let f = j.side().expect("feet are sided").index();
                    v.feet[f] = v.feet[f].map(Side::opposite);
                }
            }
        }
        v.mask = v.mask.difference(&seg_src);
        v.mask.union_with(&reflect_mask(&seg_src, axis)?);
        v.mask.union_with(&reflected);
    } else {
        v.mask.union_with(&reflected);
    }
    v.reflections.push(Reflection { src, axis, segment });
    Ok(())
}

impl ViewLayout {
    /// Base variant first, then the other foot combinations.
    pub fn variant_keys(&self) -> Vec<VariantKey> {
        let opts = |f: Side| match self.feet[f.index()] {
            Some(o) => vec![o, o.opposite()],
            None => vec![self.side],
        };
        let mut keys = Vec::new();
        for l in opts(Side::Left) {
            for r in opts(Side::Right) {
                keys.push(VariantKey::new(l, r));
            }
        }
        keys
    }

    /// Feet that must be mirrored to reach `key` from the base variant.
    pub fn feet_to_flip(&self, key: VariantKey) -> Vec<Side> {
        [Side::Left, Side::Right]
            .into_iter()
            .filter(|f| matches!(self.feet[f.index()], Some(o) if o != key.foot(*f)))
            .collect()
    }

    /// Mask and keypoints of a variant, without textures.
    pub fn variant_mask(&self, key: VariantKey) -> Result<(BinaryMask, JointKeypoints), RasterError> {
        let mut mask = self.mask.clone();
        let mut kp = self.keypoints;
        for f in self.feet_to_flip(key) {
            let (knee, foot) = leg_joints(f);
            let (region, axis) = crate::raster::foot_region(&mask, kp.get(foot), kp.get(knee))?;
            let reflected = reflect_mask(&region, axis)?;
            mask = mask.difference(&region);
            mask.union_with(&reflected);
            let p = kp.get(foot);
            kp.set(foot, Vec2::new(2.0 * axis - p.x, p.y));
        }
        Ok((mask, kp))
    }
}

pub(crate) fn leg_joints(side: Side) -> (JointName, JointName) {
    match side {
        Side::Left => (JointName::LeftKnee, JointName::LeftFoot),
        Side::Right => (JointName::RightKnee, JointName::RightFoot),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_codes_round_trip() {
        for i in 0..4 {
            let k = VariantKey::from_index(i).unwrap();
            assert_eq!(k.index(), i);
            assert_eq!(VariantKey::from_code(&k.code()), Some(k));
        }
        assert_eq!(VariantKey::from_code("lr"), Some(VariantKey::new(Side::Left, Side::Right)));
        assert_eq!(VariantKey::from_code("lx"), None);
    }
}
