//! The annotation document that accompanies an input drawing: joint
//! keypoints, the figure mask, silhouette segments, part regions and feet.

mod json;
mod validate;

pub use json::{load_annotations, parse_annotations, serialize_annotations};
pub use validate::{validate, Finding, ValidationReport};

use crate::raster::BinaryMask;
use crate::{JointName, Side, Vec2};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, thiserror::Error)]
pub enum AnnotationError {
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("unresolved reference to `{id}` at {path}")]
    Reference { path: String, id: String },
    #[error("duplicate region id `{id}`")]
    Duplicate { id: String },
    #[error("mask at {path} is {found:?}, image is {expected:?}")]
    Dimension {
        path: String,
        expected: (u32, u32),
        found: (u32, u32),
    },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// Facing of a segment, part or foot as drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Left,
    Right,
    #[default]
    None,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Left => "left",
            Orientation::Right => "right",
            Orientation::None => "none",
        }
    }

    pub fn side(self) -> Option<Side> {
        match self {
            Orientation::Left => Some(Side::Left),
            Orientation::Right => Some(Side::Right),
            Orientation::None => None,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::Left => Orientation::Right,
            Orientation::Right => Orientation::Left,
            Orientation::None => Orientation::None,
        }
    }

    pub(crate) fn parse(s: &str) -> Option<Self> {
        match s {
            "left" => Some(Orientation::Left),
            "right" => Some(Orientation::Right),
            "none" => Some(Orientation::None),
            _ => None,
        }
    }
}

impl From<Side> for Orientation {
    fn from(s: Side) -> Self {
        match s {
            Side::Left => Orientation::Left,
            Side::Right => Orientation::Right,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Translate {
    #[default]
    None,
    Smooth,
    Discrete,
}

impl Translate {
    pub fn as_str(self) -> &'static str {
        match self {
            Translate::None => "none",
            Translate::Smooth => "smooth",
            Translate::Discrete => "discrete",
        }
    }
}

/// Where a segment or part hangs in the region hierarchy. Indices refer to
/// `AnnotationSet::segments` and `AnnotationSet::parts`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "lowercase")]
pub enum ParentRef {
    Figure,
    Segment(usize),
    Part(usize),
}

/// The named 2D joint positions in image pixels (x right, y down).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointKeypoints {
    points: [Vec2; crate::skeleton::JOINT_COUNT],
}

impl JointKeypoints {
    pub fn new(points: [Vec2; crate::skeleton::JOINT_COUNT]) -> Self {
        Self { points }
    }

    pub fn from_fn(f: impl Fn(JointName) -> Vec2) -> Self {
        Self {
            points: JointName::ALL.map(f),
        }
    }

    pub fn get(&self, j: JointName) -> Vec2 {
        self.points[j.index()]
    }

    pub fn set(&mut self, j: JointName, p: Vec2) {
        self.points[j.index()] = p;
    }

    pub fn as_array(&self) -> &[Vec2; crate::skeleton::JOINT_COUNT] {
        &self.points
    }

    pub fn iter(&self) -> impl Iterator<Item = (JointName, Vec2)> + '_ {
        JointName::ALL.iter().map(move |j| (*j, self.points[j.index()]))
    }

    pub fn map(&self, f: impl Fn(JointName, Vec2) -> Vec2) -> Self {
        Self::from_fn(|j| f(j, self.get(j)))
    }
}

impl Serialize for JointKeypoints {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(self.points.len()))?;
        for (j, p) in self.iter() {
            m.serialize_entry(j.as_str(), &[p.x, p.y])?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for JointKeypoints {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let map = std::collections::BTreeMap::<String, [f64; 2]>::deserialize(d)?;
        let mut points = [Vec2::zeros(); crate::skeleton::JOINT_COUNT];
        for j in JointName::ALL {
            let p = map
                .get(j.as_str())
                .ok_or_else(|| serde::de::Error::custom(format!("missing keypoint {j}")))?;
            points[j.index()] = Vec2::new(p[0], p[1]);
        }
        Ok(Self { points })
    }
}

/// A horizontal band of the figure outline with one facing.
#[derive(Debug, Clone, PartialEq)]
pub struct SilhouetteSegment {
    pub id: String,
    pub mask: BinaryMask,
    pub orientation: Orientation,
    pub parent: ParentRef,
}

/// An interior feature that may translate, mirror or hide with the view.
#[derive(Debug, Clone, PartialEq)]
pub struct PartRegion {
    pub id: String,
    pub mask: Option<BinaryMask>,
    pub translate: Translate,
    pub direction: Orientation,
    pub enclosed: bool,
    pub hide_on_back: bool,
    pub parent: ParentRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FootAnnotation {
    pub side: Side,
    pub present: bool,
    pub orientation: Orientation,
}

impl FootAnnotation {
    /// The facing the foot is drawn with, if it is present and has one.
    pub fn oriented(&self) -> Option<Side> {
        if self.present {
            self.orientation.side()
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationSet {
    /// Path of the drawing, relative to the annotation document.
    pub image: String,
    pub keypoints: JointKeypoints,
    pub figure_mask: BinaryMask,
    pub segments: Vec<SilhouetteSegment>,
    pub parts: Vec<PartRegion>,
    /// Indexed by `Side::index`: left foot first.
    pub feet: [FootAnnotation; 2],
}

impl AnnotationSet {
    /// A document with only keypoints and a figure mask.
    pub fn minimal(image: impl Into<String>, keypoints: JointKeypoints, figure_mask: BinaryMask) -> Self {
        Self {
            image: image.into(),
            keypoints,
            figure_mask,
            segments: Vec::new(),
            parts: Vec::new(),
            feet: [
                FootAnnotation { side: Side::Left, present: true, orientation: Orientation::None },
                FootAnnotation { side: Side::Right, present: true, orientation: Orientation::None },
            ],
        }
    }

    pub fn size(&self) -> (u32, u32) {
        self.figure_mask.size()
    }

    pub fn foot(&self, side: Side) -> &FootAnnotation {
        &self.feet[side.index()]
    }

    pub fn segment_index(&self, id: &str) -> Option<usize> {
        self.segments.iter().position(|s| s.id == id)
    }

    pub fn part_index(&self, id: &str) -> Option<usize> {
        self.parts.iter().position(|p| p.id == id)
    }

    pub fn parent_of(&self, r: ParentRef) -> Option<ParentRef> {
        match r {
            ParentRef::Figure => None,
            ParentRef::Segment(i) => Some(self.segments[i].parent),
            ParentRef::Part(i) => Some(self.parts[i].parent),
        }
    }

    pub fn region_id(&self, r: ParentRef) -> &str {
        match r {
            ParentRef::Figure => "figure",
            ParentRef::Segment(i) => &self.segments[i].id,
            ParentRef::Part(i) => &self.parts[i].id,
        }
    }

    /// Direct children of a region, segments first, in document order.
    pub fn children(&self, r: ParentRef) -> Vec<ParentRef> {
        let segs = self
            .segments
            .iter()
            .enumerate()
            .filter(|(_, s)| s.parent == r)
            .map(|(i, _)| ParentRef::Segment(i));
        let parts = self
            .parts
            .iter()
            .enumerate()
            .filter(|(_, p)| p.parent == r)
            .map(|(i, _)| ParentRef::Part(i));
        segs.chain(parts).collect()
    }

    /// Ancestors from the direct parent upwards, stopping at the figure or at
    /// the first repeated region (a cycle).
    pub fn ancestors(&self, r: ParentRef) -> Vec<ParentRef> {
        let mut out = Vec::new();
        let mut cur = r;
        while let Some(p) = self.parent_of(cur) {
            if p == r || out.contains(&p) {
                break;
            }
            out.push(p);
            cur = p;
        }
        out
    }

    pub fn has_cycle(&self, r: ParentRef) -> bool {
        let mut seen = vec![r];
        let mut cur = r;
        while let Some(p) = self.parent_of(cur) {
            if seen.contains(&p) {
                return true;
            }
            seen.push(p);
            cur = p;
        }
        false
    }

    /// The top-level segment whose band contains region `r`, if any.
    pub fn band_of(&self, r: ParentRef) -> Option<usize> {
        let mut band = match r {
            ParentRef::Segment(i) => Some(i),
            _ => None,
        };
        for a in self.ancestors(r) {
            if let ParentRef::Segment(i) = a {
                band = Some(i);
            }
        }
        band
    }

    /// Mask of a region; maskless parts and the figure fall back as follows:
    /// the figure is the figure mask and a maskless part uses its nearest
    /// masked ancestor.
    pub fn effective_mask(&self, r: ParentRef) -> &BinaryMask {
        let mut cur = r;
        let mut steps = 0;
        loop {
            match cur {
                ParentRef::Figure => return &self.figure_mask,
                ParentRef::Segment(i) => return &self.segments[i].mask,
                ParentRef::Part(i) => {
                    if let Some(m) = &self.parts[i].mask {
                        return m;
                    }
                    cur = self.parts[i].parent;
                }
            }
            steps += 1;
            if steps > self.parts.len() + self.segments.len() {
                return &self.figure_mask;
            }
        }
    }
}

impl fmt::Display for ParentRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParentRef::Figure => write!(f, "figure"),
            ParentRef::Segment(i) => write!(f, "segment#{i}"),
            ParentRef::Part(i) => write!(f, "part#{i}"),
        }
    }
}
