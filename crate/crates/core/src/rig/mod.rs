//! The two-view 2.5D character model built from an annotated drawing.

mod anchor;
mod build;
mod bundle;
mod canvas;
mod labels;
pub(crate) mod layout;

pub use anchor::{compute_anchor, compute_keyview_transforms, translation_matrix, KeyviewTransform, KEY_LEFT, KEY_RIGHT};
pub use build::{build_rig, RigConfig};
pub use bundle::{load_bundle, mesh_file_name, save_bundle, texture_file_name, BUNDLE_FORMAT, BUNDLE_VERSION};
pub use canvas::{Canvas, CANVAS_MARGIN};
pub use labels::map_triangles_to_joints;
pub use layout::VariantKey;

use crate::annotation::{JointKeypoints, Orientation, ParentRef, Translate, ValidationReport};
use crate::deform::{ArapSystem, DeformError};
use crate::raster::{BinaryMask, MeshPoint, RasterError, TexturedMesh, TriangleLocator};
use crate::{JointName, Side, Vec2};
use image::RgbaImage;

#[derive(Debug, thiserror::Error)]
pub enum RigError {
    #[error("annotations do not validate:\n{0}")]
    Validation(ValidationReport),
    #[error("unsupported figure: {0}")]
    UnsupportedFigure(String),
    #[error("raster: {0}")]
    Raster(#[from] RasterError),
    #[error("deform: {0}")]
    Deform(#[from] DeformError),
    #[error("structure: {0}")]
    Structure(String),
    #[error("bundle io: {0}")]
    Io(String),
    #[error("bundle format: {0}")]
    Format(String),
}

/// Rest length of every bone, indexed by the bone's child joint (the root
/// entry is zero).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BoneLengths(pub [f64; crate::skeleton::JOINT_COUNT]);

impl BoneLengths {
    pub fn from_keypoints(kp: &JointKeypoints) -> Self {
        let mut l = [0.0; crate::skeleton::JOINT_COUNT];
        for j in JointName::bones() {
            l[j.index()] = (kp.get(j) - kp.get(j.parent().expect("bone"))).norm();
        }
        Self(l)
    }

    pub fn get(&self, bone: JointName) -> f64 {
        self.0[bone.index()]
    }
}

/// One foot-orientation version of a view: mask, mesh, textures and the
/// registered deformation system.
#[derive(Debug, Clone)]
pub struct ViewVariant {
    pub key: VariantKey,
    pub mask: BinaryMask,
    pub keypoints: JointKeypoints,
    /// Rest mesh in canvas pixels, with per-triangle bone labels.
    pub mesh: TexturedMesh,
    pub front: RgbaImage,
    pub back: RgbaImage,
    pub arap: ArapSystem,
    pub locator: TriangleLocator,
}

/// A part region as built into one view.
#[derive(Debug, Clone)]
pub struct BuiltPart {
    pub id: String,
    pub parent: ParentRef,
    pub translate: Translate,
    /// Facing within this view (after mirroring).
    pub direction: Orientation,
    pub enclosed: bool,
    pub hide_on_back: bool,
    pub mask: Option<BinaryMask>,
    /// Whether this part or one of its ancestor parts translates; such parts
    /// are drawn from their own layer instead of the base textures.
    pub moving: bool,
    /// Pixels of the part cropped to its bounding box, for moving parts with a mask.
    pub layer: Option<RgbaImage>,
    pub layer_origin: (u32, u32),
    pub anchor: Vec2,
    /// Anchor location on each variant's rest mesh, parallel to `CharacterView::variants`.
    pub attachments: Vec<MeshPoint>,
    /// Left and right key-view transforms; present when the part translates.
    pub keyviews: Option<[KeyviewTransform; 2]>,
    /// Region an enclosed moving part is clipped to, and the part index whose
    /// translation that region follows (when the region is a part's mask).
    pub clip: Option<(BinaryMask, Option<usize>)>,
}

impl BuiltPart {
    /// Index (into the view's parts) of the parent part, if the parent is a part.
    pub fn parent_part(&self) -> Option<usize> {
        match self.parent {
            ParentRef::Part(i) => Some(i),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CharacterView {
    pub side: Side,
    /// Base-variant keypoints in canvas pixels.
    pub keypoints: JointKeypoints,
    pub mask: BinaryMask,
    pub bone_lengths: BoneLengths,
    pub variants: Vec<ViewVariant>,
    /// Parallel to `AnnotationSet::parts`.
    pub parts: Vec<BuiltPart>,
}

impl CharacterView {
    pub fn variant(&self, key: VariantKey) -> Option<usize> {
        self.variants.iter().position(|v| v.key == key)
    }

    /// Variant whose oriented feet match `key`; feet without orientation are ignored.
    pub fn variant_for(&self, key: VariantKey) -> usize {
        self.variant(key)
            .or_else(|| {
                self.variants.iter().position(|v| {
                    [Side::Left, Side::Right].into_iter().all(|f| {
                        v.key.foot(f) == key.foot(f) || self.variants.iter().all(|w| w.key.foot(f) == v.key.foot(f))
                    })
                })
            })
            .unwrap_or(0)
    }

    pub fn texture_count(&self) -> usize {
        2 * self.variants.len()
    }
}

#[derive(Debug, Clone)]
pub struct CharacterRig {
    pub canvas: Canvas,
    /// Left view first.
    pub views: [CharacterView; 2],
    /// Mean hip-knee-foot chain length of the two legs, in pixels.
    pub leg_length: f64,
    pub config: RigConfig,
}

impl CharacterRig {
    pub fn view(&self, side: Side) -> &CharacterView {
        &self.views[side.index()]
    }

    pub fn bone_lengths(&self, side: Side) -> &BoneLengths {
        &self.view(side).bone_lengths
    }

    pub fn triangle_count(&self) -> usize {
        self.views
            .iter()
            .flat_map(|v| v.variants.iter())
            .map(|v| v.mesh.triangles.len())
            .max()
            .unwrap_or(0)
    }
}
