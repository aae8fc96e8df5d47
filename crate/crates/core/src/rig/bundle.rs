use super::{
    BoneLengths, BuiltPart, Canvas, CharacterRig, CharacterView, KeyviewTransform, RigConfig, RigError,
    VariantKey, ViewVariant,
};
use crate::annotation::{JointKeypoints, Orientation, ParentRef, Translate};
use crate::deform::register_rest_mesh;
use crate::raster::{decode_rle, encode_rle, MeshPoint, RunLength, TexturedMesh, TriangleLocator};
use crate::{JointName, Side, Vec2};
use image::RgbaImage;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

pub const BUNDLE_FORMAT: &str = "vdrig-rig";
pub const BUNDLE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct RigDoc {
    format: String,
    version: u32,
    canvas: Canvas,
    leg_length: f64,
    config: RigConfig,
    views: Vec<ViewDoc>,
}

#[derive(Serialize, Deserialize)]
struct ViewDoc {
    side: Side,
    keypoints: JointKeypoints,
    bone_lengths: BoneLengths,
    mask: RunLength,
    variants: Vec<VariantDoc>,
    parts: Vec<PartDoc>,
}

#[derive(Serialize, Deserialize)]
struct VariantDoc {
    key: String,
    mask: RunLength,
    keypoints: JointKeypoints,
    triangle_joint: Vec<JointName>,
    mesh: String,
    front: String,
    back: String,
}

#[derive(Serialize, Deserialize)]
struct PartDoc {
    id: String,
    parent: ParentRef,
    translate: Translate,
    direction: Orientation,
    enclosed: bool,
    hide_on_back: bool,
    mask: Option<RunLength>,
    moving: bool,
    layer: Option<String>,
    layer_origin: (u32, u32),
    anchor: Vec2,
    attachments: Vec<MeshPoint>,
    keyviews: Option<[KeyviewTransform; 2]>,
    clip: Option<RunLength>,
    clip_part: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct MeshDoc {
    vertices: Vec<Vec2>,
    triangles: Vec<[u32; 3]>,
    uv: Vec<Vec2>,
}

pub fn texture_file_name(side: Side, key: VariantKey, back: bool) -> String {
    format!(
        "view-{}.var-{}.{}.png",
        side.letter().to_ascii_uppercase(),
        key.code(),
        if back { "back" } else { "front" }
    )
}

pub fn mesh_file_name(side: Side, key: VariantKey) -> String {
    format!("view-{}.var-{}.mesh.json", side.letter().to_ascii_uppercase(), key.code())
}

fn io<E: std::fmt::Display>(path: &Path) -> impl Fn(E) -> RigError + '_ {
    move |e| RigError::Io(format!("{}: {e}", path.display()))
}

fn save_png(path: &Path, img: &RgbaImage) -> Result<(), RigError> {
    img.save_with_format(path, image::ImageFormat::Png).map_err(io(path))
}

fn load_png(path: &Path) -> Result<RgbaImage, RigError> {
    Ok(image::open(path).map_err(io(path))?.to_rgba8())
}

/// Write a rig bundle directory: `rig.json`, per-variant textures and meshes,
/// and per-part layers.
pub fn save_bundle(rig: &CharacterRig, dir: &Path) -> Result<(), RigError> {
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut views = Vec::new();
    for view in &rig.views {
        let s = view.side.letter().to_ascii_uppercase();
        let mut variants = Vec::new();
        for v in &view.variants {
            let mesh = mesh_file_name(view.side, v.key);
            let front = texture_file_name(view.side, v.key, false);
            let back = texture_file_name(view.side, v.key, true);
            let doc = MeshDoc {
                vertices: v.mesh.vertices.clone(),
                triangles: v.mesh.triangles.clone(),
                uv: v.mesh.uv.clone(),
            };
            let p = dir.join(&mesh);
            fs::write(&p, serde_json::to_vec(&doc).map_err(io(&p))?).map_err(io(&p))?;
            save_png(&dir.join(&front), &v.front)?;
            save_png(&dir.join(&back), &v.back)?;
            variants.push(VariantDoc {
                key: v.key.code(),
                mask: encode_rle(&v.mask),
                keypoints: v.keypoints,
                triangle_joint: v.mesh.triangle_joint.clone(),
                mesh,
                front,
                back,
            });
        }
        let mut parts = Vec::new();
        for p in &view.parts {
            let layer = match &p.layer {
                Some(img) => {
                    let name = format!("view-{s}.part-{}.png", p.id);
                    save_png(&dir.join(&name), img)?;
                    Some(name)
                }
                None => None,
            };
            parts.push(PartDoc {
                id: p.id.clone(),
                parent: p.parent,
                translate: p.translate,
                direction: p.direction,
                enclosed: p.enclosed,
                hide_on_back: p.hide_on_back,
                mask: p.mask.as_ref().map(encode_rle),
                moving: p.moving,
                layer,
                layer_origin: p.layer_origin,
                anchor: p.anchor,
                attachments: p.attachments.clone(),
                keyviews: p.keyviews,
                clip: p.clip.as_ref().map(|(m, _)| encode_rle(m)),
                clip_part: p.clip.as_ref().and_then(|(_, i)| *i),
            });
        }
        views.push(ViewDoc {
            side: view.side,
            keypoints: view.keypoints,
            bone_lengths: view.bone_lengths,
            mask: encode_rle(&view.mask),
            variants,
            parts,
        });
    }
    let doc = RigDoc {
        format: BUNDLE_FORMAT.into(),
        version: BUNDLE_VERSION,
        canvas: rig.canvas,
        leg_length: rig.leg_length,
        config: rig.config.clone(),
        views,
    };
    let p = dir.join("rig.json");
    let text = serde_json::to_string_pretty(&doc).map_err(io(&p))?;
    fs::write(&p, text).map_err(io(&p))
}

fn format_err(msg: impl Into<String>) -> RigError {
    RigError::Format(msg.into())
}

/// Read a bundle written by [`save_bundle`] and re-register its deformation systems.
pub fn load_bundle(dir: &Path) -> Result<CharacterRig, RigError> {
    let p = dir.join("rig.json");
    let text = fs::read_to_string(&p).map_err(io(&p))?;
    let doc: RigDoc = serde_json::from_str(&text).map_err(|e| format_err(format!("rig.json: {e}")))?;
    if doc.format != BUNDLE_FORMAT || doc.version != BUNDLE_VERSION {
        return Err(format_err(format!(
            "unsupported bundle {} version {}",
            doc.format, doc.version
        )));
    }
    if doc.views.len() != 2 {
        return Err(format_err("expected exactly two views"));
    }
    let decode = |r: &RunLength| decode_rle(r).map_err(|e| format_err(e.to_string()));
    let mut views = Vec::new();
    for vd in doc.views {
        let mut variants = Vec::new();
        for v in &vd.variants {
            let key = VariantKey::from_code(&v.key).ok_or_else(|| format_err(format!("bad variant key {}", v.key)))?;
            let mp = dir.join(&v.mesh);
            let md: MeshDoc = serde_json::from_slice(&fs::read(&mp).map_err(io(&mp))?)
                .map_err(|e| format_err(format!("{}: {e}", v.mesh)))?;
            if v.triangle_joint.len() != md.triangles.len() {
                return Err(format_err(format!("{}: label count mismatch", v.mesh)));
            }
            let mesh = TexturedMesh {
                vertices: md.vertices,
                triangles: md.triangles,
                uv: md.uv,
                triangle_joint: v.triangle_joint.clone(),
            };
            let arap = register_rest_mesh(&mesh, v.keypoints.as_array())?;
            let locator = TriangleLocator::new(&mesh);
            variants.push(ViewVariant {
                key,
                mask: decode(&v.mask)?,
                keypoints: v.keypoints,
                front: load_png(&dir.join(&v.front))?,
                back: load_png(&dir.join(&v.back))?,
                mesh,
                arap,
                locator,
            });
        }
        let mut parts = Vec::new();
        for pd in vd.parts {
            parts.push(BuiltPart {
                id: pd.id,
                parent: pd.parent,
                translate: pd.translate,
                direction: pd.direction,
                enclosed: pd.enclosed,
                hide_on_back: pd.hide_on_back,
                mask: pd.mask.as_ref().map(decode).transpose()?,
                moving: pd.moving,
                layer: pd.layer.map(|n| load_png(&dir.join(n))).transpose()?,
                layer_origin: pd.layer_origin,
                anchor: pd.anchor,
                attachments: pd.attachments,
                keyviews: pd.keyviews,
                clip: pd.clip.as_ref().map(|r| decode(r).map(|m| (m, pd.clip_part))).transpose()?,
            });
        }
        views.push(CharacterView {
            side: vd.side,
            keypoints: vd.keypoints,
            mask: decode(&vd.mask)?,
            bone_lengths: vd.bone_lengths,
            variants,
            parts,
        });
    }
    let mut it = views.into_iter();
    let (l, r) = (it.next().expect("two views"), it.next().expect("two views"));
    if l.side != Side::Left || r.side != Side::Right {
        return Err(format_err("views must be ordered left, right"));
    }
    Ok(CharacterRig {
        canvas: doc.canvas,
        views: [l, r],
        leg_length: doc.leg_length,
        config: doc.config,
    })
}
