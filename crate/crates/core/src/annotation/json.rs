use super::{
    AnnotationError, AnnotationSet, FootAnnotation, JointKeypoints, Orientation, ParentRef,
    PartRegion, SilhouetteSegment, Translate,
};
use crate::raster::{decode_rle, encode_rle, BinaryMask, RunLength};
use crate::{JointName, Side, Vec2};
use serde_json::{json, Map, Value};
use std::path::Path;

type Result<T> = std::result::Result<T, AnnotationError>;

fn schema(path: &str, message: impl Into<String>) -> AnnotationError {
    AnnotationError::Schema {
        path: path.to_string(),
        message: message.into(),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, path: &str, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| schema(&format!("{path}.{key}"), "missing required key"))
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| schema(path, "expected an object"))
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| schema(path, "expected a string"))
}

fn as_bool(v: &Value, path: &str) -> Result<bool> {
    v.as_bool().ok_or_else(|| schema(path, "expected a boolean"))
}

fn orientation(v: &Value, path: &str) -> Result<Orientation> {
    Orientation::parse(as_str(v, path)?)
        .ok_or_else(|| schema(path, "expected one of left, right, none"))
}

fn translate(v: &Value, path: &str) -> Result<Translate> {
    match as_str(v, path)? {
        "none" => Ok(Translate::None),
        "smooth" => Ok(Translate::Smooth),
        "discrete" => Ok(Translate::Discrete),
        _ => Err(schema(path, "expected one of none, smooth, discrete")),
    }
}

fn point(v: &Value, path: &str) -> Result<Vec2> {
    let arr = v.as_array().ok_or_else(|| schema(path, "expected [x, y]"))?;
    match arr.as_slice() {
        [x, y] => match (x.as_f64(), y.as_f64()) {
            (Some(x), Some(y)) if x.is_finite() && y.is_finite() => Ok(Vec2::new(x, y)),
            _ => Err(schema(path, "coordinates must be finite numbers")),
        },
        _ => Err(schema(path, "expected [x, y]")),
    }
}

fn mask(v: &Value, path: &str, size: (u32, u32), base_dir: &Path) -> Result<BinaryMask> {
    let m = match v {
        Value::String(rel) => {
            let file = base_dir.join(rel);
            let img = image::open(&file).map_err(|e| AnnotationError::Io {
                path: file.display().to_string(),
                message: e.to_string(),
            })?;
            BinaryMask::from_image(&img)
        }
        Value::Object(_) => {
            let rle: RunLength = serde_json::from_value(v.clone())
                .map_err(|e| schema(path, format!("bad run-length mask: {e}")))?;
            decode_rle(&rle).map_err(|e| schema(path, e.to_string()))?
        }
        _ => return Err(schema(path, "mask must be a file path or a run-length object")),
    };
    if m.size() != size {
        return Err(AnnotationError::Dimension {
            path: path.to_string(),
            expected: size,
            found: m.size(),
        });
    }
    Ok(m)
}

/// Parse an annotation document for an image of `image_size` pixels. Mask
/// paths are resolved against `base_dir`.
pub fn parse_annotations(doc: &str, image_size: (u32, u32), base_dir: &Path) -> Result<AnnotationSet> {
    let root: Value = serde_json::from_str(doc).map_err(|e| schema("$", e.to_string()))?;
    let root = as_object(&root, "$")?;

    match field(root, "$", "version")?.as_u64() {
        Some(1) => {}
        _ => return Err(schema("$.version", "expected 1")),
    }
    let image = as_str(field(root, "$", "image")?, "$.image")?.to_string();

    let kp = as_object(field(root, "$", "keypoints")?, "$.keypoints")?;
    for key in kp.keys() {
        if key.parse::<JointName>().is_err() {
            return Err(schema(&format!("$.keypoints.{key}"), "unknown joint name"));
        }
    }
    let mut points = [Vec2::zeros(); crate::skeleton::JOINT_COUNT];
    for j in JointName::ALL {
        let path = format!("$.keypoints.{j}");
        let v = kp.get(j.as_str()).ok_or_else(|| schema(&path, "missing keypoint"))?;
        points[j.index()] = point(v, &path)?;
    }

    let figure_mask = mask(field(root, "$", "figure_mask")?, "$.figure_mask", image_size, base_dir)?;

    let empty = Vec::new();
    let list = |key: &str| -> Result<&Vec<Value>> {
        match root.get(key) {
            None | Some(Value::Null) => Ok(&empty),
            Some(v) => v.as_array().ok_or_else(|| schema(&format!("$.{key}"), "expected a list")),
        }
    };
    let seg_docs = list("segments")?;
    let part_docs = list("parts")?;

    let mut ids: Vec<String> = Vec::new();
    let mut collect_id = |v: &Value, path: &str| -> Result<String> {
        let o = as_object(v, path)?;
        let id = as_str(field(o, path, "id")?, &format!("{path}.id"))?.to_string();
        if id == "figure" || ids.contains(&id) {
            return Err(AnnotationError::Duplicate { id });
        }
        ids.push(id.clone());
        Ok(id)
    };
    let seg_ids = seg_docs
        .iter()
        .enumerate()
        .map(|(i, v)| collect_id(v, &format!("$.segments[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let part_ids = part_docs
        .iter()
        .enumerate()
        .map(|(i, v)| collect_id(v, &format!("$.parts[{i}]")))
        .collect::<Result<Vec<_>>>()?;

    let resolve = |v: Option<&Value>, path: &str, allow_parts: bool| -> Result<ParentRef> {
        match v {
            None | Some(Value::Null) => Ok(ParentRef::Figure),
            Some(Value::String(s)) if s == "figure" => Ok(ParentRef::Figure),
            Some(Value::String(s)) => {
                if let Some(i) = seg_ids.iter().position(|x| x == s) {
                    Ok(ParentRef::Segment(i))
                } else if let Some(i) = part_ids.iter().position(|x| x == s).filter(|_| allow_parts) {
                    Ok(ParentRef::Part(i))
                } else {
                    Err(AnnotationError::Reference {
                        path: path.to_string(),
                        id: s.clone(),
                    })
                }
            }
            Some(_) => Err(schema(path, "parent must be a region id, \"figure\" or null")),
        }
    };

    let mut segments = Vec::new();
    for (i, v) in seg_docs.iter().enumerate() {
        let path = format!("$.segments[{i}]");
        let o = as_object(v, &path)?;
        segments.push(SilhouetteSegment {
            id: seg_ids[i].clone(),
            mask: mask(field(o, &path, "mask")?, &format!("{path}.mask"), image_size, base_dir)?,
            orientation: orientation(field(o, &path, "orientation")?, &format!("{path}.orientation"))?,
            parent: resolve(o.get("parent"), &format!("{path}.parent"), false)?,
        });
    }

    let mut parts = Vec::new();
    for (i, v) in part_docs.iter().enumerate() {
        let path = format!("$.parts[{i}]");
        let o = as_object(v, &path)?;
        let m = match o.get("mask") {
            None | Some(Value::Null) => None,
            Some(m) => Some(mask(m, &format!("{path}.mask"), image_size, base_dir)?),
        };
        parts.push(PartRegion {
            id: part_ids[i].clone(),
            mask: m,
            translate: translate(field(o, &path, "translate")?, &format!("{path}.translate"))?,
            direction: orientation(field(o, &path, "direction")?, &format!("{path}.direction"))?,
            enclosed: as_bool(field(o, &path, "enclosed")?, &format!("{path}.enclosed"))?,
            hide_on_back: as_bool(field(o, &path, "hide_on_back")?, &format!("{path}.hide_on_back"))?,
            parent: resolve(o.get("parent"), &format!("{path}.parent"), true)?,
        });
    }

    let mut feet = [Side::Left, Side::Right].map(|side| FootAnnotation {
        side,
        present: true,
        orientation: Orientation::None,
    });
    match root.get("feet") {
        None | Some(Value::Null) => {}
        Some(v) => {
            let o = as_object(v, "$.feet")?;
            for key in o.keys() {
                if key != "left" && key != "right" {
                    return Err(schema(&format!("$.feet.{key}"), "expected left or right"));
                }
            }
            for side in [Side::Left, Side::Right] {
                if let Some(f) = o.get(&side.to_string()) {
                    let path = format!("$.feet.{side}");
                    let fo = as_object(f, &path)?;
                    feet[side.index()] = FootAnnotation {
                        side,
                        present: as_bool(field(fo, &path, "present")?, &format!("{path}.present"))?,
                        orientation: orientation(
                            field(fo, &path, "orientation")?,
                            &format!("{path}.orientation"),
                        )?,
                    };
                }
            }
        }
    }

    Ok(AnnotationSet {
        image,
        keypoints: JointKeypoints::new(points),
        figure_mask,
        segments,
        parts,
        feet,
    })
}

/// Read an annotation document and the drawing it references.
pub fn load_annotations(path: &Path) -> Result<(AnnotationSet, image::RgbaImage)> {
    let io = |p: &Path, e: &dyn std::fmt::Display| AnnotationError::Io {
        path: p.display().to_string(),
        message: e.to_string(),
    };
    let doc = std::fs::read_to_string(path).map_err(|e| io(path, &e))?;
    let root: Value = serde_json::from_str(&doc).map_err(|e| schema("$", e.to_string()))?;
    let rel = root
        .get("image")
        .and_then(Value::as_str)
        .ok_or_else(|| schema("$.image", "missing required key"))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let img_path = base.join(rel);
    let img = image::open(&img_path).map_err(|e| io(&img_path, &e))?.to_rgba8();
    let set = parse_annotations(&doc, img.dimensions(), base)?;
    Ok((set, img))
}

fn parent_value(a: &AnnotationSet, r: ParentRef) -> Value {
    match r {
        ParentRef::Figure => json!("figure"),
        _ => json!(a.region_id(r)),
    }
}

fn mask_value(m: &BinaryMask) -> Value {
    serde_json::to_value(encode_rle(m)).expect("run-length masks serialize")
}

/// Serialize with every mask inlined as a run-length object.
pub fn serialize_annotations(a: &AnnotationSet) -> String {
    let keypoints: Map<String, Value> = a
        .keypoints
        .iter()
        .map(|(j, p)| (j.as_str().to_string(), json!([p.x, p.y])))
        .collect();
    let segments: Vec<Value> = a
        .segments
        .iter()
        .map(|s| {
            json!({
                "id": s.id,
                "mask": mask_value(&s.mask),
                "orientation": s.orientation.as_str(),
                "parent": parent_value(a, s.parent),
            })
        })
        .collect();
    let parts: Vec<Value> = a
        .parts
        .iter()
        .map(|p| {
            json!({
                "id": p.id,
                "mask": p.mask.as_ref().map(mask_value),
                "translate": p.translate.as_str(),
                "direction": p.direction.as_str(),
                "enclosed": p.enclosed,
                "hide_on_back": p.hide_on_back,
                "parent": parent_value(a, p.parent),
            })
        })
        .collect();
    let foot = |f: &FootAnnotation| json!({"present": f.present, "orientation": f.orientation.as_str()});
    let doc = json!({
        "version": 1,
        "image": a.image,
        "keypoints": keypoints,
        "figure_mask": mask_value(&a.figure_mask),
        "segments": segments,
        "parts": parts,
        "feet": {"left": foot(&a.feet[0]), "right": foot(&a.feet[1])},
    });
    serde_json::to_string_pretty(&doc).expect("annotation documents serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_doc() -> String {
        let kp: Map<String, Value> = JointName::ALL
            .iter()
            .enumerate()
            .map(|(i, j)| (j.as_str().to_string(), json!([2 + i % 4, 2 + i / 4])))
            .collect();
        json!({
            "version": 1,
            "image": "drawing.png",
            "keypoints": kp,
            "figure_mask": {"size": [8, 8], "counts": [0, 64]},
        })
        .to_string()
    }

    #[test]
    fn minimal_document() {
        let a = parse_annotations(&minimal_doc(), (8, 8), Path::new(".")).unwrap();
        assert!(a.segments.is_empty() && a.parts.is_empty());
        assert_eq!(a.figure_mask.count(), 64);
        assert_eq!(a.keypoints.get(JointName::Torso), Vec2::new(3.0, 2.0));
        let again = parse_annotations(&serialize_annotations(&a), (8, 8), Path::new(".")).unwrap();
        assert_eq!(again, a);
    }

    #[test]
    fn dangling_parent_names_the_id() {
        let mut v: Value = serde_json::from_str(&minimal_doc()).unwrap();
        v["parts"] = json!([{
            "id": "nose", "mask": null, "translate": "smooth", "direction": "left",
            "enclosed": true, "hide_on_back": true, "parent": "face"
        }]);
        let err = parse_annotations(&v.to_string(), (8, 8), Path::new(".")).unwrap_err();
        match err {
            AnnotationError::Reference { id, path } => {
                assert_eq!(id, "face");
                assert_eq!(path, "$.parts[0].parent");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn schema_errors_carry_a_path() {
        let mut v: Value = serde_json::from_str(&minimal_doc()).unwrap();
        v["keypoints"].as_object_mut().unwrap().remove("left_knee");
        match parse_annotations(&v.to_string(), (8, 8), Path::new(".")) {
            Err(AnnotationError::Schema { path, .. }) => assert_eq!(path, "$.keypoints.left_knee"),
            other => panic!("unexpected {other:?}"),
        }
        let mut v: Value = serde_json::from_str(&minimal_doc()).unwrap();
        v["version"] = json!(2);
        assert!(matches!(
            parse_annotations(&v.to_string(), (8, 8), Path::new(".")),
            Err(AnnotationError::Schema { .. })
        ));
    }

    #[test]
    fn mask_size_mismatch() {
        let err = parse_annotations(&minimal_doc(), (9, 8), Path::new(".")).unwrap_err();
        assert!(matches!(err, AnnotationError::Dimension { expected: (9, 8), found: (8, 8), .. }));
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let mut v: Value = serde_json::from_str(&minimal_doc()).unwrap();
        let m = json!({"size": [8, 8], "counts": [0, 64]});
        v["segments"] = json!([{"id": "a", "mask": m, "orientation": "none", "parent": null}]);
        v["parts"] = json!([{
            "id": "a", "mask": null, "translate": "none", "direction": "none",
            "enclosed": false, "hide_on_back": false, "parent": null
        }]);
        assert!(matches!(
            parse_annotations(&v.to_string(), (8, 8), Path::new(".")),
            Err(AnnotationError::Duplicate { .. })
        ));
    }
}
