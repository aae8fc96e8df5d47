use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use vdrig_cli::commands::{read_packet_stream, rendered_frames};

fn sample(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/sample").join(name)
}

fn vdrig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vdrig")).args(args).env("VDRIG_LOG", "warn").output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn build_bundle(dir: &Path) -> PathBuf {
    let out = dir.join("bundle");
    let o = vdrig(&["build", s(&sample("figure.json")), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn validate_exit_codes() {
    let o = vdrig(&["validate", s(&sample("figure.json"))]);
    assert_eq!(o.status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(sample("figure.json")).unwrap()).unwrap();
    doc["keypoints"]["left_hand"] = serde_json::json!([0.0, 0.0]);
    doc["image"] = serde_json::json!(s(&sample("figure.png")));
    let bad = dir.path().join("bad.json");
    fs::write(&bad, doc.to_string()).unwrap();
    let o = vdrig(&["validate", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("keypoint_outside_mask"), "{stdout}");
    let o = vdrig(&["build", s(&bad), "--out", s(&dir.path().join("b"))]);
    assert_eq!(o.status.code(), Some(1));

    let o = vdrig(&["validate", "/nonexistent/figure.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn render_writes_one_png_per_frame_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = build_bundle(dir.path());
    let out = dir.path().join("frames");
    let o = vdrig(&[
        "render",
        "--bundle",
        s(&bundle),
        "--motion",
        s(&sample("walk.bvh")),
        "--camera",
        "orbit:500,60,36",
        "--frames",
        "10",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let frames = rendered_frames(&out).unwrap();
    assert_eq!(frames.len(), 10);
    let img = image::open(&frames[0]).unwrap();
    assert!(img.width() > 0 && img.height() > 0);
    let d: serde_json::Value = serde_json::from_slice(&fs::read(out.join("diagnostics.json")).unwrap()).unwrap();
    assert_eq!(d["frames"].as_array().unwrap().len(), 10);
}

#[test]
fn retarget_and_render_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = build_bundle(dir.path());
    let args = |out: &Path| {
        vec![
            "--bundle".to_string(),
            s(&bundle).to_string(),
            "--motion".to_string(),
            s(&sample("walk.bvh")).to_string(),
            "--frames".to_string(),
            "6".to_string(),
            "--out".to_string(),
            s(out).to_string(),
        ]
    };
    let mut streams = Vec::new();
    let mut renders = Vec::new();
    for k in 0..2 {
        let p = dir.path().join(format!("packets{k}.bin"));
        let mut a = vec!["retarget".to_string()];
        a.extend(args(&p));
        let o = vdrig(&a.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(o.status.code(), Some(0));
        let packets = read_packet_stream(&p).unwrap();
        assert_eq!(packets.len(), 6);
        streams.push(fs::read(&p).unwrap());

        let r = dir.path().join(format!("render{k}"));
        let mut a = vec!["render".to_string()];
        a.extend(args(&r));
        let o = vdrig(&a.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(o.status.code(), Some(0));
        renders.push(rendered_frames(&r).unwrap().iter().map(|f| fs::read(f).unwrap()).collect::<Vec<_>>());
    }
    assert_eq!(streams[0], streams[1]);
    assert_eq!(renders[0], renders[1]);
}

#[test]
fn json_packet_stream_has_one_line_per_frame() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = build_bundle(dir.path());
    let p = dir.path().join("packets.jsonl");
    let o = vdrig(&[
        "retarget",
        "--bundle",
        s(&bundle),
        "--motion",
        s(&sample("arm_sweep.bvh")),
        "--frames",
        "4",
        "--format",
        "json",
        "--out",
        s(&p),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&p).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    for l in lines {
        vdrig::deform::FramePacket::from_json(l).unwrap();
    }
}

#[test]
fn ablating_view_dependence_locks_the_front_view() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = build_bundle(dir.path());
    let out = dir.path().join("frames");
    let o = vdrig(&[
        "render",
        "--bundle",
        s(&bundle),
        "--motion",
        s(&sample("walk.bvh")),
        "--camera",
        "orbit:500,60,90,10",
        "--frames",
        "40",
        "--ablate",
        "view-dependence,limb-swap",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let d: serde_json::Value = serde_json::from_slice(&fs::read(out.join("diagnostics.json")).unwrap()).unwrap();
    assert_eq!(d["ablation"]["view_dependent"], false);
    assert_eq!(d["ablation"]["limb_swap"], false);
    for f in d["frames"].as_array().unwrap() {
        assert_eq!(f["texture"], "front");
        assert_eq!(f["swapped"], false);
    }
}

#[test]
fn bad_inputs_exit_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = build_bundle(dir.path());
    for camera in ["orbit:1,2", "static:a,b,c", "/missing/track.json"] {
        let o = vdrig(&[
            "render",
            "--bundle",
            s(&bundle),
            "--motion",
            s(&sample("walk.bvh")),
            "--camera",
            camera,
            "--out",
            s(&dir.path().join("x")),
        ]);
        assert_eq!(o.status.code(), Some(2), "camera {camera}");
    }
    let o = vdrig(&[
        "render",
        "--bundle",
        s(&dir.path().join("nope")),
        "--motion",
        s(&sample("walk.bvh")),
        "--out",
        s(&dir.path().join("y")),
    ]);
    assert_eq!(o.status.code(), Some(2));
}
