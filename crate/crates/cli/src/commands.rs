use crate::config::FileConfig;
use crate::session::{Frame, Session};
use anyhow::{Context, Result};
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;
use vdrig::annotation::{load_annotations, parse_annotations, validate, AnnotationSet};
use vdrig::deform::composite;
use vdrig::motion::{wrap_angle, CameraTrack, JointMap, SkeletalMotion};
use vdrig::retarget::Ablation;
use vdrig::rig::{build_rig, load_bundle, save_bundle, RigError};
use vdrig::JointName;

/// Process exit status of a subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Findings = 1,
    Failure = 2,
}

/// Load an annotation document, optionally against an explicit drawing.
pub fn load_document(annotation: &Path, image: Option<&Path>) -> Result<(AnnotationSet, image::RgbaImage)> {
    match image {
        None => Ok(load_annotations(annotation)?),
        Some(p) => {
            let img = image::open(p).with_context(|| format!("decoding {}", p.display()))?.to_rgba8();
            let doc = fs::read_to_string(annotation).with_context(|| format!("reading {}", annotation.display()))?;
            let base = annotation.parent().unwrap_or(Path::new("."));
            Ok((parse_annotations(&doc, img.dimensions(), base)?, img))
        }
    }
}

/// Print one line per finding; `Findings` if there are any.
pub fn cmd_validate(annotation: &Path, out: &mut impl Write) -> Result<Status> {
    let (a, _) = load_document(annotation, None)?;
    let report = validate(&a);
    for f in &report.findings {
        writeln!(out, "{f}")?;
    }
    if report.is_clean() {
        writeln!(out, "ok: {}", annotation.display())?;
        Ok(Status::Ok)
    } else {
        Ok(Status::Findings)
    }
}

pub struct BuildSummary {
    pub seconds: f64,
    pub triangles: usize,
    pub textures_per_view: [usize; 2],
}

pub fn cmd_build(annotation: &Path, image: Option<&Path>, out_dir: &Path, cfg: &FileConfig) -> Result<BuildSummary> {
    let (a, img) = load_document(annotation, image)?;
    let t = Instant::now();
    let rig = build_rig(&a, &img, &cfg.rig)?;
    let seconds = t.elapsed().as_secs_f64();
    save_bundle(&rig, out_dir)?;
    Ok(BuildSummary {
        seconds,
        triangles: rig.triangle_count(),
        textures_per_view: [rig.views[0].texture_count(), rig.views[1].texture_count()],
    })
}

/// True when a build failed only because the annotations do not validate.
pub fn is_validation_failure(e: &anyhow::Error) -> bool {
    matches!(e.downcast_ref::<RigError>(), Some(RigError::Validation(_)))
}

pub struct PlaybackArgs<'a> {
    pub bundle: &'a Path,
    pub motion: &'a Path,
    pub joint_map: Option<&'a Path>,
    pub camera: CameraTrack,
    pub ablation: Ablation,
    pub frames: Option<usize>,
}

fn open_session(args: &PlaybackArgs, cfg: &FileConfig) -> Result<Session> {
    let rig = load_bundle(args.bundle).with_context(|| format!("bundle {}", args.bundle.display()))?;
    let map = match args.joint_map {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("joint map {}", p.display()))?;
            Some(JointMap::from_json(&text, &JointMap::cmu())?)
        }
        None => None,
    };
    let motion = SkeletalMotion::load(args.motion, map.as_ref())?;
    Session::new(rig, motion, args.camera.clone(), cfg.retarget.clone(), args.ablation)
}

fn frames_of(session: &Session, limit: Option<usize>) -> usize {
    limit.map_or(session.frame_count(), |n| n.min(session.frame_count()))
}

#[derive(Debug, Serialize)]
pub struct FrameDiagnostics {
    pub frame: usize,
    pub theta: f64,
    pub side: vdrig::Side,
    pub texture: vdrig::retarget::TextureSide,
    pub swapped: bool,
    pub variant: String,
    pub alphas: Vec<f64>,
}

/// Per-frame retargeting record and clip-level summary written next to
/// rendered frames.
#[derive(Debug, Serialize)]
pub struct Diagnostics {
    pub ablation: Ablation,
    /// Largest per-frame change of each bone's 2D angle, degrees, keyed by bone.
    pub max_delta_alpha_deg: std::collections::BTreeMap<String, f64>,
    /// Which quarter turns of the view angle were visited.
    pub quadrants: [bool; 4],
    pub frames: Vec<FrameDiagnostics>,
}

impl Diagnostics {
    fn new(ablation: Ablation) -> Self {
        Self {
            ablation,
            max_delta_alpha_deg: Default::default(),
            quadrants: [false; 4],
            frames: Vec::new(),
        }
    }

    fn push(&mut self, f: usize, frame: &Frame) {
        let p = &frame.pose;
        if let Some(prev) = self.frames.last() {
            for b in JointName::bones() {
                let d = wrap_angle(p.alphas[b.index()] - prev.alphas[b.index()] + std::f64::consts::PI)
                    - std::f64::consts::PI;
                let e = self.max_delta_alpha_deg.entry(b.as_str().to_string()).or_insert(0.0);
                *e = e.max(d.abs().to_degrees());
            }
        }
        let q = ((wrap_angle(p.theta) / std::f64::consts::FRAC_PI_2) as usize).min(3);
        self.quadrants[q] = true;
        self.frames.push(FrameDiagnostics {
            frame: f,
            theta: p.theta,
            side: p.side,
            texture: p.texture,
            swapped: p.swapped,
            variant: p.foot_key.code(),
            alphas: p.alphas.to_vec(),
        });
    }

    pub fn max_delta(&self, bone: JointName) -> f64 {
        self.max_delta_alpha_deg.get(bone.as_str()).copied().unwrap_or(0.0)
    }
}

pub fn frame_file_name(frame: usize) -> String {
    format!("frame_{frame:06}.png")
}

/// Retarget, deform and composite every frame to `out_dir/frame_%06d.png`,
/// plus `diagnostics.json`.
pub fn cmd_render(
    args: &PlaybackArgs,
    cfg: &FileConfig,
    out_dir: &Path,
    background: Option<&Path>,
) -> Result<Diagnostics> {
    let session = open_session(args, cfg)?;
    let bg = match background {
        Some(p) => Some(image::open(p).with_context(|| format!("background {}", p.display()))?.to_rgba8()),
        None => None,
    };
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut pipeline = session.pipeline()?;
    let mut diag = Diagnostics::new(args.ablation);
    for f in 0..frames_of(&session, args.frames) {
        let frame = pipeline.next_on_track(f)?;
        let img = composite(&session.rig, &frame.packet, bg.as_ref())?;
        let path = out_dir.join(frame_file_name(f));
        img.save_with_format(&path, image::ImageFormat::Png)
            .with_context(|| format!("writing {}", path.display()))?;
        diag.push(f, &frame);
    }
    let q: Vec<usize> = (0..4).filter(|&i| diag.quadrants[i]).collect();
    log::info!("rendered {} frames; view-angle quadrants visited: {q:?}", diag.frames.len());
    let path = out_dir.join("diagnostics.json");
    fs::write(&path, serde_json::to_vec_pretty(&diag)?).with_context(|| format!("writing {}", path.display()))?;
    Ok(diag)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PacketFormat {
    /// Each packet prefixed by its u32 little-endian byte length.
    Binary,
    /// One JSON packet per line.
    Json,
}

/// Write the packet stream of a clip to `out`; returns the frame count.
pub fn cmd_retarget(args: &PlaybackArgs, cfg: &FileConfig, out: &Path, format: PacketFormat) -> Result<usize> {
    let session = open_session(args, cfg)?;
    let mut pipeline = session.pipeline()?;
    let file = fs::File::create(out).with_context(|| format!("creating {}", out.display()))?;
    let mut w = std::io::BufWriter::new(file);
    let n = frames_of(&session, args.frames);
    for f in 0..n {
        let frame = pipeline.next_on_track(f)?;
        match format {
            PacketFormat::Binary => {
                let bytes = frame.packet.encode();
                w.write_all(&(bytes.len() as u32).to_le_bytes())?;
                w.write_all(&bytes)?;
            }
            PacketFormat::Json => {
                w.write_all(frame.packet.to_json().as_bytes())?;
                w.write_all(b"\n")?;
            }
        }
    }
    w.flush()?;
    Ok(n)
}

/// Read back a binary packet stream written by [`cmd_retarget`].
pub fn read_packet_stream(path: &Path) -> Result<Vec<vdrig::deform::FramePacket>> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        anyhow::ensure!(i + 4 <= bytes.len(), "truncated length at byte {i}");
        let n = u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes")) as usize;
        i += 4;
        anyhow::ensure!(i + n <= bytes.len(), "truncated packet at byte {i}");
        out.push(vdrig::deform::FramePacket::decode(&bytes[i..i + n])?);
        i += n;
    }
    Ok(out)
}

/// Paths of rendered frames in order.
pub fn rendered_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("frame_") && n.ends_with(".png"))
        })
        .collect();
    v.sort();
    Ok(v)
}
