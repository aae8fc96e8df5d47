use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use vdrig::deform::{frame_packet, FramePacket};
use vdrig::motion::{CameraTrack, SkeletalMotion};
use vdrig::retarget::{Ablation, FramePose2D, RetargetConfig, Retargeter};
use vdrig::rig::{load_bundle, CharacterRig};
use vdrig::{JointName, Mat3, Vec3};

/// How the camera of a streaming session moves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CameraMode {
    Fixed { position: Vec3 },
    Orbit { radius: f64, height: f64, degrees_per_second: f64 },
    /// Starts at `position`; the client moves it with camera updates.
    ClientDriven { position: Vec3 },
}

impl CameraMode {
    pub fn track(&self) -> CameraTrack {
        match *self {
            CameraMode::Fixed { position } | CameraMode::ClientDriven { position } => CameraTrack::Static { position },
            CameraMode::Orbit {
                radius,
                height,
                degrees_per_second,
            } => CameraTrack::Orbit {
                radius,
                height,
                degrees_per_second,
                start_degrees: 0.0,
            },
        }
    }
}

/// What a streaming session plays: a rig bundle, a motion clip and a camera.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionDescriptor {
    pub bundle: PathBuf,
    pub motion: PathBuf,
    pub camera: CameraMode,
    #[serde(default)]
    pub retarget: RetargetConfig,
    #[serde(default)]
    pub ablation: Ablation,
}

impl SessionDescriptor {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("session {}", path.display()))?;
        let mut d: Self = serde_json::from_str(&text).with_context(|| format!("session {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        d.bundle = base.join(&d.bundle);
        d.motion = base.join(&d.motion);
        Ok(d)
    }

    pub fn open(&self) -> Result<Session> {
        let rig = load_bundle(&self.bundle).with_context(|| format!("bundle {}", self.bundle.display()))?;
        let motion = SkeletalMotion::load(&self.motion, None).with_context(|| format!("motion {}", self.motion.display()))?;
        Session::new(rig, motion, self.camera.track(), self.retarget.clone(), self.ablation)
    }
}

/// A loaded rig and clip with the settings to play them. Shared read-only
/// between connections; per-playback state lives in [`Pipeline`].
#[derive(Debug, Clone)]
pub struct Session {
    pub rig: CharacterRig,
    pub motion: SkeletalMotion,
    pub camera: CameraTrack,
    pub config: RetargetConfig,
    pub ablation: Ablation,
}

impl Session {
    pub fn new(
        rig: CharacterRig,
        motion: SkeletalMotion,
        camera: CameraTrack,
        config: RetargetConfig,
        ablation: Ablation,
    ) -> Result<Self> {
        camera.validate()?;
        config.validate()?;
        motion.leg_length()?;
        Ok(Self {
            rig,
            motion,
            camera,
            config,
            ablation,
        })
    }

    pub fn frame_count(&self) -> usize {
        self.motion.frame_count()
    }

    pub fn fps(&self) -> f64 {
        self.motion.clip.fps()
    }

    pub fn pipeline(&self) -> Result<Pipeline<'_>> {
        let retargeter = Retargeter::new(
            &self.rig,
            self.config.clone(),
            self.ablation,
            self.motion.leg_length()?,
        )?;
        Ok(Pipeline {
            session: self,
            retargeter,
            placements: None,
        })
    }
}

/// One output frame.
#[derive(Debug, Clone)]
pub struct Frame {
    pub pose: FramePose2D,
    pub packet: FramePacket,
}

/// Sequential retarget-and-deform state for one playback.
pub struct Pipeline<'a> {
    session: &'a Session,
    retargeter: Retargeter<'a>,
    placements: Option<Vec<Mat3>>,
}

impl<'a> Pipeline<'a> {
    pub fn ablation(&self) -> Ablation {
        self.retargeter.ablation
    }

    pub fn set_ablation(&mut self, a: Ablation) {
        self.retargeter.ablation = a;
    }

    /// Forget all temporal state, as after a seek.
    pub fn reset(&mut self) {
        self.retargeter.reset();
        self.placements = None;
    }

    /// Camera position of the session's own track at `frame`.
    pub fn track_camera(&self, frame: usize) -> Result<Vec3> {
        let m = &self.session.motion;
        let joints = m.joints(&m.pose(frame)?);
        let root = joints[JointName::RootHip.index()];
        Ok(self.session.camera.position(frame, frame as f64 * m.clip.frame_time, root))
    }

    pub fn frame(&mut self, frame: usize, camera: Vec3) -> Result<Frame> {
        let m = &self.session.motion;
        let joints = m.joints(&m.pose(frame)?);
        let pose = self.retargeter.step(&joints, camera)?;
        let (packet, placed) = frame_packet(&self.session.rig, &pose, frame as u32, self.placements.as_deref());
        self.placements = Some(placed);
        Ok(Frame { pose, packet })
    }

    pub fn next_on_track(&mut self, frame: usize) -> Result<Frame> {
        let cam = self.track_camera(frame)?;
        self.frame(frame, cam)
    }
}
