use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use vdrig::retarget::Ablation;
use vdrig_cli::camera::parse_camera;
use vdrig_cli::commands::{self, PacketFormat, PlaybackArgs, Status};
use vdrig_cli::config::FileConfig;
use vdrig_cli::service::Server;
use vdrig_cli::session::{CameraMode, SessionDescriptor};

#[derive(Parser)]
#[command(name = "vdrig", version, about = "View-dependent 2.5D character rigs from annotated drawings")]
struct Cli {
    /// JSON file overriding rig, retarget and ablation settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Accepted for script compatibility; every command is already deterministic.
    #[arg(long, global = true)]
    seed_independent: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Behaviour {
    ViewDependence,
    LimbSwap,
    PlaneOpt,
}

#[derive(clap::Args)]
struct Playback {
    /// Rig bundle directory.
    #[arg(long)]
    bundle: PathBuf,
    /// BVH motion clip.
    #[arg(long)]
    motion: PathBuf,
    /// JSON joint map for non-CMU skeletons.
    #[arg(long)]
    joint_map: Option<PathBuf>,
    /// `front`, `static:x,y,z`, `orbit:radius,height,deg_per_s[,start_deg]` or a JSON track file.
    #[arg(long, default_value = "front")]
    camera: String,
    /// Disable behaviours, comma separated.
    #[arg(long, value_delimiter = ',')]
    ablate: Vec<Behaviour>,
    /// Stop after this many frames.
    #[arg(long)]
    frames: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Check an annotation document and print one line per finding.
    Validate { annotation: PathBuf },
    /// Build a rig bundle from an annotated drawing.
    Build {
        annotation: PathBuf,
        /// Drawing to use instead of the one named by the annotations.
        #[arg(long)]
        image: Option<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Write the per-frame packet stream of a clip.
    Retarget {
        #[command(flatten)]
        playback: Playback,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "binary")]
        format: PacketFormat,
    },
    /// Render a clip to numbered PNG frames.
    Render {
        #[command(flatten)]
        playback: Playback,
        #[arg(long, short)]
        out: PathBuf,
        /// Image composited behind the character, same size as the canvas.
        #[arg(long)]
        background: Option<PathBuf>,
    },
    /// Stream frames to viewers over TCP.
    Serve {
        /// Session description (JSON). Replaces --bundle, --motion and --camera.
        #[arg(long, conflicts_with_all = ["bundle", "motion"])]
        session: Option<PathBuf>,
        #[arg(long, required_unless_present = "session")]
        bundle: Option<PathBuf>,
        #[arg(long, required_unless_present = "session")]
        motion: Option<PathBuf>,
        /// `front`, `static:x,y,z` or `orbit:radius,height,deg_per_s`; clients may move it.
        #[arg(long, default_value = "front")]
        camera: String,
        #[arg(long, default_value = "127.0.0.1:7878")]
        bind: String,
    },
}

fn ablation(base: Ablation, off: &[Behaviour]) -> Ablation {
    let mut a = base;
    for b in off {
        match b {
            Behaviour::ViewDependence => a.view_dependent = false,
            Behaviour::LimbSwap => a.limb_swap = false,
            Behaviour::PlaneOpt => a.plane_opt = false,
        }
    }
    a
}

fn playback_args<'a>(p: &'a Playback, cfg: &FileConfig) -> Result<PlaybackArgs<'a>> {
    Ok(PlaybackArgs {
        bundle: &p.bundle,
        motion: &p.motion,
        joint_map: p.joint_map.as_deref(),
        camera: parse_camera(&p.camera)?,
        ablation: ablation(cfg.ablation, &p.ablate),
        frames: p.frames,
    })
}

fn serve_descriptor(
    session: Option<&Path>,
    bundle: Option<PathBuf>,
    motion: Option<PathBuf>,
    camera: &str,
    cfg: &FileConfig,
) -> Result<SessionDescriptor> {
    if let Some(p) = session {
        return SessionDescriptor::load(p);
    }
    let mode = match parse_camera(camera)? {
        vdrig::motion::CameraTrack::Static { position } => CameraMode::ClientDriven { position },
        vdrig::motion::CameraTrack::Orbit {
            radius,
            height,
            degrees_per_second,
            ..
        } => CameraMode::Orbit {
            radius,
            height,
            degrees_per_second,
        },
        _ => anyhow::bail!("serve supports static and orbit cameras only"),
    };
    Ok(SessionDescriptor {
        bundle: bundle.context("--bundle is required")?,
        motion: motion.context("--motion is required")?,
        camera: mode,
        retarget: cfg.retarget.clone(),
        ablation: cfg.ablation,
    })
}

fn run(cli: Cli) -> Result<Status> {
    if cli.seed_independent {
        log::debug!("--seed-independent: no command draws random numbers");
    }
    let cfg = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Validate { annotation } => commands::cmd_validate(&annotation, &mut std::io::stdout()),
        Command::Build { annotation, image, out } => {
            match commands::cmd_build(&annotation, image.as_deref(), &out, &cfg) {
                Ok(s) => {
                    println!(
                        "built {} in {:.2} s: {} triangles, {}+{} textures",
                        out.display(),
                        s.seconds,
                        s.triangles,
                        s.textures_per_view[0],
                        s.textures_per_view[1]
                    );
                    Ok(Status::Ok)
                }
                Err(e) if commands::is_validation_failure(&e) => {
                    eprintln!("{e}");
                    Ok(Status::Findings)
                }
                Err(e) => Err(e),
            }
        }
        Command::Retarget { playback, out, format } => {
            let n = commands::cmd_retarget(&playback_args(&playback, &cfg)?, &cfg, &out, format)?;
            println!("wrote {n} packets to {}", out.display());
            Ok(Status::Ok)
        }
        Command::Render {
            playback,
            out,
            background,
        } => {
            let d = commands::cmd_render(&playback_args(&playback, &cfg)?, &cfg, &out, background.as_deref())?;
            println!("rendered {} frames to {}", d.frames.len(), out.display());
            Ok(Status::Ok)
        }
        Command::Serve {
            session,
            bundle,
            motion,
            camera,
            bind,
        } => {
            let desc = serve_descriptor(session.as_deref(), bundle, motion, &camera, &cfg)?;
            let server = Server::bind(&bind, desc.open()?)?;
            println!("serving on {}", server.local_addr()?);
            server.run();
            Ok(Status::Ok)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("VDRIG_LOG", "info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(s) => ExitCode::from(s as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(Status::Failure as u8)
        }
    }
}
