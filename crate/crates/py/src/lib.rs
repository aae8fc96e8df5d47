//! Python bindings: validate annotations, build rigs, retarget and render clips.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;
use std::path::{Path, PathBuf};
use vdrig::retarget::Ablation;
use vdrig_cli::camera::parse_camera;
use vdrig_cli::commands::{self, PacketFormat, PlaybackArgs};
use vdrig_cli::config::FileConfig;

fn err(e: anyhow::Error) -> PyErr {
    PyRuntimeError::new_err(format!("{e:#}"))
}

fn ablation(off: &[String]) -> PyResult<Ablation> {
    let mut a = Ablation::default();
    for b in off {
        match b.as_str() {
            "view_dependence" => a.view_dependent = false,
            "limb_swap" => a.limb_swap = false,
            "plane_opt" => a.plane_opt = false,
            other => return Err(PyValueError::new_err(format!("unknown behaviour `{other}`"))),
        }
    }
    Ok(a)
}

fn config(path: Option<PathBuf>) -> PyResult<FileConfig> {
    FileConfig::load(path.as_deref()).map_err(err)
}

/// Validation findings of an annotation document, one string each.
#[pyfunction]
fn validate(annotation: PathBuf) -> PyResult<Vec<String>> {
    let (a, _) = commands::load_document(&annotation, None).map_err(err)?;
    Ok(vdrig::annotation::validate(&a).findings.iter().map(|f| f.to_string()).collect())
}

/// Build a rig bundle; returns `(seconds, triangles)`.
#[pyfunction]
#[pyo3(signature = (annotation, out_dir, image=None, config_path=None))]
fn build(annotation: PathBuf, out_dir: PathBuf, image: Option<PathBuf>, config_path: Option<PathBuf>) -> PyResult<(f64, usize)> {
    let cfg = config(config_path)?;
    let s = commands::cmd_build(&annotation, image.as_deref(), &out_dir, &cfg).map_err(err)?;
    Ok((s.seconds, s.triangles))
}

fn playback<'a>(bundle: &'a Path, motion: &'a Path, camera: &str, ablate: &[String], frames: Option<usize>) -> PyResult<PlaybackArgs<'a>> {
    Ok(PlaybackArgs {
        bundle,
        motion,
        joint_map: None,
        camera: parse_camera(camera).map_err(err)?,
        ablation: ablation(ablate)?,
        frames,
    })
}

/// Render frames as PNGs into `out_dir`; returns the diagnostics as a dict.
#[pyfunction]
#[pyo3(signature = (bundle, motion, out_dir, camera="front", frames=None, ablate=Vec::new(), background=None))]
#[allow(clippy::too_many_arguments)]
fn render<'py>(
    py: Python<'py>,
    bundle: PathBuf,
    motion: PathBuf,
    out_dir: PathBuf,
    camera: &str,
    frames: Option<usize>,
    ablate: Vec<String>,
    background: Option<PathBuf>,
) -> PyResult<Bound<'py, PyAny>> {
    let args = playback(&bundle, &motion, camera, &ablate, frames)?;
    let d = commands::cmd_render(&args, &FileConfig::default(), &out_dir, background.as_deref()).map_err(err)?;
    let json = serde_json::to_string(&d).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (json,))
}

/// Binary frame packets of a clip, one `bytes` per frame.
#[pyfunction]
#[pyo3(signature = (bundle, motion, camera="front", frames=None, ablate=Vec::new()))]
fn retarget<'py>(
    py: Python<'py>,
    bundle: PathBuf,
    motion: PathBuf,
    camera: &str,
    frames: Option<usize>,
    ablate: Vec<String>,
) -> PyResult<Vec<Bound<'py, PyBytes>>> {
    let args = playback(&bundle, &motion, camera, &ablate, frames)?;
    let dir = std::env::temp_dir().join(format!("pyvdrig-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("packets.bin");
    let result = commands::cmd_retarget(&args, &FileConfig::default(), &path, PacketFormat::Binary)
        .and_then(|_| commands::read_packet_stream(&path));
    let _ = std::fs::remove_dir_all(&dir);
    Ok(result.map_err(err)?.iter().map(|p| PyBytes::new(py, &p.encode())).collect())
}

#[pymodule]
fn pyvdrig(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(build, m)?)?;
    m.add_function(wrap_pyfunction!(render, m)?)?;
    m.add_function(wrap_pyfunction!(retarget, m)?)?;
    Ok(())
}
