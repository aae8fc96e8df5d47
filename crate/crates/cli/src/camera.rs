use anyhow::{bail, Context, Result};
use std::path::Path;
use vdrig::motion::CameraTrack;
use vdrig::Vec3;

fn numbers(list: &str, what: &str) -> Result<Vec<f64>> {
    list.split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("{what}: `{s}` is not a number")))
        .collect()
}

/// Parse a camera spec: `front`, `static:x,y,z`, `orbit:radius,height,deg_per_s[,start_deg]`,
/// or the path of a JSON camera track.
pub fn parse_camera(spec: &str) -> Result<CameraTrack> {
    let track = if spec == "front" {
        CameraTrack::Static {
            position: Vec3::new(0.0, 30.0, 600.0),
        }
    } else if let Some(rest) = spec.strip_prefix("static:") {
        let v = numbers(rest, "static camera")?;
        if v.len() != 3 {
            bail!("static camera needs x,y,z");
        }
        CameraTrack::Static {
            position: Vec3::new(v[0], v[1], v[2]),
        }
    } else if let Some(rest) = spec.strip_prefix("orbit:") {
        let v = numbers(rest, "orbit camera")?;
        if !(3..=4).contains(&v.len()) {
            bail!("orbit camera needs radius,height,deg_per_s[,start_deg]");
        }
        CameraTrack::Orbit {
            radius: v[0],
            height: v[1],
            degrees_per_second: v[2],
            start_degrees: v.get(3).copied().unwrap_or(0.0),
        }
    } else {
        let p = Path::new(spec);
        let text = std::fs::read_to_string(p).with_context(|| format!("camera spec `{spec}`"))?;
        serde_json::from_str(&text).with_context(|| format!("camera track {}", p.display()))?
    };
    track.validate()?;
    Ok(track)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specs() {
        assert_eq!(
            parse_camera("static:1,2,3").unwrap(),
            CameraTrack::Static {
                position: Vec3::new(1.0, 2.0, 3.0)
            }
        );
        assert!(matches!(
            parse_camera("orbit:500,60,36").unwrap(),
            CameraTrack::Orbit { radius, .. } if radius == 500.0
        ));
        assert!(parse_camera("orbit:-1,0,3").is_err());
        assert!(parse_camera("static:1,2").is_err());
        assert!(parse_camera("/no/such/camera.json").is_err());
    }
}
