use crate::annotation::Translate;
use crate::rig::{translation_matrix, BuiltPart, CharacterView};
use crate::{Mat3, Vec2};

/// Blend weight toward the key views: +1 at π/2, −1 at 3π/2, 0 facing the
/// camera or facing away.
pub fn lateral_factor(theta: f64) -> f64 {
    theta.sin()
}

fn quantize(f: f64, levels: u32) -> f64 {
    let l = f64::from(levels.max(1));
    (f * l).round() / l
}

/// The part's own view-dependent transform: identity blended toward the
/// matching key-view transform by |sin θ|.
pub fn interpolate_part_transform(part: &BuiltPart, theta: f64, discrete_levels: u32) -> Mat3 {
    let Some([left, right]) = part.keyviews else {
        return Mat3::identity();
    };
    let s = lateral_factor(theta);
    let key = if s >= 0.0 { left } else { right };
    let f = match part.translate {
        Translate::None => return Mat3::identity(),
        Translate::Smooth => s.abs(),
        Translate::Discrete => quantize(s.abs(), discrete_levels),
    };
    translation_matrix(key.translation() * f)
}

/// Per part, its own translation plus those of all ancestor parts.
pub fn effective_translations(view: &CharacterView, theta: f64, discrete_levels: u32) -> Vec<Vec2> {
    let own: Vec<Vec2> = view
        .parts
        .iter()
        .map(|p| {
            let m = interpolate_part_transform(p, theta, discrete_levels);
            Vec2::new(m[(0, 2)], m[(1, 2)])
        })
        .collect();
    (0..view.parts.len())
        .map(|i| {
            let mut t = own[i];
            let mut cur = view.parts[i].parent_part();
            let mut guard = 0;
            while let Some(p) = cur {
                t += own[p];
                cur = view.parts[p].parent_part();
                guard += 1;
                if guard > view.parts.len() {
                    break;
                }
            }
            t
        })
        .collect()
}
