use crate::Side;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextureSide {
    Front,
    Back,
}

impl TextureSide {
    pub fn as_str(self) -> &'static str {
        match self {
            TextureSide::Front => "front",
            TextureSide::Back => "back",
        }
    }
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn near_any(theta: f64, boundaries: &[f64], band: f64) -> bool {
    band > 0.0 && boundaries.iter().any(|&b| circular_distance(theta, b) < band)
}

fn debounce<T: Copy>(raw: T, theta: f64, boundaries: &[f64], previous: Option<T>, band: f64) -> T {
    match previous {
        Some(p) if near_any(theta, boundaries, band) => p,
        _ => raw,
    }
}

/// Left view for θ ∈ [0, π], right otherwise. Inside the hysteresis band
/// around 0 and π the previous side is kept.
pub fn select_view(theta: f64, previous: Option<Side>, hysteresis: f64) -> Side {
    let raw = if (0.0..=PI).contains(&theta) { Side::Left } else { Side::Right };
    debounce(raw, theta, &[0.0, PI], previous, hysteresis)
}

/// Left and right limbs swap while the skeleton turns its back to the camera:
/// θ ∈ [0, π/2] ∪ [3π/2, 2π).
pub fn limb_swapped(theta: f64, previous: Option<bool>, hysteresis: f64) -> bool {
    let raw = theta <= FRAC_PI_2 || theta >= 3.0 * FRAC_PI_2;
    debounce(raw, theta, &[FRAC_PI_2, 3.0 * FRAC_PI_2], previous, hysteresis)
}

/// Front texture for θ ∈ (π/2, 3π/2), back otherwise.
pub fn texture_side(theta: f64, previous: Option<TextureSide>, hysteresis: f64) -> TextureSide {
    let raw = if theta > FRAC_PI_2 && theta < 3.0 * FRAC_PI_2 {
        TextureSide::Front
    } else {
        TextureSide::Back
    };
    debounce(raw, theta, &[FRAC_PI_2, 3.0 * FRAC_PI_2], previous, hysteresis)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jitter_around_pi_switches_at_most_once() {
        let mut prev = None;
        let mut switches = 0;
        for k in 0..200 {
            let theta = PI + if k % 2 == 0 { 0.01 } else { -0.01 };
            let s = select_view(theta, prev, 0.05);
            if prev.is_some_and(|p| p != s) {
                switches += 1;
            }
            prev = Some(s);
        }
        assert!(switches <= 1);
    }

    #[test]
    fn swapping_matches_back_texture() {
        for k in 0..720 {
            let theta = k as f64 * TAU / 720.0;
            assert_eq!(limb_swapped(theta, None, 0.0), texture_side(theta, None, 0.0) == TextureSide::Back);
        }
    }
}
