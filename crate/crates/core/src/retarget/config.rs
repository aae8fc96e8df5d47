use super::RetargetError;
use serde::{Deserialize, Serialize};

/// Which form of the projection-plane cost to minimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostForm {
    /// Repelling bump around the limb's great circle, attractors toward the
    /// character plane normal and the previous normal.
    #[default]
    Prose,
    /// All three exponents positive.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetargetConfig {
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma3: f64,
    /// Cross-track distance above which the character plane normal is used as is.
    pub tau: f64,
    pub candidate_count: usize,
    pub refine_iters: usize,
    pub discrete_levels: u32,
    /// Dead band around every switching angle, radians.
    pub hysteresis: f64,
    pub cost_form: CostForm,
}

impl Default for RetargetConfig {
    fn default() -> Self {
        Self {
            sigma1: 0.3,
            sigma2: 1.2,
            sigma3: 0.8,
            tau: 0.35,
            candidate_count: 256,
            refine_iters: 12,
            discrete_levels: 2,
            hysteresis: 0.05,
            cost_form: CostForm::Prose,
        }
    }
}

impl RetargetConfig {
    pub fn validate(&self) -> Result<(), RetargetError> {
        let bad = |m: &str| Err(RetargetError::Config(m.to_string()));
        if !(self.sigma1 > 0.0 && self.sigma2 > 0.0 && self.sigma3 > 0.0) {
            return bad("sigma1, sigma2 and sigma3 must be positive");
        }
        if !(self.tau > 0.0 && self.tau < std::f64::consts::FRAC_PI_2) {
            return bad("tau must lie in (0, pi/2)");
        }
        if self.candidate_count < 16 {
            return bad("candidate_count must be at least 16");
        }
        if self.discrete_levels == 0 {
            return bad("discrete_levels must be at least 1");
        }
        if !(self.hysteresis >= 0.0 && self.hysteresis < std::f64::consts::FRAC_PI_4) {
            return bad("hysteresis must lie in [0, pi/4)");
        }
        Ok(())
    }
}

/// Behaviours that can be switched off to reproduce the ablation comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Ablation {
    /// Off: the view angle is locked to π (always the front-facing view).
    pub view_dependent: bool,
    pub limb_swap: bool,
    /// Off: every bone is projected onto the character plane.
    pub plane_opt: bool,
}

impl Default for Ablation {
    fn default() -> Self {
        Self {
            view_dependent: true,
            limb_swap: true,
            plane_opt: true,
        }
    }
}

impl Ablation {
    /// Apply a comma-separated list of behaviours to turn off.
    pub fn disable(&mut self, names: &str) -> Result<(), RetargetError> {
        for n in names.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match n {
                "view_dependence" | "view_dependent" => self.view_dependent = false,
                "limb_swap" => self.limb_swap = false,
                "plane_opt" => self.plane_opt = false,
                other => return Err(RetargetError::Config(format!("unknown ablation `{other}`"))),
            }
        }
        Ok(())
    }
}
