use super::config::{CostForm, RetargetConfig};
use super::RetargetError;
use crate::Vec3;

/// Angle between two unit vectors, stable near 0 and π.
pub fn great_circle_distance(a: Vec3, b: Vec3) -> f64 {
    a.cross(&b).norm().atan2(a.dot(&b))
}

fn pole(v_u: Vec3, v_l: Vec3) -> Option<Vec3> {
    let g = v_u.cross(&v_l);
    let n = g.norm();
    (n > 1e-12).then(|| g / n)
}

fn cross_track_to_pole(n: Vec3, g: Vec3) -> f64 {
    g.dot(&n).abs().atan2(g.cross(&n).norm())
}

/// Distance from `n` to the great circle through `v_u` and `v_l`.
pub fn cross_track_distance(n: Vec3, v_u: Vec3, v_l: Vec3) -> Result<f64, RetargetError> {
    let g = pole(v_u, v_l).ok_or(RetargetError::UndefinedCircle)?;
    Ok(cross_track_to_pole(n, g))
}

/// Quasi-uniform points on the unit sphere.
pub fn fibonacci_sphere(count: usize) -> Vec<Vec3> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let y = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - y * y).max(0.0).sqrt();
            let phi = golden * i as f64;
            Vec3::new(r * phi.cos(), y, r * phi.sin())
        })
        .collect()
}

/// The per-limb plane-normal objective.
#[derive(Debug, Clone, Copy)]
pub struct PlaneCost {
    pub v_c: Vec3,
    pub v_p: Vec3,
    /// Pole of the limb's great circle; `None` for a straight limb.
    pub pole: Option<Vec3>,
    /// Bend weight 1 − |v_u·v_l|.
    pub weight: f64,
    pub sigma: [f64; 3],
    pub form: CostForm,
}

impl PlaneCost {
    pub fn new(v_u: Vec3, v_l: Vec3, v_c: Vec3, v_p: Vec3, cfg: &RetargetConfig) -> Self {
        let (u, l) = (v_u.normalize(), v_l.normalize());
        let pole = pole(u, l);
        Self {
            v_c,
            v_p,
            pole,
            weight: if pole.is_some() { (1.0 - u.dot(&l).abs()).max(0.0) } else { 0.0 },
            sigma: [cfg.sigma1, cfg.sigma2, cfg.sigma3],
            form: cfg.cost_form,
        }
    }

    pub fn eval(&self, n: Vec3) -> f64 {
        let [s1, s2, s3] = self.sigma;
        let attract = |d: f64, s: f64| (d * d / (2.0 * s * s)).exp();
        let mut c = attract(great_circle_distance(n, self.v_c), s2) + attract(great_circle_distance(n, self.v_p), s3);
        if let Some(g) = self.pole {
            let d = cross_track_to_pole(n, g);
            let e = d * d / (2.0 * s1 * s1);
            c += self.weight
                * match self.form {
                    CostForm::Prose => (-e).exp(),
                    CostForm::Literal => e.exp(),
                };
        }
        c
    }

    pub fn cross_track(&self, n: Vec3) -> Option<f64> {
        self.pole.map(|g| cross_track_to_pole(n, g))
    }
}

/// Angular step below which a refined normal is snapped back onto the previous one.
pub const COHERENCE_SNAP: f64 = 1e-4;

fn tangent_basis(n: Vec3) -> (Vec3, Vec3) {
    let a = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let t1 = (a - n * a.dot(&n)).normalize();
    (t1, n.cross(&t1))
}

fn refine(cost: &PlaneCost, start: Vec3, step0: f64, halvings: usize) -> (Vec3, f64) {
    let mut n = start;
    let mut c = cost.eval(n);
    let mut step = step0;
    let mut halved = 0;
    let mut moves = 0;
    while halved < halvings {
        let (t1, t2) = tangent_basis(n);
        let mut best = (n, c);
        for k in 0..8 {
            let a = k as f64 * std::f64::consts::FRAC_PI_4;
            let dir = t1 * a.cos() + t2 * a.sin();
            let m = (n * step.cos() + dir * step.sin()).normalize();
            let cm = cost.eval(m);
            if cm < best.1 {
                best = (m, cm);
            }
        }
        if best.1 < c && moves < 256 {
            (n, c) = best;
            moves += 1;
        } else {
            step *= 0.5;
            halved += 1;
        }
    }
    (n, c)
}

/// Approximate minimizer of the plane cost: the character plane normal is
/// returned unchanged when it is already far from the limb's great circle;
/// otherwise a fixed spherical point set (plus `v_c` and `v_p`) is scored and
/// the best few are refined by a tangent-plane pattern search.
pub fn optimize_projection_plane(v_u: Vec3, v_l: Vec3, v_c: Vec3, v_p: Vec3, cfg: &RetargetConfig) -> Vec3 {
    let cost = PlaneCost::new(v_u, v_l, v_c, v_p, cfg);
    match cost.cross_track(v_c) {
        Some(d) if d > cfg.tau => return v_c,
        None => return attractor_minimum(&cost),
        _ => {}
    }
    let mut cands: Vec<(Vec3, f64)> = fibonacci_sphere(cfg.candidate_count)
        .into_iter()
        .chain([v_c, v_p])
        .map(|n| (n, cost.eval(n)))
        .collect();
    cands.sort_by(|a, b| a.1.total_cmp(&b.1));
    let best_candidate = cands[0];
    let step0 = 0.5 * (4.0 * std::f64::consts::PI / cfg.candidate_count as f64).sqrt();
    let mut best = best_candidate;
    for &(n, _) in cands.iter().take(3) {
        let r = refine(&cost, n, step0, cfg.refine_iters);
        if r.1 < best.1 {
            best = r;
        }
    }
    if great_circle_distance(best.0, v_p) < COHERENCE_SNAP {
        return v_p;
    }
    best.0
}

/// Normal for a limb with no history: iterate the optimizer with its own
/// output as `v_p` until it returns that input unchanged, so a pose held
/// still keeps the same normal from its first frame on. Normals are kept on
/// the camera side of the character plane.
pub fn settle_projection_plane(v_u: Vec3, v_l: Vec3, v_c: Vec3, cfg: &RetargetConfig) -> Vec3 {
    let mut n = v_c;
    for _ in 0..200 {
        let mut m = optimize_projection_plane(v_u, v_l, v_c, n, cfg);
        if m.dot(&v_c) < 0.0 {
            m = -m;
        }
        if m == n {
            break;
        }
        n = m;
    }
    n
}

/// Straight limb: only the two attractors remain, and their joint minimum
/// lies on the arc from `v_c` to `v_p`.
fn attractor_minimum(cost: &PlaneCost) -> Vec3 {
    let d = great_circle_distance(cost.v_c, cost.v_p);
    if d < 1e-12 {
        return cost.v_c;
    }
    let axis = cost.v_c.cross(&cost.v_p).normalize();
    let at = |t: f64| nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_unchecked(axis), t) * cost.v_c;
    let (mut lo, mut hi) = (0.0, d);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let (a, b) = (hi - r * (hi - lo), lo + r * (hi - lo));
        if cost.eval(at(a)) <= cost.eval(at(b)) {
            hi = b;
        } else {
            lo = a;
        }
    }
    at((lo + hi) / 2.0)
}
