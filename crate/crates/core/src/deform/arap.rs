use super::sparse::{EnvelopeCholesky, SymmetricBuilder};
use super::DeformError;
use crate::raster::{MeshPoint, TexturedMesh, TriangleLocator};
use crate::Vec2;
use serde::{Deserialize, Serialize};

/// Weight of the soft handle constraints relative to the shape terms.
pub const HANDLE_WEIGHT: f64 = 1000.0;
/// How far outside the mesh a handle may sit and still be snapped onto it.
pub const HANDLE_TOLERANCE: f64 = 1.0;

fn rot90(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

/// Prefactored two-step as-rigid-as-possible deformation of one rest mesh.
///
/// Step one minimizes the similarity-invariant error of every vertex relative
/// to its triangle's opposite edge; step two fits a rotated copy of each rest
/// triangle to that result and solves for positions matching the fitted edges.
/// Handles are soft barycentric constraints, so only the right-hand sides
/// change between frames.
#[derive(Debug, Clone)]
pub struct ArapSystem {
    rest: Vec<Vec2>,
    triangles: Vec<[u32; 3]>,
    /// Per triangle, per corner k: the (x, y) coordinates of vertex k in the
    /// frame of the edge that starts at the next corner.
    local: Vec<[(f64, f64); 3]>,
    handles: Vec<MeshPoint>,
    similarity: EnvelopeCholesky,
    fitting: EnvelopeCholesky,
}

/// Deformed vertex positions of a rest mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformedMesh {
    pub vertices: Vec<Vec2>,
}

impl ArapSystem {
    pub fn handles(&self) -> &[MeshPoint] {
        &self.handles
    }

    pub fn vertex_count(&self) -> usize {
        self.rest.len()
    }

    pub fn rest_vertices(&self) -> &[Vec2] {
        &self.rest
    }

    /// Rest positions of the handles (after snapping onto the mesh).
    pub fn handle_rest_positions(&self) -> Vec<Vec2> {
        self.handles
            .iter()
            .map(|h| h.position(&self.rest, &self.triangles))
            .collect()
    }

    /// Two-step solve for the given handle targets.
    pub fn solve(&self, targets: &[Vec2]) -> DeformedMesh {
        assert_eq!(targets.len(), self.handles.len(), "one target per handle");
        let n = self.rest.len();

        let mut b = vec![0.0; 2 * n];
        for (h, t) in self.handles.iter().zip(targets) {
            let tri = self.triangles[h.triangle as usize];
            for (c, &v) in tri.iter().enumerate() {
                let w = HANDLE_WEIGHT * h.barycentric[c];
                b[2 * v as usize] += w * t.x;
                b[2 * v as usize + 1] += w * t.y;
            }
        }
        self.similarity.solve_in_place(&mut b);
        let stage1: Vec<Vec2> = (0..n).map(|i| Vec2::new(b[2 * i], b[2 * i + 1])).collect();

        let mut bx = vec![0.0; n];
        let mut by = vec![0.0; n];
        for tri in &self.triangles {
            let q = tri.map(|v| self.rest[v as usize]);
            let p = tri.map(|v| stage1[v as usize]);
            let cq = (q[0] + q[1] + q[2]) / 3.0;
            let cp = (p[0] + p[1] + p[2]) / 3.0;
            let (mut s, mut c) = (0.0, 0.0);
            for k in 0..3 {
                let (a, d) = (q[k] - cq, p[k] - cp);
                c += a.dot(&d);
                s += a.x * d.y - a.y * d.x;
            }
            let r = nalgebra::Rotation2::new(s.atan2(c));
            let f = q.map(|v| cp + r * (v - cq));
            for k in 0..3 {
                let (i, j) = (tri[k] as usize, tri[(k + 1) % 3] as usize);
                let e = f[(k + 1) % 3] - f[k];
                bx[j] += e.x;
                by[j] += e.y;
                bx[i] -= e.x;
                by[i] -= e.y;
            }
        }
        for (h, t) in self.handles.iter().zip(targets) {
            let tri = self.triangles[h.triangle as usize];
            for (c, &v) in tri.iter().enumerate() {
                let w = HANDLE_WEIGHT * h.barycentric[c];
                bx[v as usize] += w * t.x;
                by[v as usize] += w * t.y;
            }
        }
        self.fitting.solve_in_place(&mut bx);
        self.fitting.solve_in_place(&mut by);
        DeformedMesh {
            vertices: (0..n).map(|i| Vec2::new(bx[i], by[i])).collect(),
        }
    }
}

/// Precompute the deformation system of `mesh` with one handle per point.
pub fn register_rest_mesh(mesh: &TexturedMesh, handles: &[Vec2]) -> Result<ArapSystem, DeformError> {
    if handles.len() < 3 {
        return Err(DeformError::Registration(format!(
            "need at least 3 handles, got {}",
            handles.len()
        )));
    }
    let locator = TriangleLocator::new(mesh);
    let mut points = Vec::with_capacity(handles.len());
    for (k, &p) in handles.iter().enumerate() {
        let (mp, d) = locator.locate_or_nearest(mesh, p);
        if d > HANDLE_TOLERANCE {
            return Err(DeformError::Registration(format!(
                "handle {k} at ({:.1}, {:.1}) is {d:.2}px outside the mesh",
                p.x, p.y
            )));
        }
        points.push(mp);
    }
    let n = mesh.vertices.len();

    let mut local = Vec::with_capacity(mesh.triangles.len());
    let mut sim = SymmetricBuilder::new(2 * n);
    let mut fit = SymmetricBuilder::new(n);
    for tri in &mesh.triangles {
        let q = tri.map(|v| mesh.vertices[v as usize]);
        let mut coords = [(0.0, 0.0); 3];
        for k in 0..3 {
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            let e = q[j] - q[i];
            let d = q[k] - q[i];
            let len2 = e.norm_squared();
            if len2 <= 0.0 {
                return Err(DeformError::Registration("zero-length mesh edge".into()));
            }
            let (x, y) = (d.dot(&e) / len2, d.dot(&rot90(e)) / len2);
            coords[k] = (x, y);
            // Residual r = v_k - v_i - x (v_j - v_i) - y R (v_j - v_i), with
            // R = [[0, -1], [1, 0]]. Coefficient blocks are a I + b R.
            let blocks = [
                (tri[k] as usize, 1.0, 0.0),
                (tri[i] as usize, x - 1.0, y),
                (tri[j] as usize, -x, -y),
            ];
            for &(u, au, bu) in &blocks {
                for &(v, av, bv) in &blocks {
                    // (au I + bu R)^T (av I + bv R) = (au av + bu bv) I + (au bv - bu av) R
                    let s = au * av + bu * bv;
                    let r = au * bv - bu * av;
                    let (u2, v2) = (2 * u, 2 * v);
                    if u2 >= v2 {
                        sim.add(u2, v2, s);
                        sim.add(u2 + 1, v2 + 1, s);
                        sim.add(u2, v2 + 1, -r);
                        sim.add(u2 + 1, v2, r);
                    }
                }
            }
        }
        local.push(coords);
        for k in 0..3 {
            let (i, j) = (tri[k] as usize, tri[(k + 1) % 3] as usize);
            fit.add(i, i, 1.0);
            fit.add(j, j, 1.0);
            fit.add(i, j, -1.0);
        }
    }
    for h in &points {
        let tri = mesh.triangles[h.triangle as usize];
        for (a, &u) in tri.iter().enumerate() {
            for (b, &v) in tri.iter().enumerate() {
                let w = HANDLE_WEIGHT * h.barycentric[a] * h.barycentric[b];
                let (u, v) = (u as usize, v as usize);
                if u >= v {
                    sim.add(2 * u, 2 * v, w);
                    sim.add(2 * u + 1, 2 * v + 1, w);
                    fit.add(u, v, w);
                }
            }
        }
    }
    let similarity = sim
        .factor()
        .map_err(|e| DeformError::Registration(format!("similarity step: {e}")))?;
    let fitting = fit
        .factor()
        .map_err(|e| DeformError::Registration(format!("fitting step: {e}")))?;
    Ok(ArapSystem {
        rest: mesh.vertices.clone(),
        triangles: mesh.triangles.clone(),
        local,
        handles: points,
        similarity,
        fitting,
    })
}

impl ArapSystem {
    /// Step-one energy of a configuration; zero for any similarity image of
    /// the rest mesh.
    pub fn similarity_energy(&self, v: &[Vec2]) -> f64 {
        let mut e = 0.0;
        for (tri, coords) in self.triangles.iter().zip(&self.local) {
            for k in 0..3 {
                let (i, j) = ((k + 1) % 3, (k + 2) % 3);
                let (x, y) = coords[k];
                let (vi, vj, vk) = (v[tri[i] as usize], v[tri[j] as usize], v[tri[k] as usize]);
                let ed = vj - vi;
                e += (vk - vi - ed * x - rot90(ed) * y).norm_squared();
            }
        }
        e
    }
}
