use crate::{JointName, Vec2};
use serde::{Deserialize, Serialize};

/// A 2D triangle mesh with per-vertex texture coordinates.
///
/// Texture coordinates are in texel units of the owning view canvas (the same
/// frame as the rest vertices), so `uv == vertices` for every rest mesh the rig
/// builder produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TexturedMesh {
    pub vertices: Vec<Vec2>,
    pub triangles: Vec<[u32; 3]>,
    pub uv: Vec<Vec2>,
    /// Per-triangle bone label (named by the bone's child joint); empty until
    /// the rig builder assigns labels.
    #[serde(default)]
    pub triangle_joint: Vec<JointName>,
}

impl TexturedMesh {
    pub fn triangle(&self, t: usize) -> [Vec2; 3] {
        let [a, b, c] = self.triangles[t];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    /// Signed area of triangle `t` (positive for the builder's winding).
    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle(t);
        0.5 * ((b - a).x * (c - a).y - (b - a).y * (c - a).x)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.signed_area(t).abs()).sum()
    }

    pub fn centroid(&self, t: usize) -> Vec2 {
        let [a, b, c] = self.triangle(t);
        (a + b + c) / 3.0
    }

    /// Undirected edges that belong to exactly one triangle.
    pub fn boundary_edges(&self) -> Vec<(u32, u32)> {
        let mut count = std::collections::HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_insert(0u32) += 1;
            }
        }
        let mut out: Vec<_> = count
            .into_iter()
            .filter(|(_, c)| *c == 1)
            .map(|(e, _)| e)
            .collect();
        out.sort_unstable();
        out
    }

    /// Whether all triangles are reachable from triangle 0 through shared edges.
    pub fn is_edge_connected(&self) -> bool {
        let n = self.triangles.len();
        if n == 0 {
            return false;
        }
        let mut by_edge: std::collections::HashMap<(u32, u32), Vec<usize>> = Default::default();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                by_edge.entry((a.min(b), a.max(b))).or_default().push(t);
            }
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(t) = stack.pop() {
            let tri = self.triangles[t];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                for &u in &by_edge[&(a.min(b), a.max(b))] {
                    if !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Barycentric coordinates of `p` in triangle `(a, b, c)`.
pub(crate) fn barycentric(p: Vec2, a: Vec2, b: Vec2, c: Vec2) -> [f64; 3] {
    let v0 = b - a;
    let v1 = c - a;
    let v2 = p - a;
    let den = v0.x * v1.y - v1.x * v0.y;
    if den.abs() < 1e-300 {
        return [1.0, 0.0, 0.0];
    }
    let v = (v2.x * v1.y - v1.x * v2.y) / den;
    let w = (v0.x * v2.y - v2.x * v0.y) / den;
    [1.0 - v - w, v, w]
}

/// Closest point of triangle `(a, b, c)` to `p`, as clamped barycentric
/// coordinates (non-negative, summing to one).
pub(crate) fn closest_barycentric(p: Vec2, a: Vec2, b: Vec2, c: Vec2) -> [f64; 3] {
    let bc = barycentric(p, a, b, c);
    if bc.iter().all(|x| *x >= 0.0) {
        return bc;
    }
    let seg = |p: Vec2, u: Vec2, v: Vec2| {
        let d = v - u;
        let t = ((p - u).dot(&d) / d.norm_squared().max(1e-300)).clamp(0.0, 1.0);
        (t, (p - (u + d * t)).norm_squared())
    };
    let (tab, dab) = seg(p, a, b);
    let (tbc, dbc) = seg(p, b, c);
    let (tca, dca) = seg(p, c, a);
    if dab <= dbc && dab <= dca {
        [1.0 - tab, tab, 0.0]
    } else if dbc <= dca {
        [0.0, 1.0 - tbc, tbc]
    } else {
        [tca, 0.0, 1.0 - tca]
    }
}

/// Uniform-grid point location over a mesh.
#[derive(Debug, Clone)]
pub struct TriangleLocator {
    origin: Vec2,
    cell: f64,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<u32>>,
}

/// A point expressed on a mesh triangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshPoint {
    pub triangle: u32,
    pub barycentric: [f64; 3],
}

impl MeshPoint {
    pub fn position(&self, mesh_vertices: &[Vec2], triangles: &[[u32; 3]]) -> Vec2 {
        let tri = triangles[self.triangle as usize];
        let b = self.barycentric;
        mesh_vertices[tri[0] as usize] * b[0]
            + mesh_vertices[tri[1] as usize] * b[1]
            + mesh_vertices[tri[2] as usize] * b[2]
    }
}

impl TriangleLocator {
    pub fn new(mesh: &TexturedMesh) -> Self {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &mesh.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        let n = mesh.triangles.len().max(1);
        let extent = (hi - lo).sup(&Vec2::new(1.0, 1.0));
        let cell = ((extent.x * extent.y) / n as f64).sqrt().max(1.0);
        let cols = (extent.x / cell).ceil() as usize + 1;
        let rows = (extent.y / cell).ceil() as usize + 1;
        let mut buckets = vec![Vec::new(); cols * rows];
        for (t, _) in mesh.triangles.iter().enumerate() {
            let [a, b, c] = mesh.triangle(t);
            let tlo = a.inf(&b).inf(&c);
            let thi = a.sup(&b).sup(&c);
            let (c0, r0) = Self::cell_of(lo, cell, tlo);
            let (c1, r1) = Self::cell_of(lo, cell, thi);
            for r in r0..=r1.min(rows - 1) {
                for c in c0..=c1.min(cols - 1) {
                    buckets[r * cols + c].push(t as u32);
                }
            }
        }
        Self { origin: lo, cell, cols, rows, buckets }
    }

    fn cell_of(origin: Vec2, cell: f64, p: Vec2) -> (usize, usize) {
        let c = ((p.x - origin.x) / cell).floor().max(0.0) as usize;
        let r = ((p.y - origin.y) / cell).floor().max(0.0) as usize;
        (c, r)
    }

    /// Triangle containing `p`, if any.
    pub fn locate(&self, mesh: &TexturedMesh, p: Vec2) -> Option<MeshPoint> {
        let (c, r) = Self::cell_of(self.origin, self.cell, p);
        if c >= self.cols || r >= self.rows || p.x < self.origin.x - 1e-9 || p.y < self.origin.y - 1e-9 {
            return None;
        }
        for &t in &self.buckets[r * self.cols + c] {
            let [a, b, cc] = mesh.triangle(t as usize);
            let bc = barycentric(p, a, b, cc);
            if bc.iter().all(|x| *x >= -1e-12) {
                return Some(MeshPoint { triangle: t, barycentric: bc });
            }
        }
        None
    }

    /// Containing triangle, or the nearest triangle with clamped coordinates
    /// together with the distance to it.
    pub fn locate_or_nearest(&self, mesh: &TexturedMesh, p: Vec2) -> (MeshPoint, f64) {
        if let Some(mp) = self.locate(mesh, p) {
            let clamped = clamp_bary(mp.barycentric);
            return (MeshPoint { triangle: mp.triangle, barycentric: clamped }, 0.0);
        }
        let mut best = (MeshPoint { triangle: 0, barycentric: [1.0, 0.0, 0.0] }, f64::INFINITY);
        for t in 0..mesh.triangles.len() {
            let [a, b, c] = mesh.triangle(t);
            let bc = closest_barycentric(p, a, b, c);
            let q = a * bc[0] + b * bc[1] + c * bc[2];
            let d = (q - p).norm();
            if d < best.1 {
                best = (MeshPoint { triangle: t as u32, barycentric: bc }, d);
            }
        }
        best
    }
}

fn clamp_bary(b: [f64; 3]) -> [f64; 3] {
    let c = [b[0].max(0.0), b[1].max(0.0), b[2].max(0.0)];
    let s = c[0] + c[1] + c[2];
    [c[0] / s, c[1] / s, c[2] / s]
}
