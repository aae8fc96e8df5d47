use super::{RasterError, TexturedMesh};
use crate::Vec2;
use spade::{
    AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters,
    Triangulation,
};
use std::collections::{HashMap, HashSet};

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_touch(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// Whether any two edges of the given closed loops intersect or touch, other
/// than consecutive edges of one loop meeting at their shared vertex.
pub fn loops_self_intersect(loops: &[&[Vec2]]) -> bool {
    struct Seg {
        a: Vec2,
        b: Vec2,
        loop_id: usize,
        idx: usize,
        len: usize,
    }
    let mut segs = Vec::new();
    for (l, pts) in loops.iter().enumerate() {
        let n = pts.len();
        for i in 0..n {
            segs.push(Seg { a: pts[i], b: pts[(i + 1) % n], loop_id: l, idx: i, len: n });
        }
    }
    if segs.is_empty() {
        return false;
    }
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for s in &segs {
        lo = lo.inf(&s.a).inf(&s.b);
        hi = hi.sup(&s.a).sup(&s.b);
    }
    let extent = (hi - lo).sup(&Vec2::new(1.0, 1.0));
    let cell = (extent.x * extent.y / segs.len() as f64).sqrt().max(0.5);
    let key = |p: Vec2| (((p.x - lo.x) / cell) as i64, ((p.y - lo.y) / cell) as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, s) in segs.iter().enumerate() {
        let (c0, r0) = key(s.a.inf(&s.b));
        let (c1, r1) = key(s.a.sup(&s.b));
        for r in r0..=r1 {
            for c in c0..=c1 {
                grid.entry((c, r)).or_default().push(i);
            }
        }
    }
    let mut tested = HashSet::new();
    for bucket in grid.values() {
        for (k, &i) in bucket.iter().enumerate() {
            for &j in &bucket[k + 1..] {
                let (i, j) = (i.min(j), i.max(j));
                if !tested.insert((i, j)) {
                    continue;
                }
                let (s, t) = (&segs[i], &segs[j]);
                if s.loop_id == t.loop_id {
                    let adjacent = (s.idx + 1) % s.len == t.idx || (t.idx + 1) % t.len == s.idx;
                    if adjacent {
                        // Consecutive edges may only share their common vertex;
                        // a fold-back onto the previous edge still counts.
                        let (shared, other_s, other_t) = if (s.idx + 1) % s.len == t.idx {
                            (s.b, s.a, t.b)
                        } else {
                            (s.a, s.b, t.a)
                        };
                        let folded = orient(shared, other_s, other_t) == 0.0
                            && (other_s - shared).dot(&(other_t - shared)) > 0.0;
                        if folded || s.len < 3 {
                            return true;
                        }
                        continue;
                    }
                }
                if segments_touch(s.a, s.b, t.a, t.b) {
                    return true;
                }
            }
        }
    }
    false
}

/// Constrained Delaunay triangulation of a polygon with holes.
///
/// All loop edges are kept as constraints (they may be split by Steiner
/// points); faces outside the outer loop or inside a hole are discarded and no
/// triangle exceeds `max_area`. Pass `f64::INFINITY` to disable the area bound.
pub fn triangulate(
    outer: &[Vec2],
    holes: &[Vec<Vec2>],
    max_area: f64,
) -> Result<TexturedMesh, RasterError> {
    if outer.len() < 3 || holes.iter().any(|h| h.len() < 3) {
        return Err(RasterError::Geometry("loops need at least 3 vertices".into()));
    }
    if !(max_area > 0.0) {
        return Err(RasterError::Geometry(format!("max_area must be positive, got {max_area}")));
    }
    let mut loops: Vec<&[Vec2]> = vec![outer];
    loops.extend(holes.iter().map(|h| h.as_slice()));
    if loops_self_intersect(&loops) {
        return Err(RasterError::Geometry("input loops intersect".into()));
    }

    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    for l in &loops {
        let base = vertices.len();
        let n = l.len();
        for (i, p) in l.iter().enumerate() {
            vertices.push(Point2::new(p.x, p.y));
            edges.push([base + i, base + (i + 1) % n]);
        }
    }
    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::bulk_load_cdt(vertices, edges)
        .map_err(|e| RasterError::Geometry(format!("triangulation failed: {e:?}")))?;

    let area: f64 = loops.iter().map(|l| super::contour::loop_area(l).abs()).sum();
    let mut params = RefinementParameters::<f64>::new()
        .exclude_outer_faces(true)
        .with_angle_limit(AngleLimit::from_deg(20.0));
    if max_area.is_finite() {
        let budget = (4.0 * area / max_area) as usize + 10 * cdt.num_vertices() + 100;
        params = params
            .with_max_allowed_area(max_area)
            .with_max_additional_vertices(budget);
    }
    let result = cdt.refine(params);
    let excluded: HashSet<_> = result.excluded_faces.iter().copied().collect();

    let mut index: HashMap<usize, u32> = HashMap::new();
    let mut out_vertices = Vec::new();
    let mut triangles = Vec::new();
    for face in cdt.inner_faces() {
        if excluded.contains(&face.fix()) {
            continue;
        }
        let vs = face.vertices();
        let mut tri = [0u32; 3];
        for (k, v) in vs.iter().enumerate() {
            let id = v.fix().index();
            let next = out_vertices.len() as u32;
            tri[k] = *index.entry(id).or_insert_with(|| {
                let p = v.position();
                out_vertices.push(Vec2::new(p.x, p.y));
                next
            });
        }
        triangles.push(tri);
    }
    if triangles.is_empty() {
        return Err(RasterError::Geometry("triangulation produced no interior faces".into()));
    }
    let mesh = TexturedMesh {
        uv: out_vertices.clone(),
        vertices: out_vertices,
        triangles,
        triangle_joint: Vec::new(),
    };
    if max_area.is_finite() {
        if let Some(t) = (0..mesh.triangles.len()).find(|&t| mesh.signed_area(t) > max_area * (1.0 + 1e-9)) {
            return Err(RasterError::Geometry(format!(
                "refinement stopped with a {:.2}px^2 triangle above the {max_area} bound",
                mesh.signed_area(t)
            )));
        }
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::contour::{extract_contour, loop_area, point_in_loops, simplify_loop};
    use crate::raster::BinaryMask;

    fn square(x0: f64, y0: f64, s: f64) -> Vec<Vec2> {
        vec![
            Vec2::new(x0, y0),
            Vec2::new(x0 + s, y0),
            Vec2::new(x0 + s, y0 + s),
            Vec2::new(x0, y0 + s),
        ]
    }

    #[test]
    fn unit_square_gives_two_triangles() {
        let m = triangulate(&square(0.0, 0.0, 1.0), &[], f64::INFINITY).unwrap();
        assert_eq!(m.triangles.len(), 2);
        assert!((m.total_area() - 1.0).abs() < 1e-9);
        for t in 0..m.triangles.len() {
            assert!(m.signed_area(t) > 0.0);
        }
    }

    #[test]
    fn square_with_hole_area_matches_shoelace() {
        let outer = square(0.0, 0.0, 10.0);
        let mut hole = square(3.0, 3.0, 4.0);
        hole.reverse();
        let expected = loop_area(&outer) + loop_area(&hole);
        assert!((expected - 84.0).abs() < 1e-12);
        for max_area in [f64::INFINITY, 5.0] {
            let m = triangulate(&outer, &[hole.clone()], max_area).unwrap();
            assert!((m.total_area() - expected).abs() < 1e-9, "{}", m.total_area());
            assert!(m.is_edge_connected());
        }
    }

    #[test]
    fn self_intersecting_input_is_rejected() {
        let bowtie = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 2.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(0.0, 2.0),
        ];
        assert!(matches!(
            triangulate(&bowtie, &[], f64::INFINITY),
            Err(RasterError::Geometry(_))
        ));
        assert!(!loops_self_intersect(&[&square(0.0, 0.0, 1.0)]));
    }

    /// Figure-like blob: head disc, body ellipse, two legs.
    fn blob() -> BinaryMask {
        BinaryMask::from_fn(120, 200, |x, y| {
            let (x, y) = (x as f64, y as f64);
            let head = (x - 60.0).powi(2) + (y - 35.0).powi(2) <= 25.0f64.powi(2);
            let body = ((x - 60.0) / 30.0).powi(2) + ((y - 100.0) / 45.0).powi(2) <= 1.0;
            let leg_l = (40.0..52.0).contains(&x) && (120.0..190.0).contains(&y);
            let leg_r = (68.0..80.0).contains(&x) && (120.0..190.0).contains(&y);
            head || body || leg_l || leg_r
        })
    }

    #[test]
    fn figure_contour_respects_area_bound_and_boundary() {
        let mask = blob();
        let c = extract_contour(&mask).unwrap();
        let outer = simplify_loop(&c.outer, 0.5);
        let m = triangulate(&outer, &c.holes, 60.0).unwrap();
        for t in 0..m.triangles.len() {
            let a = m.signed_area(t);
            assert!(a > 0.0 && a <= 60.0 + 1e-9, "triangle {t} area {a}");
        }
        assert!(m.is_edge_connected());
        assert!((m.total_area() - loop_area(&outer)).abs() < 1e-6);

        // Every constraint edge is a union of collinear mesh boundary edges.
        let boundary = m.boundary_edges();
        let n = outer.len();
        for i in 0..n {
            let (a, b) = (outer[i], outer[(i + 1) % n]);
            let covered: f64 = boundary
                .iter()
                .map(|&(u, v)| (m.vertices[u as usize], m.vertices[v as usize]))
                .filter(|(u, v)| orient(a, b, *u).abs() < 1e-6 && orient(a, b, *v).abs() < 1e-6)
                .filter(|(u, v)| on_segment(a, b, *u) && on_segment(a, b, *v))
                .map(|(u, v)| (v - u).norm())
                .sum();
            assert!((covered - (b - a).norm()).abs() < 1e-6, "edge {i}");
        }

        // Every mask pixel center is covered by exactly one triangle.
        let loops: Vec<&[Vec2]> = vec![&outer];
        for (x, y) in mask.iter_set().step_by(7) {
            let p = Vec2::new(x as f64, y as f64);
            assert!(point_in_loops(p, &loops));
            let hits = (0..m.triangles.len())
                .filter(|&t| {
                    let [a, b, c] = m.triangle(t);
                    let bc = crate::raster::barycentric(p, a, b, c);
                    // Half-open rule: count a point on a shared edge once.
                    bc.iter().all(|v| *v > -1e-12)
                        && !bc.iter().any(|v| v.abs() <= 1e-12)
                })
                .count();
            let on_edge = (0..m.triangles.len()).any(|t| {
                let [a, b, c] = m.triangle(t);
                let bc = crate::raster::barycentric(p, a, b, c);
                bc.iter().all(|v| *v > -1e-12) && bc.iter().any(|v| v.abs() <= 1e-12)
            });
            assert!(hits == 1 || (hits == 0 && on_edge), "pixel ({x},{y}) hit {hits} times");
        }
    }
}
