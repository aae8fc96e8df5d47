use super::{BinaryMask, RasterError};
use crate::Vec2;
use std::collections::HashMap;

/// Closed boundary loops of a single-component mask.
///
/// Loops are stored without repeating the first vertex. The outer loop has a
/// positive shoelace area in image coordinates (counter-clockwise in the
/// algebraic sense); hole loops have negative area. In both cases the
/// foreground lies to the left of every directed edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub outer: Vec<Vec2>,
    pub holes: Vec<Vec<Vec2>>,
}

/// Twice the signed shoelace area of a closed loop.
pub(crate) fn signed_area2(pts: &[Vec2]) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum()
}

/// Signed shoelace area of a closed loop.
pub fn loop_area(pts: &[Vec2]) -> f64 {
    signed_area2(pts) / 2.0
}

/// Marching-squares 0.5-isocontour of `mask` with samples at pixel centers.
///
/// Crossings sit at edge midpoints. Saddle cells are split so the two diagonal
/// foreground corners stay separate (4-connected foreground, 8-connected
/// background), which matches the component definition used by
/// [`BinaryMask::components`].
pub fn extract_contour(mask: &BinaryMask) -> Result<Contour, RasterError> {
    let comps = mask.component_count();
    if comps == 0 {
        return Err(RasterError::EmptyInput);
    }
    if comps > 1 {
        return Err(RasterError::Multiplicity(comps));
    }

    // Points are kept in doubled integer coordinates so midpoints are exact.
    type P = (i64, i64);
    let mut next: HashMap<P, P> = HashMap::new();
    let (w, h) = (i64::from(mask.width()), i64::from(mask.height()));
    let v = |x: i64, y: i64| mask.get_i(x, y);

    for j in -1..h {
        for i in -1..w {
            // Corners in order TL, TR, BR, BL (doubled coordinates).
            let corners: [P; 4] = [
                (2 * i, 2 * j),
                (2 * i + 2, 2 * j),
                (2 * i + 2, 2 * j + 2),
                (2 * i, 2 * j + 2),
            ];
            let vals = [v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)];
            let fg = vals.iter().filter(|b| **b).count();
            if fg == 0 || fg == 4 {
                continue;
            }
            // Midpoint of edge k runs from corner k to corner k+1.
            let mid = |k: usize| {
                let (a, b) = (corners[k], corners[(k + 1) % 4]);
                ((a.0 + b.0) / 2, (a.1 + b.1) / 2)
            };
            let crossing: Vec<usize> = (0..4).filter(|&k| vals[k] != vals[(k + 1) % 4]).collect();
            let mut emit = |a: P, b: P, f: P| {
                // Orient so the foreground corner f is on the left.
                let cross = (b.0 - a.0) * (f.1 - a.1) - (b.1 - a.1) * (f.0 - a.0);
                let (s, e) = if cross > 0 { (a, b) } else { (b, a) };
                let prev = next.insert(s, e);
                debug_assert!(prev.is_none(), "two segments leave {s:?}");
            };
            if crossing.len() == 2 {
                let f = corners[(0..4).find(|&k| vals[k]).unwrap()];
                emit(mid(crossing[0]), mid(crossing[1]), f);
            } else {
                // Saddle: cut around each foreground corner. Corner k sits
                // between edges k-1 and k.
                for k in (0..4).filter(|&k| vals[k]) {
                    emit(mid((k + 3) % 4), mid(k), corners[k]);
                }
            }
        }
    }

    let mut loops: Vec<Vec<Vec2>> = Vec::new();
    let mut starts: Vec<P> = next.keys().copied().collect();
    starts.sort_by_key(|p| (p.1, p.0));
    let mut used: HashMap<P, bool> = HashMap::new();
    for s in starts {
        if used.contains_key(&s) {
            continue;
        }
        let mut pts = Vec::new();
        let mut cur = s;
        loop {
            used.insert(cur, true);
            pts.push(Vec2::new(cur.0 as f64 / 2.0, cur.1 as f64 / 2.0));
            cur = *next
                .get(&cur)
                .ok_or_else(|| RasterError::Geometry("open contour".into()))?;
            if cur == s {
                break;
            }
        }
        loops.push(pts);
    }

    let mut outer = None;
    let mut holes = Vec::new();
    for l in loops {
        if signed_area2(&l) > 0.0 {
            if outer.is_some() {
                return Err(RasterError::Multiplicity(2));
            }
            outer = Some(l);
        } else {
            holes.push(l);
        }
    }
    let outer = outer.ok_or(RasterError::EmptyInput)?;
    Ok(Contour { outer, holes })
}

fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Douglas-Peucker simplification of a closed loop that only ever moves the
/// boundary away from the foreground (the left side of each edge).
///
/// Every dropped vertex lies within `tolerance` of its replacement chord and on
/// the chord's left, so the simplified region contains the original one.
pub fn simplify_loop(pts: &[Vec2], tolerance: f64) -> Vec<Vec2> {
    let n = pts.len();
    if n < 4 || tolerance <= 0.0 {
        return pts.to_vec();
    }
    // Split the loop at vertex 0 and the vertex farthest from it.
    let far = (1..n)
        .max_by(|&a, &b| {
            (pts[a] - pts[0])
                .norm_squared()
                .total_cmp(&(pts[b] - pts[0]).norm_squared())
        })
        .unwrap();
    let mut keep = vec![false; n];
    keep[0] = true;
    keep[far] = true;
    let mut stack = vec![(0usize, far), (far, n)];
    while let Some((a, b)) = stack.pop() {
        if b - a < 2 {
            continue;
        }
        let pa = pts[a];
        let pb = pts[b % n];
        let d = pb - pa;
        let len = d.norm();
        let mut worst = None;
        let mut worst_score = 0.0;
        let mut ok = true;
        for (i, p) in pts.iter().enumerate().take(b).skip(a + 1) {
            let c = cross(d, p - pa);
            let dist = if len > 0.0 { c.abs() / len } else { (p - pa).norm() };
            let right = c < -1e-12;
            // Prefer splitting where the boundary would move inward.
            let score = if right { dist + 1e6 } else { dist };
            if right || dist > tolerance {
                ok = false;
            }
            if worst.is_none() || score > worst_score {
                worst = Some(i);
                worst_score = score;
            }
        }
        if !ok {
            let m = worst.unwrap();
            keep[m] = true;
            stack.push((a, m));
            stack.push((m, b));
        }
    }
    let out: Vec<Vec2> = pts
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(p, _)| *p)
        .collect();
    // Thin shapes can collapse onto a single chord.
    if out.len() < 3 || signed_area2(&out).abs() < 1e-9 {
        return pts.to_vec();
    }
    out
}

#[cfg(test)]
/// Even-odd point-in-polygon test over a set of loops.
pub(crate) fn point_in_loops(p: Vec2, loops: &[&[Vec2]]) -> bool {
    let mut inside = false;
    for l in loops {
        let n = l.len();
        for i in 0..n {
            let (a, b) = (l[i], l[(i + 1) % n]);
            if (a.y > p.y) != (b.y > p.y) {
                let t = (p.y - a.y) / (b.y - a.y);
                if p.x < a.x + t * (b.x - a.x) {
                    inside = !inside;
                }
            }
        }
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    /// Independent oracle: every cell edge whose endpoint samples differ
    /// contributes its midpoint. Returns doubled coordinates.
    fn crossing_oracle(mask: &BinaryMask) -> BTreeSet<(i64, i64)> {
        let mut out = BTreeSet::new();
        let (w, h) = (mask.width() as i64, mask.height() as i64);
        for y in -1..=h {
            for x in -1..=w {
                let a = mask.get_i(x, y);
                if a != mask.get_i(x + 1, y) {
                    out.insert((2 * x + 1, 2 * y));
                }
                if a != mask.get_i(x, y + 1) {
                    out.insert((2 * x, 2 * y + 1));
                }
            }
        }
        out
    }

    fn doubled(pts: &[Vec2]) -> BTreeSet<(i64, i64)> {
        pts.iter()
            .map(|p| ((p.x * 2.0).round() as i64, (p.y * 2.0).round() as i64))
            .collect()
    }

    #[test]
    fn single_pixel_is_a_diamond() {
        let mask = BinaryMask::from_fn(1, 1, |_, _| true);
        let c = extract_contour(&mask).unwrap();
        assert_eq!(c.outer.len(), 4);
        assert!(c.holes.is_empty());
        assert_eq!(doubled(&c.outer), crossing_oracle(&mask));
        let expected: BTreeSet<_> = [(1, 0), (0, 1), (-1, 0), (0, -1)].into_iter().collect();
        assert_eq!(doubled(&c.outer), expected);
        assert!((loop_area(&c.outer) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn two_by_two_block_has_eight_vertices() {
        let mask = BinaryMask::from_fn(2, 2, |_, _| true);
        let c = extract_contour(&mask).unwrap();
        assert_eq!(c.outer.len(), 8);
        assert_eq!(doubled(&c.outer), crossing_oracle(&mask));
        let area = loop_area(&c.outer);
        assert!((1.0..=4.0).contains(&area), "area {area}");
        assert!((area - 3.5).abs() < 1e-12);
    }

    #[test]
    fn padded_full_canvas_is_a_rectangle_loop() {
        let mask = BinaryMask::from_fn(7, 5, |x, y| (1..6).contains(&x) && (1..4).contains(&y));
        let c = extract_contour(&mask).unwrap();
        // All vertices lie on the rectangle band [0.5, 5.5] x [0.5, 3.5] except
        // the cut corners.
        for p in &c.outer {
            let on_x = (p.x - 0.5).abs() < 1e-12 || (p.x - 5.5).abs() < 1e-12;
            let on_y = (p.y - 0.5).abs() < 1e-12 || (p.y - 3.5).abs() < 1e-12;
            assert!(on_x || on_y, "{p:?}");
        }
        assert_eq!(doubled(&c.outer), crossing_oracle(&mask));
    }

    #[test]
    fn holes_are_clockwise() {
        let mask = BinaryMask::from_fn(5, 5, |x, y| !(x == 2 && y == 2));
        let c = extract_contour(&mask).unwrap();
        assert_eq!(c.holes.len(), 1);
        assert!(loop_area(&c.holes[0]) < 0.0);
        assert!(loop_area(&c.outer) > 0.0);
    }

    #[test]
    fn errors_on_empty_and_multiple() {
        assert_eq!(extract_contour(&BinaryMask::new(3, 3)), Err(RasterError::EmptyInput));
        let two = BinaryMask::from_fn(3, 3, |x, y| (x, y) == (0, 0) || (x, y) == (2, 2));
        assert_eq!(extract_contour(&two), Err(RasterError::Multiplicity(2)));
    }

    #[test]
    fn saddle_keeps_diagonal_pixels_apart() {
        let diagonal = BinaryMask::from_fn(2, 2, |x, y| x == y);
        assert_eq!(extract_contour(&diagonal), Err(RasterError::Multiplicity(2)));
        // One component whose bottom-left cell is a saddle: (0,1) and (1,2) touch
        // diagonally. Resolving toward separated foreground lets the background
        // center leak out through the diagonal, so no hole loop appears.
        let mask = BinaryMask::from_fn(3, 3, |x, y| {
            matches!((x, y), (0, 0) | (1, 0) | (2, 0) | (0, 1) | (2, 1) | (1, 2) | (2, 2))
        });
        assert_eq!(mask.component_count(), 1);
        let c = extract_contour(&mask).unwrap();
        assert!(c.holes.is_empty());
        assert_eq!(doubled(&c.outer), crossing_oracle(&mask));
    }

    fn random_blob(seed: u64) -> BinaryMask {
        // Union of a few discs, then keep the largest component.
        let m = BinaryMask::from_fn(40, 40, |x, y| {
            (0..4).any(|k| {
                let s = seed.rotate_left(k * 16);
                let cx = 10.0 + (s & 0xff) as f64 / 255.0 * 20.0;
                let cy = 10.0 + ((s >> 8) & 0xff) as f64 / 255.0 * 20.0;
                let r = 3.0 + ((s >> 4) & 0x7) as f64;
                (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2) <= r * r
            })
        });
        m.components()
            .into_iter()
            .max_by_key(|c| c.count())
            .unwrap()
    }

    fn rasterize(c: &Contour, w: u32, h: u32) -> BinaryMask {
        let mut loops: Vec<&[Vec2]> = vec![&c.outer];
        loops.extend(c.holes.iter().map(|h| h.as_slice()));
        BinaryMask::from_fn(w, h, |x, y| point_in_loops(Vec2::new(x as f64, y as f64), &loops))
    }

    proptest! {
        #[test]
        fn contour_rasterizes_back_to_mask(seed in any::<u64>()) {
            let mask = random_blob(seed);
            let c = extract_contour(&mask).unwrap();
            prop_assert_eq!(rasterize(&c, 40, 40), mask.clone());
            prop_assert_eq!(
                doubled(&c.outer).union(&c.holes.iter().flat_map(|h| doubled(h)).collect()).count(),
                crossing_oracle(&mask).len()
            );
        }

        #[test]
        fn simplification_stays_within_half_a_pixel_and_covers_pixels(seed in any::<u64>()) {
            let mask = random_blob(seed);
            let c = extract_contour(&mask).unwrap();
            let s = simplify_loop(&c.outer, 0.5);
            prop_assert!(s.len() <= c.outer.len());
            let outer: Vec<&[Vec2]> = vec![&s];
            let holes: Vec<&[Vec2]> = c.holes.iter().map(|h| h.as_slice()).collect();
            for (x, y) in mask.iter_set() {
                let p = Vec2::new(x as f64, y as f64);
                let in_holes = point_in_loops(p, &holes);
                prop_assert!(point_in_loops(p, &outer) && !in_holes);
            }
            // Every original vertex is within tolerance of the simplified loop.
            for p in &c.outer {
                let d = (0..s.len()).map(|i| seg_dist(*p, s[i], s[(i + 1) % s.len()]))
                    .fold(f64::INFINITY, f64::min);
                prop_assert!(d <= 0.5 + 1e-9);
            }
        }
    }

    fn seg_dist(p: Vec2, a: Vec2, b: Vec2) -> f64 {
        let d = b - a;
        let t = ((p - a).dot(&d) / d.norm_squared().max(1e-300)).clamp(0.0, 1.0);
        (p - (a + d * t)).norm()
    }
}
