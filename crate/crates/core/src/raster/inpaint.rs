use super::{BinaryMask, RasterError};
use image::{Rgba, RgbaImage};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

const RADIUS: i64 = 3;

/// Fill the pixels of `holes` from the surrounding opaque pixels.
///
/// Hole pixels are visited in order of their 8-connected geodesic distance to
/// the known region (ties broken by row-major index), and each one becomes the
/// inverse-square-distance weighted mean of the known or already-filled pixels
/// within a small window. Pixels outside `holes` are returned untouched.
pub fn inpaint(image: &RgbaImage, holes: &BinaryMask) -> Result<RgbaImage, RasterError> {
    if holes.size() != image.dimensions() {
        return Err(RasterError::Dimension {
            expected: image.dimensions(),
            found: holes.size(),
        });
    }
    let mut out = image.clone();
    if holes.is_empty() {
        return Ok(out);
    }
    let (w, h) = (image.width() as i64, image.height() as i64);
    let idx = |x: i64, y: i64| (y * w + x) as usize;
    let mut known: Vec<bool> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .map(|(x, y)| !holes.get(x as u32, y as u32) && image.get_pixel(x as u32, y as u32)[3] > 0)
        .collect();
    if !known.iter().any(|k| *k) {
        return Err(RasterError::InsufficientContext);
    }

    let mut dist = vec![f64::INFINITY; known.len()];
    let mut heap = BinaryHeap::new();
    for (x, y) in holes.iter_set() {
        let (x, y) = (i64::from(x), i64::from(y));
        let mut best = f64::INFINITY;
        for (dx, dy) in NEIGHBOURS {
            let (nx, ny) = (x + dx, y + dy);
            if nx >= 0 && ny >= 0 && nx < w && ny < h && known[idx(nx, ny)] {
                best = best.min(step(dx, dy));
            }
        }
        if best.is_finite() {
            dist[idx(x, y)] = best;
            heap.push(Reverse((best.to_bits(), idx(x, y))));
        }
    }

    let mut filled = 0usize;
    while let Some(Reverse((bits, i))) = heap.pop() {
        let d = f64::from_bits(bits);
        if known[i] || d > dist[i] {
            continue;
        }
        let (x, y) = (i as i64 % w, i as i64 / w);
        let mut acc = [0.0f64; 4];
        let mut total = 0.0;
        for dy in -RADIUS..=RADIUS {
            for dx in -RADIUS..=RADIUS {
                let (nx, ny) = (x + dx, y + dy);
                if (dx, dy) == (0, 0) || nx < 0 || ny < 0 || nx >= w || ny >= h || !known[idx(nx, ny)] {
                    continue;
                }
                let wgt = 1.0 / (dx * dx + dy * dy) as f64;
                let p = out.get_pixel(nx as u32, ny as u32);
                for c in 0..4 {
                    acc[c] += wgt * f64::from(p[c]);
                }
                total += wgt;
            }
        }
        let px = Rgba(acc.map(|a| (a / total).round().clamp(0.0, 255.0) as u8));
        out.put_pixel(x as u32, y as u32, px);
        known[i] = true;
        filled += 1;
        for (dx, dy) in NEIGHBOURS {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= w || ny >= h {
                continue;
            }
            let j = idx(nx, ny);
            if known[j] || !holes.get(nx as u32, ny as u32) {
                continue;
            }
            let nd = d + step(dx, dy);
            if nd < dist[j] {
                dist[j] = nd;
                heap.push(Reverse((nd.to_bits(), j)));
            }
        }
    }
    if filled != holes.count() {
        return Err(RasterError::InsufficientContext);
    }
    Ok(out)
}

const NEIGHBOURS: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

fn step(dx: i64, dy: i64) -> f64 {
    if dx != 0 && dy != 0 {
        std::f64::consts::SQRT_2
    } else {
        1.0
    }
}
