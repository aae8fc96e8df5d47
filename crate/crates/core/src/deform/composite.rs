use super::packet::FramePacket;
use super::DeformError;
use crate::retarget::TextureSide;
use crate::rig::CharacterRig;
use crate::{JointName, Mat3, Vec2};
use image::{Rgba, RgbaImage};

fn blend(dst: &mut Rgba<u8>, src: Rgba<u8>) {
    let sa = src[3];
    if sa == 255 || dst[3] == 0 {
        *dst = src;
        return;
    }
    let (sa, da) = (f32::from(sa) / 255.0, f32::from(dst[3]) / 255.0);
    let oa = sa + da * (1.0 - sa);
    for c in 0..3 {
        let v = (f32::from(src[c]) * sa + f32::from(dst[c]) * da * (1.0 - sa)) / oa;
        dst[c] = v.round().clamp(0.0, 255.0) as u8;
    }
    dst[3] = (oa * 255.0).round() as u8;
}

/// Per output pixel, the rest-space coordinate of what was last drawn there.
struct SourceBuffer {
    width: u32,
    coords: Vec<[f32; 2]>,
}

impl SourceBuffer {
    fn new(w: u32, h: u32) -> Self {
        Self {
            width: w,
            coords: vec![[f32::NAN; 2]; (w * h) as usize],
        }
    }

    fn set(&mut self, x: u32, y: u32, p: Vec2) {
        self.coords[(y * self.width + x) as usize] = [p.x as f32, p.y as f32];
    }

    fn get(&self, x: u32, y: u32) -> Option<Vec2> {
        let c = self.coords[(y * self.width + x) as usize];
        (!c[0].is_nan()).then(|| Vec2::new(f64::from(c[0]), f64::from(c[1])))
    }
}

fn sample(tex: &RgbaImage, p: Vec2) -> Option<Rgba<u8>> {
    let (x, y) = (p.x.round(), p.y.round());
    if x < 0.0 || y < 0.0 || x >= f64::from(tex.width()) || y >= f64::from(tex.height()) {
        return None;
    }
    let px = *tex.get_pixel(x as u32, y as u32);
    (px[3] > 0).then_some(px)
}

fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Fill one textured triangle with the top-left rule and nearest sampling.
fn raster_triangle(out: &mut RgbaImage, src: &mut SourceBuffer, tex: &RgbaImage, d: [Vec2; 3], uv: [Vec2; 3]) {
    let (mut d, mut uv) = (d, uv);
    let mut area = cross(d[1] - d[0], d[2] - d[0]);
    if area < 0.0 {
        d.swap(1, 2);
        uv.swap(1, 2);
        area = -area;
    }
    if !(area > 1e-12) || d.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
        return;
    }
    let (w, h) = (f64::from(out.width()), f64::from(out.height()));
    let lo = d[0].inf(&d[1]).inf(&d[2]);
    let hi = d[0].sup(&d[1]).sup(&d[2]);
    let x0 = lo.x.ceil().max(0.0);
    let y0 = lo.y.ceil().max(0.0);
    let x1 = hi.x.floor().min(w - 1.0);
    let y1 = hi.y.floor().min(h - 1.0);
    if x0 > x1 || y0 > y1 {
        return;
    }
    let edges = [(d[0], d[1]), (d[1], d[2]), (d[2], d[0])];
    let top_left = edges.map(|(a, b)| {
        let e = b - a;
        (e.y == 0.0 && e.x > 0.0) || e.y < 0.0
    });
    for y in y0 as u32..=y1 as u32 {
        for x in x0 as u32..=x1 as u32 {
            let p = Vec2::new(f64::from(x), f64::from(y));
            let mut e = [0.0; 3];
            let mut inside = true;
            for k in 0..3 {
                let (a, b) = edges[k];
                e[k] = cross(b - a, p - a);
                if e[k] < 0.0 || (e[k] == 0.0 && !top_left[k]) {
                    inside = false;
                    break;
                }
            }
            if !inside {
                continue;
            }
            // e[k] is twice the area opposite vertex (k + 2) % 3.
            let l = [e[1] / area, e[2] / area, e[0] / area];
            let q = uv[0] * l[0] + uv[1] * l[1] + uv[2] * l[2];
            if let Some(c) = sample(tex, q) {
                blend(out.get_pixel_mut(x, y), c);
                src.set(x, y, q);
            }
        }
    }
}

/// Draw one part layer through `m` (rest canvas → output). Enclosed parts only
/// land on pixels whose underlying rest coordinate lies inside their clip region.
fn raster_layer(
    out: &mut RgbaImage,
    src: &mut SourceBuffer,
    layer: &RgbaImage,
    origin: (u32, u32),
    m: &Mat3,
    clip: Option<&crate::raster::BinaryMask>,
) {
    let Some(inv) = m.try_inverse() else {
        return;
    };
    let (ox, oy) = (f64::from(origin.0), f64::from(origin.1));
    let corners = [
        Vec2::new(ox - 0.5, oy - 0.5),
        Vec2::new(ox + f64::from(layer.width()) - 0.5, oy - 0.5),
        Vec2::new(ox - 0.5, oy + f64::from(layer.height()) - 0.5),
        Vec2::new(ox + f64::from(layer.width()) - 0.5, oy + f64::from(layer.height()) - 0.5),
    ]
    .map(|c| (m * c.push(1.0)).xy());
    let lo = corners.iter().fold(Vec2::repeat(f64::INFINITY), |a, c| a.inf(c));
    let hi = corners.iter().fold(Vec2::repeat(f64::NEG_INFINITY), |a, c| a.sup(c));
    let (w, h) = (f64::from(out.width()), f64::from(out.height()));
    let x0 = lo.x.floor().max(0.0);
    let y0 = lo.y.floor().max(0.0);
    let x1 = hi.x.ceil().min(w - 1.0);
    let y1 = hi.y.ceil().min(h - 1.0);
    if !(x0 <= x1 && y0 <= y1) {
        return;
    }
    for y in y0 as u32..=y1 as u32 {
        for x in x0 as u32..=x1 as u32 {
            let q = (inv * Vec2::new(f64::from(x), f64::from(y)).push(1.0)).xy();
            let Some(c) = sample(layer, q - Vec2::new(ox, oy)) else {
                continue;
            };
            if let Some(mask) = clip {
                let inside = src.get(x, y).is_some_and(|s| {
                    let (sx, sy) = (s.x.round() as i64, s.y.round() as i64);
                    mask.get_i(sx, sy)
                });
                if !inside {
                    continue;
                }
            }
            blend(out.get_pixel_mut(x, y), c);
            src.set(x, y, q);
        }
    }
}

/// Draw a frame: mesh triangles grouped by bone label in the packet's order,
/// each part layer right after the group of the triangle it is attached to
/// (parents before children). Parts hidden on the back are skipped while the
/// back texture is shown. The result is canvas-sized with straight alpha,
/// drawn over `background` when given.
pub fn composite(rig: &CharacterRig, packet: &FramePacket, background: Option<&RgbaImage>) -> Result<RgbaImage, DeformError> {
    let view = rig.view(packet.side);
    let vi = view
        .variant(packet.variant)
        .ok_or_else(|| DeformError::Packet(format!("view has no variant {}", packet.variant)))?;
    let var = &view.variants[vi];
    let mesh = &var.mesh;
    if packet.vertices.len() != mesh.vertices.len() {
        return Err(DeformError::Packet(format!(
            "packet has {} vertices, mesh has {}",
            packet.vertices.len(),
            mesh.vertices.len()
        )));
    }
    let (w, h) = rig.canvas.size();
    let mut out = match background {
        Some(bg) if bg.dimensions() == (w, h) => bg.clone(),
        Some(bg) => {
            return Err(DeformError::Packet(format!(
                "background is {:?}, canvas is {:?}",
                bg.dimensions(),
                (w, h)
            )))
        }
        None => RgbaImage::from_pixel(w, h, Rgba([0, 0, 0, 0])),
    };
    let mut src = SourceBuffer::new(w, h);
    let tex = match packet.texture {
        TextureSide::Front => &var.front,
        TextureSide::Back => &var.back,
    };
    let verts: Vec<Vec2> = packet
        .vertices
        .iter()
        .map(|v| Vec2::new(f64::from(v[0]), f64::from(v[1])))
        .collect();

    let mut placement: Vec<Option<Mat3>> = vec![None; view.parts.len()];
    for p in &packet.placements {
        if let Some(slot) = placement.get_mut(p.part as usize) {
            *slot = Some(p.matrix());
        }
    }
    let depth = |mut i: usize| {
        let mut d = 0;
        while let Some(p) = view.parts[i].parent_part() {
            i = p;
            d += 1;
            if d > view.parts.len() {
                break;
            }
        }
        d
    };
    let mut drawn_parts: Vec<(usize, JointName)> = view
        .parts
        .iter()
        .enumerate()
        .filter(|(i, p)| p.layer.is_some() && placement[*i].is_some())
        .filter(|(_, p)| !(p.hide_on_back && packet.texture == TextureSide::Back))
        .map(|(i, p)| {
            let t = p.attachments[vi].triangle as usize;
            (i, mesh.triangle_joint.get(t).copied().unwrap_or(JointName::Torso))
        })
        .collect();
    drawn_parts.sort_by_key(|&(i, _)| (depth(i), i));

    let draw_group = |label: Option<JointName>, out: &mut RgbaImage, src: &mut SourceBuffer| {
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let l = mesh.triangle_joint.get(t).copied();
            let in_group = match label {
                Some(lab) => l == Some(lab),
                None => l.is_none_or(|l| !packet.order.contains(&l)),
            };
            if in_group {
                let d = tri.map(|v| verts[v as usize]);
                let uv = tri.map(|v| mesh.uv[v as usize]);
                raster_triangle(out, src, tex, d, uv);
            }
        }
    };
    let draw_parts = |label: Option<JointName>, out: &mut RgbaImage, src: &mut SourceBuffer| {
        for &(i, l) in &drawn_parts {
            let in_group = match label {
                Some(lab) => l == lab,
                None => !packet.order.contains(&l),
            };
            if !in_group {
                continue;
            }
            let part = &view.parts[i];
            let layer = part.layer.as_ref().expect("filtered on layer");
            let m = placement[i].expect("filtered on placement");
            let clip = part.clip.as_ref().map(|(mask, _)| mask);
            raster_layer(out, src, layer, part.layer_origin, &m, clip);
        }
    };
    draw_group(None, &mut out, &mut src);
    draw_parts(None, &mut out, &mut src);
    for &label in &packet.order {
        draw_group(Some(label), &mut out, &mut src);
        draw_parts(Some(label), &mut out, &mut src);
    }
    Ok(out)
}
