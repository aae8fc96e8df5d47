use super::DeformError;
use crate::retarget::TextureSide;
use crate::rig::VariantKey;
use crate::{JointName, Mat3, Side};
use serde::{Deserialize, Serialize};

pub const PACKET_MAGIC: &[u8; 4] = b"VDFP";
pub const PACKET_VERSION: u16 = 1;

/// One part placement: part index within the view and a row-major 3×3 transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub part: u16,
    pub transform: [f32; 9],
}

impl Placement {
    pub fn from_matrix(part: usize, m: &Mat3) -> Self {
        let mut t = [0f32; 9];
        for r in 0..3 {
            for c in 0..3 {
                t[r * 3 + c] = m[(r, c)] as f32;
            }
        }
        Self { part: part as u16, transform: t }
    }

    pub fn matrix(&self) -> Mat3 {
        Mat3::from_fn(|r, c| f64::from(self.transform[r * 3 + c]))
    }
}

/// Self-contained render unit of one frame; together with the rig bundle it
/// is enough to draw the character.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FramePacket {
    pub frame: u32,
    pub theta: f32,
    pub side: Side,
    /// Key of the drawn mesh variant.
    pub variant: VariantKey,
    pub texture: TextureSide,
    pub swapped: bool,
    pub plane_origin: [f32; 3],
    pub plane_normal: [f32; 3],
    /// Deformed vertex positions in canvas pixels.
    pub vertices: Vec<[f32; 2]>,
    pub placements: Vec<Placement>,
    /// Bone labels, farthest first.
    pub order: Vec<JointName>,
}

fn section(out: &mut Vec<u8>, body: &[u8]) {
    out.extend_from_slice(&(body.len() as u32).to_le_bytes());
    out.extend_from_slice(body);
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DeformError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| {
            DeformError::Packet(format!("truncated at byte {} (need {n} more)", self.pos))
        })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, DeformError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, DeformError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32, DeformError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f32(&mut self) -> Result<f32, DeformError> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn section(&mut self) -> Result<Reader<'a>, DeformError> {
        let n = self.u32()? as usize;
        Ok(Reader { buf: self.take(n)?, pos: 0 })
    }

    fn done(&self, what: &str) -> Result<(), DeformError> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(DeformError::Packet(format!("{what}: {} trailing bytes", self.buf.len() - self.pos)))
        }
    }
}

fn side_byte(s: Side) -> u8 {
    s.index() as u8
}

fn byte_side(b: u8) -> Result<Side, DeformError> {
    match b {
        0 => Ok(Side::Left),
        1 => Ok(Side::Right),
        _ => Err(DeformError::Packet(format!("bad side {b}"))),
    }
}

impl FramePacket {
    /// Little-endian binary form: magic and version, then four sections each
    /// prefixed by its u32 byte length: header, vertices (f32 pairs),
    /// placements (u16 part + 9 f32), render order (u8 joint indices).
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(64 + self.vertices.len() * 8 + self.placements.len() * 38);
        out.extend_from_slice(PACKET_MAGIC);
        out.extend_from_slice(&PACKET_VERSION.to_le_bytes());

        let mut h = Vec::with_capacity(36);
        h.extend_from_slice(&self.frame.to_le_bytes());
        h.extend_from_slice(&self.theta.to_le_bytes());
        h.push(side_byte(self.side));
        h.push(self.variant.index());
        h.push(match self.texture {
            TextureSide::Front => 0,
            TextureSide::Back => 1,
        });
        h.push(u8::from(self.swapped));
        for v in self.plane_origin.iter().chain(&self.plane_normal) {
            h.extend_from_slice(&v.to_le_bytes());
        }
        section(&mut out, &h);

        let mut v = Vec::with_capacity(self.vertices.len() * 8);
        for p in &self.vertices {
            v.extend_from_slice(&p[0].to_le_bytes());
            v.extend_from_slice(&p[1].to_le_bytes());
        }
        section(&mut out, &v);

        let mut p = Vec::with_capacity(self.placements.len() * 38);
        for pl in &self.placements {
            p.extend_from_slice(&pl.part.to_le_bytes());
            for x in pl.transform {
                p.extend_from_slice(&x.to_le_bytes());
            }
        }
        section(&mut out, &p);

        let o: Vec<u8> = self.order.iter().map(|j| j.index() as u8).collect();
        section(&mut out, &o);
        out
    }

    pub fn decode(buf: &[u8]) -> Result<Self, DeformError> {
        let mut r = Reader { buf, pos: 0 };
        if r.take(4)? != PACKET_MAGIC {
            return Err(DeformError::Packet("bad magic".into()));
        }
        let version = r.u16()?;
        if version != PACKET_VERSION {
            return Err(DeformError::Packet(format!("unsupported version {version}")));
        }
        let mut h = r.section()?;
        let frame = h.u32()?;
        let theta = h.f32()?;
        let side = byte_side(h.u8()?)?;
        let vb = h.u8()?;
        let variant = VariantKey::from_index(vb).ok_or_else(|| DeformError::Packet(format!("bad variant {vb}")))?;
        let texture = match h.u8()? {
            0 => TextureSide::Front,
            1 => TextureSide::Back,
            t => return Err(DeformError::Packet(format!("bad texture side {t}"))),
        };
        let swapped = match h.u8()? {
            0 => false,
            1 => true,
            b => return Err(DeformError::Packet(format!("bad flag {b}"))),
        };
        let mut f3 = || -> Result<[f32; 3], DeformError> { Ok([h.f32()?, h.f32()?, h.f32()?]) };
        let plane_origin = f3()?;
        let plane_normal = f3()?;
        h.done("header")?;

        let mut v = r.section()?;
        if v.buf.len() % 8 != 0 {
            return Err(DeformError::Packet("vertex section is not a whole number of pairs".into()));
        }
        let mut vertices = Vec::with_capacity(v.buf.len() / 8);
        while v.pos < v.buf.len() {
            vertices.push([v.f32()?, v.f32()?]);
        }

        let mut p = r.section()?;
        if p.buf.len() % 38 != 0 {
            return Err(DeformError::Packet("placement section size".into()));
        }
        let mut placements = Vec::with_capacity(p.buf.len() / 38);
        while p.pos < p.buf.len() {
            let part = p.u16()?;
            let mut transform = [0f32; 9];
            for x in &mut transform {
                *x = p.f32()?;
            }
            placements.push(Placement { part, transform });
        }

        let o = r.section()?;
        let order = o
            .buf
            .iter()
            .map(|&b| {
                JointName::from_index(b as usize).ok_or_else(|| DeformError::Packet(format!("bad joint label {b}")))
            })
            .collect::<Result<_, _>>()?;
        r.done("packet")?;
        Ok(Self {
            frame,
            theta,
            side,
            variant,
            texture,
            swapped,
            plane_origin,
            plane_normal,
            vertices,
            placements,
            order,
        })
    }

    /// Structured-text debug form.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("packet serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DeformError> {
        serde_json::from_str(text).map_err(|e| DeformError::Packet(e.to_string()))
    }
}
