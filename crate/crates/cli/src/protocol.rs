//! Wire protocol between the streaming service and its clients.
//!
//! A connection opens with one text line from the client,
//! `VDRIG-STREAM <version> <binary|json>`, which the server echoes back on
//! success (or answers with `VDRIG-STREAM <version> error <reason>` before
//! closing). After that every message is self-delimiting:
//!
//! * binary: `[u32 length][u8 tag][payload]`, little-endian, where `length`
//!   counts the tag byte and the payload;
//! * json: one JSON object per line with a `type` field.
//!
//! Tags: 1 Hello (JSON payload), 2 Frame (packet encoding), 3 CameraUpdate
//! (3 × f64), 4 Control (JSON payload), 5 Error (UTF-8 text).

use serde::{Deserialize, Serialize};
use std::io::{self, BufRead, Read, Write};
use vdrig::deform::FramePacket;
use vdrig::raster::{encode_rle, RunLength};
use vdrig::retarget::Ablation;
use vdrig::rig::{texture_file_name, CharacterRig};
use vdrig::{JointName, Side, Vec2};

pub const HANDSHAKE: &str = "VDRIG-STREAM";
pub const PROTOCOL_VERSION: u32 = 1;
/// Upper bound on one binary message, to reject garbage lengths early.
pub const MAX_MESSAGE: usize = 64 << 20;

#[derive(Debug, thiserror::Error)]
pub enum ProtocolError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("handshake: {0}")]
    Handshake(String),
    #[error("unknown message tag {0}")]
    UnknownTag(u8),
    #[error("malformed {what}: {message}")]
    Malformed { what: &'static str, message: String },
    #[error("message of {0} bytes exceeds the limit")]
    TooLarge(usize),
}

fn malformed(what: &'static str, e: impl std::fmt::Display) -> ProtocolError {
    ProtocolError::Malformed {
        what,
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    Binary,
    Json,
}

impl Encoding {
    pub fn as_str(self) -> &'static str {
        match self {
            Encoding::Binary => "binary",
            Encoding::Json => "json",
        }
    }
}

pub fn handshake_line(enc: Encoding) -> String {
    format!("{HANDSHAKE} {PROTOCOL_VERSION} {}\n", enc.as_str())
}

pub fn parse_handshake(line: &str) -> Result<Encoding, ProtocolError> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    match parts.as_slice() {
        [HANDSHAKE, v, enc] => {
            if v.parse::<u32>().ok() != Some(PROTOCOL_VERSION) {
                return Err(ProtocolError::Handshake(format!(
                    "unsupported protocol version {v} (server speaks {PROTOCOL_VERSION})"
                )));
            }
            match *enc {
                "binary" => Ok(Encoding::Binary),
                "json" => Ok(Encoding::Json),
                other => Err(ProtocolError::Handshake(format!("unknown encoding `{other}`"))),
            }
        }
        [HANDSHAKE, _, "error", ..] => Err(ProtocolError::Handshake(line.trim().to_string())),
        _ => Err(ProtocolError::Handshake(format!("expected `{HANDSHAKE} <version> <binary|json>`"))),
    }
}

/// Client → server playback commands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Control {
    Pause,
    Resume,
    Seek { frame: u32 },
    Toggle { behaviour: Behaviour, enabled: bool },
}

/// Behaviours a client can switch off for side-by-side comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Behaviour {
    ViewDependence,
    LimbSwap,
    PlaneOpt,
}

impl Behaviour {
    pub fn apply(self, a: &mut Ablation, enabled: bool) {
        match self {
            Behaviour::ViewDependence => a.view_dependent = enabled,
            Behaviour::LimbSwap => a.limb_swap = enabled,
            Behaviour::PlaneOpt => a.plane_opt = enabled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HelloVariant {
    pub key: String,
    pub vertices: Vec<Vec2>,
    pub uv: Vec<Vec2>,
    pub triangles: Vec<[u32; 3]>,
    pub triangle_joint: Vec<JointName>,
    pub front: String,
    pub back: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HelloPart {
    pub index: u16,
    pub id: String,
    pub layer: Option<String>,
    pub layer_origin: (u32, u32),
    pub hide_on_back: bool,
    pub parent_part: Option<usize>,
    pub clip: Option<RunLength>,
    /// Per variant: the bone group the layer is drawn right after.
    pub drawn_after: Vec<JointName>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HelloView {
    pub side: Side,
    pub variants: Vec<HelloVariant>,
    pub parts: Vec<HelloPart>,
}

/// Everything a client needs besides the texture files, which it loads from
/// the rig bundle by the names given here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hello {
    pub protocol: u32,
    pub canvas: (u32, u32),
    pub fps: f64,
    pub frame_count: usize,
    pub views: Vec<HelloView>,
}

impl Hello {
    pub fn new(rig: &CharacterRig, fps: f64, frame_count: usize) -> Self {
        let views = rig
            .views
            .iter()
            .map(|v| HelloView {
                side: v.side,
                variants: v
                    .variants
                    .iter()
                    .map(|var| HelloVariant {
                        key: var.key.code(),
                        vertices: var.mesh.vertices.clone(),
                        uv: var.mesh.uv.clone(),
                        triangles: var.mesh.triangles.clone(),
                        triangle_joint: var.mesh.triangle_joint.clone(),
                        front: texture_file_name(v.side, var.key, false),
                        back: texture_file_name(v.side, var.key, true),
                    })
                    .collect(),
                parts: v
                    .parts
                    .iter()
                    .enumerate()
                    .map(|(i, p)| HelloPart {
                        index: i as u16,
                        id: p.id.clone(),
                        layer: p
                            .layer
                            .as_ref()
                            .map(|_| format!("view-{}.part-{}.png", v.side.letter().to_ascii_uppercase(), p.id)),
                        layer_origin: p.layer_origin,
                        hide_on_back: p.hide_on_back,
                        parent_part: p.parent_part(),
                        clip: p.clip.as_ref().map(|(m, _)| encode_rle(m)),
                        drawn_after: v
                            .variants
                            .iter()
                            .zip(&p.attachments)
                            .map(|(var, a)| {
                                var.mesh.triangle_joint.get(a.triangle as usize).copied().unwrap_or(JointName::Torso)
                            })
                            .collect(),
                    })
                    .collect(),
            })
            .collect();
        Self {
            protocol: PROTOCOL_VERSION,
            canvas: rig.canvas.size(),
            fps,
            frame_count,
            views,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Hello(Box<Hello>),
    Frame(FramePacket),
    CameraUpdate([f64; 3]),
    Control(Control),
    Error(String),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum JsonMessage {
    Hello { hello: Box<Hello> },
    Frame { packet: serde_json::Value },
    CameraUpdate { position: [f64; 3] },
    Control { control: Control },
    Error { message: String },
}

impl Message {
    pub fn tag(&self) -> u8 {
        match self {
            Message::Hello(_) => 1,
            Message::Frame(_) => 2,
            Message::CameraUpdate(_) => 3,
            Message::Control(_) => 4,
            Message::Error(_) => 5,
        }
    }

    fn payload(&self) -> Vec<u8> {
        match self {
            Message::Hello(h) => serde_json::to_vec(h).expect("hello serializes"),
            Message::Frame(p) => p.encode(),
            Message::CameraUpdate(c) => c.iter().flat_map(|v| v.to_le_bytes()).collect(),
            Message::Control(c) => serde_json::to_vec(c).expect("control serializes"),
            Message::Error(s) => s.as_bytes().to_vec(),
        }
    }

    /// One complete binary frame, length prefix included.
    pub fn encode_binary(&self) -> Vec<u8> {
        let payload = self.payload();
        let mut out = Vec::with_capacity(payload.len() + 5);
        out.extend_from_slice(&(payload.len() as u32 + 1).to_le_bytes());
        out.push(self.tag());
        out.extend_from_slice(&payload);
        out
    }

    pub fn decode_binary(tag: u8, payload: &[u8]) -> Result<Self, ProtocolError> {
        Ok(match tag {
            1 => Message::Hello(serde_json::from_slice(payload).map_err(|e| malformed("hello", e))?),
            2 => Message::Frame(FramePacket::decode(payload).map_err(|e| malformed("frame", e))?),
            3 => {
                if payload.len() != 24 {
                    return Err(malformed("camera update", format!("{} bytes, expected 24", payload.len())));
                }
                let f = |i: usize| f64::from_le_bytes(payload[8 * i..8 * i + 8].try_into().expect("8 bytes"));
                let c = [f(0), f(1), f(2)];
                if !c.iter().all(|v| v.is_finite()) {
                    return Err(malformed("camera update", "non-finite position"));
                }
                Message::CameraUpdate(c)
            }
            4 => Message::Control(serde_json::from_slice(payload).map_err(|e| malformed("control", e))?),
            5 => Message::Error(String::from_utf8(payload.to_vec()).map_err(|e| malformed("error", e))?),
            t => return Err(ProtocolError::UnknownTag(t)),
        })
    }

    /// One JSON line, newline included.
    pub fn encode_json(&self) -> Vec<u8> {
        let m = match self {
            Message::Hello(h) => JsonMessage::Hello { hello: h.clone() },
            Message::Frame(p) => JsonMessage::Frame {
                packet: serde_json::from_str(&p.to_json()).expect("packet json parses"),
            },
            Message::CameraUpdate(c) => JsonMessage::CameraUpdate { position: *c },
            Message::Control(c) => JsonMessage::Control { control: *c },
            Message::Error(s) => JsonMessage::Error { message: s.clone() },
        };
        let mut out = serde_json::to_vec(&m).expect("message serializes");
        out.push(b'\n');
        out
    }

    pub fn decode_json(line: &str) -> Result<Self, ProtocolError> {
        let m: JsonMessage = serde_json::from_str(line).map_err(|e| malformed("json message", e))?;
        Ok(match m {
            JsonMessage::Hello { hello } => Message::Hello(hello),
            JsonMessage::Frame { packet } => {
                Message::Frame(FramePacket::from_json(&packet.to_string()).map_err(|e| malformed("frame", e))?)
            }
            JsonMessage::CameraUpdate { position } => {
                if !position.iter().all(|v| v.is_finite()) {
                    return Err(malformed("camera update", "non-finite position"));
                }
                Message::CameraUpdate(position)
            }
            JsonMessage::Control { control } => Message::Control(control),
            JsonMessage::Error { message } => Message::Error(message),
        })
    }

    pub fn encode(&self, enc: Encoding) -> Vec<u8> {
        match enc {
            Encoding::Binary => self.encode_binary(),
            Encoding::Json => self.encode_json(),
        }
    }
}

pub fn write_message(w: &mut impl Write, enc: Encoding, m: &Message) -> io::Result<()> {
    w.write_all(&m.encode(enc))?;
    w.flush()
}

/// Read the next message; `Ok(None)` on a clean end of stream.
pub fn read_message(r: &mut impl BufRead, enc: Encoding) -> Result<Option<Message>, ProtocolError> {
    match enc {
        Encoding::Binary => {
            let mut len = [0u8; 4];
            match r.read_exact(&mut len) {
                Ok(()) => {}
                Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
                Err(e) => return Err(e.into()),
            }
            let n = u32::from_le_bytes(len) as usize;
            if n == 0 {
                return Err(malformed("frame", "zero length"));
            }
            if n > MAX_MESSAGE {
                return Err(ProtocolError::TooLarge(n));
            }
            let mut body = vec![0u8; n];
            r.read_exact(&mut body)?;
            Message::decode_binary(body[0], &body[1..]).map(Some)
        }
        Encoding::Json => {
            let mut line = String::new();
            let mut limited = r.take(MAX_MESSAGE as u64);
            if limited.read_line(&mut line)? == 0 {
                return Ok(None);
            }
            if !line.ends_with('\n') && line.len() >= MAX_MESSAGE {
                return Err(ProtocolError::TooLarge(line.len()));
            }
            Message::decode_json(line.trim_end()).map(Some)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;
    use vdrig::retarget::TextureSide;
    use vdrig::rig::VariantKey;

    fn packet() -> FramePacket {
        FramePacket {
            frame: 3,
            theta: 1.5,
            side: Side::Right,
            variant: VariantKey::new(Side::Left, Side::Right),
            texture: TextureSide::Back,
            swapped: true,
            plane_origin: [1.0, 0.0, -2.0],
            plane_normal: [0.0, 0.0, 1.0],
            vertices: vec![[1.0, 2.0], [3.5, -4.0]],
            placements: vec![],
            order: vec![JointName::Torso, JointName::LeftHand],
        }
    }

    fn messages() -> Vec<Message> {
        vec![
            Message::Frame(packet()),
            Message::CameraUpdate([1.0, -2.5, 600.0]),
            Message::Control(Control::Seek { frame: 12 }),
            Message::Control(Control::Toggle {
                behaviour: Behaviour::LimbSwap,
                enabled: false,
            }),
            Message::Error("bad".into()),
        ]
    }

    #[test]
    fn messages_round_trip_in_both_encodings() {
        for enc in [Encoding::Binary, Encoding::Json] {
            let mut buf = Vec::new();
            for m in messages() {
                write_message(&mut buf, enc, &m).unwrap();
            }
            let mut r = Cursor::new(buf);
            for m in messages() {
                assert_eq!(read_message(&mut r, enc).unwrap(), Some(m));
            }
            assert_eq!(read_message(&mut r, enc).unwrap(), None);
        }
    }

    #[test]
    fn unknown_tags_and_bad_payloads_are_rejected() {
        let mut r = Cursor::new(vec![1, 0, 0, 0, 9]);
        assert!(matches!(read_message(&mut r, Encoding::Binary), Err(ProtocolError::UnknownTag(9))));
        let mut r = Cursor::new(vec![3, 0, 0, 0, 3, 1, 2]);
        assert!(read_message(&mut r, Encoding::Binary).is_err());
        let mut r = Cursor::new(b"{\"type\":\"dance\"}\n".to_vec());
        assert!(read_message(&mut r, Encoding::Json).is_err());
        let mut r = Cursor::new(vec![255, 255, 255, 255]);
        assert!(matches!(read_message(&mut r, Encoding::Binary), Err(ProtocolError::TooLarge(_))));
    }

    #[test]
    fn handshake() {
        assert_eq!(parse_handshake(&handshake_line(Encoding::Json)).unwrap(), Encoding::Json);
        assert_eq!(parse_handshake("VDRIG-STREAM 1 binary\r\n").unwrap(), Encoding::Binary);
        assert!(parse_handshake("VDRIG-STREAM 2 binary").is_err());
        assert!(parse_handshake("HELLO").is_err());
        assert!(parse_handshake("VDRIG-STREAM 1 xml").is_err());
    }
}
