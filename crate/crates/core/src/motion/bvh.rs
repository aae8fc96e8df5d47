use super::MotionError;
use crate::Vec3;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Xposition,
    Yposition,
    Zposition,
    Xrotation,
    Yrotation,
    Zrotation,
}

impl Channel {
    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Xposition => "Xposition",
            Channel::Yposition => "Yposition",
            Channel::Zposition => "Zposition",
            Channel::Xrotation => "Xrotation",
            Channel::Yrotation => "Yrotation",
            Channel::Zrotation => "Zrotation",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_lowercase().as_str() {
            "xposition" => Channel::Xposition,
            "yposition" => Channel::Yposition,
            "zposition" => Channel::Zposition,
            "xrotation" => Channel::Xrotation,
            "yrotation" => Channel::Yrotation,
            "zrotation" => Channel::Zrotation,
            _ => return None,
        })
    }

    pub fn is_rotation(self) -> bool {
        matches!(self, Channel::Xrotation | Channel::Yrotation | Channel::Zrotation)
    }

    /// Coordinate axis, 0..3.
    pub fn axis(self) -> usize {
        match self {
            Channel::Xposition | Channel::Xrotation => 0,
            Channel::Yposition | Channel::Yrotation => 1,
            Channel::Zposition | Channel::Zrotation => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BvhJoint {
    pub name: String,
    pub parent: Option<usize>,
    pub offset: Vec3,
    pub channels: Vec<Channel>,
    /// Index of this joint's first channel within a frame.
    pub channel_offset: usize,
    /// End sites become channel-less joints named `<parent>_end`.
    pub end_site: bool,
}

/// Joint tree of a BVH file, in file order (parents precede children).
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonHierarchy {
    pub joints: Vec<BvhJoint>,
}

impl SkeletonHierarchy {
    pub fn root(&self) -> usize {
        0
    }

    pub fn len(&self) -> usize {
        self.joints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joints.is_empty()
    }

    pub fn channel_count(&self) -> usize {
        self.joints.iter().map(|j| j.channels.len()).sum()
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j.name == name)
    }

    pub fn children(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.joints
            .iter()
            .enumerate()
            .filter(move |(_, j)| j.parent == Some(i))
            .map(|(k, _)| k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionClip {
    pub frame_time: f64,
    /// One row of channel values per frame; rotations in degrees.
    pub frames: Vec<Vec<f64>>,
}

impl MotionClip {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn fps(&self) -> f64 {
        1.0 / self.frame_time
    }
}

struct Lexer<'a> {
    tokens: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        let tokens = text
            .lines()
            .enumerate()
            .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)))
            .collect();
        Self { tokens, pos: 0 }
    }

    fn line(&self) -> usize {
        self.tokens
            .get(self.pos)
            .or(self.tokens.last())
            .map_or(1, |t| t.0)
    }

    fn err(&self, message: impl Into<String>) -> MotionError {
        MotionError::Parse {
            line: self.line(),
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&'a str> {
        self.tokens.get(self.pos).map(|t| t.1)
    }

    fn next(&mut self) -> Result<&'a str, MotionError> {
        let t = self.peek().ok_or_else(|| self.err("unexpected end of file"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, kw: &str) -> Result<(), MotionError> {
        let t = self.next()?;
        if t.eq_ignore_ascii_case(kw) {
            Ok(())
        } else {
            self.pos -= 1;
            Err(self.err(format!("expected `{kw}`, found `{t}`")))
        }
    }

    fn number(&mut self) -> Result<f64, MotionError> {
        let t = self.next()?;
        match t.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => {
                self.pos -= 1;
                Err(self.err(format!("expected a number, found `{t}`")))
            }
        }
    }

    fn integer(&mut self) -> Result<usize, MotionError> {
        let t = self.next()?;
        t.parse::<usize>().map_err(|_| {
            self.pos -= 1;
            self.err(format!("expected a non-negative integer, found `{t}`"))
        })
    }
}

fn parse_joint(lx: &mut Lexer, parent: Option<usize>, joints: &mut Vec<BvhJoint>, channels: &mut usize) -> Result<(), MotionError> {
    let name = lx.next()?.to_string();
    lx.expect("{")?;
    lx.expect("OFFSET")?;
    let offset = Vec3::new(lx.number()?, lx.number()?, lx.number()?);
    let mut chans = Vec::new();
    if lx.peek().is_some_and(|t| t.eq_ignore_ascii_case("CHANNELS")) {
        lx.next()?;
        let n = lx.integer()?;
        if n > 6 {
            return Err(lx.err(format!("joint `{name}` declares {n} channels")));
        }
        for _ in 0..n {
            let t = lx.next()?;
            let c = Channel::parse(t).ok_or_else(|| {
                lx.pos -= 1;
                lx.err(format!("unknown channel `{t}`"))
            })?;
            if chans.contains(&c) {
                return Err(lx.err(format!("duplicate channel `{t}` on joint `{name}`")));
            }
            chans.push(c);
        }
    }
    if joints.iter().any(|j| j.name == name) {
        return Err(lx.err(format!("duplicate joint name `{name}`")));
    }
    let me = joints.len();
    joints.push(BvhJoint {
        name: name.clone(),
        parent,
        offset,
        channel_offset: *channels,
        channels: chans.clone(),
        end_site: false,
    });
    *channels += chans.len();
    loop {
        let t = lx.next()?;
        if t.eq_ignore_ascii_case("JOINT") {
            parse_joint(lx, Some(me), joints, channels)?;
        } else if t.eq_ignore_ascii_case("End") {
            lx.expect("Site")?;
            lx.expect("{")?;
            lx.expect("OFFSET")?;
            let offset = Vec3::new(lx.number()?, lx.number()?, lx.number()?);
            lx.expect("}")?;
            joints.push(BvhJoint {
                name: format!("{name}_end"),
                parent: Some(me),
                offset,
                channel_offset: *channels,
                channels: Vec::new(),
                end_site: true,
            });
        } else if t == "}" {
            return Ok(());
        } else {
            lx.pos -= 1;
            return Err(lx.err(format!("unexpected `{t}` in joint `{name}`")));
        }
    }
}

/// Parse BVH text into a joint hierarchy and its motion.
pub fn parse_bvh(text: &str) -> Result<(SkeletonHierarchy, MotionClip), MotionError> {
    let mut lx = Lexer::new(text);
    lx.expect("HIERARCHY")?;
    lx.expect("ROOT")?;
    let mut joints = Vec::new();
    let mut channels = 0;
    parse_joint(&mut lx, None, &mut joints, &mut channels)?;
    lx.expect("MOTION")?;
    lx.expect("Frames:")?;
    let n = lx.integer()?;
    lx.expect("Frame")?;
    lx.expect("Time:")?;
    let frame_time = lx.number()?;
    if frame_time <= 0.0 {
        return Err(lx.err("frame time must be positive"));
    }
    let mut frames = Vec::with_capacity(n);
    for f in 0..n {
        let mut row = Vec::with_capacity(channels);
        let line = lx.line();
        for _ in 0..channels {
            if lx.peek().is_none() {
                return Err(MotionError::ChannelCount {
                    frame: f,
                    expected: channels,
                    found: row.len(),
                });
            }
            if lx.line() != line {
                return Err(MotionError::ChannelCount {
                    frame: f,
                    expected: channels,
                    found: row.len(),
                });
            }
            row.push(lx.number()?);
        }
        if lx.peek().is_some() && lx.line() == line && channels > 0 {
            let mut found = channels;
            while lx.peek().is_some() && lx.line() == line {
                lx.next()?;
                found += 1;
            }
            return Err(MotionError::ChannelCount {
                frame: f,
                expected: channels,
                found,
            });
        }
        frames.push(row);
    }
    if let Some(t) = lx.peek() {
        return Err(lx.err(format!("trailing data `{t}` after {n} frames")));
    }
    Ok((SkeletonHierarchy { joints }, MotionClip { frame_time, frames }))
}

/// Write a hierarchy and clip back out as BVH text.
pub fn emit_bvh(h: &SkeletonHierarchy, clip: &MotionClip) -> String {
    fn joint(h: &SkeletonHierarchy, i: usize, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        let j = &h.joints[i];
        let o = j.offset;
        if j.end_site {
            let _ = writeln!(out, "{pad}End Site\n{pad}{{\n{pad}  OFFSET {} {} {}\n{pad}}}", o.x, o.y, o.z);
            return;
        }
        let kw = if j.parent.is_none() { "ROOT" } else { "JOINT" };
        let _ = writeln!(out, "{pad}{kw} {}\n{pad}{{\n{pad}  OFFSET {} {} {}", j.name, o.x, o.y, o.z);
        if !j.channels.is_empty() {
            let names: Vec<&str> = j.channels.iter().map(|c| c.as_str()).collect();
            let _ = writeln!(out, "{pad}  CHANNELS {} {}", names.len(), names.join(" "));
        }
        for c in h.children(i).collect::<Vec<_>>() {
            joint(h, c, depth + 1, out);
        }
        let _ = writeln!(out, "{pad}}}");
    }
    let mut out = String::from("HIERARCHY\n");
    joint(h, h.root(), 0, &mut out);
    let _ = writeln!(out, "MOTION\nFrames: {}\nFrame Time: {}", clip.frames.len(), clip.frame_time);
    for row in &clip.frames {
        let vals: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", vals.join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = "HIERARCHY
ROOT Hips
{
  OFFSET 0 0 0
  CHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation
  JOINT Chest
  {
    OFFSET 0 5 0
    CHANNELS 3 Zrotation Xrotation Yrotation
    End Site
    {
      OFFSET 0 3 0
    }
  }
}
MOTION
Frames: 2
Frame Time: 0.0333333
0 0 0 0 0 0 0 0 0
1 2 3 10 20 30 0 0 90
";

    #[test]
    fn parses_structure() {
        let (h, c) = parse_bvh(TWO).unwrap();
        assert_eq!(h.len(), 3);
        assert_eq!(h.joints[2].name, "Chest_end");
        assert!(h.joints[2].end_site);
        assert_eq!(h.joints[1].channel_offset, 6);
        assert_eq!(h.channel_count(), 9);
        assert_eq!(c.len(), 2);
        assert_eq!(c.frames[1][8], 90.0);
    }

    #[test]
    fn round_trips() {
        let (h, c) = parse_bvh(TWO).unwrap();
        let (h2, c2) = parse_bvh(&emit_bvh(&h, &c)).unwrap();
        assert_eq!(h, h2);
        assert_eq!(c, c2);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = TWO.replace("OFFSET 0 5 0", "OFFSET 0 five 0");
        match parse_bvh(&bad) {
            Err(MotionError::Parse { line, .. }) => assert_eq!(line, 8),
            other => panic!("{other:?}"),
        }
        let short = TWO.replace("1 2 3 10 20 30 0 0 90", "1 2 3 10 20 30 0 0");
        assert!(matches!(
            parse_bvh(&short),
            Err(MotionError::ChannelCount { frame: 1, expected: 9, found: 8 })
        ));
        let long = TWO.replace("1 2 3 10 20 30 0 0 90", "1 2 3 10 20 30 0 0 90 4");
        assert!(matches!(parse_bvh(&long), Err(MotionError::ChannelCount { found: 10, .. })));
    }
}
