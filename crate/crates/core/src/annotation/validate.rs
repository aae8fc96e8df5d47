use super::{AnnotationSet, ParentRef};
use crate::rig::layout::{layout_view, pixel_of};
use crate::rig::Canvas;
use crate::{JointName, Side};
use std::fmt;

/// One violated input assumption, displayed as `code: subject`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub code: &'static str,
    pub subject: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.subject)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.findings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn has(&self, code: &str) -> bool {
        self.findings.iter().any(|f| f.code == code)
    }

    fn push(&mut self, code: &'static str, subject: impl Into<String>) {
        self.findings.push(Finding { code, subject: subject.into() });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for x in &self.findings {
            writeln!(f, "{x}")?;
        }
        Ok(())
    }
}

const PAIRS: [(JointName, JointName); 6] = [
    (JointName::LeftShoulder, JointName::RightShoulder),
    (JointName::LeftElbow, JointName::RightElbow),
    (JointName::LeftHand, JointName::RightHand),
    (JointName::LeftHip, JointName::RightHip),
    (JointName::LeftKnee, JointName::RightKnee),
    (JointName::LeftFoot, JointName::RightFoot),
];

/// Check every structural assumption the rig builder relies on. An empty
/// report means the document can be built.
pub fn validate(a: &AnnotationSet) -> ValidationReport {
    let mut r = ValidationReport::default();
    let (w, h) = a.size();

    for (j, p) in a.keypoints.iter() {
        let inside = p.x >= -0.5 && p.y >= -0.5 && p.x < f64::from(w) - 0.5 && p.y < f64::from(h) - 0.5;
        if !inside {
            r.push("keypoint_out_of_bounds", j.as_str());
            continue;
        }
        let (x, y) = pixel_of(p);
        if !a.figure_mask.get_i(x, y) {
            r.push("keypoint_outside_mask", j.as_str());
        }
    }
    for (l, rr) in PAIRS {
        if (a.keypoints.get(l) - a.keypoints.get(rr)).norm() < 1e-9 {
            r.push("keypoint_pair_coincident", format!("{l}/{rr}"));
        }
    }
    for side in [Side::Left, Side::Right] {
        let (hip, knee, foot) = match side {
            Side::Left => (JointName::LeftHip, JointName::LeftKnee, JointName::LeftFoot),
            Side::Right => (JointName::RightHip, JointName::RightKnee, JointName::RightFoot),
        };
        let kp = &a.keypoints;
        if (kp.get(knee) - kp.get(hip)).norm() < 1e-9 || (kp.get(foot) - kp.get(knee)).norm() < 1e-9 {
            r.push("degenerate_leg", side.to_string());
        }
    }

    let figure_parts = a.figure_mask.component_count();
    if figure_parts == 0 {
        r.push("figure_mask_empty", "figure");
        return r;
    }
    if figure_parts > 1 {
        r.push("figure_mask_not_contiguous", format!("{figure_parts} components"));
    }

    let mut cyclic = false;
    for (i, s) in a.segments.iter().enumerate() {
        if a.has_cycle(ParentRef::Segment(i)) {
            r.push("parent_cycle", s.id.clone());
            cyclic = true;
        }
        if s.mask.is_empty() {
            r.push("segment_empty", s.id.clone());
        } else if s.mask.component_count() > 1 {
            r.push("segment_not_contiguous", s.id.clone());
        }
        let outside = s.mask.count_outside(&a.figure_mask);
        if outside > 0 {
            r.push("segment_outside_figure", format!("{} ({outside} pixels)", s.id));
        }
        for t in &a.segments[i + 1..] {
            if s.mask.intersects(&t.mask) {
                r.push("segment_overlap", format!("{}/{}", s.id, t.id));
            }
        }
    }
    if !a.segments.is_empty() {
        let mut covered = a.figure_mask.clone();
        for s in &a.segments {
            covered = covered.difference(&s.mask);
        }
        let n = covered.count();
        if n > 0 {
            r.push("segments_uncovered", format!("{n} pixels"));
        }
    }

    for (i, p) in a.parts.iter().enumerate() {
        let me = ParentRef::Part(i);
        if a.has_cycle(me) {
            r.push("parent_cycle", p.id.clone());
            cyclic = true;
            continue;
        }
        match &p.mask {
            Some(m) if m.is_empty() => r.push("part_mask_empty", p.id.clone()),
            Some(m) => {
                if !m.is_subset_of(a.effective_mask(p.parent)) {
                    r.push("part_mask_outside_parent", p.id.clone());
                }
            }
            None => {
                let masked_below = subtree_has_mask(a, me);
                if !masked_below {
                    r.push("maskless_part_without_children", p.id.clone());
                }
            }
        }
    }

    if !r.is_empty() || cyclic {
        return r;
    }

    // Dry run of the structural steps of rig building.
    let Some(canvas) = Canvas::for_mask(&a.figure_mask) else {
        return r;
    };
    let ca = canvas.annotations(a);
    for side in [Side::Left, Side::Right] {
        let view = match layout_view(&ca, side) {
            Ok(v) => v,
            Err(e) => {
                r.push("view_layout_failed", format!("{side}: {e}"));
                continue;
            }
        };
        if view.mask.component_count() != 1 {
            r.push("mirrored_view_disconnected", side.to_string());
            continue;
        }
        for key in view.variant_keys() {
            match view.variant_mask(key) {
                Ok((mask, kp)) => {
                    if mask.component_count() != 1 {
                        r.push("foot_variant_disconnected", format!("{side}/{key}"));
                    }
                    for (j, p) in kp.iter() {
                        let (x, y) = pixel_of(p);
                        if !mask.get_i(x, y) {
                            r.push("keypoint_outside_view", format!("{side}/{key}/{j}"));
                        }
                    }
                }
                Err(e) => r.push("foot_region_invalid", format!("{side}/{key}: {e}")),
            }
        }
    }
    r
}

fn subtree_has_mask(a: &AnnotationSet, r: ParentRef) -> bool {
    let mut stack = a.children(r);
    let mut seen = Vec::new();
    while let Some(c) = stack.pop() {
        if seen.contains(&c) {
            continue;
        }
        seen.push(c);
        match c {
            ParentRef::Part(i) if a.parts[i].mask.is_some() => return true,
            ParentRef::Segment(_) => return true,
            _ => stack.extend(a.children(c)),
        }
    }
    false
}
