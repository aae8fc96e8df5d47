use super::bvh::SkeletonHierarchy;
use super::MotionError;
use crate::skeleton::JOINT_COUNT;
use crate::JointName;
use std::collections::BTreeMap;

/// Character joint to skeleton joint names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointMap {
    names: [String; JOINT_COUNT],
}

/// A joint map checked against a hierarchy: skeleton joint index per character joint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolvedMap {
    pub indices: [usize; JOINT_COUNT],
}

impl ResolvedMap {
    pub fn get(&self, j: JointName) -> usize {
        self.indices[j.index()]
    }
}

const CMU: [&str; JOINT_COUNT] = [
    "Hips", "Spine1", "Neck", "Head_end", "LeftArm", "LeftForeArm", "LeftHand", "RightArm",
    "RightForeArm", "RightHand", "LeftUpLeg", "LeftLeg", "LeftFoot", "RightUpLeg", "RightLeg", "RightFoot",
];

const MIXAMO: [&str; JOINT_COUNT] = [
    "Hips", "Spine1", "Neck", "HeadTop_End", "LeftArm", "LeftForeArm", "LeftHand", "RightArm",
    "RightForeArm", "RightHand", "LeftUpLeg", "LeftLeg", "LeftFoot", "RightUpLeg", "RightLeg", "RightFoot",
];

const DAZ: [&str; JOINT_COUNT] = [
    "hip", "abdomen", "neck", "head_end", "lShldr", "lForeArm", "lHand", "rShldr", "rForeArm", "rHand",
    "lThigh", "lShin", "lFoot", "rThigh", "rShin", "rFoot",
];

impl JointMap {
    pub fn new(names: [String; JOINT_COUNT]) -> Self {
        Self { names }
    }

    pub fn cmu() -> Self {
        Self::new(CMU.map(String::from))
    }

    pub fn mixamo() -> Self {
        Self::new(MIXAMO.map(|n| format!("mixamorig:{n}")))
    }

    pub fn daz() -> Self {
        Self::new(DAZ.map(String::from))
    }

    pub fn get(&self, j: JointName) -> &str {
        &self.names[j.index()]
    }

    /// First built-in naming scheme that resolves completely against `h`.
    pub fn detect(h: &SkeletonHierarchy) -> Result<Self, MotionError> {
        let schemes = [Self::cmu(), Self::mixamo(), Self::daz()];
        let mut best: Option<(usize, Vec<String>)> = None;
        for s in schemes {
            match s.resolve(h) {
                Ok(_) => return Ok(s),
                Err(MotionError::Unmapped(missing)) => {
                    if best.as_ref().is_none_or(|b| missing.len() < b.0) {
                        best = Some((missing.len(), missing));
                    }
                }
                Err(e) => return Err(e),
            }
        }
        Err(MotionError::Unmapped(best.map(|b| b.1).unwrap_or_default()))
    }

    /// Look every name up in `h`; all unresolved names are reported together.
    pub fn resolve(&self, h: &SkeletonHierarchy) -> Result<ResolvedMap, MotionError> {
        let mut indices = [0; JOINT_COUNT];
        let mut missing = Vec::new();
        for j in JointName::ALL {
            match h.find(self.get(j)) {
                Some(i) => indices[j.index()] = i,
                None => missing.push(format!("{j} -> {}", self.get(j))),
            }
        }
        if missing.is_empty() {
            Ok(ResolvedMap { indices })
        } else {
            Err(MotionError::Unmapped(missing))
        }
    }

    /// Parse a JSON object of `character_joint: skeleton_joint`. Joints left
    /// out fall back to `base`.
    pub fn from_json(text: &str, base: &JointMap) -> Result<Self, MotionError> {
        let raw: BTreeMap<String, String> =
            serde_json::from_str(text).map_err(|e| MotionError::Config(format!("joint map: {e}")))?;
        let mut names = base.names.clone();
        for (k, v) in raw {
            let j: JointName = k.parse().map_err(MotionError::Config)?;
            names[j.index()] = v;
        }
        Ok(Self { names })
    }

    pub fn to_json(&self) -> String {
        let m: BTreeMap<&str, &str> = JointName::ALL.iter().map(|j| (j.as_str(), self.get(*j))).collect();
        serde_json::to_string_pretty(&m).expect("string map serializes")
    }
}
