//! The fixed 16-joint character skeleton shared by annotations, rigs and retargeting.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Left or right, used for views, feet, limbs and facing directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }

    /// Single-letter code used in bundle file names.
    pub fn letter(self) -> char {
        match self {
            Side::Left => 'l',
            Side::Right => 'r',
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// One of the 16 character joints.
///
/// The declaration order is normative: it is the tie-break order for triangle
/// labelling and render ordering, and the index order of [`JointName::ALL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointName {
    RootHip,
    Torso,
    Neck,
    HeadTop,
    LeftShoulder,
    LeftElbow,
    LeftHand,
    RightShoulder,
    RightElbow,
    RightHand,
    LeftHip,
    LeftKnee,
    LeftFoot,
    RightHip,
    RightKnee,
    RightFoot,
}

/// Number of character joints.
pub const JOINT_COUNT: usize = 16;

impl JointName {
    pub const ALL: [JointName; JOINT_COUNT] = [
        JointName::RootHip,
        JointName::Torso,
        JointName::Neck,
        JointName::HeadTop,
        JointName::LeftShoulder,
        JointName::LeftElbow,
        JointName::LeftHand,
        JointName::RightShoulder,
        JointName::RightElbow,
        JointName::RightHand,
        JointName::LeftHip,
        JointName::LeftKnee,
        JointName::LeftFoot,
        JointName::RightHip,
        JointName::RightKnee,
        JointName::RightFoot,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<JointName> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            JointName::RootHip => "root_hip",
            JointName::Torso => "torso",
            JointName::Neck => "neck",
            JointName::HeadTop => "head_top",
            JointName::LeftShoulder => "left_shoulder",
            JointName::LeftElbow => "left_elbow",
            JointName::LeftHand => "left_hand",
            JointName::RightShoulder => "right_shoulder",
            JointName::RightElbow => "right_elbow",
            JointName::RightHand => "right_hand",
            JointName::LeftHip => "left_hip",
            JointName::LeftKnee => "left_knee",
            JointName::LeftFoot => "left_foot",
            JointName::RightHip => "right_hip",
            JointName::RightKnee => "right_knee",
            JointName::RightFoot => "right_foot",
        }
    }

    /// Parent joint in the character skeleton; `None` for the root.
    pub fn parent(self) -> Option<JointName> {
        use JointName::*;
        Some(match self {
            RootHip => return None,
            Torso => RootHip,
            Neck => Torso,
            HeadTop => Neck,
            LeftShoulder | RightShoulder => Neck,
            LeftElbow => LeftShoulder,
            LeftHand => LeftElbow,
            RightElbow => RightShoulder,
            RightHand => RightElbow,
            LeftHip | RightHip => RootHip,
            LeftKnee => LeftHip,
            LeftFoot => LeftKnee,
            RightKnee => RightHip,
            RightFoot => RightKnee,
        })
    }

    /// The same joint on the other side of the body; central joints map to themselves.
    pub fn mirrored(self) -> JointName {
        use JointName::*;
        match self {
            LeftShoulder => RightShoulder,
            LeftElbow => RightElbow,
            LeftHand => RightHand,
            RightShoulder => LeftShoulder,
            RightElbow => LeftElbow,
            RightHand => LeftHand,
            LeftHip => RightHip,
            LeftKnee => RightKnee,
            LeftFoot => RightFoot,
            RightHip => LeftHip,
            RightKnee => LeftKnee,
            RightFoot => LeftFoot,
            other => other,
        }
    }

    pub fn side(self) -> Option<Side> {
        use JointName::*;
        match self {
            LeftShoulder | LeftElbow | LeftHand | LeftHip | LeftKnee | LeftFoot => Some(Side::Left),
            RightShoulder | RightElbow | RightHand | RightHip | RightKnee | RightFoot => {
                Some(Side::Right)
            }
            _ => None,
        }
    }

    /// Every joint except the root names the bone that ends at it.
    pub fn bones() -> impl Iterator<Item = JointName> {
        Self::ALL.into_iter().filter(|j| j.parent().is_some())
    }
}

impl fmt::Display for JointName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for JointName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|j| j.as_str() == s)
            .ok_or_else(|| format!("unknown joint name `{s}`"))
    }
}

/// The four hinge limbs that receive their own projection plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Limb {
    LeftArm,
    RightArm,
    LeftLeg,
    RightLeg,
}

impl Limb {
    pub const ALL: [Limb; 4] = [Limb::LeftArm, Limb::RightArm, Limb::LeftLeg, Limb::RightLeg];

    pub fn index(self) -> usize {
        self as usize
    }

    /// (proximal, hinge, distal) joints.
    pub fn joints(self) -> [JointName; 3] {
        use JointName::*;
        match self {
            Limb::LeftArm => [LeftShoulder, LeftElbow, LeftHand],
            Limb::RightArm => [RightShoulder, RightElbow, RightHand],
            Limb::LeftLeg => [LeftHip, LeftKnee, LeftFoot],
            Limb::RightLeg => [RightHip, RightKnee, RightFoot],
        }
    }

    /// The limb a bone (named by its child joint) belongs to, if any.
    pub fn of_bone(bone: JointName) -> Option<Limb> {
        use JointName::*;
        match bone {
            LeftElbow | LeftHand => Some(Limb::LeftArm),
            RightElbow | RightHand => Some(Limb::RightArm),
            LeftKnee | LeftFoot => Some(Limb::LeftLeg),
            RightKnee | RightFoot => Some(Limb::RightLeg),
            _ => None,
        }
    }

    pub fn mirrored(self) -> Limb {
        match self {
            Limb::LeftArm => Limb::RightArm,
            Limb::RightArm => Limb::LeftArm,
            Limb::LeftLeg => Limb::RightLeg,
            Limb::RightLeg => Limb::LeftLeg,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skeleton_is_a_tree_rooted_at_hip() {
        for j in JointName::ALL {
            let mut cur = j;
            let mut steps = 0;
            while let Some(p) = cur.parent() {
                assert!(p.index() < cur.index(), "{p} must precede {cur}");
                cur = p;
                steps += 1;
                assert!(steps < JOINT_COUNT);
            }
            assert_eq!(cur, JointName::RootHip);
        }
        assert_eq!(JointName::bones().count(), JOINT_COUNT - 1);
    }

    #[test]
    fn names_round_trip() {
        for j in JointName::ALL {
            assert_eq!(j.as_str().parse::<JointName>().unwrap(), j);
            assert_eq!(j.mirrored().mirrored(), j);
        }
    }
}
