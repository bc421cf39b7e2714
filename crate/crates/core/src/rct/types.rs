//! Arms, topics and stance sides of the 2×3 experiment, and the survey layout.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::RctError;

/// Social-cue arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CueArm {
    Treated,
    Control,
}

impl CueArm {
    pub fn as_str(self) -> &'static str {
        match self {
            CueArm::Treated => "treated",
            CueArm::Control => "control",
        }
    }
}

impl fmt::Display for CueArm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CueArm {
    type Err = RctError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "treated" => Ok(CueArm::Treated),
            "control" => Ok(CueArm::Control),
            other => Err(RctError::InvalidValue(format!("unknown cue arm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topic {
    Abortion,
    Climate,
    Immigration,
}

impl Topic {
    pub const ALL: [Topic; 3] = [Topic::Abortion, Topic::Climate, Topic::Immigration];

    pub fn as_str(self) -> &'static str {
        match self {
            Topic::Abortion => "abortion",
            Topic::Climate => "climate",
            Topic::Immigration => "immigration",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Topic::Abortion => "Abortion",
            Topic::Climate => "Climate",
            Topic::Immigration => "Immigration",
        }
    }

    /// (side at the low end of the 1–10 stance scale, side at the high end).
    pub fn sides(self) -> (StanceSide, StanceSide) {
        match self {
            Topic::Abortion => (StanceSide::ProChoice, StanceSide::ProLife),
            Topic::Climate => (StanceSide::AntiGovIntervention, StanceSide::ProGovIntervention),
            Topic::Immigration => (StanceSide::Looser, StanceSide::Stricter),
        }
    }

    /// Side held by someone answering `stance` on the 1–10 scale: 1–5 low end, 6–10 high end.
    pub fn side_for(self, stance: u8) -> StanceSide {
        let (low, high) = self.sides();
        if stance <= 5 {
            low
        } else {
            high
        }
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Topic {
    type Err = RctError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "abortion" => Ok(Topic::Abortion),
            "climate" => Ok(Topic::Climate),
            "immigration" => Ok(Topic::Immigration),
            other => Err(RctError::InvalidValue(format!("unknown topic `{other}`"))),
        }
    }
}

/// A side of one topic. Each side belongs to exactly one topic, so the six
/// variants double as the topic-stance groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StanceSide {
    ProChoice,
    ProLife,
    AntiGovIntervention,
    ProGovIntervention,
    Stricter,
    Looser,
}

impl StanceSide {
    /// Reference level first.
    pub const ALL: [StanceSide; 6] = [
        StanceSide::ProChoice,
        StanceSide::ProLife,
        StanceSide::AntiGovIntervention,
        StanceSide::ProGovIntervention,
        StanceSide::Stricter,
        StanceSide::Looser,
    ];

    pub fn topic(self) -> Topic {
        match self {
            StanceSide::ProChoice | StanceSide::ProLife => Topic::Abortion,
            StanceSide::AntiGovIntervention | StanceSide::ProGovIntervention => Topic::Climate,
            StanceSide::Stricter | StanceSide::Looser => Topic::Immigration,
        }
    }

    pub fn opposite(self) -> StanceSide {
        let (low, high) = self.topic().sides();
        if self == low {
            high
        } else {
            low
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StanceSide::ProChoice => "pro_choice",
            StanceSide::ProLife => "pro_life",
            StanceSide::AntiGovIntervention => "anti_gov_intervention",
            StanceSide::ProGovIntervention => "pro_gov_intervention",
            StanceSide::Stricter => "stricter",
            StanceSide::Looser => "looser",
        }
    }

    /// Regression label of the topic-stance group.
    pub fn group_label(self) -> &'static str {
        match self {
            StanceSide::ProChoice => "Pro-Choice",
            StanceSide::ProLife => "Pro-Life",
            StanceSide::AntiGovIntervention => "Climate Anti Gov Intervention",
            StanceSide::ProGovIntervention => "Climate Pro Gov Intervention",
            StanceSide::Stricter => "Immigration Stricter",
            StanceSide::Looser => "Immigration Looser",
        }
    }
}

impl fmt::Display for StanceSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StanceSide {
    type Err = RctError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        StanceSide::ALL
            .into_iter()
            .find(|side| side.as_str().eq_ignore_ascii_case(t) || side.group_label().eq_ignore_ascii_case(t))
            .ok_or_else(|| RctError::InvalidValue(format!("unknown stance side `{t}`")))
    }
}

/// Number of self-reported IH items per survey.
pub const IH_ITEMS: usize = 8;
/// 1-based positions of the reverse-coded IH items.
pub const REVERSED_ITEMS: [usize; 2] = [1, 2];
pub const SCALE_MIN: u8 = 1;
pub const SCALE_MAX: u8 = 10;

/// Survey item key of the 1-based IH item `i`.
pub fn ih_item_key(i: usize) -> String {
    format!("ih_{i}")
}

pub fn interest_key(t: Topic) -> String {
    format!("interest_{t}")
}

pub fn stance_key(t: Topic) -> String {
    format!("stance_{t}")
}

/// 11 − x on the 1–10 scale.
pub fn reverse_code(x: u8) -> u8 {
    SCALE_MAX + SCALE_MIN - x
}

/// Applies reverse coding to the reversed items; the rest pass through.
pub fn coded_items(raw: &[u8; IH_ITEMS]) -> [u8; IH_ITEMS] {
    let mut out = *raw;
    for &i in &REVERSED_ITEMS {
        out[i - 1] = reverse_code(raw[i - 1]);
    }
    out
}

/// Mean of the coded items.
pub fn coded_mean(raw: &[u8; IH_ITEMS]) -> f64 {
    coded_items(raw).iter().map(|&v| v as f64).sum::<f64>() / IH_ITEMS as f64
}
