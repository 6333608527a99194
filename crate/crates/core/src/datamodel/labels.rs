use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    Hit,
    NonHit,
}

impl Label {
    pub fn is_hit(self) -> bool {
        self == Label::Hit
    }

    /// 1.0 for hits, 0.0 otherwise.
    pub fn indicator(self) -> f64 {
        if self.is_hit() {
            1.0
        } else {
            0.0
        }
    }

    /// +1 for hits, -1 otherwise.
    pub fn sign(self) -> f64 {
        if self.is_hit() {
            1.0
        } else {
            -1.0
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Hit => "Hit",
            Label::NonHit => "NonHit",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "Hit" | "hit" | "1" => Ok(Label::Hit),
            "NonHit" | "nonhit" | "NoHit" | "0" => Ok(Label::NonHit),
            other => Err(Error::InvalidArgument(format!("unknown label `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapLabel {
    Hit,
    NonHit,
    Excluded,
}

impl GapLabel {
    pub fn label(self) -> Option<Label> {
        match self {
            GapLabel::Hit => Some(Label::Hit),
            GapLabel::NonHit => Some(Label::NonHit),
            GapLabel::Excluded => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemeName {
    D1,
    D2,
    D3,
}

impl FromStr for SchemeName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "D1" => Ok(SchemeName::D1),
            "D2" => Ok(SchemeName::D2),
            "D3" => Ok(SchemeName::D3),
            other => Err(Error::InvalidArgument(format!(
                "unknown gap scheme `{other}` (expected D1, D2 or D3)"
            ))),
        }
    }
}

impl fmt::Display for SchemeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Hit / non-hit labeling rule with an optional excluded band of peak positions.
///
/// Peaks `<= hit_max` are hits, peaks `>= nonhit_min` are non-hits and
/// anything in between is left out of the dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapScheme {
    pub name: SchemeName,
    pub hit_max: u32,
    pub nonhit_min: u32,
}

impl GapScheme {
    /// Top 10 vs. top 30-40.
    pub const D1: GapScheme = GapScheme {
        name: SchemeName::D1,
        hit_max: 10,
        nonhit_min: 30,
    };
    /// Top 10 vs. top 20-40.
    pub const D2: GapScheme = GapScheme {
        name: SchemeName::D2,
        hit_max: 10,
        nonhit_min: 20,
    };
    /// Top 20 vs. the rest, no gap.
    pub const D3: GapScheme = GapScheme {
        name: SchemeName::D3,
        hit_max: 20,
        nonhit_min: 21,
    };

    pub fn named(name: SchemeName) -> Self {
        match name {
            SchemeName::D1 => Self::D1,
            SchemeName::D2 => Self::D2,
            SchemeName::D3 => Self::D3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hit_max < 1 || self.hit_max >= self.nonhit_min {
            return Err(Error::InvalidArgument(format!(
                "gap scheme needs 1 <= hit_max < nonhit_min, got {} / {}",
                self.hit_max, self.nonhit_min
            )));
        }
        Ok(())
    }

    pub fn has_gap(&self) -> bool {
        self.hit_max + 1 < self.nonhit_min
    }
}

impl FromStr for GapScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(GapScheme::named(s.parse()?))
    }
}

pub fn label_with_gap(peak_position: u32, scheme: &GapScheme) -> GapLabel {
    if peak_position <= scheme.hit_max {
        GapLabel::Hit
    } else if peak_position >= scheme.nonhit_min {
        GapLabel::NonHit
    } else {
        GapLabel::Excluded
    }
}
