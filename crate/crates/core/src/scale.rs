//! The three rating scales and the 1..=5 category scores placed on them.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// Speech signal: 1 very distorted .. 5 not distorted.
    Sig,
    /// Background noise: 1 very intrusive .. 5 not noticeable.
    Bak,
    /// Overall quality: 1 bad .. 5 excellent.
    Ovrl,
}

impl Scale {
    pub const ALL: [Scale; 3] = [Scale::Sig, Scale::Bak, Scale::Ovrl];

    pub fn name(self) -> &'static str {
        match self {
            Scale::Sig => "SIG",
            Scale::Bak => "BAK",
            Scale::Ovrl => "OVRL",
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("score {0} outside 1..=5")]
pub struct InvalidScore(pub i64);

/// A category rating in `1..=5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct Score(u8);

impl Score {
    pub const MIN: Score = Score(1);
    pub const MAX: Score = Score(5);

    pub fn new(value: i64) -> Result<Self, InvalidScore> {
        if (1..=5).contains(&value) {
            Ok(Self(value as u8))
        } else {
            Err(InvalidScore(value))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<i64> for Score {
    type Error = InvalidScore;

    fn try_from(value: i64) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<Score> for u8 {
    fn from(s: Score) -> u8 {
        s.0
    }
}

impl From<Score> for f64 {
    fn from(s: Score) -> f64 {
        s.0 as f64
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One score per scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScaleScores {
    pub sig: Score,
    pub bak: Score,
    pub ovrl: Score,
}

impl ScaleScores {
    pub fn uniform(score: Score) -> Self {
        Self {
            sig: score,
            bak: score,
            ovrl: score,
        }
    }

    pub fn get(&self, scale: Scale) -> Score {
        match scale {
            Scale::Sig => self.sig,
            Scale::Bak => self.bak,
            Scale::Ovrl => self.ovrl,
        }
    }
}

/// Which of SIG and BAK is asked first; OVRL always comes last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleOrder {
    SigFirst,
    BakFirst,
}

impl ScaleOrder {
    /// Even seeds put SIG first, odd seeds BAK first.
    pub fn from_seed(seed: u64) -> Self {
        if seed.is_multiple_of(2) {
            ScaleOrder::SigFirst
        } else {
            ScaleOrder::BakFirst
        }
    }

    pub fn sequence(self) -> [Scale; 3] {
        match self {
            ScaleOrder::SigFirst => [Scale::Sig, Scale::Bak, Scale::Ovrl],
            ScaleOrder::BakFirst => [Scale::Bak, Scale::Sig, Scale::Ovrl],
        }
    }
}
