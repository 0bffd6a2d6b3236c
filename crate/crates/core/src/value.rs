//! Resilience ordinals in `ω+2` and their certificates.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// An ordinal below `ω+2`. The derived order is the ordinal order; the
/// witness flag of `Omega` only breaks ties among equal ordinals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Resilience {
    Finite(u64),
    /// `uniform_witness`: whether a single strategy is `k`-resilient for all `k`.
    Omega { uniform_witness: Option<bool> },
    OmegaPlusOne,
}

impl Resilience {
    pub fn is_finite(self) -> bool {
        matches!(self, Resilience::Finite(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Resilience::Finite(k) => Some(k),
            _ => None,
        }
    }
}

impl fmt::Display for Resilience {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resilience::Finite(k) => write!(f, "{k}"),
            Resilience::Omega { uniform_witness: Some(true) } => write!(f, "omega"),
            Resilience::Omega { uniform_witness: Some(false) } => write!(f, "omega?nonuniform"),
            Resilience::Omega { uniform_witness: None } => write!(f, "omega?unknown"),
            Resilience::OmegaPlusOne => write!(f, "omega+1"),
        }
    }
}

/// How much of a computed value is backed by a proof.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Certificate {
    /// Backed by a sound argument on both sides.
    Exact,
    /// Only the Player-1 side is certified: the true value is at most the
    /// reported one.
    SoundLowerBound,
    /// Player 0 won a truncation that is below the proven height bound.
    Heuristic,
}

impl Certificate {
    /// The weaker of two certificates.
    pub fn weakest(self, other: Certificate) -> Certificate {
        self.max(other)
    }

    pub fn tag(self) -> &'static str {
        match self {
            Certificate::Exact => "exact",
            Certificate::SoundLowerBound => "sound-lb",
            Certificate::Heuristic => "heuristic",
        }
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ResilienceValue {
    pub value: Resilience,
    pub certificate: Certificate,
}

impl ResilienceValue {
    pub fn new(value: Resilience, certificate: Certificate) -> Self {
        ResilienceValue { value, certificate }
    }

    pub fn exact(value: Resilience) -> Self {
        Self::new(value, Certificate::Exact)
    }
}

impl fmt::Display for ResilienceValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}!{}", self.value, self.certificate)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("cannot parse resilience value `{0}`")]
pub struct ValueParseError(pub String);

impl FromStr for Resilience {
    type Err = ValueParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "omega+1" => Ok(Resilience::OmegaPlusOne),
            "omega" => Ok(Resilience::Omega { uniform_witness: Some(true) }),
            "omega?nonuniform" => Ok(Resilience::Omega { uniform_witness: Some(false) }),
            "omega?unknown" => Ok(Resilience::Omega { uniform_witness: None }),
            _ => s
                .parse::<u64>()
                .map(Resilience::Finite)
                .map_err(|_| ValueParseError(s.to_string())),
        }
    }
}

impl FromStr for Certificate {
    type Err = ValueParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Certificate::Exact),
            "sound-lb" => Ok(Certificate::SoundLowerBound),
            "heuristic" => Ok(Certificate::Heuristic),
            _ => Err(ValueParseError(s.to_string())),
        }
    }
}

impl FromStr for ResilienceValue {
    type Err = ValueParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (v, c) = s.split_once('!').ok_or_else(|| ValueParseError(s.to_string()))?;
        Ok(ResilienceValue::new(v.parse()?, c.parse()?))
    }
}
