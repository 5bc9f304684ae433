use std::fmt;

use serde::{Deserialize, Serialize};

/// Outcome from the appellant's perspective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Approve,
    Deny,
}

impl Decision {
    /// Token emitted in serialized prompts.
    pub fn as_token(self) -> &'static str {
        match self {
            Decision::Approve => "approve",
            Decision::Deny => "deny",
        }
    }

    pub fn opposite(self) -> Decision {
        match self {
            Decision::Approve => Decision::Deny,
            Decision::Deny => Decision::Approve,
        }
    }

    /// Approve = 1, Deny = 0.
    pub fn indicator(self) -> f64 {
        match self {
            Decision::Approve => 1.0,
            Decision::Deny => 0.0,
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_token())
    }
}

/// A single justice's participation in a case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vote {
    Approve,
    Deny,
    Recused,
}

impl Vote {
    pub fn decision(self) -> Option<Decision> {
        match self {
            Vote::Approve => Some(Decision::Approve),
            Vote::Deny => Some(Decision::Deny),
            Vote::Recused => None,
        }
    }
}

impl From<Decision> for Vote {
    fn from(d: Decision) -> Self {
        match d {
            Decision::Approve => Vote::Approve,
            Decision::Deny => Vote::Deny,
        }
    }
}
