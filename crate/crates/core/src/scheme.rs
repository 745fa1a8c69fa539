use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Propagation protocol.
///
/// `Uncontrolled` is the bare kicked rotor, `UnwindM` the kicked rotor
/// followed by linear-canonical contractions along the orbit, and the
/// remaining four are the half-step-kicked control Hamiltonians.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ControlScheme {
    Uncontrolled,
    UnwindM,
    SolA,
    SolAImproved,
    SolB,
    SolBImproved,
}

impl ControlScheme {
    pub const ALL: [ControlScheme; 6] = [
        ControlScheme::Uncontrolled,
        ControlScheme::UnwindM,
        ControlScheme::SolA,
        ControlScheme::SolAImproved,
        ControlScheme::SolB,
        ControlScheme::SolBImproved,
    ];

    /// True for the schemes that replace the kick by designed potentials.
    pub fn has_potentials(self) -> bool {
        matches!(
            self,
            ControlScheme::SolA
                | ControlScheme::SolAImproved
                | ControlScheme::SolB
                | ControlScheme::SolBImproved
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            ControlScheme::Uncontrolled => "Uncontrolled",
            ControlScheme::UnwindM => "UnwindM",
            ControlScheme::SolA => "SolA",
            ControlScheme::SolAImproved => "SolAImproved",
            ControlScheme::SolB => "SolB",
            ControlScheme::SolBImproved => "SolBImproved",
        }
    }
}

impl fmt::Display for ControlScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ControlScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ControlScheme::ALL
            .into_iter()
            .find(|scheme| scheme.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown control scheme `{s}`")))
    }
}
