use std::fmt;
use std::str::FromStr;

use super::{Features, ScenarioConfig};
use crate::error::ConfigError;

/// The nine feature settings `a`..`i` used throughout the efficiency
/// experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PresetId {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
    I,
}

impl PresetId {
    pub const ALL: [PresetId; 9] = [
        PresetId::A,
        PresetId::B,
        PresetId::C,
        PresetId::D,
        PresetId::E,
        PresetId::F,
        PresetId::G,
        PresetId::H,
        PresetId::I,
    ];

    pub fn letter(self) -> char {
        (b'a' + self as u8) as char
    }

    /// Feature flags of this preset.
    pub fn features(self) -> Features {
        let none = Features {
            buddy_help: false,
            prefetch: false,
            prefetch_cap: None,
            broadcast: false,
            locality_only: false,
            credits: false,
        };
        let b = Features {
            buddy_help: true,
            credits: true,
            ..none
        };
        let c = Features { prefetch: true, ..b };
        let d = Features {
            prefetch_cap: Some(10),
            ..c
        };
        match self {
            PresetId::A => none,
            PresetId::B => b,
            PresetId::C => c,
            PresetId::D => d,
            PresetId::E => Features { broadcast: true, ..d },
            PresetId::F => Features { broadcast: true, ..c },
            PresetId::G => Features { broadcast: true, ..b },
            PresetId::H => Features {
                broadcast: true,
                locality_only: true,
                prefetch: true,
                credits: true,
                ..none
            },
            PresetId::I => Features { broadcast: true, ..none },
        }
    }

    /// The same setting without satellite broadcasts, if one exists.
    pub fn terrestrial_counterpart(self) -> Option<PresetId> {
        match self {
            PresetId::E => Some(PresetId::D),
            PresetId::F => Some(PresetId::C),
            PresetId::G => Some(PresetId::B),
            PresetId::I => Some(PresetId::A),
            _ => None,
        }
    }
}

impl fmt::Display for PresetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for PresetId {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let t = s.trim().to_ascii_lowercase();
        PresetId::ALL
            .into_iter()
            .find(|p| t.len() == 1 && t.starts_with(p.letter()))
            .ok_or_else(|| ConfigError::UnknownPreset(s.to_string()))
    }
}

/// Overlays the preset's feature flags onto `base`.
pub fn expand_preset(id: PresetId, base: &ScenarioConfig) -> ScenarioConfig {
    ScenarioConfig {
        preset: Some(id),
        features: id.features(),
        ..base.clone()
    }
}
