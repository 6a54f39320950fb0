//! Replay scripts: exact timed `sendevent` lines, or portable `input`
//! commands derived from classified steps.

mod adb;
mod sendevent;

pub use adb::emit_adb_script;
pub use sendevent::{default_device_map, emit_sendevent_script, parse_sendevent_script, timing_plan, DeviceMap, ParsedScript, ScriptError};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Shortest sleep worth emitting; smaller gaps are carried forward.
pub const SLEEP_FLOOR_MS: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimingMode {
    Preserve,
    /// Fixed pause in milliseconds before every frame after the first.
    FixedGap(u64),
    MaxSpeed,
}

impl fmt::Display for TimingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimingMode::Preserve => f.write_str("preserve"),
            TimingMode::FixedGap(ms) => write!(f, "fixed_gap:{ms}"),
            TimingMode::MaxSpeed => f.write_str("max_speed"),
        }
    }
}

impl FromStr for TimingMode {
    type Err = String;

    /// Accepts `preserve`, `max_speed` and `fixed_gap:<ms>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "preserve" => Ok(TimingMode::Preserve),
            "max_speed" | "max-speed" => Ok(TimingMode::MaxSpeed),
            _ => {
                let ms = s
                    .strip_prefix("fixed_gap:")
                    .or_else(|| s.strip_prefix("fixed-gap:"))
                    .ok_or_else(|| format!("unknown timing mode {s:?}"))?;
                ms.parse().map(TimingMode::FixedGap).map_err(|_| format!("bad gap in {s:?}"))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScriptFlavor {
    Sendevent,
    Adb,
}

impl ScriptFlavor {
    pub const ALL: [ScriptFlavor; 2] = [ScriptFlavor::Sendevent, ScriptFlavor::Adb];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScriptFlavor::Sendevent => "sendevent",
            ScriptFlavor::Adb => "adb",
        }
    }

    /// File name used when a script is written next to a report.
    pub fn file_name(&self) -> String {
        format!("replay-{}.sh", self.as_str())
    }
}

impl FromStr for ScriptFlavor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sendevent" => Ok(ScriptFlavor::Sendevent),
            "adb" => Ok(ScriptFlavor::Adb),
            _ => Err(format!("unknown script flavor {s:?}")),
        }
    }
}

pub(crate) fn format_sleep(ms: u64) -> String {
    format!("sleep {}.{:03}", ms / 1000, ms % 1000)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timing_mode_strings() {
        for m in [TimingMode::Preserve, TimingMode::MaxSpeed, TimingMode::FixedGap(40)] {
            assert_eq!(m.to_string().parse::<TimingMode>().unwrap(), m);
        }
        assert!("fixed_gap:x".parse::<TimingMode>().is_err());
        assert!("slow".parse::<TimingMode>().is_err());
    }

    #[test]
    fn sleep_format() {
        assert_eq!(format_sleep(100), "sleep 0.100");
        assert_eq!(format_sleep(12_005), "sleep 12.005");
    }
}
