//! Turning touch tracks and key presses into classified, described steps.

mod classify;
mod describe;
mod idle;
mod segment;

pub use classify::{classify, GestureError};
pub use describe::describe;
pub use idle::{detect_idle, IdleBoundary};
pub use segment::{segment_interactions, Segment};

use serde::{Deserialize, Serialize};

use crate::event::{KeyPress, Micros, TouchTrack};
use crate::ui::{ComponentSummary, ScreenPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GestureThresholds {
    pub tap_slop_px: u32,
    pub long_press_ms: u64,
    pub idle_timeout_ms: u64,
    pub multi_touch_overlap_ms: u64,
}

impl Default for GestureThresholds {
    fn default() -> Self {
        GestureThresholds { tap_slop_px: 24, long_press_ms: 500, idle_timeout_ms: 5000, multi_touch_overlap_ms: 50 }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ThresholdError {
    #[error("threshold {0} must be strictly positive")]
    NotPositive(&'static str),
    #[error("invalid threshold file: {0}")]
    Parse(#[from] toml::de::Error),
}

impl GestureThresholds {
    pub fn validate(&self) -> Result<(), ThresholdError> {
        if self.tap_slop_px == 0 {
            return Err(ThresholdError::NotPositive("tap_slop_px"));
        }
        if self.long_press_ms == 0 {
            return Err(ThresholdError::NotPositive("long_press_ms"));
        }
        if self.idle_timeout_ms == 0 {
            return Err(ThresholdError::NotPositive("idle_timeout_ms"));
        }
        if self.multi_touch_overlap_ms == 0 {
            return Err(ThresholdError::NotPositive("multi_touch_overlap_ms"));
        }
        Ok(())
    }

    /// Reads a `key = value` threshold file. Missing keys keep defaults.
    pub fn from_config_str(text: &str) -> Result<Self, ThresholdError> {
        let t: GestureThresholds = toml::from_str(text)?;
        t.validate()?;
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InteractionKind {
    Tap,
    LongPress,
    Swipe,
    MultiTouch,
    KeyPress,
}

/// What a step was reconstructed from. Touch points are in screen pixels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InteractionSource {
    Touch { tracks: Vec<TouchTrack> },
    Key { press: KeyPress },
}

/// One reproduction step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserInteraction {
    pub index: usize,
    pub kind: InteractionKind,
    pub start_point: Option<ScreenPoint>,
    pub end_point: Option<ScreenPoint>,
    pub start_time: Micros,
    pub end_time: Micros,
    pub duration_ms: u64,
    pub target: Option<ComponentSummary>,
    /// Set when the hit component is not clickable but an ancestor is.
    pub clickable_ancestor: Option<ComponentSummary>,
    pub screenshot_ref: Option<String>,
    pub ui_dump_ref: Option<String>,
    pub description: String,
    pub raw_tracks: InteractionSource,
}

impl UserInteraction {
    pub fn finger_count(&self) -> usize {
        match &self.raw_tracks {
            InteractionSource::Touch { tracks } => tracks.len(),
            InteractionSource::Key { .. } => 0,
        }
    }
}

/// Rounds a microsecond span to whole milliseconds, halves away from zero.
pub fn micros_to_ms(us: u64) -> u64 {
    (us + 500) / 1000
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        GestureThresholds::default().validate().unwrap();
    }

    #[test]
    fn config_file() {
        let t = GestureThresholds::from_config_str("tap_slop_px = 30\nlong_press_ms = 650\n").unwrap();
        assert_eq!(t.tap_slop_px, 30);
        assert_eq!(t.long_press_ms, 650);
        assert_eq!(t.idle_timeout_ms, 5000);
        assert!(GestureThresholds::from_config_str("idle_timeout_ms = 0").is_err());
        assert!(GestureThresholds::from_config_str("bogus = 1").is_err());
    }

    #[test]
    fn ms_rounding() {
        assert_eq!(micros_to_ms(0), 0);
        assert_eq!(micros_to_ms(499), 0);
        assert_eq!(micros_to_ms(500), 1);
        assert_eq!(micros_to_ms(80_000), 80);
    }
}
