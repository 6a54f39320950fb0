//! What a recording session produces before any gesture analysis, and the
//! rule that decides when a new user action starts.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::event::{InputEvent, Micros, MultiTouchTracker, TrackerSignal, BTN_TOUCH_RANGE, EV_KEY};
use crate::sensor::SensorTraces;
use crate::ui::AxisRanges;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceInfo {
    pub model: String,
    pub os_version: String,
    pub screen_width: u32,
    pub screen_height: u32,
    pub axis_ranges: AxisRanges,
}

/// One screenshot + hierarchy dump request fired for a new action. Either
/// half may be missing when the bridge failed; the failure text is kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaptureAttempt {
    pub trigger_us: Micros,
    /// Delay between the action being detected and the captures completing.
    pub latency_us: u64,
    pub screenshot: Option<Vec<u8>>,
    pub ui_dump: Option<String>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IdleAnswer {
    Continue,
    Finish,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdlePromptRecord {
    pub at_us: Micros,
    pub answer: IdleAnswer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawCapture {
    pub app_package: String,
    /// Every input event, rebased to the session epoch and ordered by
    /// timestamp (ties keep arrival order).
    pub events: Vec<InputEvent>,
    pub captures: Vec<CaptureAttempt>,
    pub sensor_traces: SensorTraces,
    pub device_info: DeviceInfo,
    /// Device clock reading that maps to timestamp zero.
    pub session_epoch_us: Micros,
    pub started_at: Option<DateTime<Utc>>,
    pub idle_prompts: Vec<IdlePromptRecord>,
}

impl RawCapture {
    pub fn screenshots(&self) -> impl Iterator<Item = (Micros, &[u8])> {
        self.captures.iter().filter_map(|c| c.screenshot.as_deref().map(|s| (c.trigger_us, s)))
    }

    pub fn ui_dumps(&self) -> impl Iterator<Item = (Micros, &str)> {
        self.captures.iter().filter_map(|c| c.ui_dump.as_deref().map(|d| (c.trigger_us, d)))
    }

    /// Timestamp of the last event, or zero.
    pub fn session_end(&self) -> Micros {
        self.events.iter().map(|e| e.timestamp).max().unwrap_or(0)
    }
}

/// Live new-action detector. An action starts when a contact opens while no
/// other contact is down on any touch device, or when a key goes down.
#[derive(Debug, Default)]
pub struct ActionDetector {
    trackers: BTreeMap<u32, MultiTouchTracker>,
    keys_down: BTreeSet<(u32, u16)>,
    signals: Vec<TrackerSignal>,
}

impl ActionDetector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Contacts currently down across all touch devices.
    pub fn contacts_open(&self) -> usize {
        self.trackers.values().map(MultiTouchTracker::open_count).sum()
    }

    /// Feeds one event; returns the trigger timestamp when it begins a new
    /// action.
    pub fn push(&mut self, ev: &InputEvent) -> Option<Micros> {
        if ev.ev_type == EV_KEY && !BTN_TOUCH_RANGE.contains(&ev.ev_code) {
            let key = (ev.device_index, ev.ev_code);
            return match ev.ev_value {
                1 if self.keys_down.insert(key) => Some(ev.timestamp),
                0 => {
                    self.keys_down.remove(&key);
                    None
                }
                _ => None,
            };
        }

        self.signals.clear();
        let tracker = self.trackers.entry(ev.device_index).or_default();
        if let Err(e) = tracker.push(ev, &mut self.signals) {
            log::warn!("action detector: {e}");
            return None;
        }
        if self.signals.is_empty() {
            return None;
        }
        let open = self.contacts_open();
        match self.signals.first() {
            Some(TrackerSignal::Opened { timestamp, .. }) if open == 1 => Some(*timestamp),
            _ => None,
        }
    }
}

/// Runs the detector over a complete log.
pub fn detect_actions(events: &[InputEvent]) -> Vec<Micros> {
    let mut d = ActionDetector::new();
    events.iter().filter_map(|e| d.push(e)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::{ABS_MT_POSITION_X, ABS_MT_POSITION_Y, ABS_MT_SLOT, ABS_MT_TRACKING_ID, EV_ABS};

    fn abs(t: u64, code: u16, v: i32) -> InputEvent {
        InputEvent::new(t, 1, EV_ABS, code, v)
    }
    fn syn(t: u64) -> InputEvent {
        InputEvent::new(t, 1, 0, 0, 0)
    }
    fn tap(t: u64, id: i32) -> Vec<InputEvent> {
        vec![
            abs(t, ABS_MT_TRACKING_ID, id),
            abs(t, ABS_MT_POSITION_X, 10),
            abs(t, ABS_MT_POSITION_Y, 10),
            syn(t),
            abs(t + 80_000, ABS_MT_TRACKING_ID, -1),
            syn(t + 80_000),
        ]
    }

    #[test]
    fn two_taps_two_actions() {
        let mut ev = tap(0, 1);
        ev.extend(tap(2_000_000, 2));
        assert_eq!(detect_actions(&ev), vec![0, 2_000_000]);
    }

    #[test]
    fn second_finger_joins_open_action() {
        let ev = vec![
            abs(0, ABS_MT_SLOT, 0),
            abs(0, ABS_MT_TRACKING_ID, 1),
            abs(0, ABS_MT_POSITION_X, 10),
            abs(0, ABS_MT_POSITION_Y, 10),
            syn(0),
            abs(100_000, ABS_MT_SLOT, 1),
            abs(100_000, ABS_MT_TRACKING_ID, 2),
            abs(100_000, ABS_MT_POSITION_X, 50),
            abs(100_000, ABS_MT_POSITION_Y, 50),
            syn(100_000),
            abs(300_000, ABS_MT_TRACKING_ID, -1),
            abs(300_000, ABS_MT_SLOT, 0),
            abs(300_000, ABS_MT_TRACKING_ID, -1),
            syn(300_000),
        ];
        assert_eq!(detect_actions(&ev), vec![0]);
    }

    #[test]
    fn key_down_is_an_action_once() {
        let ev = vec![
            InputEvent::new(5, 0, EV_KEY, 116, 1),
            InputEvent::new(6, 0, EV_KEY, 116, 2),
            InputEvent::new(9, 0, EV_KEY, 116, 0),
            InputEvent::new(9, 1, EV_KEY, 0x14a, 1),
        ];
        assert_eq!(detect_actions(&ev), vec![5]);
    }
}
