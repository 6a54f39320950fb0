//! Low-level input events: parsing `getevent` transcripts and raw evdev
//! records, and reconstructing per-finger touch tracks and key presses.

mod binary;
mod getevent;
mod keys;
mod multitouch;

pub use binary::{decode_binary_stream, encode_binary_stream, BinaryLayout, ByteOrder, DecodedStream, TimeWidth};
pub use getevent::{
    format_getevent_line, parse_getevent_line, parse_getevent_log, GeteventLog, GeteventParser, LineKind,
    MetadataKind, ParseError, SkippedLine,
};
pub use keys::{android_keycode, extract_key_events, key_name, KeyExtraction, KeyPress};
pub use multitouch::{
    track_multitouch, MultiTouchTracker, TouchPoint, TouchTrack, TrackError, TrackOutput, TrackWarning,
    TrackerSignal,
};

use serde::{Deserialize, Serialize};

pub const EV_SYN: u16 = 0x00;
pub const EV_KEY: u16 = 0x01;
pub const EV_ABS: u16 = 0x03;

pub const SYN_REPORT: u16 = 0x00;
pub const SYN_MT_REPORT: u16 = 0x02;

pub const ABS_MT_SLOT: u16 = 0x2f;
pub const ABS_MT_TOUCH_MAJOR: u16 = 0x30;
pub const ABS_MT_POSITION_X: u16 = 0x35;
pub const ABS_MT_POSITION_Y: u16 = 0x36;
pub const ABS_MT_TRACKING_ID: u16 = 0x39;
pub const ABS_MT_PRESSURE: u16 = 0x3a;
pub const ABS_MT_TOOL_X: u16 = 0x3c;
pub const ABS_MT_TOOL_Y: u16 = 0x3d;

/// `BTN_DIGI` .. `BTN_TOOL_QUADTAP`: key codes a touchscreen uses to report
/// contact state alongside the slot protocol.
pub const BTN_TOUCH_RANGE: std::ops::RangeInclusive<u16> = 0x140..=0x14f;

/// Microseconds since the session epoch.
pub type Micros = u64;

/// One decoded evdev record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InputEvent {
    pub timestamp: Micros,
    pub device_index: u32,
    pub ev_type: u16,
    pub ev_code: u16,
    pub ev_value: i32,
}

impl InputEvent {
    pub fn new(timestamp: Micros, device_index: u32, ev_type: u16, ev_code: u16, ev_value: i32) -> Self {
        InputEvent { timestamp, device_index, ev_type, ev_code, ev_value }
    }

    /// Types other than SYN, KEY and ABS are kept but not interpreted.
    pub fn is_passthrough(&self) -> bool {
        !matches!(self.ev_type, EV_SYN | EV_KEY | EV_ABS)
    }

    pub fn is_syn_report(&self) -> bool {
        self.ev_type == EV_SYN && self.ev_code == SYN_REPORT
    }

    /// Path of the device node this event came from.
    pub fn device_path(&self) -> String {
        device_path(self.device_index)
    }
}

pub fn device_path(device_index: u32) -> String {
    format!("/dev/input/event{device_index}")
}

/// Parses `/dev/input/eventN` into `N`.
pub fn parse_device_path(path: &str) -> Option<u32> {
    let n = path.strip_prefix("/dev/input/event")?;
    if n.is_empty() || !n.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    n.parse().ok()
}

/// Shifts every timestamp so that `epoch` becomes zero. Events recorded
/// before the epoch are pinned to zero.
pub fn rebase(events: &mut [InputEvent], epoch: Micros) {
    for ev in events {
        ev.timestamp = ev.timestamp.saturating_sub(epoch);
    }
}
