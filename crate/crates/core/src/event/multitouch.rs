//! Multi-touch protocol B slot tracking.
//!
//! `ABS_MT_SLOT` selects the active slot, `ABS_MT_TRACKING_ID` opens (>= 0)
//! or closes (< 0) the contact in that slot, and position/pressure updates
//! mutate the slot. Each `SYN_REPORT` flushes one point for every open slot
//! that changed during the frame; closes take effect at the same report.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TouchPoint {
    pub timestamp: Micros,
    pub x: i32,
    pub y: i32,
    pub pressure: Option<i32>,
    pub slot: i32,
    pub tracking_id: i32,
}

/// One finger's contact from down to up.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TouchTrack {
    pub tracking_id: i32,
    pub slot: i32,
    pub points: Vec<TouchPoint>,
    pub down_time: Micros,
    pub up_time: Micros,
    /// The input ended before the finger lifted.
    pub truncated: bool,
    /// Opened implicitly by a position update on a slot with no contact.
    pub synthetic: bool,
}

impl TouchTrack {
    pub fn first(&self) -> &TouchPoint {
        &self.points[0]
    }

    pub fn last(&self) -> &TouchPoint {
        &self.points[self.points.len() - 1]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TrackError {
    #[error("multi-touch protocol A unsupported (SYN_MT_REPORT at event {index}); only slot-based protocol B is parsed")]
    ProtocolA { index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TrackWarning {
    /// Position or pressure arrived for a slot with no open contact; a
    /// synthetic track was opened.
    ImplicitOpen { index: usize, slot: i32 },
    CloseWithoutOpen { index: usize, slot: i32 },
    NegativeSlot { index: usize, value: i32 },
    /// A contact closed before any complete frame gave it a position.
    EmptyTrack { slot: i32, tracking_id: i32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrackerSignal {
    Opened { slot: i32, tracking_id: i32, timestamp: Micros },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrackOutput {
    /// Ordered by the time each contact was opened.
    pub tracks: Vec<TouchTrack>,
    pub unconsumed: Vec<InputEvent>,
    pub warnings: Vec<TrackWarning>,
}

#[derive(Debug)]
struct OpenContact {
    seq: u64,
    tracking_id: i32,
    points: Vec<TouchPoint>,
    dirty: bool,
    closing: bool,
    synthetic: bool,
}

#[derive(Debug, Default)]
struct Slot {
    x: Option<i32>,
    y: Option<i32>,
    pressure: Option<i32>,
    contact: Option<OpenContact>,
}

/// Incremental protocol-B state machine.
#[derive(Debug, Default)]
pub struct MultiTouchTracker {
    current_slot: i32,
    slots: BTreeMap<i32, Slot>,
    next_seq: u64,
    index: usize,
    last_timestamp: Micros,
    finished: Vec<(u64, TouchTrack)>,
    warnings: Vec<TrackWarning>,
}

impl MultiTouchTracker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of slots holding a contact (including ones closing in the
    /// current frame).
    pub fn open_count(&self) -> usize {
        self.slots.values().filter(|s| s.contact.is_some()).count()
    }

    /// Feeds one event. Returns `Ok(false)` when the event is not part of
    /// the touch protocol and should be handled elsewhere.
    pub fn push(&mut self, ev: &InputEvent, signals: &mut Vec<TrackerSignal>) -> Result<bool, TrackError> {
        let index = self.index;
        self.index += 1;
        self.last_timestamp = self.last_timestamp.max(ev.timestamp);

        match (ev.ev_type, ev.ev_code) {
            (EV_SYN, SYN_REPORT) => {
                self.report(ev.timestamp);
                Ok(true)
            }
            (EV_SYN, SYN_MT_REPORT) => Err(TrackError::ProtocolA { index }),
            (EV_ABS, ABS_MT_SLOT) => {
                if ev.ev_value < 0 {
                    self.warnings.push(TrackWarning::NegativeSlot { index, value: ev.ev_value });
                } else {
                    self.current_slot = ev.ev_value;
                }
                Ok(true)
            }
            (EV_ABS, ABS_MT_TRACKING_ID) => {
                self.tracking_id(ev, index, signals);
                Ok(true)
            }
            (EV_ABS, ABS_MT_POSITION_X | ABS_MT_POSITION_Y | ABS_MT_PRESSURE) => {
                let slot_no = self.current_slot;
                let slot = self.slots.entry(slot_no).or_default();
                match ev.ev_code {
                    ABS_MT_POSITION_X => slot.x = Some(ev.ev_value),
                    ABS_MT_POSITION_Y => slot.y = Some(ev.ev_value),
                    _ => slot.pressure = Some(ev.ev_value),
                }
                match slot.contact.as_mut() {
                    Some(c) => c.dirty = true,
                    None => {
                        let tracking_id = -2 - slot_no;
                        slot.contact = Some(OpenContact {
                            seq: self.next_seq,
                            tracking_id,
                            points: Vec::new(),
                            dirty: true,
                            closing: false,
                            synthetic: true,
                        });
                        self.next_seq += 1;
                        self.warnings.push(TrackWarning::ImplicitOpen { index, slot: slot_no });
                        signals.push(TrackerSignal::Opened { slot: slot_no, tracking_id, timestamp: ev.timestamp });
                    }
                }
                Ok(true)
            }
            // Other per-contact axes (touch major, width, orientation, tool
            // position, ...) carry no information we keep.
            (EV_ABS, ABS_MT_TOUCH_MAJOR..=ABS_MT_TOOL_Y) => Ok(true),
            (EV_KEY, code) if BTN_TOUCH_RANGE.contains(&code) => Ok(true),
            _ => Ok(false),
        }
    }

    fn tracking_id(&mut self, ev: &InputEvent, index: usize, signals: &mut Vec<TrackerSignal>) {
        let slot_no = self.current_slot;
        let slot = self.slots.entry(slot_no).or_default();
        if ev.ev_value < 0 {
            match slot.contact.as_mut() {
                Some(c) => c.closing = true,
                None => self.warnings.push(TrackWarning::CloseWithoutOpen { index, slot: slot_no }),
            }
            return;
        }
        if let Some(c) = &slot.contact {
            if !c.closing && c.tracking_id == ev.ev_value {
                return;
            }
            let old = slot.contact.take().expect("checked above");
            Self::finalize(&mut self.finished, &mut self.warnings, slot_no, old, ev.timestamp, false);
        }
        let slot = self.slots.entry(slot_no).or_default();
        slot.contact = Some(OpenContact {
            seq: self.next_seq,
            tracking_id: ev.ev_value,
            points: Vec::new(),
            dirty: true,
            closing: false,
            synthetic: false,
        });
        self.next_seq += 1;
        signals.push(TrackerSignal::Opened { slot: slot_no, tracking_id: ev.ev_value, timestamp: ev.timestamp });
    }

    fn report(&mut self, timestamp: Micros) {
        for (&slot_no, slot) in self.slots.iter_mut() {
            let Some(c) = slot.contact.as_mut() else { continue };
            if c.dirty {
                if let (Some(x), Some(y)) = (slot.x, slot.y) {
                    c.points.push(TouchPoint {
                        timestamp,
                        x,
                        y,
                        pressure: slot.pressure,
                        slot: slot_no,
                        tracking_id: c.tracking_id,
                    });
                    c.dirty = false;
                }
            }
            if c.closing {
                let c = slot.contact.take().expect("checked above");
                Self::finalize(&mut self.finished, &mut self.warnings, slot_no, c, timestamp, false);
            }
        }
    }

    fn finalize(
        finished: &mut Vec<(u64, TouchTrack)>,
        warnings: &mut Vec<TrackWarning>,
        slot: i32,
        contact: OpenContact,
        up_time: Micros,
        truncated: bool,
    ) {
        if contact.points.is_empty() {
            warnings.push(TrackWarning::EmptyTrack { slot, tracking_id: contact.tracking_id });
            return;
        }
        let down_time = contact.points[0].timestamp;
        finished.push((
            contact.seq,
            TouchTrack {
                tracking_id: contact.tracking_id,
                slot,
                points: contact.points,
                down_time,
                up_time: up_time.max(down_time),
                truncated,
                synthetic: contact.synthetic,
            },
        ));
    }

    /// Closes any contacts still open as truncated and returns the tracks
    /// in opening order.
    pub fn finish(mut self) -> (Vec<TouchTrack>, Vec<TrackWarning>) {
        let end = self.last_timestamp;
        for (slot_no, slot) in std::mem::take(&mut self.slots) {
            if let Some(c) = slot.contact {
                Self::finalize(&mut self.finished, &mut self.warnings, slot_no, c, end, true);
            }
        }
        self.finished.sort_by_key(|(seq, _)| *seq);
        (self.finished.into_iter().map(|(_, t)| t).collect(), self.warnings)
    }
}

/// Runs the tracker over a single touch device's events.
pub fn track_multitouch(events: &[InputEvent]) -> Result<TrackOutput, TrackError> {
    let mut tracker = MultiTouchTracker::new();
    let mut unconsumed = Vec::new();
    let mut signals = Vec::new();
    for ev in events {
        if !tracker.push(ev, &mut signals)? {
            unconsumed.push(*ev);
        }
        signals.clear();
    }
    let (tracks, warnings) = tracker.finish();
    Ok(TrackOutput { tracks, unconsumed, warnings })
}
