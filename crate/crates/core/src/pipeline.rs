//! Offline analysis: event log in, classified steps out.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::event::{extract_key_events, track_multitouch, InputEvent, Micros, TouchTrack, TrackError, TrackWarning};
use crate::gesture::{classify, detect_idle, segment_interactions, GestureError, GestureThresholds, IdleBoundary, UserInteraction};
use crate::ui::{map_raw_to_screen, AxisRanges};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("device event{device}: {source}")]
    Track { device: u32, source: TrackError },
    #[error(transparent)]
    Gesture(#[from] GestureError),
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Analysis {
    pub steps: Vec<UserInteraction>,
    pub idle: Vec<IdleBoundary>,
    pub warnings: Vec<String>,
    /// Events no stage consumed (other devices' noise, unknown codes).
    pub unconsumed: usize,
}

/// Tracks every device separately and maps the points to screen pixels.
pub fn screen_tracks(events: &[InputEvent], ranges: &AxisRanges) -> Result<(Vec<TouchTrack>, Vec<TrackWarning>, Vec<InputEvent>), PipelineError> {
    let mut by_device: BTreeMap<u32, Vec<InputEvent>> = BTreeMap::new();
    for ev in events {
        by_device.entry(ev.device_index).or_default().push(*ev);
    }
    let mut tracks = Vec::new();
    let mut warnings = Vec::new();
    let mut unconsumed = Vec::new();
    for (device, evs) in by_device {
        let out = track_multitouch(&evs).map_err(|source| PipelineError::Track { device, source })?;
        tracks.extend(out.tracks);
        warnings.extend(out.warnings);
        unconsumed.extend(out.unconsumed);
    }
    for t in &mut tracks {
        for p in &mut t.points {
            let s = map_raw_to_screen(p.x, p.y, ranges);
            p.x = s.x;
            p.y = s.y;
        }
    }
    tracks.sort_by_key(|t| t.down_time);
    unconsumed.sort_by_key(|e| e.timestamp);
    Ok((tracks, warnings, unconsumed))
}

/// Runs tracking, key extraction, segmentation, classification and idle
/// detection over a session log.
pub fn analyze_events(events: &[InputEvent], ranges: &AxisRanges, thresholds: &GestureThresholds, session_end: Micros) -> Result<Analysis, PipelineError> {
    let (tracks, track_warnings, rest) = screen_tracks(events, ranges)?;
    let keys = extract_key_events(&rest);

    let mut warnings: Vec<String> = track_warnings.iter().map(|w| format!("{w:?}")).collect();
    warnings.extend(keys.dropped.iter().map(|e| format!("key up without down: code {} at {}us", e.ev_code, e.timestamp)));

    let segments = segment_interactions(&tracks, &keys.presses, thresholds);
    let steps = segments.iter().enumerate().map(|(i, s)| classify(s, thresholds, i)).collect::<Result<Vec<_>, _>>()?;
    let idle = detect_idle(&steps, session_end, thresholds);
    let unconsumed = keys.unconsumed.iter().filter(|e| !e.is_syn_report()).count();
    Ok(Analysis { steps, idle, warnings, unconsumed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::{ABS_MT_POSITION_X, ABS_MT_POSITION_Y, ABS_MT_TRACKING_ID, EV_ABS, EV_KEY};
    use crate::gesture::InteractionKind;

    fn abs(t: u64, code: u16, v: i32) -> InputEvent {
        InputEvent::new(t, 1, EV_ABS, code, v)
    }
    fn syn(t: u64) -> InputEvent {
        InputEvent::new(t, 1, 0, 0, 0)
    }

    #[test]
    fn tap_then_power_key() {
        let ev = vec![
            abs(0, ABS_MT_TRACKING_ID, 3),
            abs(0, ABS_MT_POSITION_X, 2048),
            abs(0, ABS_MT_POSITION_Y, 2048),
            syn(0),
            abs(90_000, ABS_MT_TRACKING_ID, -1),
            syn(90_000),
            InputEvent::new(1_000_000, 0, EV_KEY, 116, 1),
            InputEvent::new(1_000_000, 0, 0, 0, 0),
            InputEvent::new(1_080_000, 0, EV_KEY, 116, 0),
            InputEvent::new(1_080_000, 0, 0, 0, 0),
        ];
        let ranges = AxisRanges { x_min: 0, x_max: 4095, y_min: 0, y_max: 4095, screen_width: 1080, screen_height: 1920 };
        let a = analyze_events(&ev, &ranges, &GestureThresholds::default(), 1_080_000).unwrap();
        assert_eq!(a.steps.len(), 2);
        assert_eq!(a.steps[0].kind, InteractionKind::Tap);
        // round(2048 * 1079 / 4095) = 540, round(2048 * 1919 / 4095) = 960
        assert_eq!(a.steps[0].start_point.unwrap(), crate::ui::ScreenPoint::new(540, 960));
        assert_eq!(a.steps[1].kind, InteractionKind::KeyPress);
        assert_eq!(a.steps[1].description, "Press KEY_POWER");
        assert_eq!(a.unconsumed, 0);
    }

    #[test]
    fn empty_log() {
        let a = analyze_events(&[], &AxisRanges::identity(10, 10), &GestureThresholds::default(), 0).unwrap();
        assert!(a.steps.is_empty() && a.idle.is_empty());
    }
}
