use crate::ui::ScreenPoint;

use super::{describe, micros_to_ms, GestureThresholds, InteractionKind, InteractionSource, Segment, UserInteraction};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GestureError {
    #[error("touch segment has no points")]
    EmptySegment,
}

/// Classifies one segment. Points must already be in screen pixels.
///
/// Single contacts: displacement above the tap slop is a swipe; otherwise a
/// contact lasting at least the long-press threshold is a long-press, and
/// anything shorter a tap. Both comparisons are inclusive toward the
/// weaker-motion class.
pub fn classify(segment: &Segment, thresholds: &GestureThresholds, index: usize) -> Result<UserInteraction, GestureError> {
    let start_time = segment.start_time();
    let end_time = segment.end_time().max(start_time);

    let (kind, start_point, end_point, raw_tracks) = match segment {
        Segment::Key(press) => (InteractionKind::KeyPress, None, None, InteractionSource::Key { press: press.clone() }),
        Segment::Touch(tracks) => {
            let first = tracks.first().filter(|t| !t.points.is_empty()).ok_or(GestureError::EmptySegment)?;
            if tracks.iter().any(|t| t.points.is_empty()) {
                return Err(GestureError::EmptySegment);
            }
            let a = ScreenPoint::new(first.first().x, first.first().y);
            let b = ScreenPoint::new(first.last().x, first.last().y);
            let kind = if tracks.len() > 1 {
                InteractionKind::MultiTouch
            } else if a.distance(&b) > f64::from(thresholds.tap_slop_px) {
                InteractionKind::Swipe
            } else if end_time - start_time >= thresholds.long_press_ms * 1000 {
                InteractionKind::LongPress
            } else {
                InteractionKind::Tap
            };
            (kind, Some(a), Some(b), InteractionSource::Touch { tracks: tracks.clone() })
        }
    };

    let mut step = UserInteraction {
        index,
        kind,
        start_point,
        end_point,
        start_time,
        end_time,
        duration_ms: micros_to_ms(end_time - start_time),
        target: None,
        clickable_ancestor: None,
        screenshot_ref: None,
        ui_dump_ref: None,
        description: String::new(),
        raw_tracks,
    };
    step.description = describe(&step);
    Ok(step)
}
