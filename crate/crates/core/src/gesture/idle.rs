use serde::{Deserialize, Serialize};

use super::{GestureThresholds, UserInteraction};
use crate::event::Micros;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdleBoundary {
    /// When the idle prompt would fire.
    pub timestamp: Micros,
    /// Index of the step before the gap; absent when nothing happened yet.
    pub after_index: Option<usize>,
}

/// One boundary for every gap longer than the idle timeout, between steps or
/// after the last one. Without steps the whole session counts as one gap.
pub fn detect_idle(interactions: &[UserInteraction], session_end: Micros, thresholds: &GestureThresholds) -> Vec<IdleBoundary> {
    let timeout = thresholds.idle_timeout_ms * 1000;
    let mut out = Vec::new();
    if interactions.is_empty() {
        if session_end > timeout {
            out.push(IdleBoundary { timestamp: timeout, after_index: None });
        }
        return out;
    }
    for (i, step) in interactions.iter().enumerate() {
        let next_start = interactions.get(i + 1).map_or(session_end, |n| n.start_time);
        if next_start.saturating_sub(step.end_time) > timeout {
            out.push(IdleBoundary { timestamp: step.end_time + timeout, after_index: Some(step.index) });
        }
    }
    out
}
