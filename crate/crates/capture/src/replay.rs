use std::thread;
use std::time::{Duration, Instant};

use odbr_core::event::InputEvent;
use odbr_core::replay::{timing_plan, TimingMode};

use crate::bridge::{BridgeError, DeviceBridge};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplayOutcome {
    pub injected_count: usize,
    pub duration: Duration,
}

#[derive(Debug, thiserror::Error)]
#[error("injecting event #{index} failed after {injected_count} events: {source}")]
pub struct ReplayError {
    /// Position of the failed event in the log, counting from 1.
    pub index: usize,
    pub injected_count: usize,
    pub source: BridgeError,
}

/// Injects `events` in order through the bridge. Waits follow the same
/// plan the sendevent script uses; each wait is measured from the replay
/// start so injection latency does not accumulate.
pub fn replay_capture(bridge: &dyn DeviceBridge, events: &[InputEvent], timing: TimingMode) -> Result<ReplayOutcome, ReplayError> {
    let plan = timing_plan(events, timing);
    let start = Instant::now();
    let mut due = Duration::ZERO;
    for (i, ev) in events.iter().enumerate() {
        if let Some(ms) = plan[i] {
            due += Duration::from_millis(ms);
            let now = start.elapsed();
            if due > now {
                thread::sleep(due - now);
            }
        }
        bridge
            .inject_event(ev.device_index, ev.ev_type, ev.ev_code, ev.ev_value)
            .map_err(|source| ReplayError { index: i + 1, injected_count: i, source })?;
    }
    Ok(ReplayOutcome { injected_count: events.len(), duration: start.elapsed() })
}
