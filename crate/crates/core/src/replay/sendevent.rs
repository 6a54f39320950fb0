use std::collections::BTreeMap;

use crate::event::{device_path, parse_device_path, InputEvent, Micros};

use super::{format_sleep, TimingMode, SLEEP_FLOOR_MS};

/// Device index to device node path.
pub type DeviceMap = BTreeMap<u32, String>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScriptError {
    #[error("no device path for device index {0}")]
    UnmappedDevice(u32),
    #[error("line {line}: {reason}: {text:?}")]
    Syntax { line: usize, text: String, reason: &'static str },
}

/// Maps every device index in the log to `/dev/input/eventN`.
pub fn default_device_map(events: &[InputEvent]) -> DeviceMap {
    events.iter().map(|e| (e.device_index, device_path(e.device_index))).collect()
}

/// Sleep (in ms) to issue before each event, or `None`.
///
/// Preserve mode accumulates gaps and sleeps once at least the floor has
/// built up, carrying the sub-millisecond remainder. Whatever is left is
/// flushed before the last event so the total never drifts by a whole
/// millisecond.
pub fn timing_plan(events: &[InputEvent], timing: TimingMode) -> Vec<Option<u64>> {
    let n = events.len();
    let mut plan = vec![None; n];
    match timing {
        TimingMode::MaxSpeed => {}
        TimingMode::FixedGap(ms) => {
            for i in 1..n {
                if events[i - 1].is_syn_report() {
                    plan[i] = Some(ms);
                }
            }
        }
        TimingMode::Preserve => {
            let mut pending: Micros = 0;
            let mut emitted = false;
            for i in 1..n {
                pending += events[i].timestamp.saturating_sub(events[i - 1].timestamp);
                let ms = pending / 1000;
                let last = i == n - 1;
                if ms >= SLEEP_FLOOR_MS || (last && (ms > 0 || (!emitted && pending > 0))) {
                    plan[i] = Some(ms);
                    pending -= ms * 1000;
                    emitted = true;
                }
            }
        }
    }
    plan
}

pub fn emit_sendevent_script(events: &[InputEvent], devices: &DeviceMap, timing: TimingMode, report_id: Option<&str>) -> Result<String, ScriptError> {
    let mut out = String::from("#!/system/bin/sh\n");
    out.push_str(&format!("# report: {}\n", report_id.unwrap_or("-")));
    out.push_str(&format!("# timing: {timing}\n"));
    for (ev, sleep) in events.iter().zip(timing_plan(events, timing)) {
        let path = devices.get(&ev.device_index).ok_or(ScriptError::UnmappedDevice(ev.device_index))?;
        if let Some(ms) = sleep {
            out.push_str(&format_sleep(ms));
            out.push('\n');
        }
        out.push_str(&format!("sendevent {path} {} {} {}\n", ev.ev_type, ev.ev_code, ev.ev_value));
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedScript {
    /// Timestamps are the cumulative sleep time before each event.
    pub events: Vec<InputEvent>,
    /// (index of the event the sleep precedes, milliseconds).
    pub sleeps: Vec<(usize, u64)>,
}

impl ParsedScript {
    pub fn total_sleep_ms(&self) -> u64 {
        self.sleeps.iter().map(|(_, ms)| ms).sum()
    }
}

fn parse_sleep(arg: &str) -> Option<u64> {
    let (secs, frac) = arg.split_once('.').unwrap_or((arg, ""));
    if secs.is_empty() || !secs.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 3 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let millis = if frac.is_empty() { 0 } else { frac.parse::<u64>().ok()? * 10u64.pow(3 - frac.len() as u32) };
    secs.parse::<u64>().ok()?.checked_mul(1000)?.checked_add(millis)
}

/// Reads a script in the emitted grammar back into events and sleeps.
pub fn parse_sendevent_script(text: &str) -> Result<ParsedScript, ScriptError> {
    let mut out = ParsedScript::default();
    let mut clock: Micros = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let err = |reason| ScriptError::Syntax { line: i + 1, text: raw.to_string(), reason };
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "sleep" => {
                let [_, arg] = fields[..] else { return Err(err("sleep takes one argument")) };
                let ms = parse_sleep(arg).ok_or_else(|| err("bad sleep duration"))?;
                clock += ms * 1000;
                out.sleeps.push((out.events.len(), ms));
            }
            "sendevent" => {
                let [_, path, t, c, v] = fields[..] else { return Err(err("sendevent takes four arguments")) };
                let device = parse_device_path(path).ok_or_else(|| err("device path is not /dev/input/eventN"))?;
                let ev_type = t.parse().map_err(|_| err("bad type"))?;
                let ev_code = c.parse().map_err(|_| err("bad code"))?;
                let ev_value = v.parse().map_err(|_| err("bad value"))?;
                out.events.push(InputEvent::new(clock, device, ev_type, ev_code, ev_value));
            }
            _ => return Err(err("unknown directive")),
        }
    }
    Ok(out)
}
