use std::fmt;

use serde::Serialize;

use super::{parse_device_path, InputEvent, Micros};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {reason}: {text:?}")]
pub struct ParseError {
    pub line: usize,
    pub text: String,
    pub reason: String,
}

/// Why a non-event line was skipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetadataKind {
    Blank,
    AddDevice,
    RemoveDevice,
    /// Indented `name:`/`events:`/... lines describing the preceding device.
    DeviceProperty,
    /// `could not ...` messages getevent prints for nodes it cannot open.
    Diagnostic,
}

impl fmt::Display for MetadataKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MetadataKind::Blank => "blank",
            MetadataKind::AddDevice => "add-device",
            MetadataKind::RemoveDevice => "remove-device",
            MetadataKind::DeviceProperty => "device-property",
            MetadataKind::Diagnostic => "diagnostic",
        };
        f.write_str(s)
    }
}

/// One classified `getevent -t` line. `timestamp` is absent when getevent
/// ran without `-t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineKind {
    Event { timestamp: Option<Micros>, device_index: u32, ev_type: u16, ev_code: u16, ev_value: i32 },
    Metadata(MetadataKind),
}

/// Classifies a single line. The line number is only used for error
/// reporting.
pub fn parse_getevent_line(line: &str, line_no: usize) -> Result<LineKind, ParseError> {
    let err = |reason: &str| ParseError { line: line_no, text: line.to_string(), reason: reason.to_string() };

    let trimmed = line.trim_end_matches(['\r', '\n']);
    if trimmed.trim().is_empty() {
        return Ok(LineKind::Metadata(MetadataKind::Blank));
    }
    if trimmed.starts_with("add device") {
        return Ok(LineKind::Metadata(MetadataKind::AddDevice));
    }
    if trimmed.starts_with("remove device") {
        return Ok(LineKind::Metadata(MetadataKind::RemoveDevice));
    }
    if trimmed.starts_with("could not ") {
        return Ok(LineKind::Metadata(MetadataKind::Diagnostic));
    }
    if trimmed.starts_with([' ', '\t']) && !trimmed.trim_start().starts_with(['[', '/']) {
        return Ok(LineKind::Metadata(MetadataKind::DeviceProperty));
    }

    let mut rest = trimmed.trim_start();
    let mut timestamp = None;
    if let Some(after) = rest.strip_prefix('[') {
        let close = after.find(']').ok_or_else(|| err("unterminated timestamp"))?;
        timestamp = Some(parse_timestamp(after[..close].trim()).ok_or_else(|| err("malformed timestamp"))?);
        rest = after[close + 1..].trim_start();
    }

    let (path, fields) = rest.split_once(':').ok_or_else(|| err("missing device path"))?;
    let device_index = parse_device_path(path.trim()).ok_or_else(|| err("missing device path"))?;

    let fields: Vec<&str> = fields.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(err(&format!("expected 3 hex fields, found {}", fields.len())));
    }
    let ev_type = parse_hex(fields[0], 4).ok_or_else(|| err("malformed type field"))? as u16;
    let ev_code = parse_hex(fields[1], 4).ok_or_else(|| err("malformed code field"))? as u16;
    let ev_value = parse_hex(fields[2], 8).ok_or_else(|| err("malformed value field"))? as i32;

    Ok(LineKind::Event { timestamp, device_index, ev_type, ev_code, ev_value })
}

fn parse_hex(field: &str, max_digits: usize) -> Option<u32> {
    let digits = field
        .strip_prefix("0x")
        .or_else(|| field.strip_prefix("0X"))
        .unwrap_or(field);
    if digits.is_empty() || digits.len() > max_digits || !digits.bytes().all(|b| b.is_ascii_hexdigit()) {
        return None;
    }
    u32::from_str_radix(digits, 16).ok()
}

fn parse_timestamp(s: &str) -> Option<Micros> {
    let (sec, frac) = s.split_once('.').unwrap_or((s, ""));
    if sec.is_empty() || !sec.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let sec: u64 = sec.parse().ok()?;
    let mut usec = 0u64;
    for (i, b) in frac.bytes().take(6).enumerate() {
        usec += u64::from(b - b'0') * 10u64.pow(5 - i as u32);
    }
    sec.checked_mul(1_000_000)?.checked_add(usec)
}

/// Renders an event the way `getevent -t` prints it.
pub fn format_getevent_line(ev: &InputEvent) -> String {
    format!(
        "[{:>8}.{:06}] /dev/input/event{}: {:04x} {:04x} {:08x}",
        ev.timestamp / 1_000_000,
        ev.timestamp % 1_000_000,
        ev.device_index,
        ev.ev_type,
        ev.ev_code,
        ev.ev_value as u32
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedLine {
    pub line: usize,
    pub kind: MetadataKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GeteventLog {
    pub events: Vec<InputEvent>,
    pub skipped: Vec<SkippedLine>,
}

/// Stateful line parser: fills in timestamps for timestampless lines and
/// checks that device-property lines follow a device announcement.
#[derive(Debug, Default)]
pub struct GeteventParser {
    line_no: usize,
    last_timestamp: Micros,
    in_device_block: bool,
}

impl GeteventParser {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses the next line. Returns `Ok(Err(kind))` for skipped metadata.
    pub fn push_line(&mut self, line: &str) -> Result<Result<InputEvent, MetadataKind>, ParseError> {
        self.line_no += 1;
        match parse_getevent_line(line, self.line_no)? {
            LineKind::Event { timestamp, device_index, ev_type, ev_code, ev_value } => {
                self.in_device_block = false;
                let ts = timestamp.unwrap_or(self.last_timestamp);
                self.last_timestamp = ts;
                Ok(Ok(InputEvent { timestamp: ts, device_index, ev_type, ev_code, ev_value }))
            }
            LineKind::Metadata(kind) => {
                match kind {
                    MetadataKind::AddDevice => self.in_device_block = true,
                    MetadataKind::DeviceProperty if !self.in_device_block => {
                        return Err(ParseError {
                            line: self.line_no,
                            text: line.to_string(),
                            reason: "device property outside a device block".into(),
                        })
                    }
                    MetadataKind::DeviceProperty | MetadataKind::Blank => {}
                    _ => self.in_device_block = false,
                }
                Ok(Err(kind))
            }
        }
    }

    pub fn line_no(&self) -> usize {
        self.line_no
    }
}

/// Parses a whole transcript, stopping at the first malformed line.
pub fn parse_getevent_log(text: &str) -> Result<GeteventLog, ParseError> {
    let mut parser = GeteventParser::new();
    let mut log = GeteventLog::default();
    for line in text.lines() {
        match parser.push_line(line)? {
            Ok(ev) => log.events.push(ev),
            Err(kind) => log.skipped.push(SkippedLine { line: parser.line_no(), kind }),
        }
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn event(line: &str) -> LineKind {
        parse_getevent_line(line, 1).unwrap()
    }

    #[test]
    fn timestamped_abs_event() {
        assert_eq!(
            event("[   12.345678] /dev/input/event2: 0003 0035 000001f4"),
            LineKind::Event { timestamp: Some(12_345_678), device_index: 2, ev_type: 3, ev_code: 0x35, ev_value: 500 }
        );
    }

    #[test]
    fn timestampless_syn_is_filled_monotonically() {
        let log = parse_getevent_log(
            "[    1.000100] /dev/input/event2: 0003 0039 00000005\n/dev/input/event2: 0000 0000 00000000\n",
        )
        .unwrap();
        assert_eq!(log.events[1], InputEvent::new(1_000_100, 2, 0, 0, 0));

        let log = parse_getevent_log("/dev/input/event2: 0000 0000 00000000\n").unwrap();
        assert_eq!(log.events, vec![InputEvent::new(0, 2, 0, 0, 0)]);
    }

    #[test]
    fn metadata_lines() {
        assert_eq!(event("add device 1: /dev/input/event5"), LineKind::Metadata(MetadataKind::AddDevice));
        assert_eq!(event("  name:     \"qwerty2\""), LineKind::Metadata(MetadataKind::DeviceProperty));
        assert_eq!(
            event("could not get driver version for /dev/input/mice, Not a typewriter"),
            LineKind::Metadata(MetadataKind::Diagnostic)
        );
        assert_eq!(event(""), LineKind::Metadata(MetadataKind::Blank));
    }

    #[test]
    fn hex_prefix_and_case() {
        assert_eq!(
            event("/dev/input/event0: 0x0003 0X0036 0x000003E8"),
            LineKind::Event { timestamp: None, device_index: 0, ev_type: 3, ev_code: 0x36, ev_value: 1000 }
        );
        match event("/dev/input/event1: 0003 0039 ffffffff") {
            LineKind::Event { ev_value, .. } => assert_eq!(ev_value, -1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_lines_report_line_number() {
        let e = parse_getevent_line("/dev/input/event2: 0003 zz35 000001f4", 7).unwrap_err();
        assert_eq!(e.line, 7);
        assert!(e.reason.contains("code"));
        assert!(parse_getevent_line("[ 1.0] 0003 0035 000001f4", 1).is_err());
        assert!(parse_getevent_line("/dev/input/event2: 0003 0035", 1).unwrap_err().reason.contains("found 2"));
        assert!(parse_getevent_line("/dev/input/event2: 0003 0035 1 2", 1).is_err());
        assert!(parse_getevent_line("[ 1.5 /dev/input/event2: 0003 0035 0001", 1).is_err());
        assert!(parse_getevent_line("/dev/input/event2: 00003 0035 00000001", 1).is_err());
    }

    #[test]
    fn property_line_needs_device_block() {
        let err = parse_getevent_log("  name: \"x\"\n").unwrap_err();
        assert_eq!(err.line, 1);
        let ok = parse_getevent_log("add device 1: /dev/input/event0\n  name: \"x\"\n  events:\n").unwrap();
        assert_eq!(ok.skipped.len(), 3);
    }

    #[test]
    fn format_round_trips() {
        for ev in [
            InputEvent::new(12_345_678, 2, 3, 0x35, 500),
            InputEvent::new(0, 0, 0, 0, 0),
            InputEvent::new(99_000_001, 11, 3, 0x39, -1),
        ] {
            let line = format_getevent_line(&ev);
            assert_eq!(parse_getevent_log(&line).unwrap().events, vec![ev]);
        }
        assert_eq!(
            format_getevent_line(&InputEvent::new(12_345_678, 2, 3, 0x35, 500)),
            "[      12.345678] /dev/input/event2: 0003 0035 000001f4"
        );
    }

    #[test]
    fn short_fraction_scales() {
        assert_eq!(parse_timestamp("3.5"), Some(3_500_000));
        assert_eq!(parse_timestamp("3.1234567"), Some(3_123_456));
        assert_eq!(parse_timestamp("x.1"), None);
    }
}
