use std::fmt;

use chrono::DateTime;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use super::{BugReport, SCHEMA_VERSION};
use crate::gesture::micros_to_ms;
use crate::sensor::SensorKind;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// JSON path of the offending field, e.g. `steps[2].index`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violation(s)", self.violations.len())?;
        for v in &self.violations {
            write!(f, "\n  {v}")?;
        }
        Ok(())
    }
}

impl ValidationError {
    pub fn single(path: &str, message: impl Into<String>) -> Self {
        ValidationError { violations: vec![Violation { path: path.into(), message: message.into() }] }
    }

    pub fn names(&self, path: &str) -> bool {
        self.violations.iter().any(|v| v.path == path)
    }
}

/// Pretty-printed canonical form, newline-terminated.
pub fn to_json(report: &BugReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Parses and validates a document, reporting every violation found.
pub fn from_json(text: &str) -> Result<BugReport, ValidationError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ValidationError::single("", format!("not JSON: {e}")))?;
    let violations = validate_value(&value);
    if !violations.is_empty() {
        return Err(ValidationError { violations });
    }
    serde_json::from_value(value).map_err(|e| ValidationError::single("", e.to_string()))
}

pub fn validate(report: &BugReport) -> Vec<Violation> {
    validate_value(&serde_json::to_value(report).expect("report serializes"))
}

/// First 16 hex digits of the SHA-256 of the compact document without `id`.
pub fn compute_id(report: &BugReport) -> String {
    let mut v = serde_json::to_value(report).expect("report serializes");
    if let Value::Object(m) = &mut v {
        m.remove("id");
    }
    let digest = Sha256::digest(v.to_string().as_bytes());
    hex::encode(digest)[..16].to_string()
}

struct Checker {
    out: Vec<Violation>,
}

impl Checker {
    fn fail(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.out.push(Violation { path: path.into(), message: message.into() });
    }

    fn field<'a>(&mut self, obj: &'a Map<String, Value>, base: &str, key: &str) -> Option<&'a Value> {
        let v = obj.get(key);
        if v.is_none() {
            self.fail(join(base, key), "required field missing");
        }
        v
    }

    fn string<'a>(&mut self, obj: &'a Map<String, Value>, base: &str, key: &str) -> Option<&'a str> {
        match self.field(obj, base, key)? {
            Value::String(s) => Some(s),
            _ => {
                self.fail(join(base, key), "expected a string");
                None
            }
        }
    }

    fn opt_string<'a>(&mut self, obj: &'a Map<String, Value>, base: &str, key: &str) -> Option<&'a str> {
        match self.field(obj, base, key)? {
            Value::String(s) => Some(s),
            Value::Null => None,
            _ => {
                self.fail(join(base, key), "expected a string or null");
                None
            }
        }
    }

    fn uint(&mut self, obj: &Map<String, Value>, base: &str, key: &str) -> Option<u64> {
        let v = self.field(obj, base, key)?;
        let n = v.as_u64();
        if n.is_none() {
            self.fail(join(base, key), "expected a non-negative integer");
        }
        n
    }

    fn int(&mut self, obj: &Map<String, Value>, base: &str, key: &str) -> Option<i64> {
        let v = self.field(obj, base, key)?;
        let n = v.as_i64();
        if n.is_none() {
            self.fail(join(base, key), "expected an integer");
        }
        n
    }

    fn bool(&mut self, obj: &Map<String, Value>, base: &str, key: &str) {
        if let Some(v) = self.field(obj, base, key) {
            if !v.is_boolean() {
                self.fail(join(base, key), "expected a boolean");
            }
        }
    }

    fn object<'a>(&mut self, obj: &'a Map<String, Value>, base: &str, key: &str) -> Option<&'a Map<String, Value>> {
        match self.field(obj, base, key)? {
            Value::Object(m) => Some(m),
            _ => {
                self.fail(join(base, key), "expected an object");
                None
            }
        }
    }

    fn array<'a>(&mut self, obj: &'a Map<String, Value>, base: &str, key: &str) -> Option<&'a Vec<Value>> {
        match self.field(obj, base, key)? {
            Value::Array(a) => Some(a),
            _ => {
                self.fail(join(base, key), "expected an array");
                None
            }
        }
    }

    fn point(&mut self, obj: &Map<String, Value>, base: &str, key: &str) {
        match self.field(obj, base, key) {
            None | Some(Value::Null) => {}
            Some(Value::Object(p)) => {
                let path = join(base, key);
                self.int(p, &path, "x");
                self.int(p, &path, "y");
            }
            Some(_) => self.fail(join(base, key), "expected a point or null"),
        }
    }

    fn reference(&mut self, obj: &Map<String, Value>, base: &str, key: &str, attachments: Option<&Map<String, Value>>) {
        if let (Some(name), Some(att)) = (self.opt_string(obj, base, key), attachments) {
            if !att.contains_key(name) {
                self.fail(join(base, key), format!("references {name:?}, which is not in attachments"));
            }
        }
    }
}

fn join(base: &str, key: &str) -> String {
    if base.is_empty() {
        key.to_string()
    } else {
        format!("{base}.{key}")
    }
}

const KINDS: [&str; 5] = ["Tap", "LongPress", "Swipe", "MultiTouch", "KeyPress"];

/// Structural and semantic checks over a raw document value.
pub fn validate_value(value: &Value) -> Vec<Violation> {
    let mut c = Checker { out: Vec::new() };
    let Value::Object(doc) = value else {
        c.fail("", "document must be a JSON object");
        return c.out;
    };

    if let Some(v) = c.field(doc, "", "schema_version") {
        match v.as_u64() {
            Some(n) if n > u64::from(SCHEMA_VERSION) => c.fail("schema_version", format!("version {n} is newer than supported version {SCHEMA_VERSION}")),
            Some(n) if n < 1 => c.fail("schema_version", format!("unsupported version {n}")),
            Some(_) => {}
            None => c.fail("schema_version", "expected a positive integer"),
        }
    }
    for key in ["id", "title", "expected_behavior", "actual_behavior", "app_package", "hit_policy"] {
        c.string(doc, "", key);
    }
    if let Some(s) = c.string(doc, "", "created_at") {
        if DateTime::parse_from_rfc3339(s).is_err() {
            c.fail("created_at", "expected an RFC 3339 timestamp");
        }
    }

    if let Some(dev) = c.object(doc, "", "device_info") {
        c.string(dev, "device_info", "model");
        c.string(dev, "device_info", "os_version");
        c.uint(dev, "device_info", "screen_width");
        c.uint(dev, "device_info", "screen_height");
        if let Some(r) = c.object(dev, "device_info", "axis_ranges") {
            let base = "device_info.axis_ranges";
            let x = (c.int(r, base, "x_min"), c.int(r, base, "x_max"));
            let y = (c.int(r, base, "y_min"), c.int(r, base, "y_max"));
            c.uint(r, base, "screen_width");
            c.uint(r, base, "screen_height");
            if matches!(x, (Some(a), Some(b)) if b <= a) || matches!(y, (Some(a), Some(b)) if b <= a) {
                c.fail(base, "axis maximum must exceed minimum");
            }
        }
    }

    let attachments = c.object(doc, "", "attachments");
    if let Some(att) = attachments {
        for (name, ct) in att {
            if !ct.is_string() {
                c.fail(format!("attachments.{name}"), "content type must be a string");
            }
        }
    }
    c.reference(doc, "", "raw_events_ref", attachments);

    if let Some(steps) = c.array(doc, "", "steps") {
        for (i, step) in steps.iter().enumerate() {
            let base = format!("steps[{i}]");
            let Value::Object(s) = step else {
                c.fail(base, "expected an object");
                continue;
            };
            if let Some(index) = c.uint(s, &base, "index") {
                if index != i as u64 {
                    c.fail(format!("{base}.index"), format!("step indices must be contiguous from 0: expected {i}, found {index}"));
                }
            }
            if let Some(kind) = c.string(s, &base, "kind") {
                if !KINDS.contains(&kind) {
                    c.fail(format!("{base}.kind"), format!("unknown kind {kind:?}"));
                }
            }
            c.point(s, &base, "start_point");
            c.point(s, &base, "end_point");
            let start = c.uint(s, &base, "start_time");
            let end = c.uint(s, &base, "end_time");
            let duration = c.uint(s, &base, "duration_ms");
            if let (Some(start), Some(end)) = (start, end) {
                if end < start {
                    c.fail(format!("{base}.end_time"), "end_time precedes start_time");
                } else if let Some(d) = duration {
                    if d != micros_to_ms(end - start) {
                        c.fail(format!("{base}.duration_ms"), format!("expected {} from the step's times, found {d}", micros_to_ms(end - start)));
                    }
                }
            }
            c.reference(s, &base, "screenshot_ref", attachments);
            c.reference(s, &base, "ui_dump_ref", attachments);
            c.string(s, &base, "description");
            for key in ["target", "clickable_ancestor"] {
                match c.field(s, &base, key) {
                    None | Some(Value::Null) => {}
                    Some(Value::Object(t)) => {
                        let tb = format!("{base}.{key}");
                        for f in ["class_name", "resource_id", "text"] {
                            c.string(t, &tb, f);
                        }
                        c.bool(t, &tb, "clickable");
                        c.object(t, &tb, "bounds");
                    }
                    Some(_) => c.fail(format!("{base}.{key}"), "expected a component or null"),
                }
            }
            if let Some(src) = c.object(s, &base, "raw_tracks") {
                match src.get("type").and_then(Value::as_str) {
                    Some("touch") | Some("key") => {}
                    _ => c.fail(format!("{base}.raw_tracks.type"), "expected \"touch\" or \"key\""),
                }
            }
        }
    }

    if let Some(traces) = c.array(doc, "", "sensor_traces") {
        for (i, trace) in traces.iter().enumerate() {
            let base = format!("sensor_traces[{i}]");
            let Value::Object(t) = trace else {
                c.fail(base, "expected an object");
                continue;
            };
            let kind: Option<SensorKind> = c.string(t, &base, "kind").map(|k| k.parse().expect("infallible"));
            c.string(t, &base, "unit");
            let floor = c.uint(t, &base, "min_interval_ms");
            let Some(samples) = c.array(t, &base, "samples") else { continue };
            let mut prev: Option<u64> = None;
            for (j, sample) in samples.iter().enumerate() {
                let sb = format!("{base}.samples[{j}]");
                let Value::Object(sm) = sample else {
                    c.fail(sb, "expected an object");
                    continue;
                };
                let ts = c.uint(sm, &sb, "timestamp");
                if let Some(vals) = c.array(sm, &sb, "values") {
                    if vals.iter().any(|v| !v.is_number()) {
                        c.fail(format!("{sb}.values"), "values must be numbers");
                    }
                    if let Some(k) = &kind {
                        if !k.arity_ok(vals.len()) {
                            c.fail(format!("{sb}.values"), format!("{k} samples cannot have {} values", vals.len()));
                        }
                    }
                }
                if let (Some(p), Some(t)) = (prev, ts) {
                    if t <= p {
                        c.fail(format!("{sb}.timestamp"), "sample timestamps must strictly increase");
                    } else if let Some(f) = floor {
                        if t - p < f * 1000 {
                            c.fail(format!("{sb}.timestamp"), format!("closer than {f}ms to the previous sample"));
                        }
                    }
                }
                prev = ts.or(prev);
            }
        }
    }
    c.out
}
