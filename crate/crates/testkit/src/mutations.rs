//! Single-invariant breakages of a valid report document, each paired with
//! the path its violation must name.

use odbr_core::report::{to_json, BugReport};
use serde_json::{json, Value};

use crate::{reports, rng};

pub struct Mutation {
    pub name: &'static str,
    pub path: String,
    pub apply: Box<dyn Fn(&mut Value)>,
}

fn m(name: &'static str, path: impl Into<String>, apply: impl Fn(&mut Value) + 'static) -> Mutation {
    Mutation { name, path: path.into(), apply: Box::new(apply) }
}

/// A valid report with at least two referenced steps, raw events and a
/// sensor trace holding two samples or more.
pub fn base_report() -> BugReport {
    (0u64..)
        .map(|seed| reports::random_report(&mut rng(seed)))
        .find(|r| {
            r.steps.len() >= 2
                && r.steps[0].screenshot_ref.is_some()
                && r.steps[0].ui_dump_ref.is_some()
                && r.steps[0].end_time > r.steps[0].start_time
                && r.raw_events_ref.is_some()
                && r.sensor_traces.0.first().is_some_and(|t| t.samples.len() >= 2)
        })
        .expect("some seed satisfies the shape")
}

pub fn base_document() -> Value {
    serde_json::from_str(&to_json(&base_report())).expect("canonical json")
}

fn detach(doc: &mut Value, pointer: &str) {
    let name = doc.pointer(pointer).and_then(Value::as_str).expect("reference").to_string();
    doc["attachments"].as_object_mut().unwrap().remove(&name);
}

pub fn all() -> Vec<Mutation> {
    let mut out = vec![
        m("step index gap", "steps[1].index", |d| d["steps"][1]["index"] = json!(2)),
        m("screenshot ref not attached", "steps[0].screenshot_ref", |d| detach(d, "/steps/0/screenshot_ref")),
        m("ui dump ref not attached", "steps[0].ui_dump_ref", |d| detach(d, "/steps/0/ui_dump_ref")),
        m("raw events ref not attached", "raw_events_ref", |d| detach(d, "/raw_events_ref")),
        m("schema version from the future", "schema_version", |d| d["schema_version"] = json!(2)),
        m("schema version zero", "schema_version", |d| d["schema_version"] = json!(0)),
        m("duration disagrees with times", "steps[0].duration_ms", |d| {
            let v = d["steps"][0]["duration_ms"].as_u64().unwrap();
            d["steps"][0]["duration_ms"] = json!(v + 1);
        }),
        m("end before start", "steps[0].end_time", |d| {
            let s = d["steps"][0]["start_time"].as_u64().unwrap();
            d["steps"][0]["start_time"] = d["steps"][0]["end_time"].clone();
            d["steps"][0]["end_time"] = json!(s);
        }),
        m("unknown step kind", "steps[0].kind", |d| d["steps"][0]["kind"] = json!("Pinch")),
        m("created_at not a timestamp", "created_at", |d| d["created_at"] = json!("yesterday")),
        m("axis range inverted", "device_info.axis_ranges", |d| d["device_info"]["axis_ranges"]["x_max"] = d["device_info"]["axis_ranges"]["x_min"].clone()),
        m("sensor timestamps repeat", "sensor_traces[0].samples[1].timestamp", |d| {
            d["sensor_traces"][0]["samples"][1]["timestamp"] = d["sensor_traces"][0]["samples"][0]["timestamp"].clone()
        }),
    ];
    for key in [
        "id",
        "schema_version",
        "title",
        "expected_behavior",
        "actual_behavior",
        "app_package",
        "device_info",
        "created_at",
        "steps",
        "sensor_traces",
        "raw_events_ref",
        "hit_policy",
        "attachments",
    ] {
        out.push(m("required field removed", key, move |d| {
            d.as_object_mut().unwrap().remove(key);
        }));
    }
    out
}
