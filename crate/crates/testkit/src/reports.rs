//! Random valid reports and a small hand-made one.

use std::collections::BTreeMap;

use chrono::{TimeZone, Utc};
use odbr_core::capture::DeviceInfo;
use odbr_core::event::{KeyPress, TouchPoint, TouchTrack};
use odbr_core::gesture::{micros_to_ms, InteractionKind, InteractionSource, UserInteraction};
use odbr_core::report::{compute_id, BugReport, SCHEMA_VERSION};
use odbr_core::sensor::{SensorKind, SensorSample, SensorTrace, SensorTraces};
use odbr_core::ui::{AxisRanges, ComponentSummary, Rect, ScreenPoint, HIT_POLICY};
use rand::seq::SliceRandom;
use rand::Rng;

fn text(rng: &mut impl Rng) -> String {
    let words = ["ok", "Login", "crash", "tap", "é", "<b>", "\"q\"", "a&b", "line\nbreak", ""];
    (0..rng.gen_range(0..4)).map(|_| *words.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

fn component(rng: &mut impl Rng) -> ComponentSummary {
    let l = rng.gen_range(0..500);
    let t = rng.gen_range(0..900);
    ComponentSummary {
        class_name: ["android.widget.Button", "android.widget.EditText"].choose(rng).unwrap().to_string(),
        resource_id: text(rng),
        text: text(rng),
        clickable: rng.gen(),
        bounds: Rect::new(l, t, l + rng.gen_range(0..500), t + rng.gen_range(0..900)),
    }
}

fn track(rng: &mut impl Rng, start: u64) -> TouchTrack {
    let id = rng.gen_range(0..100);
    let mut t = start;
    let points: Vec<TouchPoint> = (0..rng.gen_range(1..5))
        .map(|_| {
            t += rng.gen_range(0..40_000);
            TouchPoint {
                timestamp: t,
                x: rng.gen_range(0..1080),
                y: rng.gen_range(0..1920),
                pressure: rng.gen_bool(0.5).then(|| rng.gen_range(0..255)),
                slot: 0,
                tracking_id: id,
            }
        })
        .collect();
    TouchTrack {
        tracking_id: id,
        slot: 0,
        down_time: points[0].timestamp,
        up_time: t + rng.gen_range(0..1000),
        points,
        truncated: rng.gen(),
        synthetic: rng.gen(),
    }
}

/// A report that passes validation, with attachment names registered for
/// every reference.
pub fn random_report(rng: &mut impl Rng) -> BugReport {
    let mut attachments = BTreeMap::new();
    let mut clock = 0u64;
    let steps: Vec<UserInteraction> = (0..rng.gen_range(0..6))
        .map(|i| {
            clock += rng.gen_range(0..3_000_000);
            let start = clock;
            let end = start + rng.gen_range(0..2_000_000);
            clock = end;
            let kind = *[InteractionKind::Tap, InteractionKind::LongPress, InteractionKind::Swipe, InteractionKind::MultiTouch, InteractionKind::KeyPress]
                .choose(rng)
                .unwrap();
            let raw_tracks = if kind == InteractionKind::KeyPress {
                InteractionSource::Key {
                    press: KeyPress {
                        key_code: rng.gen_range(0..600),
                        device_index: rng.gen_range(0..4),
                        down_time: start,
                        up_time: end,
                        key_name: rng.gen_bool(0.5).then(|| "KEY_POWER".to_string()),
                        truncated: rng.gen(),
                    },
                }
            } else {
                InteractionSource::Touch { tracks: (0..rng.gen_range(1..3)).map(|_| track(rng, start)).collect() }
            };
            let point = |rng: &mut dyn rand::RngCore| (kind != InteractionKind::KeyPress).then(|| ScreenPoint::new(rng.gen_range(0..1080), rng.gen_range(0..1920)));
            let screenshot_ref = rng.gen_bool(0.8).then(|| format!("screenshot-{i:03}.png"));
            let ui_dump_ref = rng.gen_bool(0.8).then(|| format!("ui-dump-{i:03}.xml"));
            if let Some(n) = &screenshot_ref {
                attachments.insert(n.clone(), "image/png".to_string());
            }
            if let Some(n) = &ui_dump_ref {
                attachments.insert(n.clone(), "application/xml".to_string());
            }
            UserInteraction {
                index: i,
                kind,
                start_point: point(rng),
                end_point: point(rng),
                start_time: start,
                end_time: end,
                duration_ms: micros_to_ms(end - start),
                target: rng.gen_bool(0.7).then(|| component(rng)),
                clickable_ancestor: rng.gen_bool(0.2).then(|| component(rng)),
                screenshot_ref,
                ui_dump_ref,
                description: text(rng),
                raw_tracks,
            }
        })
        .collect();

    let mut traces = SensorTraces::default();
    for kind in [SensorKind::Accelerometer, SensorKind::Gps, SensorKind::Other("light".into())] {
        if rng.gen_bool(0.5) {
            continue;
        }
        let mut trace = SensorTrace::with_default_floor(kind.clone());
        let arity = match kind {
            SensorKind::Accelerometer => 3,
            SensorKind::Gps => rng.gen_range(2..=3),
            SensorKind::Other(_) => 1,
        };
        let mut t = 0;
        for _ in 0..rng.gen_range(0..8) {
            t += rng.gen_range(0..3_000_000);
            let values = (0..arity).map(|_| rng.gen_range(-1000.0..1000.0)).collect();
            let _ = trace.admit_sample(SensorSample { timestamp: t, values });
        }
        traces.0.push(trace);
    }

    let raw_events_ref = rng.gen_bool(0.9).then(|| "raw-events.getevent".to_string());
    if let Some(n) = &raw_events_ref {
        attachments.insert(n.clone(), "text/plain; charset=utf-8".to_string());
    }
    let mut extra = serde_json::Map::new();
    if rng.gen_bool(0.3) {
        extra.insert("x_future_field".into(), serde_json::json!({"nested": [1, 2.5, "three", null]}));
    }
    let mut report = BugReport {
        id: String::new(),
        schema_version: SCHEMA_VERSION,
        title: text(rng),
        expected_behavior: text(rng),
        actual_behavior: text(rng),
        app_package: "com.example.app".into(),
        device_info: DeviceInfo {
            model: "Pixel".into(),
            os_version: "13".into(),
            screen_width: 1080,
            screen_height: 1920,
            axis_ranges: AxisRanges { x_min: 0, x_max: 4095, y_min: 0, y_max: 4095, screen_width: 1080, screen_height: 1920 },
        },
        created_at: Utc.timestamp_opt(rng.gen_range(1_500_000_000..1_900_000_000), rng.gen_range(0..1_000_000) * 1000).unwrap(),
        steps,
        sensor_traces: traces,
        raw_events_ref,
        hit_policy: HIT_POLICY.into(),
        attachments,
        extra,
    };
    report.id = compute_id(&report);
    report
}
