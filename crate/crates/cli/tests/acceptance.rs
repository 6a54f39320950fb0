//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode, Stdio};
use std::sync::Barrier;
use std::time::{Duration, Instant};

use serde_json::Value;

use odbr_capture::{offline_capture, start_session, DeviceBridge, FixtureBridge, Scenario, SessionConfig, SensorFloors, StopOutcome};
use odbr_core::event::{parse_getevent_log, track_multitouch, InputEvent};
use odbr_core::gesture::{GestureThresholds, InteractionKind};
use odbr_core::pipeline::analyze_events;
use odbr_core::replay::{emit_sendevent_script, parse_sendevent_script, ScriptFlavor, TimingMode};
use odbr_core::report::{build_report, from_json, to_json, Annotations, AssembledReport, BuildOptions, SCHEMA_V1};
use odbr_core::ui::{hit_test_with_ancestor, parse_ui_dump, AxisRanges, ScreenPoint};
use odbr_service::{spawn, CrashPoint, ServerConfig};
use odbr_testkit::{all_scenarios, fixtures_dir, gen, hit_oracle, mutations, rng, scenario, slot_oracle};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("multi-touch tracker vs slot oracle", c1_tracker),
        ("getevent golden transcript", c2_golden),
        ("replay script round trip", c3_replay),
        ("hit-test oracle equivalence", c4_hit_test),
        ("gesture classification fixtures", c5_gestures),
        ("end-to-end offline pipeline", c6_pipeline),
        ("capture-pair cardinality", c7_cardinality),
        ("service contract", c8_service),
        ("schema mutation suite", c9_mutations),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = started.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail} [{secs:.2}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {detail} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn c1_tracker() -> Outcome {
    let started = Instant::now();
    let mut tracks = 0;
    for seed in 0..1000u64 {
        let events = gen::protocol_b(&mut rng(seed), 4, 200);
        let got = track_multitouch(&events).map_err(|e| format!("seed {seed}: {e}"))?;
        let want = slot_oracle::simulate(&events).ok_or(format!("seed {seed}: oracle saw protocol A"))?;
        ensure!(got.tracks == want.tracks, "seed {seed}: tracks differ");
        ensure!(got.unconsumed == want.unconsumed, "seed {seed}: unconsumed events differ");
        tracks += got.tracks.len();
    }
    let took = started.elapsed();
    ensure!(took < Duration::from_secs(10), "took {took:?}");
    Ok(format!("1000 sequences, {tracks} tracks identical"))
}

/// Independent reading of one transcript line: `Some(Some(..))` for an
/// event, `Some(None)` for a known metadata line, `None` otherwise.
fn oracle_line(line: &str) -> Option<Option<(u32, u16, u16, i32)>> {
    let t = line.trim_end();
    if t.trim().is_empty() || t.starts_with("add device") || t.starts_with("remove device") || t.starts_with("could not get") || t.starts_with("  name:") {
        return Some(None);
    }
    let body = match t.strip_prefix('[') {
        Some(rest) => rest.split_once(']')?.1.trim_start(),
        None => t,
    };
    let (dev, fields) = body.split_once(": ")?;
    let index: u32 = dev.strip_prefix("/dev/input/event")?.parse().ok()?;
    let parts: Vec<&str> = fields.split(' ').collect();
    if parts.len() != 3 || parts[0].len() != 4 || parts[1].len() != 4 || parts[2].len() != 8 {
        return None;
    }
    let ty = u16::from_str_radix(parts[0], 16).ok()?;
    let code = u16::from_str_radix(parts[1], 16).ok()?;
    let value = u32::from_str_radix(parts[2], 16).ok()? as i32;
    Some(Some((index, ty, code, value)))
}

fn c2_golden() -> Outcome {
    let path = fixtures_dir().join("golden/emulator-getevent-t.txt");
    let text = fs::read_to_string(&path).map_err(|e| e.to_string())?;
    let log = parse_getevent_log(&text).map_err(|e| format!("parse error: {e}"))?;
    let mut want = Vec::new();
    let mut metadata = 0;
    for (i, line) in text.lines().enumerate() {
        match oracle_line(line) {
            Some(Some(ev)) => want.push(ev),
            Some(None) => metadata += 1,
            None => return Err(format!("oracle cannot explain line {}: {line:?}", i + 1)),
        }
    }
    let got: Vec<_> = log.events.iter().map(|e| (e.device_index, e.ev_type, e.ev_code, e.ev_value)).collect();
    ensure!(got.len() == want.len(), "{} events parsed, {} event lines", got.len(), want.len());
    ensure!(got == want, "event fields differ from the transcript");
    ensure!(log.skipped.len() == metadata, "{} skipped lines, {metadata} metadata lines", log.skipped.len());
    ensure!(log.events.windows(2).all(|w| w[0].timestamp <= w[1].timestamp), "timestamps go backwards");
    Ok(format!("{} events, {} metadata lines, 0 errors", got.len(), metadata))
}

fn fixture_logs() -> Vec<PathBuf> {
    let mut logs: Vec<PathBuf> = all_scenarios().iter().map(|d| d.join("events.getevent")).collect();
    logs.push(fixtures_dir().join("faulty/capture-gap/events.getevent"));
    logs.push(fixtures_dir().join("golden/emulator-getevent-t.txt"));
    logs
}

fn round_trip(events: &[InputEvent]) -> Result<usize, String> {
    let devices = odbr_core::replay::default_device_map(events);
    let script = emit_sendevent_script(events, &devices, TimingMode::Preserve, None).map_err(|e| e.to_string())?;
    let parsed = parse_sendevent_script(&script).map_err(|e| e.to_string())?;
    let key = |e: &InputEvent| (e.device_index, e.ev_type, e.ev_code, e.ev_value);
    ensure!(parsed.events.iter().map(key).eq(events.iter().map(key)), "event sequence changed");
    let recorded = match (events.first(), events.last()) {
        (Some(a), Some(b)) => b.timestamp - a.timestamp,
        _ => 0,
    };
    let slept = parsed.total_sleep_ms() * 1000;
    let n = parsed.sleeps.len() as u64;
    ensure!(slept.abs_diff(recorded) <= n * 1000, "slept {slept}us over {n} sleeps for {recorded}us recorded");
    Ok(events.len())
}

fn c3_replay() -> Outcome {
    let mut events = 0;
    let logs = fixture_logs();
    for path in &logs {
        let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
        let log = parse_getevent_log(&text).map_err(|e| e.to_string())?;
        events += round_trip(&log.events).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    for seed in 0..500u64 {
        events += round_trip(&gen::event_log(&mut rng(seed), 400)).map_err(|e| format!("random log {seed}: {e}"))?;
    }
    Ok(format!("{} fixture logs + 500 random logs, {events} events", logs.len()))
}

fn c4_hit_test() -> Outcome {
    let started = Instant::now();
    let mut hits = 0;
    for seed in 0..1000u64 {
        let mut r = rng(seed);
        let xml = gen::ui_dump_xml(&mut r, 1080, 1920, 60);
        let tree = parse_ui_dump(&xml).map_err(|e| format!("tree {seed}: {e}"))?;
        let edges: Vec<(i32, i32)> = tree.iter().flat_map(|n| [(n.bounds.left, n.bounds.top), (n.bounds.right, n.bounds.bottom)]).collect();
        for _ in 0..100 {
            let (x, y) = gen::point(&mut r, 1080, 1920, &edges);
            let got = hit_test_with_ancestor(&tree, ScreenPoint::new(x, y)).map(|h| (h.node.document_order, h.clickable_ancestor.map(|a| a.document_order)));
            let want = hit_oracle::brute_hit(&tree, x, y).map(|(n, a)| (n.document_order, a.map(|a| a.document_order)));
            ensure!(got == want, "tree {seed} at ({x},{y}): {got:?} vs {want:?}");
            hits += usize::from(got.is_some());
        }
    }
    let took = started.elapsed();
    ensure!(took < Duration::from_secs(30), "took {took:?}");
    Ok(format!("100000 queries, {hits} hits"))
}

const IDENTITY: AxisRanges = AxisRanges { x_min: 0, x_max: 1079, y_min: 0, y_max: 1919, screen_width: 1080, screen_height: 1920 };

/// One protocol-B contact on device 1: (x, y, ms) samples, lifted at
/// `up_ms`.
fn contact(points: &[(i32, i32, u64)], up_ms: u64) -> Vec<InputEvent> {
    let ev = |ms: u64, ty, code, value| InputEvent::new(ms * 1000, 1, ty, code, value);
    let mut out = vec![ev(points[0].2, 3, 0x2f, 0), ev(points[0].2, 3, 0x39, 7)];
    for &(x, y, ms) in points {
        out.extend([ev(ms, 3, 0x35, x), ev(ms, 3, 0x36, y), ev(ms, 0, 0, 0)]);
    }
    out.extend([ev(up_ms, 3, 0x39, -1), ev(up_ms, 0, 0, 0)]);
    out
}

fn kind_of(events: &[InputEvent], th: &GestureThresholds) -> Result<InteractionKind, String> {
    let end = events.last().map_or(0, |e| e.timestamp);
    let a = analyze_events(events, &IDENTITY, th, end).map_err(|e| e.to_string())?;
    ensure!(a.steps.len() == 1, "{} steps", a.steps.len());
    Ok(a.steps[0].kind)
}

fn c5_gestures() -> Outcome {
    use InteractionKind::*;
    // kinds and endpoints as scripted in the fixture generator
    let canonical: [(&str, InteractionKind, Option<((i32, i32), (i32, i32))>); 5] = [
        ("tap", Tap, Some(((540, 960), (540, 960)))),
        ("long-press", LongPress, Some(((300, 1200), (303, 1202)))), // held with a small jitter
        ("swipe", Swipe, Some(((100, 200), (400, 200)))),
        ("multi-touch", MultiTouch, Some(((400, 800), (300, 700)))),
        ("key-press", KeyPress, None),
    ];
    let th = GestureThresholds::default();
    for (name, kind, ends) in canonical {
        let raw = offline_capture(&Scenario::load(&scenario(name)).map_err(|e| e.to_string())?, &SensorFloors::new()).map_err(|e| e.to_string())?;
        let a = analyze_events(&raw.events, &raw.device_info.axis_ranges, &th, raw.session_end()).map_err(|e| format!("{name}: {e}"))?;
        ensure!(a.steps.len() == 1, "{name}: {} steps", a.steps.len());
        let s = &a.steps[0];
        ensure!(s.kind == kind, "{name}: {:?}", s.kind);
        let got = s.start_point.zip(s.end_point).map(|(p, q)| ((p.x, p.y), (q.x, q.y)));
        ensure!(got == ends, "{name}: endpoints {got:?}, want {ends:?}");
    }

    let lp = th.long_press_ms;
    let slop = th.tap_slop_px as i32;
    let boundary: Vec<(&str, Vec<InputEvent>, GestureThresholds, InteractionKind)> = vec![
        ("duration = long_press_ms", contact(&[(10, 10, 0)], lp), th, LongPress),
        ("duration = long_press_ms - 1", contact(&[(10, 10, 0)], lp - 1), th, Tap),
        ("displacement = tap_slop_px", contact(&[(10, 10, 0), (10 + slop, 10, 40)], 80), th, Tap),
        ("displacement = tap_slop_px + 1", contact(&[(10, 10, 0), (11 + slop, 10, 40)], 80), th, Swipe),
        ("slop and long press together", contact(&[(10, 10, 0), (10, 10 + slop, 40)], lp), th, LongPress),
        ("diagonal displacement = slop", contact(&[(0, 0, 0), (18, 24, 40)], 80), GestureThresholds { tap_slop_px: 30, ..th }, Tap),
        ("diagonal displacement > slop", contact(&[(0, 0, 0), (18, 25, 40)], 80), GestureThresholds { tap_slop_px: 30, ..th }, Swipe),
        ("custom long press edge", contact(&[(5, 5, 0)], 250), GestureThresholds { long_press_ms: 250, ..th }, LongPress),
    ];
    for (name, events, t, want) in &boundary {
        let got = kind_of(events, t).map_err(|e| format!("{name}: {e}"))?;
        ensure!(got == *want, "{name}: {got:?}, want {want:?}");
    }
    Ok(format!("5 canonical scenarios, {} boundary cases", boundary.len()))
}

fn odbr_bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_odbr"));
    c.env_remove("ODBR_BRIDGE").stdin(Stdio::null());
    c
}

fn build_three_actions(out: &Path) -> Result<Duration, String> {
    let started = Instant::now();
    let o = odbr_bin()
        .args(["report", "build"])
        .arg(scenario("three-actions"))
        .args(["--title", "Notes list empties after login", "--expected", "Saved notes are listed", "--actual", "The list is empty", "-o"])
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    let took = started.elapsed();
    ensure!(o.status.success(), "odbr report build failed: {}", String::from_utf8_lossy(&o.stderr));
    Ok(took)
}

fn c6_pipeline() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let took = build_three_actions(&a)?;
    ensure!(took < Duration::from_secs(5), "build took {took:?}");
    build_three_actions(&b)?;

    let doc: Value = serde_json::from_slice(&fs::read(a.join("report.json")).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let schema: Value = serde_json::from_str(SCHEMA_V1).map_err(|e| e.to_string())?;
    let validator = jsonschema::validator_for(&schema).map_err(|e| e.to_string())?;
    if let Some(err) = validator.iter_errors(&doc).next() {
        return Err(format!("schema: {err} at {}", err.instance_path));
    }

    let steps = doc["steps"].as_array().ok_or("steps missing")?;
    ensure!(steps.len() == 3, "{} steps", steps.len());
    let attachments = doc["attachments"].as_object().ok_or("attachments missing")?;
    for s in steps {
        for r in ["screenshot_ref", "ui_dump_ref"] {
            let name = s[r].as_str().ok_or(format!("step {} lacks {r}", s["index"]))?;
            ensure!(attachments.contains_key(name) && a.join(name).is_file(), "{name} not written");
        }
        ensure!(s["target"]["class_name"].is_string(), "step {} lacks a component summary", s["index"]);
    }
    let class = |i: usize| steps[i]["target"]["class_name"].as_str().unwrap_or_default().to_string();
    let desc = |i: usize| steps[i]["description"].as_str().unwrap_or_default().to_string();
    // tap at (540,460), swipe (540,1500) to (540,500), 900ms hold at (540,740)
    ensure!(desc(0).starts_with(&format!("Tap on {} '", class(0))) && desc(0).ends_with("' at (540,460)"), "step 0: {:?}", desc(0));
    ensure!(desc(1) == "Swipe from (540,1500) to (540,500)", "step 1: {:?}", desc(1));
    ensure!(desc(2).starts_with(&format!("Long-press on {} '", class(2))) && desc(2).ends_with("' at (540,740) for 900ms"), "step 2: {:?}", desc(2));

    let html = fs::read_to_string(a.join("report.html")).map_err(|e| e.to_string())?;
    let sections = html.matches("<section class=\"step\"").count();
    ensure!(sections == 3, "{sections} step sections in HTML");

    for flavor in ScriptFlavor::ALL {
        let name = flavor.file_name();
        let (x, y) = (fs::read(a.join(&name)).map_err(|e| e.to_string())?, fs::read(b.join(&name)).map_err(|e| e.to_string())?);
        ensure!(!x.is_empty() && x == y, "{name} differs between runs");
    }
    Ok(format!("schema-valid, 3 steps, 3 sections, scripts deterministic, build {:.0}ms", took.as_secs_f64() * 1000.0))
}

/// Event lines in a scenario log, counted without the production parser.
fn event_line_count(path: &Path) -> Result<usize, String> {
    let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
    Ok(text.lines().filter(|l| matches!(oracle_line(l), Some(Some(_)))).count())
}

fn c7_cardinality() -> Outcome {
    let mut total_actions = 0;
    let scenarios = all_scenarios();
    for dir in &scenarios {
        let name = dir.file_name().unwrap().to_string_lossy().into_owned();
        let scn = Scenario::load(dir).map_err(|e| format!("{name}: {e}"))?;
        let app = scn.app_package().to_string();
        let emitted = event_line_count(&dir.join("events.getevent"))?;
        let capture_dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let bridge: std::sync::Arc<dyn DeviceBridge> = std::sync::Arc::new(FixtureBridge::new(scn, 0.0));
        let handle = start_session(bridge, &SessionConfig::new(app, capture_dir.path())).map_err(|e| format!("{name}: {e}"))?;
        ensure!(handle.wait_for_input_end(Duration::from_secs(10)), "{name}: input feed did not end");
        let raw = match handle.stop(true) {
            StopOutcome::Finished(raw) => raw,
            StopOutcome::Resumed(_) => return Err(format!("{name}: session resumed")),
        };
        let actions = analyze_events(&raw.events, &raw.device_info.axis_ranges, &GestureThresholds::default(), raw.session_end())
            .map_err(|e| format!("{name}: {e}"))?
            .steps
            .len();
        let (shots, dumps) = (raw.screenshots().count(), raw.ui_dumps().count());
        ensure!(shots == actions && dumps == actions, "{name}: {shots} screenshots, {dumps} dumps, {actions} actions");
        ensure!(raw.events.len() == emitted, "{name}: {} events captured, {emitted} emitted", raw.events.len());
        total_actions += actions;
    }
    Ok(format!("{} scenarios, {total_actions} capture pairs", scenarios.len()))
}

struct Reply {
    status: u16,
    etag: Option<String>,
    body: Vec<u8>,
}

fn agent() -> ureq::Agent {
    ureq::Agent::config_builder().http_status_as_error(false).build().into()
}

fn send(agent: &ureq::Agent, method: &str, url: &str, if_match: Option<&str>, body: Option<(&str, &[u8])>) -> Result<Reply, String> {
    let mut resp = match (method, body) {
        ("GET", _) => agent.get(url).call(),
        ("POST", Some((ct, b))) => agent.post(url).header("Content-Type", ct).send(b),
        ("PUT", Some((ct, b))) => {
            let mut r = agent.put(url).header("Content-Type", ct);
            if let Some(m) = if_match {
                r = r.header("If-Match", m);
            }
            r.send(b)
        }
        _ => return Err(format!("unsupported request {method}")),
    }
    .map_err(|e| e.to_string())?;
    let etag = resp.headers().get("etag").and_then(|v| v.to_str().ok()).map(str::to_string);
    let body = resp.body_mut().read_to_vec().map_err(|e| e.to_string())?;
    Ok(Reply { status: resp.status().as_u16(), etag, body })
}

fn fixture_report(name: &str) -> Result<AssembledReport, String> {
    let scn = Scenario::load(&scenario(name)).map_err(|e| e.to_string())?;
    let raw = offline_capture(&scn, &SensorFloors::new()).map_err(|e| e.to_string())?;
    let ann = Annotations { title: "Login loops".into(), expected_behavior: "Home screen".into(), actual_behavior: "Login again".into() };
    build_report(&raw, &ann, &BuildOptions::default()).map_err(|e| e.to_string())
}

fn c8_service() -> Outcome {
    let store_dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = ServerConfig::new(store_dir.path());
    cfg.port = 0;
    let server = spawn(cfg).map_err(|e| e.to_string())?;
    let base = server.url();
    let ag = agent();

    let assembled = fixture_report("three-actions")?;
    let text = to_json(&assembled.report);
    let r = send(&ag, "POST", &format!("{base}/reports"), None, Some(("application/json", text.as_bytes())))?;
    ensure!(r.status == 201, "POST returned {}", r.status);
    let id = assembled.report.id.clone();
    for a in &assembled.attachments {
        let r = send(&ag, "POST", &format!("{base}/reports/{id}/attachments/{}", a.name), None, Some((&a.content_type, &a.bytes)))?;
        ensure!(r.status == 201, "attachment {} returned {}", a.name, r.status);
    }

    let got = send(&ag, "GET", &format!("{base}/reports/{id}"), None, None)?;
    ensure!(got.status == 200, "GET returned {}", got.status);
    let posted: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let fetched: Value = serde_json::from_slice(&got.body).map_err(|e| e.to_string())?;
    ensure!(posted == fetched, "GET differs from POST");

    // 16 writers race from revision 1
    let url = format!("{base}/reports/{id}");
    let barrier = Barrier::new(16);
    let statuses: Vec<u16> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..16)
            .map(|i| {
                let (barrier, url, ag) = (&barrier, &url, ag.clone());
                let mut report = assembled.report.clone();
                report.title = format!("writer {i}");
                let body = to_json(&report);
                s.spawn(move || {
                    barrier.wait();
                    send(&ag, "PUT", url, Some("\"1\""), Some(("application/json", body.as_bytes()))).map_or(0, |r| r.status)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or(0)).collect()
    });
    let ok = statuses.iter().filter(|&&s| s == 200).count();
    let conflicts = statuses.iter().filter(|&&s| s == 409).count();
    ensure!(ok == 1 && conflicts == 15, "{ok} successes, {conflicts} conflicts: {statuses:?}");

    for point in [CrashPoint::RevisionFile, CrashPoint::Commit] {
        let before = send(&ag, "GET", &url, None, None)?;
        let rev = before.etag.clone().ok_or("no ETag")?;
        let mut report = from_json(std::str::from_utf8(&before.body).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        report.title = "never stored".into();
        server.store.crash_next_put(point);
        let r = send(&ag, "PUT", &url, Some(&rev), Some(("application/json", to_json(&report).as_bytes())))?;
        ensure!(r.status == 500, "crashed PUT returned {}", r.status);
        let after = send(&ag, "GET", &url, None, None)?;
        ensure!(after.body == before.body && after.etag == before.etag, "prior revision not readable after crash at {point:?}");
    }

    for flavor in ScriptFlavor::ALL {
        let u = format!("{base}/reports/{id}/replay/{}", flavor.as_str());
        let (x, y) = (send(&ag, "GET", &u, None, None)?, send(&ag, "GET", &u, None, None)?);
        ensure!(x.status == 200 && !x.body.is_empty() && x.body == y.body, "{} replay not byte-identical", flavor.as_str());
    }
    Ok("POST/GET equal, 1 of 16 PUTs won, crash leaves prior revision, replays identical".into())
}

fn c9_mutations() -> Outcome {
    let base = mutations::base_document();
    from_json(&base.to_string()).map_err(|e| format!("base document invalid: {e}"))?;
    let all = mutations::all();
    for m in &all {
        let mut doc = base.clone();
        (m.apply)(&mut doc);
        match from_json(&doc.to_string()) {
            Ok(_) => return Err(format!("{} ({}) accepted", m.name, m.path)),
            Err(e) => {
                ensure!(e.names(&m.path), "{}: no violation at {}: {e}", m.name, m.path);
                ensure!(e.violations.iter().all(|v| v.path == m.path), "{}: unrelated violations: {e}", m.name);
            }
        }
    }
    Ok(format!("{} mutations each rejected at their own path", all.len()))
}
