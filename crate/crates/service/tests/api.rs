use std::sync::{Arc, Barrier};
use std::thread;

use odbr_capture::{offline_capture, Scenario, SensorFloors};
use odbr_core::report::{build_report, compute_id, from_json, render_html, to_json, Annotations, AssembledReport, BuildOptions};
use odbr_service::{spawn, CrashPoint, RunningServer, ServerConfig, ServiceAssets};
use odbr_testkit::scenario;
use serde_json::{json, Value};

fn agent() -> ureq::Agent {
    ureq::Agent::config_builder().http_status_as_error(false).build().into()
}

struct Resp {
    status: u16,
    content_type: String,
    etag: Option<String>,
    body: Vec<u8>,
}

impl Resp {
    fn text(&self) -> String {
        String::from_utf8(self.body.clone()).unwrap()
    }
    fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| panic!("{e}: {}", self.text()))
    }
}

fn read(r: Result<ureq::http::Response<ureq::Body>, ureq::Error>) -> Resp {
    let mut r = r.expect("request reaches the server");
    let h = |n: &str| r.headers().get(n).map(|v| v.to_str().unwrap().to_string());
    let content_type = h("content-type").unwrap_or_default();
    let etag = h("etag");
    let status = r.status().as_u16();
    let body = r.body_mut().read_to_vec().unwrap();
    Resp { status, content_type, etag, body }
}

fn get(s: &RunningServer, path: &str) -> Resp {
    read(agent().get(format!("{}{path}", s.url())).call())
}

fn post(s: &RunningServer, path: &str, content_type: &str, body: &[u8]) -> Resp {
    read(agent().post(format!("{}{path}", s.url())).header("Content-Type", content_type).send(body))
}

fn put(s: &RunningServer, path: &str, if_match: Option<&str>, body: &str) -> Resp {
    let mut req = agent().put(format!("{}{path}", s.url())).header("Content-Type", "application/json");
    if let Some(m) = if_match {
        req = req.header("If-Match", m);
    }
    read(req.send(body))
}

fn patch(s: &RunningServer, path: &str, if_match: Option<&str>, body: &str) -> Resp {
    let mut req = agent().patch(format!("{}{path}", s.url())).header("Content-Type", "application/json");
    if let Some(m) = if_match {
        req = req.header("If-Match", m);
    }
    read(req.send(body))
}

fn server() -> (tempfile::TempDir, RunningServer) {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = ServerConfig::new(tmp.path().join("store"));
    cfg.port = 0;
    let s = spawn(cfg).unwrap();
    (tmp, s)
}

fn fixture_report(name: &str) -> AssembledReport {
    let scn = Scenario::load(scenario(name)).unwrap();
    let raw = offline_capture(&scn, &SensorFloors::new()).unwrap();
    let ann = Annotations { title: "Save does nothing".into(), expected_behavior: "note saved".into(), actual_behavior: "nothing happens".into() };
    build_report(&raw, &ann, &BuildOptions::default()).unwrap()
}

/// Submits the document and all its attachments; returns the id.
fn upload(s: &RunningServer, a: &AssembledReport) -> String {
    let r = post(s, "/reports", "application/json", to_json(&a.report).as_bytes());
    assert_eq!(r.status, 201, "{}", r.text());
    let id = r.json()["id"].as_str().unwrap().to_string();
    for att in &a.attachments {
        let r = post(s, &format!("/reports/{id}/attachments/{}", att.name), &att.content_type, &att.bytes);
        assert_eq!(r.status, 201, "{}", r.text());
    }
    id
}

#[test]
fn post_then_get_returns_the_document() {
    let (_t, s) = server();
    let a = fixture_report("three-actions");
    let r = post(&s, "/reports", "application/json", to_json(&a.report).as_bytes());
    assert_eq!(r.status, 201);
    assert_eq!(r.json(), json!({ "id": a.report.id, "revision": 1 }));

    let g = get(&s, &format!("/reports/{}", a.report.id));
    assert_eq!(g.status, 200);
    assert!(g.content_type.starts_with("application/json"));
    assert_eq!(g.etag.as_deref(), Some("\"1\""));
    let sent: Value = serde_json::from_str(&to_json(&a.report)).unwrap();
    assert_eq!(g.json(), sent);

    assert_eq!(post(&s, "/reports", "application/json", to_json(&a.report).as_bytes()).status, 409);
    assert_eq!(get(&s, "/reports/0000000000000000").status, 404);
}

#[test]
fn server_assigns_content_addressed_ids() {
    let (_t, s) = server();
    let a = fixture_report("single-tap");
    let mut doc: Value = serde_json::from_str(&to_json(&a.report)).unwrap();
    doc.as_object_mut().unwrap().remove("id");
    doc["unknown_extension"] = json!({"kept": true});
    let r = post(&s, "/reports", "application/json", doc.to_string().as_bytes());
    assert_eq!(r.status, 201, "{}", r.text());
    let id = r.json()["id"].as_str().unwrap().to_string();
    let stored = get(&s, &format!("/reports/{id}")).json();
    let report = from_json(&stored.to_string()).unwrap();
    assert_eq!(compute_id(&report), id);
    assert_eq!(stored["unknown_extension"], json!({"kept": true}));
    doc["id"] = json!(id);
    assert_eq!(stored, doc);
}

#[test]
fn invalid_documents_list_every_violation() {
    let (_t, s) = server();
    let a = fixture_report("three-actions");
    let mut doc: Value = serde_json::from_str(&to_json(&a.report)).unwrap();
    doc.as_object_mut().unwrap().remove("title");
    doc["steps"][1]["index"] = json!(2);
    let r = post(&s, "/reports", "application/json", doc.to_string().as_bytes());
    assert_eq!(r.status, 422);
    let paths: Vec<String> = r.json()["violations"].as_array().unwrap().iter().map(|v| v["path"].as_str().unwrap().to_string()).collect();
    assert!(paths.contains(&"title".to_string()), "{paths:?}");
    assert!(paths.iter().any(|p| p.starts_with("steps[1]")), "{paths:?}");

    assert_eq!(post(&s, "/reports", "application/json", b"not json").status, 422);
    assert_eq!(post(&s, "/reports", "application/json", b"[1]").status, 422);
}

#[test]
fn put_is_compare_and_set() {
    let (_t, s) = server();
    let a = fixture_report("single-tap");
    let id = upload(&s, &a);
    let path = format!("/reports/{id}");
    let mut report = a.report.clone();
    report.title = "edited".into();
    let body = to_json(&report);

    assert_eq!(put(&s, &path, None, &body).status, 428);
    assert_eq!(put(&s, &path, Some("x"), &body).status, 400);
    let r = put(&s, &path, Some("1"), &body);
    assert_eq!(r.status, 200);
    assert_eq!(r.json(), json!({ "id": id, "revision": 2 }));
    let stale = put(&s, &path, Some("1"), &body);
    assert_eq!(stale.status, 409);
    assert_eq!(stale.json()["current_revision"], json!(2));
    assert_eq!(put(&s, &path, Some("\"2\""), &body).status, 200);
    assert_eq!(get(&s, &path).json()["title"], json!("edited"));

    let mut other = report.clone();
    other.id = "ffffffffffffffff".into();
    assert_eq!(put(&s, &path, Some("3"), &to_json(&other)).status, 422);
    assert_eq!(put(&s, "/reports/abcdef0123456789", Some("1"), &body.replace(&id, "abcdef0123456789")).status, 404);
}

#[test]
fn sixteen_concurrent_puts_one_winner() {
    let (_t, s) = server();
    let a = fixture_report("single-tap");
    let id = upload(&s, &a);
    let url = format!("{}/reports/{id}", s.url());
    let barrier = Arc::new(Barrier::new(16));
    let handles: Vec<_> = (0..16)
        .map(|i| {
            let mut report = a.report.clone();
            report.title = format!("writer {i}");
            let body = to_json(&report);
            let url = url.clone();
            let barrier = Arc::clone(&barrier);
            thread::spawn(move || {
                barrier.wait();
                read(agent().put(&url).header("If-Match", "1").header("Content-Type", "application/json").send(body)).status
            })
        })
        .collect();
    let mut codes: Vec<u16> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    codes.sort();
    assert_eq!(codes.iter().filter(|&&c| c == 200).count(), 1, "{codes:?}");
    assert_eq!(codes.iter().filter(|&&c| c == 409).count(), 15, "{codes:?}");
    let g = get(&s, &format!("/reports/{id}"));
    assert_eq!(g.etag.as_deref(), Some("\"2\""));
    assert!(g.json()["title"].as_str().unwrap().starts_with("writer "));
}

#[test]
fn crash_between_temp_write_and_rename_keeps_prior_revision() {
    for point in [CrashPoint::RevisionFile, CrashPoint::Commit] {
        let (_t, s) = server();
        let a = fixture_report("single-tap");
        let id = upload(&s, &a);
        let path = format!("/reports/{id}");
        let before = get(&s, &path).body;
        let mut report = a.report.clone();
        report.title = "lost".into();
        s.store.crash_next_put(point);
        assert_eq!(put(&s, &path, Some("1"), &to_json(&report)).status, 500);
        let after = get(&s, &path);
        assert_eq!(after.body, before);
        assert_eq!(after.etag.as_deref(), Some("\"1\""));
        assert_eq!(put(&s, &path, Some("1"), &to_json(&report)).status, 200);
    }
}

#[test]
fn attachments() {
    let (_t, s) = server();
    let a = fixture_report("three-actions");
    let id = upload(&s, &a);
    for att in &a.attachments {
        let g = get(&s, &format!("/reports/{id}/attachments/{}", att.name));
        assert_eq!(g.status, 200);
        assert_eq!(g.content_type, att.content_type);
        assert_eq!(g.body, att.bytes);
    }
    let first = &a.attachments[0];
    assert_eq!(post(&s, &format!("/reports/{id}/attachments/{}", first.name), &first.content_type, &first.bytes).status, 409);
    assert_eq!(get(&s, &format!("/reports/{id}/attachments/nope.png")).status, 404);
    assert_eq!(post(&s, "/reports/0000000000000000/attachments/x.png", "image/png", b"x").status, 404);
    assert_eq!(post(&s, &format!("/reports/{id}/attachments/.hidden"), "image/png", b"x").status, 400);

    // a new revision frees the name again
    assert_eq!(patch(&s, &format!("/reports/{id}/annotations"), None, r#"{"title":"t2"}"#).status, 200);
    assert_eq!(post(&s, &format!("/reports/{id}/attachments/{}", first.name), &first.content_type, &first.bytes).status, 201);
}

#[test]
fn html_matches_the_renderer() {
    let (_t, s) = server();
    let a = fixture_report("three-actions");
    let id = upload(&s, &a);
    let g = get(&s, &format!("/reports/{id}/html"));
    assert_eq!(g.status, 200);
    assert_eq!(g.content_type, "text/html; charset=utf-8");
    let stored = from_json(&get(&s, &format!("/reports/{id}")).text()).unwrap();
    assert_eq!(g.text(), render_html(&stored, &ServiceAssets));
    assert!(g.text().contains(&format!("/reports/{id}/attachments/screenshot-000.png")));
    assert!(g.text().contains(&format!("/reports/{id}/replay/sendevent")));
}

#[test]
fn replay_scripts_are_deterministic() {
    let (_t, s) = server();
    let a = fixture_report("three-actions");
    let id = upload(&s, &a);
    for flavor in ["sendevent", "adb"] {
        let one = get(&s, &format!("/reports/{id}/replay/{flavor}"));
        let two = get(&s, &format!("/reports/{id}/replay/{flavor}"));
        assert_eq!(one.status, 200, "{}", one.text());
        assert_eq!(one.content_type, "text/x-shellscript");
        assert_eq!(one.body, two.body);
        assert!(one.text().starts_with("#!/system/bin/sh\n"));
    }
    assert!(get(&s, &format!("/reports/{id}/replay/sendevent")).text().contains("sendevent /dev/input/event1 3 57 "));
    assert!(get(&s, &format!("/reports/{id}/replay/adb")).text().contains("input tap "));
    assert_eq!(get(&s, &format!("/reports/{id}/replay/monkey")).status, 404);

    // without the raw event log only the adb flavor can be produced
    let b = fixture_report("single-tap");
    let r = post(&s, "/reports", "application/json", to_json(&b.report).as_bytes());
    let id = r.json()["id"].as_str().unwrap().to_string();
    assert_eq!(get(&s, &format!("/reports/{id}/replay/sendevent")).status, 404);
    assert_eq!(get(&s, &format!("/reports/{id}/replay/adb")).status, 200);
}

#[test]
fn list_and_annotations() {
    let (_t, s) = server();
    assert_eq!(get(&s, "/reports").json(), json!([]));
    let a = fixture_report("three-actions");
    let b = fixture_report("single-tap");
    let ida = upload(&s, &a);
    let idb = upload(&s, &b);
    let list = get(&s, "/reports").json();
    let rows = list.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let row_a = rows.iter().find(|r| r["id"] == json!(ida)).unwrap();
    assert_eq!(row_a["step_count"], json!(3));
    assert_eq!(row_a["title"], json!("Save does nothing"));
    assert!(row_a["created_at"].is_string());
    assert!(rows.iter().any(|r| r["id"] == json!(idb)));

    let path = format!("/reports/{ida}/annotations");
    let r = patch(&s, &path, Some("1"), r#"{"expected_behavior":"it saves"}"#);
    assert_eq!(r.status, 200, "{}", r.text());
    assert_eq!(r.json()["revision"], json!(2));
    let doc = get(&s, &format!("/reports/{ida}")).json();
    assert_eq!(doc["expected_behavior"], json!("it saves"));
    assert_eq!(doc["title"], json!("Save does nothing"));
    assert_eq!(doc["id"], json!(ida));

    assert_eq!(patch(&s, &path, Some("1"), r#"{"title":"x"}"#).status, 409);
    assert_eq!(patch(&s, &path, None, r#"{"steps":[]}"#).status, 422);
    assert_eq!(patch(&s, &path, None, r#"{"title":5}"#).status, 422);
    assert_eq!(patch(&s, "/reports/0000000000000000/annotations", None, r#"{"title":"x"}"#).status, 404);
}

#[test]
fn static_ui_hosting() {
    let tmp = tempfile::tempdir().unwrap();
    let ui = tmp.path().join("ui");
    std::fs::create_dir_all(&ui).unwrap();
    std::fs::write(ui.join("index.html"), "<!doctype html><title>viewer</title>").unwrap();
    std::fs::write(ui.join("app.js"), "console.log(1)").unwrap();
    let mut cfg = ServerConfig::new(tmp.path().join("store"));
    cfg.port = 0;
    cfg.ui_dir = Some(ui);
    let s = spawn(cfg).unwrap();
    let index = get(&s, "/ui/");
    assert_eq!(index.status, 200);
    assert!(index.text().contains("viewer"));
    assert!(index.content_type.starts_with("text/html"));
    let js = get(&s, "/ui/app.js");
    assert_eq!(js.text(), "console.log(1)");
    let deep = get(&s, "/ui/reports/abc/steps/2");
    assert_eq!(deep.status, 200);
    assert!(deep.text().contains("viewer"));

    let (_t, plain) = server();
    assert_eq!(get(&plain, "/ui/").status, 404);
}
