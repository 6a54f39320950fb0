use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use serde_json::{json, Map, Value};
use tower_http::services::{ServeDir, ServeFile};

use odbr_core::replay::ScriptFlavor;
use odbr_core::report::{compute_id, from_json, render_html, replay_script, to_json, AssetResolver, BugReport, ValidationError};

use crate::store::{check_id, Store, StoreError};

pub const CONTENT_TYPE_JSON: &str = "application/json";
pub const CONTENT_TYPE_HTML: &str = "text/html; charset=utf-8";
pub const CONTENT_TYPE_SCRIPT: &str = "text/x-shellscript";

/// Links attachments and scripts to this service's endpoints.
#[derive(Debug, Clone, Copy, Default)]
pub struct ServiceAssets;

impl AssetResolver for ServiceAssets {
    fn attachment(&self, report: &BugReport, name: &str) -> Option<String> {
        report.attachments.contains_key(name).then(|| format!("/reports/{}/attachments/{name}", report.id))
    }

    fn replay_script(&self, report: &BugReport, flavor: ScriptFlavor) -> String {
        format!("/reports/{}/replay/{}", report.id, flavor.as_str())
    }
}

pub enum ApiError {
    Store(StoreError),
    Invalid(ValidationError),
    BadRequest(String),
    PreconditionRequired,
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        ApiError::Store(e)
    }
}

impl From<ValidationError> for ApiError {
    fn from(e: ValidationError) -> Self {
        ApiError::Invalid(e)
    }
}

fn error_body(status: StatusCode, kind: &str, message: String, extra: Option<(&str, Value)>) -> Response {
    let mut body = json!({ "error": kind, "message": message });
    if let Some((k, v)) = extra {
        body[k] = v;
    }
    (status, Json(body)).into_response()
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        match self {
            ApiError::Store(e) => {
                let msg = e.to_string();
                match e {
                    StoreError::NotFound(_) | StoreError::AttachmentNotFound { .. } => error_body(StatusCode::NOT_FOUND, "not_found", msg, None),
                    StoreError::Conflict { current, .. } => error_body(StatusCode::CONFLICT, "conflict", msg, Some(("current_revision", json!(current)))),
                    StoreError::AttachmentExists(_) => error_body(StatusCode::CONFLICT, "conflict", msg, None),
                    StoreError::InvalidName { .. } => error_body(StatusCode::BAD_REQUEST, "bad_request", msg, None),
                    StoreError::InjectedCrash(_) | StoreError::Io(_) => {
                        log::error!("{msg}");
                        error_body(StatusCode::INTERNAL_SERVER_ERROR, "store", msg, None)
                    }
                }
            }
            ApiError::Invalid(v) => {
                let violations = serde_json::to_value(&v.violations).expect("violations serialize");
                error_body(StatusCode::UNPROCESSABLE_ENTITY, "invalid_document", v.to_string(), Some(("violations", violations)))
            }
            ApiError::BadRequest(m) => error_body(StatusCode::BAD_REQUEST, "bad_request", m, None),
            ApiError::PreconditionRequired => {
                error_body(StatusCode::PRECONDITION_REQUIRED, "precondition_required", "If-Match with the current revision is required".into(), None)
            }
        }
    }
}

type ApiResult = Result<Response, ApiError>;

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<Store>,
}

/// Runs blocking store work off the async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .unwrap_or_else(|e| Err(ApiError::Store(StoreError::Io(std::io::Error::other(format!("worker failed: {e}"))))))
}

pub fn router(store: Arc<Store>, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/reports", post(create_report).get(list_reports))
        .route("/reports/{id}", get(get_report).put(put_report))
        .route("/reports/{id}/annotations", patch(patch_annotations))
        .route("/reports/{id}/attachments/{name}", post(post_attachment).get(get_attachment))
        .route("/reports/{id}/html", get(get_html))
        .route("/reports/{id}/replay/{flavor}", get(get_replay))
        .with_state(AppState { store });
    match ui_dir {
        Some(dir) => {
            // Unknown paths fall back to the app shell so deep links load cold.
            let index = dir.join("index.html");
            api.nest_service("/ui", ServeDir::new(dir).append_index_html_on_directories(true).fallback(ServeFile::new(index)))
        }
        None => api,
    }
}

fn json_response(status: StatusCode, text: String, revision: Option<u64>) -> Response {
    let mut r = (status, text).into_response();
    r.headers_mut().insert(header::CONTENT_TYPE, HeaderValue::from_static(CONTENT_TYPE_JSON));
    if let Some(rev) = revision {
        r.headers_mut().insert(header::ETAG, HeaderValue::from_str(&format!("\"{rev}\"")).expect("ascii"));
    }
    r
}

fn revision_body(status: StatusCode, id: &str, revision: u64) -> Response {
    json_response(status, json!({ "id": id, "revision": revision }).to_string(), Some(revision))
}

fn parse_body(body: &Bytes) -> Result<Map<String, Value>, ApiError> {
    match serde_json::from_slice::<Value>(body) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(ValidationError::single("", "document must be a JSON object").into()),
        Err(e) => Err(ValidationError::single("", format!("not JSON: {e}")).into()),
    }
}

fn if_match(headers: &HeaderMap) -> Result<Option<u64>, ApiError> {
    let Some(v) = headers.get(header::IF_MATCH) else { return Ok(None) };
    let s = v.to_str().map_err(|_| ApiError::BadRequest("If-Match is not text".into()))?;
    let s = s.trim().trim_start_matches("W/").trim_matches('"');
    s.parse().map(Some).map_err(|_| ApiError::BadRequest(format!("If-Match must be a revision number, got {s:?}")))
}

async fn create_report(State(st): State<AppState>, body: Bytes) -> ApiResult {
    let mut doc = parse_body(&body)?;
    let given = match doc.get("id") {
        Some(Value::String(s)) if !s.is_empty() => Some(s.clone()),
        None | Some(Value::Null) | Some(Value::String(_)) => None,
        Some(_) => return Err(ValidationError::single("id", "expected a string").into()),
    };
    doc.insert("id".into(), Value::String(given.clone().unwrap_or_default()));
    let mut report = from_json(&Value::Object(doc).to_string())?;
    report.id = match given {
        Some(id) => id,
        None => compute_id(&report),
    };
    check_id(&report.id).map_err(|e| ApiError::Invalid(ValidationError::single("id", e.to_string())))?;
    let text = to_json(&report);
    let id = report.id.clone();
    let store = st.store;
    let rev = blocking(move || Ok(store.put(&id, &text, 0)?)).await?;
    Ok(revision_body(StatusCode::CREATED, &report.id, rev))
}

async fn list_reports(State(st): State<AppState>) -> ApiResult {
    let store = st.store;
    let mut rows = blocking(move || {
        let mut rows = Vec::new();
        for id in store.list()? {
            let doc = match store.get(&id) {
                Ok(d) => d,
                Err(StoreError::NotFound(_)) => continue,
                Err(e) => return Err(e.into()),
            };
            let v: Value = serde_json::from_str(&doc.json).unwrap_or(Value::Null);
            rows.push(json!({
                "id": id,
                "title": v.get("title").cloned().unwrap_or(Value::Null),
                "created_at": v.get("created_at").cloned().unwrap_or(Value::Null),
                "step_count": v.get("steps").and_then(Value::as_array).map_or(0, Vec::len),
                "revision": doc.revision,
            }));
        }
        Ok(rows)
    })
    .await?;
    rows.sort_by(|a, b| b["created_at"].as_str().cmp(&a["created_at"].as_str()).then_with(|| a["id"].as_str().cmp(&b["id"].as_str())));
    Ok(json_response(StatusCode::OK, Value::Array(rows).to_string(), None))
}

async fn get_report(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let store = st.store;
    let doc = blocking(move || Ok(store.get(&id)?)).await?;
    Ok(json_response(StatusCode::OK, doc.json, Some(doc.revision)))
}

async fn put_report(State(st): State<AppState>, Path(id): Path<String>, headers: HeaderMap, body: Bytes) -> ApiResult {
    let expected = if_match(&headers)?.ok_or(ApiError::PreconditionRequired)?;
    let mut doc = parse_body(&body)?;
    match doc.get("id") {
        None | Some(Value::Null) => {
            doc.insert("id".into(), Value::String(id.clone()));
        }
        Some(Value::String(s)) if s.is_empty() => {
            doc.insert("id".into(), Value::String(id.clone()));
        }
        Some(Value::String(s)) if *s != id => {
            return Err(ValidationError::single("id", format!("document id {s:?} does not match {id:?}")).into());
        }
        _ => {}
    }
    let report = from_json(&Value::Object(doc).to_string())?;
    let text = to_json(&report);
    let store = st.store;
    let id2 = id.clone();
    let rev = blocking(move || {
        if !store.exists(&id2) {
            return Err(StoreError::NotFound(id2).into());
        }
        Ok(store.put(&id2, &text, expected)?)
    })
    .await?;
    Ok(revision_body(StatusCode::OK, &id, rev))
}

const ANNOTATION_KEYS: [&str; 3] = ["title", "expected_behavior", "actual_behavior"];

async fn patch_annotations(State(st): State<AppState>, Path(id): Path<String>, headers: HeaderMap, body: Bytes) -> ApiResult {
    let expected = if_match(&headers)?;
    let patch = parse_body(&body)?;
    let mut violations = Vec::new();
    for (k, v) in &patch {
        if !ANNOTATION_KEYS.contains(&k.as_str()) {
            violations.push(odbr_core::report::Violation { path: k.clone(), message: "not an annotation field".into() });
        } else if !v.is_string() {
            violations.push(odbr_core::report::Violation { path: k.clone(), message: "expected a string".into() });
        }
    }
    if !violations.is_empty() {
        return Err(ValidationError { violations }.into());
    }
    let store = st.store;
    let id2 = id.clone();
    let rev = blocking(move || loop {
        let doc = store.get(&id2)?;
        if let Some(e) = expected {
            if e != doc.revision {
                return Err(StoreError::Conflict { expected: e, current: doc.revision }.into());
            }
        }
        let mut report = from_json(&doc.json)?;
        for (k, v) in &patch {
            let v = v.as_str().unwrap_or_default().to_string();
            match k.as_str() {
                "title" => report.title = v,
                "expected_behavior" => report.expected_behavior = v,
                _ => report.actual_behavior = v,
            }
        }
        match store.put(&id2, &to_json(&report), doc.revision) {
            Ok(rev) => return Ok(rev),
            // lost a race; without an explicit If-Match, apply to the newer revision
            Err(StoreError::Conflict { .. }) if expected.is_none() => continue,
            Err(e) => return Err(e.into()),
        }
    })
    .await?;
    Ok(revision_body(StatusCode::OK, &id, rev))
}

async fn post_attachment(State(st): State<AppState>, Path((id, name)): Path<(String, String)>, headers: HeaderMap, body: Bytes) -> ApiResult {
    let content_type = headers.get(header::CONTENT_TYPE).and_then(|v| v.to_str().ok()).unwrap_or("application/octet-stream").to_string();
    let store = st.store;
    let (id2, name2) = (id.clone(), name.clone());
    let rev = blocking(move || Ok(store.put_attachment(&id2, &name2, &content_type, &body)?)).await?;
    Ok(json_response(StatusCode::CREATED, json!({ "id": id, "name": name, "revision": rev }).to_string(), None))
}

async fn get_attachment(State(st): State<AppState>, Path((id, name)): Path<(String, String)>) -> ApiResult {
    let store = st.store;
    let a = blocking(move || Ok(store.get_attachment(&id, &name)?)).await?;
    let ct = HeaderValue::from_str(&a.content_type).unwrap_or(HeaderValue::from_static("application/octet-stream"));
    Ok(([(header::CONTENT_TYPE, ct)], a.bytes).into_response())
}

fn load_report(store: &Store, id: &str) -> Result<BugReport, ApiError> {
    let doc = store.get(id)?;
    Ok(from_json(&doc.json)?)
}

async fn get_html(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let store = st.store;
    let html = blocking(move || Ok(render_html(&load_report(&store, &id)?, &ServiceAssets))).await?;
    Ok(([(header::CONTENT_TYPE, HeaderValue::from_static(CONTENT_TYPE_HTML))], html).into_response())
}

async fn get_replay(State(st): State<AppState>, Path((id, flavor)): Path<(String, String)>) -> ApiResult {
    let flavor: ScriptFlavor = flavor.parse().map_err(|_| ApiError::Store(StoreError::NotFound(format!("{id}/replay/{flavor}"))))?;
    let store = st.store;
    let script = blocking(move || {
        let report = load_report(&store, &id)?;
        let raw = match (&report.raw_events_ref, flavor) {
            (Some(name), ScriptFlavor::Sendevent) => {
                let a = store.get_attachment(&id, name)?;
                Some(String::from_utf8(a.bytes).map_err(|_| ApiError::BadRequest(format!("attachment {name} is not UTF-8 text")))?)
            }
            _ => None,
        };
        replay_script(&report, flavor, raw.as_deref()).map_err(|e| match e {
            odbr_core::report::ReplayScriptError::NoRawEvents => ApiError::Store(StoreError::AttachmentNotFound { id: id.clone(), name: "raw event log".into() }),
            other => ApiError::BadRequest(other.to_string()),
        })
    })
    .await?;
    Ok(([(header::CONTENT_TYPE, HeaderValue::from_static(CONTENT_TYPE_SCRIPT))], script).into_response())
}
