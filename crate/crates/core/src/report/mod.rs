//! The bug report document: assembly, JSON form, HTML form.

mod assemble;
mod html;
mod json;

pub use assemble::{
    assemble_report, build_report, match_captures, resolve_targets, AssembledReport, AssemblyError, Attachment, BuildOptions, HitResult,
};
pub use html::{escape_html, render_html, AssetResolver, RelativeAssets};
pub use json::{compute_id, from_json, to_json, validate, validate_value, ValidationError, Violation};

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::capture::DeviceInfo;
use crate::event::{parse_getevent_log, ParseError};
use crate::gesture::UserInteraction;
use crate::replay::{default_device_map, emit_adb_script, emit_sendevent_script, ScriptError, ScriptFlavor, TimingMode};
use crate::sensor::SensorTraces;

pub const SCHEMA_VERSION: u32 = 1;

/// Machine-readable schema for version 1 documents.
pub const SCHEMA_V1: &str = include_str!("../../schema/bug-report.v1.schema.json");

pub const RAW_EVENTS_NAME: &str = "raw-events.getevent";
pub const CONTENT_TYPE_PNG: &str = "image/png";
pub const CONTENT_TYPE_XML: &str = "application/xml";
pub const CONTENT_TYPE_TEXT: &str = "text/plain; charset=utf-8";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotations {
    pub title: String,
    pub expected_behavior: String,
    pub actual_behavior: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BugReport {
    pub id: String,
    pub schema_version: u32,
    pub title: String,
    pub expected_behavior: String,
    pub actual_behavior: String,
    pub app_package: String,
    pub device_info: DeviceInfo,
    pub created_at: DateTime<Utc>,
    pub steps: Vec<UserInteraction>,
    pub sensor_traces: SensorTraces,
    pub raw_events_ref: Option<String>,
    pub hit_policy: String,
    /// Attachment name to content type.
    pub attachments: BTreeMap<String, String>,
    /// Fields this version does not know, kept verbatim.
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl BugReport {
    pub fn annotations(&self) -> Annotations {
        Annotations {
            title: self.title.clone(),
            expected_behavior: self.expected_behavior.clone(),
            actual_behavior: self.actual_behavior.clone(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReplayScriptError {
    #[error("report has no raw event log")]
    NoRawEvents,
    #[error("raw event log: {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Script(#[from] ScriptError),
}

/// Regenerates a replay script. The sendevent flavor needs the report's raw
/// event log text and replays it with preserved timing.
pub fn replay_script(report: &BugReport, flavor: ScriptFlavor, raw_events: Option<&str>) -> Result<String, ReplayScriptError> {
    match flavor {
        ScriptFlavor::Adb => Ok(emit_adb_script(&report.steps, Some(&report.id))),
        ScriptFlavor::Sendevent => {
            let log = parse_getevent_log(raw_events.ok_or(ReplayScriptError::NoRawEvents)?)?;
            let devices = default_device_map(&log.events);
            Ok(emit_sendevent_script(&log.events, &devices, TimingMode::Preserve, Some(&report.id))?)
        }
    }
}
