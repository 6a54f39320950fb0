use std::collections::BTreeMap;

use chrono::{DateTime, Utc};

use super::json::{compute_id, validate, ValidationError};
use super::{Annotations, BugReport, CONTENT_TYPE_PNG, CONTENT_TYPE_TEXT, CONTENT_TYPE_XML, RAW_EVENTS_NAME, SCHEMA_VERSION};
use crate::capture::{CaptureAttempt, RawCapture};
use crate::event::{format_getevent_line, Micros};
use crate::gesture::{describe, GestureThresholds, UserInteraction};
use crate::pipeline::{analyze_events, PipelineError};
use crate::ui::{component_summary, hit_test_with_ancestor, parse_ui_dump, ComponentSummary, HIT_POLICY};

#[derive(Debug, thiserror::Error)]
pub enum AssemblyError {
    #[error("steps and captures do not line up: orphan steps {steps:?}, orphan captures at {captures:?}us")]
    Orphans { steps: Vec<usize>, captures: Vec<Micros> },
    #[error("{expected} hit results for {got} steps")]
    HitCount { expected: usize, got: usize },
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("assembled report is invalid: {0}")]
    Invalid(#[from] ValidationError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HitResult {
    pub target: ComponentSummary,
    pub clickable_ancestor: Option<ComponentSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attachment {
    pub name: String,
    pub content_type: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssembledReport {
    pub report: BugReport,
    /// Ordered by name.
    pub attachments: Vec<Attachment>,
}

#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    pub thresholds: GestureThresholds,
    /// Overrides the capture's start time as the report's creation time.
    pub created_at: Option<DateTime<Utc>>,
}

/// Pairs each step with the capture attempt fired for it: the latest
/// unclaimed attempt triggered at or before the step's start. Every step
/// and every attempt must be used exactly once.
pub fn match_captures(steps: &[UserInteraction], attempts: &[CaptureAttempt]) -> Result<Vec<Option<usize>>, AssemblyError> {
    let mut order: Vec<usize> = (0..attempts.len()).collect();
    order.sort_by_key(|&i| attempts[i].trigger_us);
    let mut claimed = vec![false; attempts.len()];
    let mut out = Vec::with_capacity(steps.len());
    let mut orphan_steps = Vec::new();
    for step in steps {
        let pick = order.iter().rev().copied().find(|&i| !claimed[i] && attempts[i].trigger_us <= step.start_time);
        // an earlier unclaimed attempt means the detector saw an action
        // the analysis did not; do not let a later step swallow it
        let pick = pick.filter(|&i| !order.iter().any(|&j| !claimed[j] && attempts[j].trigger_us < attempts[i].trigger_us));
        match pick {
            Some(i) => {
                claimed[i] = true;
                out.push(Some(i));
            }
            None => {
                orphan_steps.push(step.index);
                out.push(None);
            }
        }
    }
    let orphan_captures: Vec<Micros> = order.iter().filter(|&&i| !claimed[i]).map(|&i| attempts[i].trigger_us).collect();
    if !orphan_steps.is_empty() || !orphan_captures.is_empty() {
        return Err(AssemblyError::Orphans { steps: orphan_steps, captures: orphan_captures });
    }
    Ok(out)
}

/// Hit-tests each touch step against the hierarchy dump captured for it.
pub fn resolve_targets(steps: &[UserInteraction], raw: &RawCapture, matches: &[Option<usize>]) -> Vec<Option<HitResult>> {
    steps
        .iter()
        .zip(matches)
        .map(|(step, m)| {
            let point = step.start_point?;
            let xml = raw.captures.get((*m)?)?.ui_dump.as_deref()?;
            let tree = match parse_ui_dump(xml) {
                Ok(t) => t,
                Err(e) => {
                    log::warn!("step {}: unreadable hierarchy dump: {e}", step.index);
                    return None;
                }
            };
            let hit = hit_test_with_ancestor(&tree, point)?;
            Some(HitResult { target: component_summary(hit.node), clickable_ancestor: hit.clickable_ancestor.map(component_summary) })
        })
        .collect()
}

fn raw_events_text(raw: &RawCapture) -> String {
    raw.events.iter().map(|e| format_getevent_line(e) + "\n").collect()
}

/// Combines a capture, its classified steps and their hit results into a
/// validated report plus the attachment files it references.
pub fn assemble_report(
    raw: &RawCapture,
    steps: &[UserInteraction],
    hits: &[Option<HitResult>],
    annotations: &Annotations,
    created_at: Option<DateTime<Utc>>,
) -> Result<AssembledReport, AssemblyError> {
    if hits.len() != steps.len() {
        return Err(AssemblyError::HitCount { expected: steps.len(), got: hits.len() });
    }
    let matches = match_captures(steps, &raw.captures)?;

    let mut files: BTreeMap<String, Attachment> = BTreeMap::new();
    let mut add = |name: String, content_type: &str, bytes: Vec<u8>| {
        files.insert(name.clone(), Attachment { name, content_type: content_type.into(), bytes });
    };
    add(RAW_EVENTS_NAME.into(), CONTENT_TYPE_TEXT, raw_events_text(raw).into_bytes());

    let mut out_steps = Vec::with_capacity(steps.len());
    for (i, (step, hit)) in steps.iter().zip(hits).enumerate() {
        let mut s = step.clone();
        s.index = i;
        s.target = hit.as_ref().map(|h| h.target.clone());
        s.clickable_ancestor = hit.as_ref().and_then(|h| h.clickable_ancestor.clone());
        s.screenshot_ref = None;
        s.ui_dump_ref = None;
        if let Some(attempt) = matches[i].map(|k| &raw.captures[k]) {
            if let Some(png) = &attempt.screenshot {
                let name = format!("screenshot-{i:03}.png");
                add(name.clone(), CONTENT_TYPE_PNG, png.clone());
                s.screenshot_ref = Some(name);
            }
            if let Some(xml) = &attempt.ui_dump {
                let name = format!("ui-dump-{i:03}.xml");
                add(name.clone(), CONTENT_TYPE_XML, xml.clone().into_bytes());
                s.ui_dump_ref = Some(name);
            }
            for f in &attempt.failures {
                log::warn!("step {i}: capture gap: {f}");
            }
        }
        s.description = describe(&s);
        out_steps.push(s);
    }

    let created_at = created_at.or(raw.started_at).unwrap_or_else(Utc::now);
    let mut report = BugReport {
        id: String::new(),
        schema_version: SCHEMA_VERSION,
        title: annotations.title.clone(),
        expected_behavior: annotations.expected_behavior.clone(),
        actual_behavior: annotations.actual_behavior.clone(),
        app_package: raw.app_package.clone(),
        device_info: raw.device_info.clone(),
        created_at,
        steps: out_steps,
        sensor_traces: raw.sensor_traces.clone(),
        raw_events_ref: Some(RAW_EVENTS_NAME.into()),
        hit_policy: HIT_POLICY.into(),
        attachments: files.values().map(|a| (a.name.clone(), a.content_type.clone())).collect(),
        extra: Default::default(),
    };
    report.id = compute_id(&report);

    let violations = validate(&report);
    if !violations.is_empty() {
        return Err(ValidationError { violations }.into());
    }
    Ok(AssembledReport { report, attachments: files.into_values().collect() })
}

/// The whole offline path: analysis, capture matching, hit-testing,
/// assembly.
pub fn build_report(raw: &RawCapture, annotations: &Annotations, options: &BuildOptions) -> Result<AssembledReport, AssemblyError> {
    let analysis = analyze_events(&raw.events, &raw.device_info.axis_ranges, &options.thresholds, raw.session_end())?;
    let matches = match_captures(&analysis.steps, &raw.captures)?;
    let hits = resolve_targets(&analysis.steps, raw, &matches);
    assemble_report(raw, &analysis.steps, &hits, annotations, options.created_at)
}
