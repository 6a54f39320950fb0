//! Scenario directories: a recorded session on disk, replayable through the
//! fixture bridge or turned straight into a capture.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use odbr_core::capture::{detect_actions, CaptureAttempt, DeviceInfo, RawCapture};
use odbr_core::event::{parse_getevent_log, rebase, InputEvent, Micros, ParseError};
use odbr_core::sensor::{parse_sensor_line, SensorError, SensorKind, SensorSample, SensorTrace, SensorTraces};
use odbr_core::ui::AxisRanges;

/// Sampling floor per sensor kind name, in milliseconds. Kinds not listed
/// use their defaults.
pub type SensorFloors = BTreeMap<String, u64>;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Events { path: PathBuf, source: ParseError },
    #[error("{path}: {source}")]
    Sensors { path: PathBuf, source: SensorError },
    #[error("{path}: {message}")]
    Device { path: PathBuf, message: String },
}

/// `device.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioDevice {
    pub model: String,
    pub os_version: String,
    pub screen_width: u32,
    pub screen_height: u32,
    pub axis_ranges: AxisRanges,
    /// Device clock reading at session start.
    pub epoch_us: Micros,
    #[serde(default)]
    pub started_at: Option<DateTime<Utc>>,
    #[serde(default)]
    pub app_package: Option<String>,
    #[serde(default)]
    pub packages: Vec<String>,
}

impl ScenarioDevice {
    pub fn info(&self) -> DeviceInfo {
        DeviceInfo {
            model: self.model.clone(),
            os_version: self.os_version.clone(),
            screen_width: self.screen_width,
            screen_height: self.screen_height,
            axis_ranges: self.axis_ranges,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub dir: PathBuf,
    pub device: ScenarioDevice,
    /// Device clock timestamps, file order.
    pub events: Vec<InputEvent>,
    /// Canned hierarchy dumps and screenshots by action number; `None`
    /// where the file is missing, which plays back as a capture failure.
    pub dumps: Vec<Option<String>>,
    pub screens: Vec<Option<Vec<u8>>>,
    pub sensors: Vec<(SensorKind, SensorSample)>,
}

fn read(path: &Path) -> Result<Vec<u8>, ScenarioError> {
    fs::read(path).map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })
}

fn read_text(path: &Path) -> Result<String, ScenarioError> {
    fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })
}

/// Files named `NNN.<ext>` in `dir`, placed by number.
fn numbered<T>(dir: &Path, ext: &str, load: impl Fn(&Path) -> Result<T, ScenarioError>) -> Result<Vec<Option<T>>, ScenarioError> {
    let mut out: Vec<Option<T>> = Vec::new();
    let entries = match fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(out),
        Err(source) => return Err(ScenarioError::Io { path: dir.to_path_buf(), source }),
    };
    let mut found = Vec::new();
    for entry in entries {
        let path = entry.map_err(|source| ScenarioError::Io { path: dir.to_path_buf(), source })?.path();
        if path.extension().and_then(|e| e.to_str()) != Some(ext) {
            continue;
        }
        if let Some(n) = path.file_stem().and_then(|s| s.to_str()).and_then(|s| s.parse::<usize>().ok()) {
            found.push((n, path));
        }
    }
    found.sort();
    for (n, path) in found {
        if out.len() <= n {
            out.resize_with(n + 1, || None);
        }
        out[n] = Some(load(&path)?);
    }
    Ok(out)
}

impl Scenario {
    pub fn load(dir: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let dir = dir.as_ref().to_path_buf();
        let device_path = dir.join("device.json");
        let device: ScenarioDevice = serde_json::from_str(&read_text(&device_path)?)
            .map_err(|e| ScenarioError::Device { path: device_path.clone(), message: e.to_string() })?;
        device.axis_ranges.validate().map_err(|message| ScenarioError::Device { path: device_path, message })?;

        let events_path = dir.join("events.getevent");
        let log = parse_getevent_log(&read_text(&events_path)?).map_err(|source| ScenarioError::Events { path: events_path, source })?;

        let sensors_path = dir.join("sensors.txt");
        let mut sensors = Vec::new();
        if sensors_path.exists() {
            for (i, line) in read_text(&sensors_path)?.lines().enumerate() {
                match parse_sensor_line(line, i + 1) {
                    Ok(Some(s)) => sensors.push(s),
                    Ok(None) => {}
                    Err(source) => return Err(ScenarioError::Sensors { path: sensors_path, source }),
                }
            }
        }

        let dumps = numbered(&dir.join("dumps"), "xml", read_text)?;
        let screens = numbered(&dir.join("screens"), "png", read)?;
        Ok(Scenario { dir, device, events: log.events, dumps, screens, sensors })
    }

    pub fn app_package(&self) -> &str {
        self.device.app_package.as_deref().unwrap_or("")
    }
}

/// Adds a sample to the trace for its kind, creating the trace with the
/// configured floor the first time the kind appears.
pub fn admit_sensor(traces: &mut SensorTraces, floors: &SensorFloors, kind: SensorKind, sample: SensorSample) -> Result<(), SensorError> {
    if !traces.iter().any(|t| t.kind == kind) {
        let floor = floors.get(kind.name()).copied().unwrap_or_else(|| kind.default_floor_ms());
        traces.0.push(SensorTrace::new(kind.clone(), floor));
    }
    traces.admit(kind, sample).map(|_| ())
}

/// Capture attempts for the given triggers, taking the n-th canned dump and
/// screenshot for the n-th trigger.
pub fn canned_attempts(scenario: &Scenario, triggers: &[Micros]) -> Vec<CaptureAttempt> {
    triggers
        .iter()
        .enumerate()
        .map(|(i, &trigger_us)| {
            let mut failures = Vec::new();
            let screenshot = scenario.screens.get(i).cloned().flatten();
            if screenshot.is_none() {
                failures.push(format!("screencap: no screens/{i:03}.png in fixture"));
            }
            let ui_dump = scenario.dumps.get(i).cloned().flatten();
            if ui_dump.is_none() {
                failures.push(format!("dump_hierarchy: no dumps/{i:03}.xml in fixture"));
            }
            CaptureAttempt { trigger_us, latency_us: 0, screenshot, ui_dump, failures }
        })
        .collect()
}

/// The capture a recording session over this scenario produces, computed
/// directly without running a session.
pub fn offline_capture(scenario: &Scenario, floors: &SensorFloors) -> Result<RawCapture, ScenarioError> {
    let epoch = scenario.device.epoch_us;
    let mut events = scenario.events.clone();
    rebase(&mut events, epoch);
    events.sort_by_key(|e| e.timestamp);

    let triggers = detect_actions(&events);
    let captures = canned_attempts(scenario, &triggers);

    let mut traces = SensorTraces::default();
    for (kind, sample) in &scenario.sensors {
        let sample = SensorSample { timestamp: sample.timestamp.saturating_sub(epoch), values: sample.values.clone() };
        admit_sensor(&mut traces, floors, kind.clone(), sample)
            .map_err(|source| ScenarioError::Sensors { path: scenario.dir.join("sensors.txt"), source })?;
    }

    Ok(RawCapture {
        app_package: scenario.app_package().to_string(),
        events,
        captures,
        sensor_traces: traces,
        device_info: scenario.device.info(),
        session_epoch_us: epoch,
        started_at: scenario.device.started_at,
        idle_prompts: Vec::new(),
    })
}
