//! On-disk report directories as written by `report build` and `record`.

use std::fs;
use std::path::{Path, PathBuf};

use odbr_core::replay::ScriptFlavor;
use odbr_core::report::{from_json, render_html, replay_script, to_json, AssembledReport, BugReport, RelativeAssets};

use crate::CliError;

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_HTML: &str = "report.html";

pub struct Written {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| CliError::fault(format!("writing {}: {e}", path.display())))
}

#[cfg(unix)]
fn make_executable(path: &Path) -> Result<(), CliError> {
    use std::os::unix::fs::PermissionsExt;
    fs::set_permissions(path, fs::Permissions::from_mode(0o755)).map_err(|e| CliError::fault(format!("{}: {e}", path.display())))
}

#[cfg(not(unix))]
fn make_executable(_path: &Path) -> Result<(), CliError> {
    Ok(())
}

/// Writes the document, its attachments, the HTML page and both replay
/// scripts.
pub fn write_report_dir(assembled: &AssembledReport, dir: &Path) -> Result<Written, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::fault(format!("creating {}: {e}", dir.display())))?;
    let report = &assembled.report;
    let mut files = vec![REPORT_JSON.to_string()];
    write(dir, REPORT_JSON, to_json(report).as_bytes())?;
    for a in &assembled.attachments {
        write(dir, &a.name, &a.bytes)?;
        files.push(a.name.clone());
    }
    write(dir, REPORT_HTML, render_html(report, &RelativeAssets).as_bytes())?;
    files.push(REPORT_HTML.into());

    let raw = raw_events_from(assembled);
    for flavor in ScriptFlavor::ALL {
        let script = replay_script(report, flavor, raw.as_deref()).map_err(|e| CliError::invalid(e.to_string()))?;
        let name = flavor.file_name();
        write(dir, &name, script.as_bytes())?;
        make_executable(&dir.join(&name))?;
        files.push(name);
    }
    Ok(Written { dir: dir.to_path_buf(), files })
}

fn raw_events_from(assembled: &AssembledReport) -> Option<String> {
    let name = assembled.report.raw_events_ref.as_deref()?;
    let a = assembled.attachments.iter().find(|a| a.name == name)?;
    String::from_utf8(a.bytes.clone()).ok()
}

pub struct LoadedReport {
    pub dir: PathBuf,
    pub report: BugReport,
    pub raw_events: Option<String>,
}

pub fn load_report_dir(dir: &Path) -> Result<LoadedReport, CliError> {
    let path = dir.join(REPORT_JSON);
    let text = fs::read_to_string(&path).map_err(|e| CliError::fault(format!("reading {}: {e}", path.display())))?;
    let report = from_json(&text).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    let raw_events = match &report.raw_events_ref {
        Some(name) => {
            let p = dir.join(name);
            Some(fs::read_to_string(&p).map_err(|e| CliError::fault(format!("reading {}: {e}", p.display())))?)
        }
        None => None,
    };
    Ok(LoadedReport { dir: dir.to_path_buf(), report, raw_events })
}

pub fn read_attachment(dir: &Path, name: &str) -> Result<Vec<u8>, CliError> {
    let p = dir.join(name);
    fs::read(&p).map_err(|e| CliError::fault(format!("reading {}: {e}", p.display())))
}
