//! The real bridge: shells out to the `adb` binary.
//!
//! Command lines per operation:
//!
//! | operation | command |
//! |---|---|
//! | run_shell | `adb shell <command>` |
//! | stream_input_events | `adb shell getevent -t` |
//! | dump_hierarchy | `adb shell uiautomator dump /sdcard/window_dump.xml`, then `adb exec-out cat /sdcard/window_dump.xml` |
//! | screencap | `adb exec-out screencap -p` |
//! | inject_event | `adb shell sendevent /dev/input/eventN <type> <code> <value>` |
//! | list_packages | `adb shell pm list packages` |
//! | device_info | `adb shell getprop ro.product.model`, `getprop ro.build.version.release`, `wm size`, `getevent -p` |
//! | clock_us | `adb shell cat /proc/uptime` |
//! | poll_sensors | `adb shell <sensor command>` when one is configured |

use std::io::{BufRead, BufReader};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::thread;

use odbr_core::capture::DeviceInfo;
use odbr_core::event::{device_path, GeteventParser, Micros};
use odbr_core::sensor::parse_sensor_line;
use odbr_core::ui::AxisRanges;

use crate::bridge::{BridgeError, DeviceBridge, EventFeed, Feed, SensorFeed};

pub const DUMP_PATH: &str = "/sdcard/window_dump.xml";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutput {
    pub success: bool,
    pub status: String,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

/// A running command whose stdout arrives line by line.
pub struct LineStream {
    pub lines: mpsc::Receiver<String>,
    pub kill: Box<dyn FnOnce() + Send>,
}

/// Runs `adb` with the given arguments.
pub trait CommandRunner: Send + Sync {
    fn run(&self, args: &[&str]) -> Result<CommandOutput, BridgeError>;
    fn spawn_lines(&self, args: &[&str]) -> Result<LineStream, BridgeError>;
}

/// Runs the `adb` binary found on PATH (or `program`), optionally pinned
/// to one device serial.
#[derive(Debug, Clone)]
pub struct SystemRunner {
    pub program: String,
    pub serial: Option<String>,
}

impl Default for SystemRunner {
    fn default() -> Self {
        SystemRunner { program: "adb".into(), serial: None }
    }
}

impl SystemRunner {
    fn command(&self, args: &[&str]) -> Command {
        let mut c = Command::new(&self.program);
        if let Some(s) = &self.serial {
            c.args(["-s", s]);
        }
        c.args(args);
        c
    }

    fn spawn_error(&self, e: std::io::Error) -> BridgeError {
        BridgeError::Unreachable(format!("cannot run {}: {e}", self.program))
    }
}

impl CommandRunner for SystemRunner {
    fn run(&self, args: &[&str]) -> Result<CommandOutput, BridgeError> {
        let out = self.command(args).stdin(Stdio::null()).output().map_err(|e| self.spawn_error(e))?;
        Ok(CommandOutput {
            success: out.status.success(),
            status: out.status.to_string(),
            stdout: out.stdout,
            stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
        })
    }

    fn spawn_lines(&self, args: &[&str]) -> Result<LineStream, BridgeError> {
        let mut child = self.command(args).stdin(Stdio::null()).stdout(Stdio::piped()).stderr(Stdio::null()).spawn().map_err(|e| self.spawn_error(e))?;
        let stdout = child.stdout.take().expect("piped stdout");
        let child: Arc<Mutex<Child>> = Arc::new(Mutex::new(child));
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                match line {
                    Ok(l) => {
                        if tx.send(l).is_err() {
                            break;
                        }
                    }
                    Err(_) => break,
                }
            }
        });
        let kill = Box::new(move || {
            let mut c = child.lock().unwrap();
            let _ = c.kill();
            let _ = c.wait();
        });
        Ok(LineStream { lines: rx, kill })
    }
}

pub struct AdbBridge<R: CommandRunner = SystemRunner> {
    runner: Arc<R>,
    sensor_command: Option<String>,
}

impl AdbBridge<SystemRunner> {
    pub fn system(serial: Option<String>) -> Self {
        AdbBridge::new(SystemRunner { serial, ..SystemRunner::default() })
    }
}

impl<R: CommandRunner + 'static> AdbBridge<R> {
    pub fn new(runner: R) -> Self {
        AdbBridge { runner: Arc::new(runner), sensor_command: None }
    }

    /// A device-side command printing sensor lines in fixture format
    /// (`<kind> <timestamp_us> <values…>`).
    pub fn with_sensor_command(mut self, command: impl Into<String>) -> Self {
        self.sensor_command = Some(command.into());
        self
    }

    fn checked(&self, args: &[&str]) -> Result<Vec<u8>, BridgeError> {
        let out = self.runner.run(args)?;
        if !out.success {
            return Err(BridgeError::Command { command: format!("adb {}", args.join(" ")), status: out.status, stderr: out.stderr.trim().to_string() });
        }
        Ok(out.stdout)
    }

    fn shell(&self, args: &[&str]) -> Result<String, BridgeError> {
        let mut full = vec!["shell"];
        full.extend_from_slice(args);
        Ok(String::from_utf8_lossy(&self.checked(&full)?).into_owned())
    }
}

impl<R: CommandRunner + 'static> DeviceBridge for AdbBridge<R> {
    fn run_shell(&self, command: &str) -> Result<String, BridgeError> {
        self.shell(&[command])
    }

    fn stream_input_events(&self) -> Result<EventFeed, BridgeError> {
        let stream = self.runner.spawn_lines(&["shell", "getevent", "-t"])?;
        let (tx, rx) = mpsc::channel();
        let lines = stream.lines;
        thread::spawn(move || {
            let mut parser = GeteventParser::new();
            for line in lines {
                let item = match parser.push_line(line.trim_end_matches('\r')) {
                    Ok(Ok(ev)) => Ok(ev),
                    Ok(Err(_)) => continue,
                    Err(e) => Err(BridgeError::Protocol(e.to_string())),
                };
                if tx.send(item).is_err() {
                    break;
                }
            }
        });
        Ok(Feed::new(rx, stream.kill))
    }

    fn dump_hierarchy(&self) -> Result<String, BridgeError> {
        let said = self.shell(&["uiautomator", "dump", DUMP_PATH])?;
        if said.contains("ERROR") {
            return Err(BridgeError::Command { command: "uiautomator dump".into(), status: "reported error".into(), stderr: said.trim().to_string() });
        }
        let xml = self.checked(&["exec-out", "cat", DUMP_PATH])?;
        String::from_utf8(xml).map_err(|_| BridgeError::Protocol("hierarchy dump is not UTF-8".into()))
    }

    fn screencap(&self) -> Result<Vec<u8>, BridgeError> {
        let png = self.checked(&["exec-out", "screencap", "-p"])?;
        if !png.starts_with(b"\x89PNG\r\n\x1a\n") {
            return Err(BridgeError::Protocol(format!("screencap returned {} bytes that are not a PNG", png.len())));
        }
        Ok(png)
    }

    fn poll_sensors(&self) -> Result<SensorFeed, BridgeError> {
        let Some(cmd) = &self.sensor_command else {
            return Err(BridgeError::Unsupported("poll_sensors without a sensor command"));
        };
        let stream = self.runner.spawn_lines(&["shell", cmd])?;
        let (tx, rx) = mpsc::channel();
        let lines = stream.lines;
        thread::spawn(move || {
            for (i, line) in lines.into_iter().enumerate() {
                let item = match parse_sensor_line(line.trim_end_matches('\r'), i + 1) {
                    Ok(Some(s)) => Ok(s),
                    Ok(None) => continue,
                    Err(e) => Err(BridgeError::Protocol(e.to_string())),
                };
                if tx.send(item).is_err() {
                    break;
                }
            }
        });
        Ok(Feed::new(rx, stream.kill))
    }

    fn inject_event(&self, device_index: u32, ev_type: u16, ev_code: u16, ev_value: i32) -> Result<(), BridgeError> {
        let line = sendevent_command(device_index, ev_type, ev_code, ev_value);
        self.shell(&[&line]).map(|_| ())
    }

    fn list_packages(&self) -> Result<Vec<String>, BridgeError> {
        Ok(parse_packages(&self.shell(&["pm", "list", "packages"])?))
    }

    fn device_info(&self) -> Result<DeviceInfo, BridgeError> {
        let model = self.shell(&["getprop", "ro.product.model"])?.trim().to_string();
        let os_version = self.shell(&["getprop", "ro.build.version.release"])?.trim().to_string();
        let (w, h) = parse_wm_size(&self.shell(&["wm", "size"])?)?;
        let axis_ranges = match parse_axis_ranges(&self.shell(&["getevent", "-p"])?, w, h) {
            Some(r) => r,
            None => {
                log::warn!("no multi-touch position axes reported; assuming pixel coordinates");
                AxisRanges::identity(w, h)
            }
        };
        Ok(DeviceInfo { model, os_version, screen_width: w, screen_height: h, axis_ranges })
    }

    fn clock_us(&self) -> Result<Micros, BridgeError> {
        parse_uptime(&self.shell(&["cat", "/proc/uptime"])?)
    }
}

pub fn sendevent_command(device_index: u32, ev_type: u16, ev_code: u16, ev_value: i32) -> String {
    format!("sendevent {} {ev_type} {ev_code} {ev_value}", device_path(device_index))
}

/// `pm list packages` output: one `package:<name>` per line.
pub fn parse_packages(text: &str) -> Vec<String> {
    text.lines().filter_map(|l| l.trim().strip_prefix("package:")).map(str::to_string).collect()
}

/// `wm size` output. An override size wins over the physical one.
pub fn parse_wm_size(text: &str) -> Result<(u32, u32), BridgeError> {
    let mut physical = None;
    let mut overridden = None;
    for line in text.lines() {
        let Some((label, value)) = line.split_once(':') else { continue };
        let dims = value.trim().split_once('x').and_then(|(w, h)| Some((w.trim().parse().ok()?, h.trim().parse().ok()?)));
        match label.trim() {
            "Physical size" => physical = dims,
            "Override size" => overridden = dims,
            _ => {}
        }
    }
    overridden.or(physical).ok_or_else(|| BridgeError::Protocol(format!("cannot read screen size from {text:?}")))
}

/// Position axis ranges of the first device reporting both
/// ABS_MT_POSITION_X (0035) and ABS_MT_POSITION_Y (0036) in `getevent -p`
/// output.
pub fn parse_axis_ranges(text: &str, screen_width: u32, screen_height: u32) -> Option<AxisRanges> {
    let mut x: Option<(i32, i32)> = None;
    let mut y: Option<(i32, i32)> = None;
    for line in text.lines() {
        let t = line.trim();
        if t.starts_with("add device") {
            if let (Some(x), Some(y)) = (x, y) {
                return Some(ranges(x, y, screen_width, screen_height));
            }
            x = None;
            y = None;
            continue;
        }
        // "ABS (0003): 0035  : value 0, min 0, max 1079, ..." or a
        // continuation line "0036  : value ..."
        let t = t.rsplit_once("):").map_or(t, |(_, rest)| rest).trim();
        let Some((code, rest)) = t.split_once(':') else { continue };
        let range = min_max(rest);
        match code.trim() {
            "0035" => x = range,
            "0036" => y = range,
            _ => {}
        }
    }
    match (x, y) {
        (Some(x), Some(y)) => Some(ranges(x, y, screen_width, screen_height)),
        _ => None,
    }
}

fn ranges((x_min, x_max): (i32, i32), (y_min, y_max): (i32, i32), screen_width: u32, screen_height: u32) -> AxisRanges {
    AxisRanges { x_min, x_max, y_min, y_max, screen_width, screen_height }
}

fn min_max(s: &str) -> Option<(i32, i32)> {
    let mut min = None;
    let mut max = None;
    for part in s.split(',') {
        let mut it = part.split_whitespace();
        match (it.next(), it.next()) {
            (Some("min"), Some(v)) => min = v.parse().ok(),
            (Some("max"), Some(v)) => max = v.parse().ok(),
            _ => {}
        }
    }
    Some((min?, max?))
}

/// First field of `/proc/uptime`, in microseconds.
pub fn parse_uptime(text: &str) -> Result<Micros, BridgeError> {
    let bad = || BridgeError::Protocol(format!("cannot read uptime from {text:?}"));
    let field = text.split_whitespace().next().ok_or_else(bad)?;
    let (secs, frac) = field.split_once('.').unwrap_or((field, "0"));
    let secs: u64 = secs.parse().map_err(|_| bad())?;
    let mut frac = frac.to_string();
    if frac.is_empty() || frac.len() > 6 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    while frac.len() < 6 {
        frac.push('0');
    }
    Ok(secs * 1_000_000 + frac.parse::<u64>().map_err(|_| bad())?)
}
