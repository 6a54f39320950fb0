//! `odbr`: record, build, replay and serve Android bug reports.
//!
//! Exit status is 0 on success, 1 when an input is invalid, 2 on bridge or
//! I/O faults. Machine output goes to stdout as JSON; diagnostics go to
//! stderr.

mod reportdir;

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, IsTerminal, Write};
use std::net::IpAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use odbr_capture::{
    offline_capture, replay_capture, start_session, AdbBridge, DeadlineBridge, DeviceBridge, FixtureBridge, Scenario, SessionConfig, SessionError,
    SessionEvent, SensorFloors, StopOutcome, DEFAULT_DEADLINE,
};
use odbr_core::capture::RawCapture;
use odbr_core::event::{parse_getevent_log, EV_ABS, EV_KEY, EV_SYN};
use odbr_core::gesture::GestureThresholds;
use odbr_core::pipeline::analyze_events;
use odbr_core::replay::{ScriptFlavor, TimingMode};
use odbr_core::report::{build_report, replay_script, Annotations, AssemblyError, BuildOptions};
use odbr_service::{ServerConfig, DEFAULT_PORT};

use reportdir::{load_report_dir, read_attachment, write_report_dir, REPORT_JSON};

#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Fault(String),
}

impl CliError {
    pub fn invalid(m: impl Into<String>) -> Self {
        CliError::Invalid(m.into())
    }
    pub fn fault(m: impl Into<String>) -> Self {
        CliError::Fault(m.into())
    }
}

impl From<AssemblyError> for CliError {
    fn from(e: AssemblyError) -> Self {
        match e {
            AssemblyError::Pipeline(p) => CliError::invalid(p.to_string()),
            other => CliError::invalid(other.to_string()),
        }
    }
}

impl From<SessionError> for CliError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::EmptyPackage | SessionError::PackageMissing(_) => CliError::invalid(e.to_string()),
            _ => CliError::fault(e.to_string()),
        }
    }
}

type CliResult = Result<Value, CliError>;

#[derive(Parser)]
#[command(name = "odbr", version, about = "Record, build, replay and serve Android bug reports")]
struct Cli {
    /// Gesture threshold file (tap_slop_px, long_press_ms, idle_timeout_ms,
    /// multi_touch_overlap_ms).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Sampling floor for a sensor kind, e.g. `accelerometer=100`.
    #[arg(long = "sensor-floor", value_name = "KIND=MS", global = true)]
    sensor_floors: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize a getevent text log.
    Parse { log: PathBuf },
    /// Classify the steps of a scenario directory.
    Infer { scenario: PathBuf },
    #[command(subcommand)]
    Report(ReportCommand),
    /// Record a session on a device and build its report.
    Record(RecordArgs),
    #[command(subcommand)]
    Replay(ReplayCommand),
    /// Upload a report directory to a report service.
    Submit {
        report_dir: PathBuf,
        #[arg(long)]
        server: String,
    },
    /// Run the report service.
    Serve {
        #[arg(long)]
        store_root: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        #[arg(long, default_value_t = DEFAULT_PORT)]
        port: u16,
        /// Built viewer assets to serve under /ui/.
        #[arg(long)]
        ui_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ReportCommand {
    /// Build report.json, attachments, report.html and replay scripts from
    /// a scenario directory.
    Build {
        scenario: PathBuf,
        #[command(flatten)]
        annotations: AnnotationArgs,
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
    },
}

#[derive(Args, Clone, Default)]
struct AnnotationArgs {
    #[arg(long)]
    title: Option<String>,
    #[arg(long)]
    expected: Option<String>,
    #[arg(long)]
    actual: Option<String>,
}

#[derive(Args)]
struct BridgeArgs {
    /// `real`, `real:<serial>` or `fixture:<scenario-dir>`.
    #[arg(long, env = "ODBR_BRIDGE", default_value = "real")]
    bridge: String,
    /// Playback speed for fixture bridges: 0 delivers events at once, 1 in
    /// recorded time.
    #[arg(long, default_value_t = 0.0)]
    pace: f64,
    /// Device-side command printing sensor lines, for the real bridge.
    #[arg(long)]
    sensor_command: Option<String>,
    /// Per-call bridge deadline in seconds.
    #[arg(long, default_value_t = DEFAULT_DEADLINE.as_secs_f64())]
    deadline: f64,
}

#[derive(Args)]
struct RecordArgs {
    #[arg(long)]
    app: String,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    bridge: BridgeArgs,
    #[command(flatten)]
    annotations: AnnotationArgs,
    /// Stop recording after this many seconds.
    #[arg(long)]
    max_duration: Option<f64>,
    /// Replay the recorded events right after building the report.
    #[arg(long)]
    verify_replay: bool,
}

#[derive(Subcommand)]
enum ReplayCommand {
    /// Write a replay script for a report directory.
    Emit {
        report_dir: PathBuf,
        #[arg(long)]
        flavor: ScriptFlavor,
        /// Output file; stdout when absent.
        #[arg(short = 'o', long = "out")]
        out: Option<PathBuf>,
    },
    /// Inject a report's recorded events through the bridge.
    Run {
        report_dir: PathBuf,
        /// `preserve`, `fixed_gap:<ms>` or `max_speed`.
        #[arg(long, default_value = "preserve")]
        timing: TimingMode,
        #[command(flatten)]
        bridge: BridgeArgs,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).target(env_logger::Target::Stderr).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Value::Null) => ExitCode::SUCCESS,
        Ok(out) => {
            println!("{}", serde_json::to_string_pretty(&out).expect("output serializes"));
            ExitCode::SUCCESS
        }
        Err(CliError::Invalid(m)) => {
            eprintln!("odbr: {m}");
            ExitCode::from(1)
        }
        Err(CliError::Fault(m)) => {
            eprintln!("odbr: {m}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> CliResult {
    let thresholds = load_thresholds(cli.config.as_deref())?;
    let floors = parse_floors(&cli.sensor_floors)?;
    match cli.command {
        Command::Parse { log } => parse_cmd(&log),
        Command::Infer { scenario } => infer_cmd(&scenario, thresholds, &floors),
        Command::Report(ReportCommand::Build { scenario, annotations, out }) => build_cmd(&scenario, &annotations, &out, thresholds, &floors),
        Command::Record(args) => record_cmd(args, thresholds, floors),
        Command::Replay(ReplayCommand::Emit { report_dir, flavor, out }) => emit_cmd(&report_dir, flavor, out.as_deref()),
        Command::Replay(ReplayCommand::Run { report_dir, timing, bridge }) => run_cmd(&report_dir, timing, &bridge),
        Command::Submit { report_dir, server } => submit_cmd(&report_dir, &server),
        Command::Serve { store_root, bind, port, ui_dir } => serve_cmd(ServerConfig { store_root, bind, port, ui_dir }),
    }
}

fn load_thresholds(path: Option<&Path>) -> Result<GestureThresholds, CliError> {
    let Some(path) = path else { return Ok(GestureThresholds::default()) };
    let text = fs::read_to_string(path).map_err(|e| CliError::fault(format!("reading {}: {e}", path.display())))?;
    GestureThresholds::from_config_str(&text).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

fn parse_floors(specs: &[String]) -> Result<SensorFloors, CliError> {
    let mut floors = SensorFloors::new();
    for s in specs {
        let (kind, ms) = s.split_once('=').ok_or_else(|| CliError::invalid(format!("--sensor-floor expects KIND=MS, got {s:?}")))?;
        let ms: u64 = ms.trim().parse().map_err(|_| CliError::invalid(format!("bad sensor floor {s:?}")))?;
        floors.insert(kind.trim().to_string(), ms);
    }
    Ok(floors)
}

fn type_name(t: u16) -> String {
    match t {
        EV_SYN => "EV_SYN".into(),
        EV_KEY => "EV_KEY".into(),
        0x02 => "EV_REL".into(),
        EV_ABS => "EV_ABS".into(),
        0x04 => "EV_MSC".into(),
        0x05 => "EV_SW".into(),
        0x11 => "EV_LED".into(),
        0x14 => "EV_REP".into(),
        other => format!("0x{other:04x}"),
    }
}

fn parse_cmd(path: &Path) -> CliResult {
    let text = fs::read_to_string(path).map_err(|e| CliError::fault(format!("reading {}: {e}", path.display())))?;
    let log = parse_getevent_log(&text).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    let mut by_type: BTreeMap<String, usize> = BTreeMap::new();
    let mut devices: BTreeMap<u32, usize> = BTreeMap::new();
    for ev in &log.events {
        *by_type.entry(type_name(ev.ev_type)).or_default() += 1;
        *devices.entry(ev.device_index).or_default() += 1;
    }
    let first = log.events.iter().map(|e| e.timestamp).min();
    let last = log.events.iter().map(|e| e.timestamp).max();
    Ok(json!({
        "events": log.events.len(),
        "by_type": by_type,
        "devices": devices.iter().map(|(i, n)| json!({ "index": i, "path": odbr_core::event::device_path(*i), "events": n })).collect::<Vec<_>>(),
        "skipped_lines": log.skipped.len(),
        "first_timestamp_us": first,
        "last_timestamp_us": last,
        "duration_us": first.zip(last).map_or(0, |(a, b)| b - a),
    }))
}

fn load_scenario(dir: &Path) -> Result<Scenario, CliError> {
    Scenario::load(dir).map_err(|e| match e {
        odbr_capture::ScenarioError::Io { .. } => CliError::fault(e.to_string()),
        _ => CliError::invalid(e.to_string()),
    })
}

fn scenario_capture(dir: &Path, floors: &SensorFloors) -> Result<RawCapture, CliError> {
    let scn = load_scenario(dir)?;
    offline_capture(&scn, floors).map_err(|e| CliError::invalid(e.to_string()))
}

fn infer_cmd(dir: &Path, thresholds: GestureThresholds, floors: &SensorFloors) -> CliResult {
    let raw = scenario_capture(dir, floors)?;
    let analysis = analyze_events(&raw.events, &raw.device_info.axis_ranges, &thresholds, raw.session_end()).map_err(|e| CliError::invalid(e.to_string()))?;
    let built = build_report(&raw, &Annotations::default(), &BuildOptions { thresholds, created_at: None })?;
    Ok(json!({
        "steps": built.report.steps,
        "idle": analysis.idle,
        "warnings": analysis.warnings,
    }))
}

fn interactive() -> bool {
    io::stdin().is_terminal()
}

fn ask(question: &str) -> Result<String, CliError> {
    eprint!("{question}");
    io::stderr().flush().ok();
    let mut line = String::new();
    io::stdin().lock().read_line(&mut line).map_err(|e| CliError::fault(format!("reading answer: {e}")))?;
    Ok(line.trim_end_matches(['\n', '\r']).to_string())
}

fn yes(answer: &str) -> bool {
    matches!(answer.trim().to_ascii_lowercase().as_str(), "y" | "yes")
}

/// Fills in annotations from flags, prompting on a terminal for any that
/// are missing.
fn annotations(args: &AnnotationArgs) -> Result<Annotations, CliError> {
    let fields = [("Title", &args.title), ("Expected behavior", &args.expected), ("Actual behavior", &args.actual)];
    if !interactive() && fields.iter().any(|(_, v)| v.is_none()) {
        return Err(CliError::invalid("--title, --expected and --actual are required when standard input is not a terminal"));
    }
    let mut out = Vec::new();
    for (label, v) in fields {
        out.push(match v {
            Some(s) => s.clone(),
            None => ask(&format!("{label}: "))?,
        });
    }
    let [title, expected_behavior, actual_behavior]: [String; 3] = out.try_into().expect("three fields");
    Ok(Annotations { title, expected_behavior, actual_behavior })
}

fn written_summary(report: &odbr_core::report::BugReport, w: &reportdir::Written) -> Value {
    json!({
        "id": report.id,
        "dir": w.dir,
        "steps": report.steps.len(),
        "files": w.files,
    })
}

fn build_cmd(dir: &Path, args: &AnnotationArgs, out: &Path, thresholds: GestureThresholds, floors: &SensorFloors) -> CliResult {
    let ann = annotations(args)?;
    let raw = scenario_capture(dir, floors)?;
    let built = build_report(&raw, &ann, &BuildOptions { thresholds, created_at: None })?;
    let w = write_report_dir(&built, out)?;
    Ok(written_summary(&built.report, &w))
}

fn make_bridge(args: &BridgeArgs) -> Result<Arc<dyn DeviceBridge>, CliError> {
    let spec = args.bridge.trim();
    if let Some(dir) = spec.strip_prefix("fixture:") {
        return Ok(Arc::new(FixtureBridge::new(load_scenario(Path::new(dir))?, args.pace)));
    }
    let serial = match spec {
        "real" => None,
        s => match s.strip_prefix("real:") {
            Some(serial) if !serial.is_empty() => Some(serial.to_string()),
            _ => return Err(CliError::invalid(format!("unknown bridge {spec:?}; use real, real:<serial> or fixture:<dir>"))),
        },
    };
    let mut b = AdbBridge::system(serial);
    if let Some(cmd) = &args.sensor_command {
        b = b.with_sensor_command(cmd.clone());
    }
    Ok(Arc::new(b))
}

fn deadline(args: &BridgeArgs) -> Result<Duration, CliError> {
    Duration::try_from_secs_f64(args.deadline).map_err(|_| CliError::invalid(format!("bad deadline {}", args.deadline)))
}

fn record_cmd(args: RecordArgs, thresholds: GestureThresholds, floors: SensorFloors) -> CliResult {
    let tty = interactive();
    if !tty {
        // fail before recording rather than after
        annotations(&args.annotations)?;
    }
    let bridge = make_bridge(&args.bridge)?;
    let config = SessionConfig {
        app_package: args.app.clone(),
        thresholds,
        sensor_floors: floors,
        capture_dir: args.out.clone(),
        auto_continue: !tty,
        deadline: deadline(&args.bridge)?,
    };
    let handle = start_session(Arc::clone(&bridge), &config)?;
    eprintln!("recording {}; {}", args.app, if tty { "answer y at an idle prompt to finish" } else { "idle prompts are answered automatically" });

    let started = Instant::now();
    let max = args.max_duration.map(Duration::from_secs_f64);
    let mut handle = handle;
    loop {
        if max.is_some_and(|m| started.elapsed() >= m) {
            eprintln!("maximum duration reached");
            break;
        }
        match handle.events().recv_timeout(Duration::from_millis(100)) {
            Ok(SessionEvent::ActionDetected { trigger_us }) => eprintln!("action at {:.3}s", trigger_us as f64 / 1e6),
            Ok(SessionEvent::CaptureFailed { trigger_us, message }) => eprintln!("warning: capture for action at {:.3}s failed: {message}", trigger_us as f64 / 1e6),
            Ok(SessionEvent::FeedError(m)) => eprintln!("warning: {m}"),
            Ok(SessionEvent::InputEnded) => break,
            Ok(SessionEvent::IdlePrompt { idle_ms, .. }) => {
                if tty {
                    let a = ask(&format!("No input for {}s — finish report? [y/N] ", idle_ms / 1000))?;
                    if yes(&a) {
                        break;
                    }
                    handle = match handle.stop(false) {
                        StopOutcome::Resumed(h) => h,
                        StopOutcome::Finished(_) => unreachable!("finished=false resumes"),
                    };
                }
            }
            Err(std::sync::mpsc::RecvTimeoutError::Timeout) => {}
            Err(std::sync::mpsc::RecvTimeoutError::Disconnected) => break,
        }
    }
    let raw = match handle.stop(true) {
        StopOutcome::Finished(raw) => raw,
        StopOutcome::Resumed(_) => unreachable!("finished=true stops"),
    };
    eprintln!("recorded {} events, {} actions", raw.events.len(), raw.captures.len());

    let ann = annotations(&args.annotations)?;
    let built = build_report(&raw, &ann, &BuildOptions { thresholds, created_at: None })?;
    let w = write_report_dir(&built, &args.out)?;
    let mut out = written_summary(&built.report, &w);

    let verify = args.verify_replay || (tty && yes(&ask("Replay the recorded events on the device now? [y/N] ")?));
    if verify {
        let r = replay_capture(bridge.as_ref(), &raw.events, TimingMode::Preserve).map_err(|e| CliError::fault(e.to_string()))?;
        out["replay"] = json!({ "injected_count": r.injected_count, "duration_ms": r.duration.as_millis() as u64 });
    }
    Ok(out)
}

fn emit_cmd(dir: &Path, flavor: ScriptFlavor, out: Option<&Path>) -> CliResult {
    let loaded = load_report_dir(dir)?;
    let script = replay_script(&loaded.report, flavor, loaded.raw_events.as_deref()).map_err(|e| CliError::invalid(e.to_string()))?;
    match out {
        Some(path) => {
            fs::write(path, &script).map_err(|e| CliError::fault(format!("writing {}: {e}", path.display())))?;
            Ok(json!({ "id": loaded.report.id, "flavor": flavor.as_str(), "path": path, "bytes": script.len() }))
        }
        None => {
            print!("{script}");
            Ok(Value::Null)
        }
    }
}

fn run_cmd(dir: &Path, timing: TimingMode, args: &BridgeArgs) -> CliResult {
    let loaded = load_report_dir(dir)?;
    let text = loaded.raw_events.ok_or_else(|| CliError::invalid(format!("{} has no raw event log", loaded.dir.display())))?;
    let log = parse_getevent_log(&text).map_err(|e| CliError::invalid(e.to_string()))?;
    let bridge = DeadlineBridge::new(make_bridge(args)?, deadline(args)?);
    let r = replay_capture(&bridge, &log.events, timing).map_err(|e| CliError::fault(e.to_string()))?;
    Ok(json!({
        "id": loaded.report.id,
        "timing": timing.to_string(),
        "injected_count": r.injected_count,
        "duration_ms": r.duration.as_millis() as u64,
    }))
}

fn http_error(url: &str, e: ureq::Error) -> CliError {
    CliError::fault(format!("cannot reach {url}: {e}"))
}

fn submit_cmd(dir: &Path, server: &str) -> CliResult {
    let loaded = load_report_dir(dir)?;
    let base = server.trim_end_matches('/');
    let agent: ureq::Agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
    let body = fs::read(dir.join(REPORT_JSON)).map_err(|e| CliError::fault(e.to_string()))?;

    let url = format!("{base}/reports");
    let mut r = agent.post(&url).header("Content-Type", "application/json").send(&body[..]).map_err(|e| http_error(&url, e))?;
    let status = r.status().as_u16();
    let text = r.body_mut().read_to_string().unwrap_or_default();
    let created: Value = match status {
        201 => serde_json::from_str(&text).map_err(|e| CliError::fault(format!("unexpected reply from {url}: {e}")))?,
        400..=499 => return Err(CliError::invalid(format!("server rejected the report ({status}): {text}"))),
        _ => return Err(CliError::fault(format!("server error ({status}): {text}"))),
    };
    let id = created["id"].as_str().unwrap_or(&loaded.report.id).to_string();

    let mut uploaded = Vec::new();
    for (name, content_type) in &loaded.report.attachments {
        let bytes = read_attachment(dir, name)?;
        let url = format!("{base}/reports/{id}/attachments/{name}");
        let r = agent.post(&url).header("Content-Type", content_type).send(&bytes[..]).map_err(|e| http_error(&url, e))?;
        match r.status().as_u16() {
            201 => uploaded.push(name.clone()),
            s @ 400..=499 => return Err(CliError::invalid(format!("attachment {name} rejected ({s})"))),
            s => return Err(CliError::fault(format!("attachment {name}: server error ({s})"))),
        }
    }
    Ok(json!({
        "id": id,
        "revision": created["revision"],
        "url": format!("{base}/reports/{id}"),
        "attachments": uploaded,
    }))
}

fn serve_cmd(config: ServerConfig) -> CliResult {
    let root = config.store_root.clone();
    let server = odbr_service::spawn(config).map_err(|e| CliError::fault(format!("cannot start server: {e}")))?;
    println!("{}", json!({ "url": server.url(), "store_root": root }));
    io::stdout().flush().ok();
    eprintln!("serving on {}", server.url());
    server.wait().map_err(|e| CliError::fault(e.to_string()))?;
    Ok(Value::Null)
}
