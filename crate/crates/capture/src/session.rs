//! Recording sessions.
//!
//! Three threads run per session: a reader that merges the input feed into
//! the session log and fires new-action captures, a capture worker that
//! takes the screenshot and hierarchy dump for each action in order, and a
//! sensor poller. The handle can be driven from any thread.

use std::fs;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender, TryRecvError};
use std::sync::{Arc, Condvar, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use chrono::Utc;

use odbr_core::capture::{ActionDetector, CaptureAttempt, DeviceInfo, IdleAnswer, IdlePromptRecord, RawCapture};
use odbr_core::event::{InputEvent, Micros};
use odbr_core::gesture::GestureThresholds;
use odbr_core::sensor::SensorTraces;

use crate::bridge::{BridgeError, DeviceBridge, EventFeed, SensorFeed};
use crate::deadline::{DeadlineBridge, DEFAULT_DEADLINE};
use crate::scenario::{admit_sensor, SensorFloors};

const TICK: Duration = Duration::from_millis(20);

#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub app_package: String,
    pub thresholds: GestureThresholds,
    pub sensor_floors: SensorFloors,
    pub capture_dir: PathBuf,
    /// Answer idle prompts with "continue" without waiting for anyone.
    pub auto_continue: bool,
    /// Per-call bridge deadline.
    pub deadline: Duration,
}

impl SessionConfig {
    pub fn new(app_package: impl Into<String>, capture_dir: impl Into<PathBuf>) -> Self {
        SessionConfig {
            app_package: app_package.into(),
            thresholds: GestureThresholds::default(),
            sensor_floors: SensorFloors::new(),
            capture_dir: capture_dir.into(),
            auto_continue: false,
            deadline: DEFAULT_DEADLINE,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error(transparent)]
    Bridge(#[from] BridgeError),
    #[error("app package must not be empty")]
    EmptyPackage,
    #[error("package {0} is not installed on the device")]
    PackageMissing(String),
    #[error("capture directory {path} is not writable: {source}")]
    CaptureDir { path: PathBuf, source: std::io::Error },
}

/// Things the session reports while it runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SessionEvent {
    ActionDetected { trigger_us: Micros },
    CaptureFailed { trigger_us: Micros, message: String },
    /// No input for the idle timeout. Answer with
    /// [`SessionHandle::answer_idle`] unless the session auto-continues.
    IdlePrompt { at_us: Micros, idle_ms: u64 },
    /// The input feed closed; nothing more will be recorded.
    InputEnded,
    FeedError(String),
}

#[derive(Default)]
struct Log {
    events: Vec<InputEvent>,
    attempts: Vec<CaptureAttempt>,
    traces: SensorTraces,
    idle: Vec<IdlePromptRecord>,
    pending_prompt: Option<Micros>,
    input_ended: bool,
}

struct Shared {
    log: Mutex<Log>,
    changed: Condvar,
    stopping: AtomicBool,
}

pub struct SessionHandle {
    shared: Arc<Shared>,
    events: Receiver<SessionEvent>,
    reader: Option<JoinHandle<()>>,
    worker: Option<JoinHandle<()>>,
    poller: Option<JoinHandle<()>>,
    app_package: String,
    device_info: DeviceInfo,
    epoch_us: Micros,
    started_at: chrono::DateTime<Utc>,
}

pub enum StopOutcome {
    /// The session keeps recording.
    Resumed(SessionHandle),
    Finished(RawCapture),
}

fn check_capture_dir(dir: &PathBuf) -> Result<(), SessionError> {
    let err = |source| SessionError::CaptureDir { path: dir.clone(), source };
    fs::create_dir_all(dir).map_err(err)?;
    let probe = dir.join(".odbr-write-probe");
    fs::write(&probe, b"").map_err(err)?;
    fs::remove_file(&probe).map_err(err)
}

/// Checks the device and the configuration, then starts recording.
pub fn start_session(bridge: Arc<dyn DeviceBridge>, config: &SessionConfig) -> Result<SessionHandle, SessionError> {
    if config.app_package.trim().is_empty() {
        return Err(SessionError::EmptyPackage);
    }
    let realtime = bridge.realtime();
    let bridge: Arc<dyn DeviceBridge> = Arc::new(DeadlineBridge::new(bridge, config.deadline));

    let device_info = bridge.device_info()?;
    if !bridge.list_packages()?.iter().any(|p| p == &config.app_package) {
        return Err(SessionError::PackageMissing(config.app_package.clone()));
    }
    check_capture_dir(&config.capture_dir)?;

    let epoch_us = bridge.clock_us()?;
    let started_at = bridge.started_at().unwrap_or_else(Utc::now);
    let input = bridge.stream_input_events()?;
    let sensors = match bridge.poll_sensors() {
        Ok(feed) => Some(feed),
        Err(BridgeError::Unsupported(what)) => {
            log::info!("no sensor data: {what} is not supported");
            None
        }
        Err(e) => return Err(e.into()),
    };

    let shared = Arc::new(Shared { log: Mutex::new(Log::default()), changed: Condvar::new(), stopping: AtomicBool::new(false) });
    let (events_tx, events_rx) = mpsc::channel();
    let (capture_tx, capture_rx) = mpsc::channel();

    let worker = {
        let shared = Arc::clone(&shared);
        let bridge = Arc::clone(&bridge);
        let events_tx = events_tx.clone();
        thread::Builder::new()
            .name("odbr-capture".into())
            .spawn(move || capture_worker(bridge, capture_rx, shared, events_tx))
            .expect("spawn capture worker")
    };
    let poller = sensors.map(|feed| {
        let shared = Arc::clone(&shared);
        let floors = config.sensor_floors.clone();
        let events_tx = events_tx.clone();
        thread::Builder::new()
            .name("odbr-sensors".into())
            .spawn(move || sensor_poller(feed, epoch_us, floors, shared, events_tx))
            .expect("spawn sensor poller")
    });
    let reader = {
        let shared = Arc::clone(&shared);
        let reader = Reader {
            epoch_us,
            realtime,
            idle_timeout_us: config.thresholds.idle_timeout_ms * 1000,
            auto_continue: config.auto_continue,
            shared,
            events_tx,
            capture_tx,
        };
        thread::Builder::new().name("odbr-input".into()).spawn(move || reader.run(input)).expect("spawn input reader")
    };

    Ok(SessionHandle {
        shared,
        events: events_rx,
        reader: Some(reader),
        worker: Some(worker),
        poller,
        app_package: config.app_package.clone(),
        device_info,
        epoch_us,
        started_at,
    })
}

struct Reader {
    epoch_us: Micros,
    realtime: bool,
    idle_timeout_us: Micros,
    auto_continue: bool,
    shared: Arc<Shared>,
    events_tx: Sender<SessionEvent>,
    capture_tx: Sender<Micros>,
}

impl Reader {
    fn run(self, mut feed: EventFeed) {
        let mut detector = ActionDetector::new();
        let mut last_ts: Micros = 0;
        let mut last_wall = Instant::now();
        let mut prompted_at: Option<Micros> = None;

        loop {
            let stopping = self.shared.stopping.load(Ordering::SeqCst);
            let next = if stopping {
                match feed.rx.try_recv() {
                    Ok(item) => Some(item),
                    Err(TryRecvError::Empty) => break,
                    Err(TryRecvError::Disconnected) => {
                        self.input_ended();
                        break;
                    }
                }
            } else {
                match feed.rx.recv_timeout(TICK) {
                    Ok(item) => Some(item),
                    Err(RecvTimeoutError::Timeout) => None,
                    Err(RecvTimeoutError::Disconnected) => {
                        self.input_ended();
                        break;
                    }
                }
            };

            match next {
                None => {
                    let idle_us = last_wall.elapsed().as_micros() as Micros;
                    if self.realtime && detector.contacts_open() == 0 && idle_us >= self.idle_timeout_us && prompted_at != Some(last_ts) {
                        prompted_at = Some(last_ts);
                        self.prompt(last_ts + idle_us);
                    }
                }
                Some(Err(e)) => {
                    log::warn!("input feed: {e}");
                    let _ = self.events_tx.send(SessionEvent::FeedError(e.to_string()));
                }
                Some(Ok(mut ev)) => {
                    ev.timestamp = ev.timestamp.saturating_sub(self.epoch_us);
                    if !self.realtime
                        && detector.contacts_open() == 0
                        && ev.timestamp.saturating_sub(last_ts) >= self.idle_timeout_us
                        && prompted_at != Some(last_ts)
                    {
                        prompted_at = Some(last_ts);
                        self.prompt(last_ts + self.idle_timeout_us);
                    }
                    last_ts = last_ts.max(ev.timestamp);
                    last_wall = Instant::now();
                    let trigger = detector.push(&ev);
                    self.shared.log.lock().unwrap().events.push(ev);
                    if let Some(t) = trigger {
                        let _ = self.events_tx.send(SessionEvent::ActionDetected { trigger_us: t });
                        let _ = self.capture_tx.send(t);
                    }
                }
            }
        }
        feed.stop();
    }

    fn prompt(&self, at_us: Micros) {
        let idle_ms = self.idle_timeout_us / 1000;
        {
            let mut log = self.shared.log.lock().unwrap();
            if self.auto_continue {
                log.idle.push(IdlePromptRecord { at_us, answer: IdleAnswer::Continue });
            } else {
                log.pending_prompt = Some(at_us);
            }
        }
        let _ = self.events_tx.send(SessionEvent::IdlePrompt { at_us, idle_ms });
    }

    fn input_ended(&self) {
        self.shared.log.lock().unwrap().input_ended = true;
        self.shared.changed.notify_all();
        let _ = self.events_tx.send(SessionEvent::InputEnded);
    }
}

fn capture_worker(bridge: Arc<dyn DeviceBridge>, triggers: Receiver<Micros>, shared: Arc<Shared>, events_tx: Sender<SessionEvent>) {
    for trigger_us in triggers {
        let started = Instant::now();
        let mut failures = Vec::new();
        let screenshot = bridge.screencap().map_err(|e| failures.push(format!("screencap: {e}"))).ok();
        let ui_dump = bridge.dump_hierarchy().map_err(|e| failures.push(format!("dump_hierarchy: {e}"))).ok();
        let latency_us = started.elapsed().as_micros() as u64;
        for f in &failures {
            log::warn!("capture for action at {trigger_us}us: {f}");
            let _ = events_tx.send(SessionEvent::CaptureFailed { trigger_us, message: f.clone() });
        }
        shared.log.lock().unwrap().attempts.push(CaptureAttempt { trigger_us, latency_us, screenshot, ui_dump, failures });
        shared.changed.notify_all();
    }
}

fn sensor_poller(mut feed: SensorFeed, epoch_us: Micros, floors: SensorFloors, shared: Arc<Shared>, events_tx: Sender<SessionEvent>) {
    loop {
        let item = if shared.stopping.load(Ordering::SeqCst) {
            match feed.rx.try_recv() {
                Ok(item) => item,
                Err(_) => break,
            }
        } else {
            match feed.rx.recv_timeout(TICK) {
                Ok(item) => item,
                Err(RecvTimeoutError::Timeout) => continue,
                Err(RecvTimeoutError::Disconnected) => break,
            }
        };
        match item {
            Ok((kind, mut sample)) => {
                sample.timestamp = sample.timestamp.saturating_sub(epoch_us);
                let mut log = shared.log.lock().unwrap();
                if let Err(e) = admit_sensor(&mut log.traces, &floors, kind, sample) {
                    log::warn!("sensor sample rejected: {e}");
                }
            }
            Err(e) => {
                log::warn!("sensor feed: {e}");
                let _ = events_tx.send(SessionEvent::FeedError(e.to_string()));
            }
        }
    }
    feed.stop();
}

impl SessionHandle {
    pub fn events(&self) -> &Receiver<SessionEvent> {
        &self.events
    }

    pub fn epoch_us(&self) -> Micros {
        self.epoch_us
    }

    pub fn device_info(&self) -> &DeviceInfo {
        &self.device_info
    }

    /// Records the answer to the outstanding idle prompt, if any.
    pub fn answer_idle(&self, answer: IdleAnswer) {
        let mut log = self.shared.log.lock().unwrap();
        if let Some(at_us) = log.pending_prompt.take() {
            log.idle.push(IdlePromptRecord { at_us, answer });
        }
    }

    /// Blocks until the input feed has closed and every capture fired so
    /// far has completed, or the timeout passes. Returns whether it did.
    pub fn wait_for_input_end(&self, timeout: Duration) -> bool {
        let deadline = Instant::now() + timeout;
        let mut log = self.shared.log.lock().unwrap();
        while !log.input_ended {
            let left = deadline.saturating_duration_since(Instant::now());
            if left.is_zero() {
                return false;
            }
            log = self.shared.changed.wait_timeout(log, left).unwrap().0;
        }
        true
    }

    pub fn is_input_ended(&self) -> bool {
        self.shared.log.lock().unwrap().input_ended
    }

    /// Ends the session when `finished`, draining and closing every feed.
    /// Otherwise the session resumes as if the user chose to continue.
    pub fn stop(mut self, finished: bool) -> StopOutcome {
        if !finished {
            self.answer_idle(IdleAnswer::Continue);
            return StopOutcome::Resumed(self);
        }
        self.answer_idle(IdleAnswer::Finish);
        self.shared.stopping.store(true, Ordering::SeqCst);
        for h in [self.reader.take(), self.poller.take(), self.worker.take()].into_iter().flatten() {
            if h.join().is_err() {
                log::error!("a session thread panicked");
            }
        }
        let mut log = std::mem::take(&mut *self.shared.log.lock().unwrap());
        log.events.sort_by_key(|e| e.timestamp);
        log.attempts.sort_by_key(|a| a.trigger_us);
        StopOutcome::Finished(RawCapture {
            app_package: self.app_package.clone(),
            events: log.events,
            captures: log.attempts,
            sensor_traces: log.traces,
            device_info: self.device_info.clone(),
            session_epoch_us: self.epoch_us,
            started_at: Some(self.started_at),
            idle_prompts: log.idle,
        })
    }
}

impl Drop for SessionHandle {
    fn drop(&mut self) {
        self.shared.stopping.store(true, Ordering::SeqCst);
    }
}
