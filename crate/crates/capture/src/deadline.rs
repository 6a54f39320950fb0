use std::sync::mpsc;
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use chrono::{DateTime, Utc};

use odbr_core::capture::DeviceInfo;
use odbr_core::event::Micros;

use crate::bridge::{BridgeError, DeviceBridge, EventFeed, SensorFeed};

pub const DEFAULT_DEADLINE: Duration = Duration::from_secs(10);

/// Runs every call of the inner bridge on a helper thread and gives up
/// after the deadline. A call that times out keeps running in the
/// background; its result is discarded.
#[derive(Clone)]
pub struct DeadlineBridge {
    inner: Arc<dyn DeviceBridge>,
    deadline: Duration,
}

impl DeadlineBridge {
    pub fn new(inner: Arc<dyn DeviceBridge>, deadline: Duration) -> Self {
        DeadlineBridge { inner, deadline }
    }

    pub fn deadline(&self) -> Duration {
        self.deadline
    }

    fn call<T: Send + 'static>(
        &self,
        op: &'static str,
        f: impl FnOnce(&dyn DeviceBridge) -> Result<T, BridgeError> + Send + 'static,
    ) -> Result<T, BridgeError> {
        let (tx, rx) = mpsc::sync_channel(1);
        let inner = Arc::clone(&self.inner);
        thread::Builder::new()
            .name(format!("bridge-{op}"))
            .spawn(move || {
                let _ = tx.send(f(inner.as_ref()));
            })
            .map_err(|e| BridgeError::Unreachable(format!("cannot spawn bridge call: {e}")))?;
        match rx.recv_timeout(self.deadline) {
            Ok(r) => r,
            Err(mpsc::RecvTimeoutError::Timeout) => Err(BridgeError::Timeout { op, after: self.deadline }),
            Err(mpsc::RecvTimeoutError::Disconnected) => Err(BridgeError::Unreachable(format!("{op} panicked"))),
        }
    }
}

impl DeviceBridge for DeadlineBridge {
    fn run_shell(&self, command: &str) -> Result<String, BridgeError> {
        let command = command.to_string();
        self.call("run_shell", move |b| b.run_shell(&command))
    }
    fn stream_input_events(&self) -> Result<EventFeed, BridgeError> {
        self.call("stream_input_events", |b| b.stream_input_events())
    }
    fn dump_hierarchy(&self) -> Result<String, BridgeError> {
        self.call("dump_hierarchy", |b| b.dump_hierarchy())
    }
    fn screencap(&self) -> Result<Vec<u8>, BridgeError> {
        self.call("screencap", |b| b.screencap())
    }
    fn poll_sensors(&self) -> Result<SensorFeed, BridgeError> {
        self.call("poll_sensors", |b| b.poll_sensors())
    }
    fn inject_event(&self, device_index: u32, ev_type: u16, ev_code: u16, ev_value: i32) -> Result<(), BridgeError> {
        self.call("inject_event", move |b| b.inject_event(device_index, ev_type, ev_code, ev_value))
    }
    fn list_packages(&self) -> Result<Vec<String>, BridgeError> {
        self.call("list_packages", |b| b.list_packages())
    }
    fn device_info(&self) -> Result<DeviceInfo, BridgeError> {
        self.call("device_info", |b| b.device_info())
    }
    fn clock_us(&self) -> Result<Micros, BridgeError> {
        self.call("clock_us", |b| b.clock_us())
    }
    fn realtime(&self) -> bool {
        self.inner.realtime()
    }
    fn started_at(&self) -> Option<DateTime<Utc>> {
        self.inner.started_at()
    }
}
