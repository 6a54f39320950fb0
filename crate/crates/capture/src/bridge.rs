use std::sync::mpsc::Receiver;
use std::time::Duration;

use chrono::{DateTime, Utc};

use odbr_core::capture::DeviceInfo;
use odbr_core::event::{InputEvent, Micros};
use odbr_core::sensor::{SensorKind, SensorSample};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BridgeError {
    #[error("{op} did not finish within {after:?}")]
    Timeout { op: &'static str, after: Duration },
    #[error("device unreachable: {0}")]
    Unreachable(String),
    #[error("`{command}` failed ({status}): {stderr}")]
    Command { command: String, status: String, stderr: String },
    #[error("unexpected device output: {0}")]
    Protocol(String),
    #[error("{0}")]
    Fixture(String),
    #[error("{0} is not supported by this bridge")]
    Unsupported(&'static str),
}

/// A live feed. The channel closes when the source ends; `stop` ends it
/// early.
pub struct Feed<T> {
    pub rx: Receiver<Result<T, BridgeError>>,
    stop: Option<Box<dyn FnOnce() + Send>>,
}

impl<T> Feed<T> {
    pub fn new(rx: Receiver<Result<T, BridgeError>>, stop: impl FnOnce() + Send + 'static) -> Self {
        Feed { rx, stop: Some(Box::new(stop)) }
    }

    pub fn stop(&mut self) {
        if let Some(f) = self.stop.take() {
            f();
        }
    }
}

impl<T> Drop for Feed<T> {
    fn drop(&mut self) {
        self.stop();
    }
}

pub type EventFeed = Feed<InputEvent>;
pub type SensorFeed = Feed<(SensorKind, SensorSample)>;

/// Everything the toolkit needs from a device. Timestamps in feeds are
/// device clock microseconds, not yet rebased.
pub trait DeviceBridge: Send + Sync {
    fn run_shell(&self, command: &str) -> Result<String, BridgeError>;
    fn stream_input_events(&self) -> Result<EventFeed, BridgeError>;
    fn dump_hierarchy(&self) -> Result<String, BridgeError>;
    fn screencap(&self) -> Result<Vec<u8>, BridgeError>;
    fn poll_sensors(&self) -> Result<SensorFeed, BridgeError>;
    fn inject_event(&self, device_index: u32, ev_type: u16, ev_code: u16, ev_value: i32) -> Result<(), BridgeError>;
    fn list_packages(&self) -> Result<Vec<String>, BridgeError>;
    fn device_info(&self) -> Result<DeviceInfo, BridgeError>;
    /// Current reading of the clock input events are stamped with.
    fn clock_us(&self) -> Result<Micros, BridgeError>;
    /// Whether feeds arrive in wall-clock time. Idle detection only trusts
    /// the wall clock when they do.
    fn realtime(&self) -> bool {
        true
    }
    /// Wall-clock time of the session start, when the bridge knows better
    /// than the host clock (recorded scenarios do).
    fn started_at(&self) -> Option<DateTime<Utc>> {
        None
    }
}

impl<B: DeviceBridge + ?Sized> DeviceBridge for std::sync::Arc<B> {
    fn run_shell(&self, command: &str) -> Result<String, BridgeError> {
        (**self).run_shell(command)
    }
    fn stream_input_events(&self) -> Result<EventFeed, BridgeError> {
        (**self).stream_input_events()
    }
    fn dump_hierarchy(&self) -> Result<String, BridgeError> {
        (**self).dump_hierarchy()
    }
    fn screencap(&self) -> Result<Vec<u8>, BridgeError> {
        (**self).screencap()
    }
    fn poll_sensors(&self) -> Result<SensorFeed, BridgeError> {
        (**self).poll_sensors()
    }
    fn inject_event(&self, device_index: u32, ev_type: u16, ev_code: u16, ev_value: i32) -> Result<(), BridgeError> {
        (**self).inject_event(device_index, ev_type, ev_code, ev_value)
    }
    fn list_packages(&self) -> Result<Vec<String>, BridgeError> {
        (**self).list_packages()
    }
    fn device_info(&self) -> Result<DeviceInfo, BridgeError> {
        (**self).device_info()
    }
    fn clock_us(&self) -> Result<Micros, BridgeError> {
        (**self).clock_us()
    }
    fn realtime(&self) -> bool {
        (**self).realtime()
    }
    fn started_at(&self) -> Option<DateTime<Utc>> {
        (**self).started_at()
    }
}
