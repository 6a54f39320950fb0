use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::sync::{Condvar, Mutex};
use std::time::Instant;

use odbr_core::capture::DeviceInfo;
use odbr_core::event::{InputEvent, Micros};
use odbr_core::sensor::{SensorKind, SensorSample};
use odbr_core::ui::AxisRanges;

use crate::bridge::{BridgeError, DeviceBridge, EventFeed, Feed, SensorFeed};

/// Scriptable in-memory bridge for tests.
#[derive(Debug, Clone)]
pub struct MockConfig {
    pub packages: Vec<String>,
    pub events: Vec<InputEvent>,
    pub sensors: Vec<(SensorKind, SensorSample)>,
    pub screenshot: Vec<u8>,
    pub ui_dump: String,
    /// The n-th screencap call (counting from 1) fails.
    pub fail_screencap_at: Option<usize>,
    /// The n-th inject call (counting from 1) fails.
    pub fail_inject_at: Option<usize>,
    /// Every call blocks until [`MockBridge::release`].
    pub hang: bool,
    pub unreachable: bool,
    pub device_info: DeviceInfo,
    pub clock_us: Micros,
}

impl Default for MockConfig {
    fn default() -> Self {
        MockConfig {
            packages: vec!["com.example.app".into()],
            events: Vec::new(),
            sensors: Vec::new(),
            screenshot: b"\x89PNG\r\n\x1a\nmock".to_vec(),
            ui_dump: "<?xml version='1.0' encoding='UTF-8' standalone='yes' ?><hierarchy rotation=\"0\"><node index=\"0\" text=\"\" resource-id=\"\" class=\"android.widget.FrameLayout\" package=\"com.example.app\" content-desc=\"\" clickable=\"false\" bounds=\"[0,0][1080,1920]\" /></hierarchy>".into(),
            fail_screencap_at: None,
            fail_inject_at: None,
            hang: false,
            unreachable: false,
            device_info: DeviceInfo {
                model: "mock".into(),
                os_version: "0".into(),
                screen_width: 1080,
                screen_height: 1920,
                axis_ranges: AxisRanges::identity(1080, 1920),
            },
            clock_us: 0,
        }
    }
}

pub struct MockBridge {
    config: MockConfig,
    screencaps: AtomicUsize,
    injects: AtomicUsize,
    injected: Mutex<Vec<(Instant, InputEvent)>>,
    released: Mutex<bool>,
    release_cv: Condvar,
}

impl MockBridge {
    pub fn new(config: MockConfig) -> Self {
        MockBridge {
            config,
            screencaps: AtomicUsize::new(0),
            injects: AtomicUsize::new(0),
            injected: Mutex::new(Vec::new()),
            released: Mutex::new(false),
            release_cv: Condvar::new(),
        }
    }

    /// Successful injections with the instant each one happened.
    pub fn injections(&self) -> Vec<(Instant, InputEvent)> {
        self.injected.lock().unwrap().clone()
    }

    pub fn screencap_calls(&self) -> usize {
        self.screencaps.load(Ordering::SeqCst)
    }

    /// Unblocks calls stuck in hang mode.
    pub fn release(&self) {
        *self.released.lock().unwrap() = true;
        self.release_cv.notify_all();
    }

    fn gate(&self) -> Result<(), BridgeError> {
        if self.config.hang {
            let mut released = self.released.lock().unwrap();
            while !*released {
                released = self.release_cv.wait(released).unwrap();
            }
        }
        if self.config.unreachable {
            return Err(BridgeError::Unreachable("mock device offline".into()));
        }
        Ok(())
    }

    fn feed<T: Send + 'static>(items: Vec<T>) -> Feed<T> {
        let (tx, rx) = mpsc::channel();
        for item in items {
            let _ = tx.send(Ok(item));
        }
        Feed::new(rx, || {})
    }
}

impl DeviceBridge for MockBridge {
    fn run_shell(&self, command: &str) -> Result<String, BridgeError> {
        self.gate()?;
        Ok(format!("{command}\n"))
    }

    fn stream_input_events(&self) -> Result<EventFeed, BridgeError> {
        self.gate()?;
        Ok(Self::feed(self.config.events.clone()))
    }

    fn dump_hierarchy(&self) -> Result<String, BridgeError> {
        self.gate()?;
        Ok(self.config.ui_dump.clone())
    }

    fn screencap(&self) -> Result<Vec<u8>, BridgeError> {
        self.gate()?;
        let n = self.screencaps.fetch_add(1, Ordering::SeqCst) + 1;
        if self.config.fail_screencap_at == Some(n) {
            return Err(BridgeError::Command { command: "screencap -p".into(), status: "exit status: 1".into(), stderr: "mock failure".into() });
        }
        Ok(self.config.screenshot.clone())
    }

    fn poll_sensors(&self) -> Result<SensorFeed, BridgeError> {
        self.gate()?;
        Ok(Self::feed(self.config.sensors.clone()))
    }

    fn inject_event(&self, device_index: u32, ev_type: u16, ev_code: u16, ev_value: i32) -> Result<(), BridgeError> {
        self.gate()?;
        let n = self.injects.fetch_add(1, Ordering::SeqCst) + 1;
        if self.config.fail_inject_at == Some(n) {
            return Err(BridgeError::Command { command: "sendevent".into(), status: "exit status: 1".into(), stderr: "mock failure".into() });
        }
        self.injected.lock().unwrap().push((Instant::now(), InputEvent::new(0, device_index, ev_type, ev_code, ev_value)));
        Ok(())
    }

    fn list_packages(&self) -> Result<Vec<String>, BridgeError> {
        self.gate()?;
        Ok(self.config.packages.clone())
    }

    fn device_info(&self) -> Result<DeviceInfo, BridgeError> {
        self.gate()?;
        Ok(self.config.device_info.clone())
    }

    fn clock_us(&self) -> Result<Micros, BridgeError> {
        self.gate()?;
        Ok(self.config.clock_us)
    }

    fn realtime(&self) -> bool {
        false
    }
}
