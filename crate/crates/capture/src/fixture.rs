use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use chrono::{DateTime, Utc};

use odbr_core::capture::DeviceInfo;
use odbr_core::event::{InputEvent, Micros};

use crate::bridge::{BridgeError, DeviceBridge, EventFeed, Feed, SensorFeed};
use crate::scenario::Scenario;

/// A bridge that plays a scenario directory back as if it were a device.
///
/// Events and sensor lines are streamed in file order. With `pace` 0 they
/// are delivered as fast as the receiver takes them; otherwise recorded
/// gaps are slept, scaled by `pace`. The n-th screenshot or dump request
/// returns the n-th canned file.
pub struct FixtureBridge {
    scenario: Arc<Scenario>,
    pace: f64,
    screens_served: AtomicUsize,
    dumps_served: AtomicUsize,
    injected: Mutex<Vec<InputEvent>>,
}

impl FixtureBridge {
    pub fn new(scenario: Scenario, pace: f64) -> Self {
        FixtureBridge {
            scenario: Arc::new(scenario),
            pace: pace.max(0.0),
            screens_served: AtomicUsize::new(0),
            dumps_served: AtomicUsize::new(0),
            injected: Mutex::new(Vec::new()),
        }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Events passed to `inject_event`, timestamps zeroed.
    pub fn injected(&self) -> Vec<InputEvent> {
        self.injected.lock().unwrap().clone()
    }

    fn stream<T: Send + 'static>(&self, items: Vec<(Micros, T)>) -> Feed<T> {
        let (tx, rx) = mpsc::channel();
        let stop = Arc::new(AtomicBool::new(false));
        let stop_flag = Arc::clone(&stop);
        let pace = self.pace;
        thread::spawn(move || {
            let mut prev: Option<Micros> = None;
            for (ts, item) in items {
                if stop_flag.load(Ordering::Relaxed) {
                    return;
                }
                if pace > 0.0 {
                    if let Some(p) = prev {
                        let gap = ts.saturating_sub(p) as f64 * pace;
                        thread::sleep(Duration::from_micros(gap as u64));
                    }
                }
                prev = Some(ts);
                if tx.send(Ok(item)).is_err() {
                    return;
                }
            }
        });
        Feed::new(rx, move || stop.store(true, Ordering::Relaxed))
    }
}

impl DeviceBridge for FixtureBridge {
    fn run_shell(&self, _command: &str) -> Result<String, BridgeError> {
        Err(BridgeError::Unsupported("run_shell"))
    }

    fn stream_input_events(&self) -> Result<EventFeed, BridgeError> {
        let items = self.scenario.events.iter().map(|e| (e.timestamp, *e)).collect();
        Ok(self.stream(items))
    }

    fn dump_hierarchy(&self) -> Result<String, BridgeError> {
        let n = self.dumps_served.fetch_add(1, Ordering::SeqCst);
        self.scenario.dumps.get(n).cloned().flatten().ok_or_else(|| BridgeError::Fixture(format!("no dumps/{n:03}.xml in fixture")))
    }

    fn screencap(&self) -> Result<Vec<u8>, BridgeError> {
        let n = self.screens_served.fetch_add(1, Ordering::SeqCst);
        self.scenario.screens.get(n).cloned().flatten().ok_or_else(|| BridgeError::Fixture(format!("no screens/{n:03}.png in fixture")))
    }

    fn poll_sensors(&self) -> Result<SensorFeed, BridgeError> {
        let items = self.scenario.sensors.iter().map(|(k, s)| (s.timestamp, (k.clone(), s.clone()))).collect();
        Ok(self.stream(items))
    }

    fn inject_event(&self, device_index: u32, ev_type: u16, ev_code: u16, ev_value: i32) -> Result<(), BridgeError> {
        self.injected.lock().unwrap().push(InputEvent::new(0, device_index, ev_type, ev_code, ev_value));
        Ok(())
    }

    fn list_packages(&self) -> Result<Vec<String>, BridgeError> {
        Ok(self.scenario.device.packages.clone())
    }

    fn device_info(&self) -> Result<DeviceInfo, BridgeError> {
        Ok(self.scenario.device.info())
    }

    fn clock_us(&self) -> Result<Micros, BridgeError> {
        Ok(self.scenario.device.epoch_us)
    }

    fn realtime(&self) -> bool {
        self.pace > 0.0
    }

    fn started_at(&self) -> Option<DateTime<Utc>> {
        self.scenario.device.started_at
    }
}
