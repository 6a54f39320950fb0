//! Device access and recording sessions.

pub mod adb;
pub mod bridge;
pub mod deadline;
pub mod fixture;
pub mod mock;
pub mod replay;
pub mod scenario;
pub mod session;

pub use adb::{AdbBridge, CommandRunner, SystemRunner};
pub use bridge::{BridgeError, DeviceBridge, EventFeed, Feed, SensorFeed};
pub use deadline::{DeadlineBridge, DEFAULT_DEADLINE};
pub use fixture::FixtureBridge;
pub use mock::{MockBridge, MockConfig};
pub use replay::{replay_capture, ReplayError, ReplayOutcome};
pub use scenario::{offline_capture, Scenario, ScenarioError, SensorFloors};
pub use session::{start_session, SessionConfig, SessionError, SessionEvent, SessionHandle, StopOutcome};
