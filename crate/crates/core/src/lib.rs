//! Core of the on-device bug reporting toolkit: everything between a raw
//! input event stream and a replayable bug report, with no I/O beyond what
//! callers hand in.
pub mod capture;
pub mod event;
pub mod gesture;
pub mod pipeline;
pub mod replay;
pub mod report;
pub mod sensor;
pub mod ui;
