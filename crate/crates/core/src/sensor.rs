//! Rate-limited sensor traces (accelerometer, GPS, and anything else the
//! bridge reports).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::event::Micros;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SensorKind {
    Accelerometer,
    Gps,
    Other(String),
}

impl SensorKind {
    pub fn name(&self) -> &str {
        match self {
            SensorKind::Accelerometer => "accelerometer",
            SensorKind::Gps => "gps",
            SensorKind::Other(n) => n,
        }
    }

    pub fn arity_ok(&self, n: usize) -> bool {
        match self {
            SensorKind::Accelerometer => n == 3,
            SensorKind::Gps => n == 2 || n == 3,
            SensorKind::Other(_) => n >= 1,
        }
    }

    pub fn default_unit(&self) -> &'static str {
        match self {
            SensorKind::Accelerometer => "m/s^2",
            SensorKind::Gps => "deg,deg,m",
            SensorKind::Other(_) => "",
        }
    }

    /// Minimum spacing between admitted samples.
    pub fn default_floor_ms(&self) -> u64 {
        match self {
            SensorKind::Accelerometer => 50,
            SensorKind::Gps => 1000,
            SensorKind::Other(_) => 100,
        }
    }
}

impl fmt::Display for SensorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SensorKind {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "accelerometer" => SensorKind::Accelerometer,
            "gps" => SensorKind::Gps,
            other => SensorKind::Other(other.to_string()),
        })
    }
}

impl Serialize for SensorKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for SensorKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(s.parse().expect("infallible"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorSample {
    pub timestamp: Micros,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SensorError {
    #[error("{kind} sample has {got} values")]
    Arity { kind: String, got: usize },
    #[error("{kind} sample has a non-finite value")]
    NonFinite { kind: String },
    #[error("line {line}: {reason}")]
    Fixture { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admission {
    Appended,
    /// Closer to the previous sample than the floor allows.
    RateLimited,
    /// Older than (or as old as) the last admitted sample.
    OutOfOrder,
    /// Identical to the last admitted sample.
    Duplicate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorTrace {
    pub kind: SensorKind,
    pub unit: String,
    pub min_interval_ms: u64,
    pub samples: Vec<SensorSample>,
    #[serde(default)]
    pub out_of_order: u64,
}

impl SensorTrace {
    pub fn new(kind: SensorKind, min_interval_ms: u64) -> Self {
        SensorTrace { unit: kind.default_unit().to_string(), kind, min_interval_ms, samples: Vec::new(), out_of_order: 0 }
    }

    pub fn with_default_floor(kind: SensorKind) -> Self {
        let floor = kind.default_floor_ms();
        Self::new(kind, floor)
    }

    pub fn admit_sample(&mut self, sample: SensorSample) -> Result<Admission, SensorError> {
        if !self.kind.arity_ok(sample.values.len()) {
            return Err(SensorError::Arity { kind: self.kind.to_string(), got: sample.values.len() });
        }
        if sample.values.iter().any(|v| !v.is_finite()) {
            return Err(SensorError::NonFinite { kind: self.kind.to_string() });
        }
        let Some(last) = self.samples.last() else {
            self.samples.push(sample);
            return Ok(Admission::Appended);
        };
        if *last == sample {
            return Ok(Admission::Duplicate);
        }
        if sample.timestamp <= last.timestamp {
            self.out_of_order += 1;
            log::warn!("{} sample at {}us is out of order", self.kind, sample.timestamp);
            return Ok(Admission::OutOfOrder);
        }
        if sample.timestamp - last.timestamp < self.min_interval_ms * 1000 {
            return Ok(Admission::RateLimited);
        }
        self.samples.push(sample);
        Ok(Admission::Appended)
    }

    pub fn summarize(&self) -> TraceSummary {
        summarize_trace(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub count: usize,
    pub t_span_us: Option<Micros>,
    pub axes: Option<Vec<AxisStats>>,
}

pub fn summarize_trace(trace: &SensorTrace) -> TraceSummary {
    let Some(first) = trace.samples.first() else {
        return TraceSummary { count: 0, t_span_us: None, axes: None };
    };
    let last = trace.samples.last().expect("non-empty");
    let arity = trace.samples.iter().map(|s| s.values.len()).min().unwrap_or(0);
    let axes = (0..arity)
        .map(|i| {
            let vals = trace.samples.iter().map(|s| s.values[i]);
            let (mut min, mut max, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
            for v in vals {
                min = min.min(v);
                max = max.max(v);
                sum += v;
            }
            AxisStats { min, max, mean: sum / trace.samples.len() as f64 }
        })
        .collect();
    TraceSummary {
        count: trace.samples.len(),
        t_span_us: Some(last.timestamp - first.timestamp),
        axes: Some(axes),
    }
}

/// Parses one `<kind> <t_usec> <v1> [v2 v3]...` line. Blank and `#` lines
/// yield `None`.
pub fn parse_sensor_line(line: &str, line_no: usize) -> Result<Option<(SensorKind, SensorSample)>, SensorError> {
    let line = line.trim();
    if line.is_empty() || line.starts_with('#') {
        return Ok(None);
    }
    let err = |reason: String| SensorError::Fixture { line: line_no, reason };
    let mut fields = line.split_whitespace();
    let kind: SensorKind = fields.next().expect("non-empty line").parse().expect("infallible");
    let timestamp = fields
        .next()
        .ok_or_else(|| err("missing timestamp".into()))?
        .parse::<u64>()
        .map_err(|e| err(format!("bad timestamp: {e}")))?;
    let values = fields
        .map(|f| f.parse::<f64>().map_err(|e| err(format!("bad value {f:?}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(err("no values".into()));
    }
    Ok(Some((kind, SensorSample { timestamp, values })))
}

pub fn format_sensor_line(kind: &SensorKind, sample: &SensorSample) -> String {
    let mut s = format!("{} {}", kind, sample.timestamp);
    for v in &sample.values {
        s.push(' ');
        s.push_str(&v.to_string());
    }
    s
}

/// All traces of one session, one per sensor kind.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SensorTraces(pub Vec<SensorTrace>);

impl SensorTraces {
    /// Admits a sample into the trace for its kind, creating the trace with
    /// the kind's default floor if needed.
    pub fn admit(&mut self, kind: SensorKind, sample: SensorSample) -> Result<Admission, SensorError> {
        let i = match self.0.iter().position(|t| t.kind == kind) {
            Some(i) => i,
            None => {
                self.0.push(SensorTrace::with_default_floor(kind));
                self.0.len() - 1
            }
        };
        self.0[i].admit_sample(sample)
    }

    pub fn iter(&self) -> impl Iterator<Item = &SensorTrace> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parses a sensor fixture file through the admission filter.
    pub fn from_fixture(text: &str) -> Result<Self, SensorError> {
        let mut traces = SensorTraces::default();
        for (i, line) in text.lines().enumerate() {
            if let Some((kind, sample)) = parse_sensor_line(line, i + 1)? {
                traces.admit(kind, sample)?;
            }
        }
        Ok(traces)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(ms: u64, v: &[f64]) -> SensorSample {
        SensorSample { timestamp: ms * 1000, values: v.to_vec() }
    }

    #[test]
    fn first_sample_always_admitted() {
        let mut t = SensorTrace::new(SensorKind::Gps, 1000);
        assert_eq!(t.admit_sample(s(77, &[1.0, 2.0])).unwrap(), Admission::Appended);
    }

    #[test]
    fn floor_filters() {
        let mut t = SensorTrace::new(SensorKind::Accelerometer, 50);
        for ms in [0, 30, 60] {
            t.admit_sample(s(ms, &[0.0, 0.0, 9.8])).unwrap();
        }
        let ts: Vec<_> = t.samples.iter().map(|x| x.timestamp).collect();
        assert_eq!(ts, vec![0, 60_000]);
    }

    #[test]
    fn arity_mismatch() {
        let mut t = SensorTrace::new(SensorKind::Accelerometer, 50);
        assert!(matches!(t.admit_sample(s(0, &[1.0, 2.0])), Err(SensorError::Arity { got: 2, .. })));
        let mut g = SensorTrace::new(SensorKind::Gps, 50);
        assert!(g.admit_sample(s(0, &[1.0, 2.0, 3.0])).is_ok());
        assert!(g.admit_sample(s(100, &[1.0])).is_err());
        assert!(matches!(g.admit_sample(s(5000, &[f64::NAN, 1.0])), Err(SensorError::NonFinite { .. })));
    }

    #[test]
    fn out_of_order_counted() {
        let mut t = SensorTrace::new(SensorKind::Accelerometer, 0);
        t.admit_sample(s(10, &[0.0; 3])).unwrap();
        assert_eq!(t.admit_sample(s(5, &[0.0; 3])).unwrap(), Admission::OutOfOrder);
        assert_eq!(t.out_of_order, 1);
        assert_eq!(t.samples.len(), 1);
    }

    #[test]
    fn summaries() {
        let empty = SensorTrace::new(SensorKind::Accelerometer, 50);
        assert_eq!(summarize_trace(&empty), TraceSummary { count: 0, t_span_us: None, axes: None });

        let mut c = SensorTrace::new(SensorKind::Accelerometer, 0);
        c.admit_sample(s(0, &[0.0, 0.0, 9.8])).unwrap();
        c.admit_sample(s(1, &[0.0, 0.0, 9.8])).unwrap();
        assert_eq!(summarize_trace(&c).axes.unwrap()[2].mean, 9.8);

        let mut z = SensorTrace::new(SensorKind::Accelerometer, 0);
        for (i, v) in [1.0, 2.0, 3.0].into_iter().enumerate() {
            z.admit_sample(s(i as u64, &[0.0, 0.0, v])).unwrap();
        }
        let sum = summarize_trace(&z);
        assert_eq!(sum.count, 3);
        assert_eq!(sum.t_span_us, Some(2000));
        let az = sum.axes.unwrap()[2];
        assert_eq!((az.min, az.max, az.mean), (1.0, 3.0, 2.0));
    }

    #[test]
    fn fixture_lines() {
        let traces = SensorTraces::from_fixture("# comment\naccelerometer 0 0 0 9.8\ngps 0 37.27 -76.71\naccelerometer 20000 0 0 9.7\n\nbarometer 5 1013.2\n").unwrap();
        let names: Vec<_> = traces.iter().map(|t| (t.kind.to_string(), t.samples.len())).collect();
        assert_eq!(names, vec![("accelerometer".into(), 1), ("gps".into(), 1), ("barometer".into(), 1)]);
        assert!(SensorTraces::from_fixture("gps x 1 2").is_err());
        assert!(SensorTraces::from_fixture("gps 10").is_err());
        let line = format_sensor_line(&SensorKind::Gps, &s(1, &[37.5, -76.25]));
        assert_eq!(parse_sensor_line(&line, 1).unwrap().unwrap().1, s(1, &[37.5, -76.25]));
    }

    proptest! {
        #[test]
        fn floor_holds_for_admitted_pairs(floor in 0u64..200, ts in prop::collection::vec(0u64..5_000_000, 0..200)) {
            let mut t = SensorTrace::new(SensorKind::Accelerometer, floor);
            for x in ts {
                t.admit_sample(SensorSample { timestamp: x, values: vec![0.0, 1.0, 2.0] }).unwrap();
            }
            for w in t.samples.windows(2) {
                prop_assert!(w[1].timestamp > w[0].timestamp);
                prop_assert!(w[1].timestamp - w[0].timestamp >= floor * 1000);
            }
        }

        #[test]
        fn readmitting_last_is_a_no_op(ts in prop::collection::vec(0u64..5_000_000, 1..50)) {
            let mut t = SensorTrace::new(SensorKind::Accelerometer, 50);
            for x in ts {
                t.admit_sample(SensorSample { timestamp: x, values: vec![0.0, 1.0, 2.0] }).unwrap();
            }
            let before = t.clone();
            let last = t.samples.last().unwrap().clone();
            t.admit_sample(last).unwrap();
            prop_assert_eq!(t, before);
        }

        #[test]
        fn min_max_ignore_order(mut vals in prop::collection::vec(-1000i32..1000, 1..40)) {
            let build = |vals: &[i32]| {
                let mut t = SensorTrace::new(SensorKind::Other("x".into()), 0);
                for (i, v) in vals.iter().enumerate() {
                    t.admit_sample(SensorSample { timestamp: i as u64, values: vec![f64::from(*v)] }).unwrap();
                }
                summarize_trace(&t).axes.unwrap()[0]
            };
            let a = build(&vals);
            vals.reverse();
            let b = build(&vals);
            prop_assert_eq!((a.min, a.max), (b.min, b.max));
            let exact = vals.iter().map(|v| f64::from(*v)).sum::<f64>() / vals.len() as f64;
            prop_assert_eq!(a.mean, exact);
        }
    }
}
