//! Road events, per-trip reports and their canonical text form.
//!
//! Reports are pretty-printed JSON with keys in sorted order and fixed
//! decimal precision (6 places for degrees, 3 for intensities, integer
//! milliseconds), so that identical runs produce identical bytes.

use serde::ser::Error as _;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};

/// Version of the report, map and config layouts.
pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Bump,
    Rough,
}

impl std::fmt::Display for EventKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EventKind::Bump => "bump",
            EventKind::Rough => "rough",
        })
    }
}

pub(crate) fn round_to(v: f64, places: i32) -> f64 {
    let scale = 10f64.powi(places);
    (v * scale).round() / scale
}

fn raw<S: Serializer>(text: String, s: S) -> std::result::Result<S::Ok, S::Error> {
    RawValue::from_string(text)
        .map_err(S::Error::custom)?
        .serialize(s)
}

pub(crate) fn fixed3<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if !v.is_finite() {
        return Err(S::Error::custom("non-finite value in report"));
    }
    raw(format!("{v:.3}"), s)
}

pub(crate) fn fixed6<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if !v.is_finite() {
        return Err(S::Error::custom("non-finite value in report"));
    }
    raw(format!("{v:.6}"), s)
}

pub(crate) fn opt_fixed6<S: Serializer>(
    v: &Option<f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => fixed6(x, s),
        None => s.serialize_none(),
    }
}

/// A detected bump or rough stretch of road.
///
/// `intensity` is the roughness level (1..=3) for rough events and the
/// estimated regularity exponent for bumps. Fields are declared in key
/// order for the canonical serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadEvent {
    #[serde(serialize_with = "fixed3")]
    pub intensity: f64,
    pub kind: EventKind,
    #[serde(serialize_with = "opt_fixed6")]
    pub lat: Option<f64>,
    #[serde(serialize_with = "opt_fixed6")]
    pub lon: Option<f64>,
    pub t_end: i64,
    pub t_start: i64,
    pub trip_id: String,
}

impl RoadEvent {
    /// Rounds floating fields to their serialized precision so the event
    /// survives a write/parse cycle unchanged.
    pub fn quantized(mut self) -> Self {
        self.intensity = round_to(self.intensity, 3);
        self.lat = self.lat.map(|v| round_to(v, 6));
        self.lon = self.lon.map(|v| round_to(v, 6));
        self
    }

    pub fn location(&self) -> Option<(f64, f64)> {
        self.lat.zip(self.lon)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripStats {
    /// Accelerometer samples that never became part of a window: partial
    /// windows at dropouts and at the end of the trip.
    pub dropped_samples: u64,
    /// GPS gaps longer than the dropout limit.
    pub gps_gap_count: u64,
    /// Data rows skipped by the CSV reader.
    pub malformed_rows: u64,
    pub segment_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripReport {
    pub device_id: String,
    pub events: Vec<RoadEvent>,
    #[serde(serialize_with = "fixed3")]
    pub sample_rate: f64,
    pub schema_version: String,
    pub stats: TripStats,
    pub trip_id: String,
}

impl TripReport {
    /// Canonical text form.
    pub fn to_canonical_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Format(format!("cannot serialize report: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    pub fn events_sorted(&self) -> bool {
        self.events.windows(2).all(|w| w[0].t_start <= w[1].t_start)
    }
}

impl std::str::FromStr for TripReport {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(format!("bad report: {e}")))
    }
}

pub fn write_report(report: &TripReport) -> Result<String> {
    report.to_canonical_string()
}
