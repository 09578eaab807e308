//! Sample types, resultant magnitude and fixed-size windowing of the
//! filtered magnitude stream.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of samples in one analysis window.
pub const SEGMENT_LEN: usize = 32;

/// One timestamped 3-axis accelerometer reading in device axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccelSample {
    /// Milliseconds since trip start.
    pub t: i64,
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
}

impl AccelSample {
    pub fn new(t: i64, ax: f64, ay: f64, az: f64) -> Result<Self> {
        if !(ax.is_finite() && ay.is_finite() && az.is_finite()) {
            return Err(Error::InvalidSample(format!(
                "non-finite axis value at t={t} ms"
            )));
        }
        Ok(Self { t, ax, ay, az })
    }

    pub fn magnitude(&self) -> Result<f64> {
        resultant_magnitude(self.ax, self.ay, self.az)
    }
}

/// Accelerometer sampling rate in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SampleRate(f64);

impl SampleRate {
    pub fn new(hz: f64) -> Result<Self> {
        if hz.is_finite() && hz > 0.0 {
            Ok(Self(hz))
        } else {
            Err(Error::Config(format!(
                "sample rate must be positive, got {hz}"
            )))
        }
    }

    pub fn hz(self) -> f64 {
        self.0
    }

    /// Nominal sample period in milliseconds.
    pub fn period_ms(self) -> f64 {
        1000.0 / self.0
    }
}

impl Default for SampleRate {
    fn default() -> Self {
        Self(50.0)
    }
}

impl TryFrom<f64> for SampleRate {
    type Error = Error;
    fn try_from(hz: f64) -> Result<Self> {
        Self::new(hz)
    }
}

impl From<SampleRate> for f64 {
    fn from(r: SampleRate) -> f64 {
        r.0
    }
}

/// A window of filtered gravity magnitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub index: u64,
    pub values: [f64; SEGMENT_LEN],
    pub t_start: i64,
    pub t_end: i64,
}

impl Segment {
    /// Timestamp of the sample at `pos` inside the window, linearly
    /// interpolated between the window bounds.
    pub fn time_at(&self, pos: usize) -> i64 {
        let span = (self.t_end - self.t_start) as f64;
        let frac = pos.min(SEGMENT_LEN - 1) as f64 / (SEGMENT_LEN - 1) as f64;
        self.t_start + (span * frac).round() as i64
    }
}

/// Euclidean norm of a 3-axis reading.
pub fn resultant_magnitude(ax: f64, ay: f64, az: f64) -> Result<f64> {
    if !(ax.is_finite() && ay.is_finite() && az.is_finite()) {
        return Err(Error::InvalidSample(format!(
            "non-finite components ({ax}, {ay}, {az})"
        )));
    }
    Ok((ax * ax + ay * ay + az * az).sqrt())
}

/// Incremental windowing. Consecutive windows share `overlap` samples;
/// with the default of 0 they tile the stream.
#[derive(Debug, Clone)]
pub struct Segmenter {
    buf: VecDeque<(i64, f64)>,
    hop: usize,
    next_index: u64,
    since_emit: usize,
    // true until the buffer has filled once since construction or reset
    fresh: bool,
}

impl Segmenter {
    pub fn new(overlap: usize) -> Result<Self> {
        if overlap >= SEGMENT_LEN {
            return Err(Error::Config(format!(
                "segment overlap must be below {SEGMENT_LEN}, got {overlap}"
            )));
        }
        Ok(Self {
            buf: VecDeque::with_capacity(SEGMENT_LEN),
            hop: SEGMENT_LEN - overlap,
            next_index: 0,
            since_emit: 0,
            fresh: true,
        })
    }

    pub fn push(&mut self, t: i64, value: f64) -> Option<Segment> {
        if self.buf.len() == SEGMENT_LEN {
            self.buf.pop_front();
        }
        self.buf.push_back((t, value));
        self.since_emit += 1;

        if self.buf.len() < SEGMENT_LEN || !(self.fresh || self.since_emit >= self.hop) {
            return None;
        }
        self.fresh = false;
        self.since_emit = 0;

        let mut values = [0.0; SEGMENT_LEN];
        for (slot, &(_, v)) in values.iter_mut().zip(self.buf.iter()) {
            *slot = v;
        }
        let seg = Segment {
            index: self.next_index,
            values,
            t_start: self.buf.front().map_or(t, |p| p.0),
            t_end: t,
        };
        self.next_index += 1;
        Some(seg)
    }

    /// Drops any partially filled window, returning how many samples never
    /// made it into a segment. Segment numbering continues.
    pub fn reset(&mut self) -> usize {
        let dropped = if self.fresh {
            self.buf.len()
        } else {
            self.since_emit
        };
        self.buf.clear();
        self.since_emit = 0;
        self.fresh = true;
        dropped
    }

    /// Samples currently held.
    pub fn buffered(&self) -> usize {
        self.buf.len()
    }

    /// Samples received since the last emitted window (or since reset).
    pub fn pending(&self) -> usize {
        if self.fresh {
            self.buf.len()
        } else {
            self.since_emit
        }
    }
}

/// Splits an ordered magnitude stream into windows. Any trailing remainder
/// shorter than a window is discarded.
pub fn segment_stream(magnitudes: &[(i64, f64)]) -> Vec<Segment> {
    segment_stream_with_overlap(magnitudes, 0).expect("zero overlap is always valid")
}

pub fn segment_stream_with_overlap(
    magnitudes: &[(i64, f64)],
    overlap: usize,
) -> Result<Vec<Segment>> {
    let mut seg = Segmenter::new(overlap)?;
    Ok(magnitudes
        .iter()
        .filter_map(|&(t, v)| seg.push(t, v))
        .collect())
}
