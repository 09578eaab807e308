//! Single-pass trip analysis:
//! filter -> magnitude -> window -> Haar -> {roughness, bumps} -> geotag.
//!
//! State is constant-size apart from the list of finished events (and the
//! optional per-window diagnostics).

use serde::{Deserialize, Serialize};

use crate::bump::{
    detect_bump, gain_normalized, lipschitz_trace, Algorithm1Trace, BumpMerger, LipschitzEstimate,
};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::filter::{gravity_magnitude, FilterState};
use crate::geo::{count_gaps, in_gap, interpolate_position, speed_at, GpsFix};
use crate::report::{EventKind, RoadEvent, TripReport, TripStats, SCHEMA_VERSION};
use crate::roughness::{RoughTracker, RoughnessState};
use crate::signal::{AccelSample, Segment, Segmenter, SEGMENT_LEN};
use crate::wavelet::{dwt, HaarBasis, Peaks};

/// Identity of the trip being analysed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripMeta {
    pub trip_id: String,
    pub device_id: String,
}

impl TripMeta {
    pub fn new(trip_id: impl Into<String>, device_id: impl Into<String>) -> Self {
        Self {
            trip_id: trip_id.into(),
            device_id: device_id.into(),
        }
    }
}

/// Per-window record for the diagnostics stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentDiagnostics {
    pub segment_index: u64,
    pub t_start: i64,
    pub t_end: i64,
    pub sigma_hat: f64,
    pub roughness_level: usize,
    pub alpha: f64,
    pub estimate: LipschitzEstimate,
    pub speed: Option<f64>,
    pub peaks_scale1: Peaks,
    pub peaks_scale2: Peaks,
    pub peaks_scale3: Peaks,
}

pub struct Pipeline<'a> {
    cfg: Config,
    meta: TripMeta,
    fixes: &'a [GpsFix],
    basis: HaarBasis,
    filter: FilterState,
    roughness: RoughnessState,
    rough: RoughTracker,
    bumps: BumpMerger,
    segmenter: Segmenter,
    max_gap_ms: f64,
    last_t: Option<i64>,
    stats: TripStats,
    events: Vec<RoadEvent>,
    diagnostics: Option<Vec<SegmentDiagnostics>>,
    peak_buffered: usize,
}

impl<'a> Pipeline<'a> {
    pub fn new(cfg: &Config, meta: TripMeta, fixes: &'a [GpsFix]) -> Result<Self> {
        cfg.validate()?;
        let rate = cfg.sample_rate()?;
        Ok(Self {
            basis: HaarBasis::new(SEGMENT_LEN)?,
            filter: FilterState::new(cfg.signal.initial_alpha)?,
            roughness: RoughnessState::new(cfg.roughness.clone())?,
            rough: RoughTracker::new(cfg.roughness.hold_off_segments),
            bumps: BumpMerger::new(cfg.bump.merge_window_ms),
            segmenter: Segmenter::new(cfg.signal.segment_overlap)?,
            max_gap_ms: cfg.signal.max_gap_periods * rate.period_ms(),
            last_t: None,
            stats: TripStats {
                gps_gap_count: count_gaps(fixes, cfg.geo.max_gap_ms) as u64,
                ..TripStats::default()
            },
            events: Vec::new(),
            diagnostics: None,
            peak_buffered: 0,
            cfg: cfg.clone(),
            meta,
            fixes,
        })
    }

    /// Keep a per-window diagnostics record.
    pub fn with_diagnostics(mut self) -> Self {
        self.diagnostics = Some(Vec::new());
        self
    }

    /// Most samples the windowing stage held at once.
    pub fn peak_buffered(&self) -> usize {
        self.peak_buffered
    }

    pub fn set_malformed_rows(&mut self, n: usize) {
        self.stats.malformed_rows = n as u64;
    }

    pub fn push_sample(&mut self, sample: &AccelSample) -> Result<()> {
        if let Some(prev) = self.last_t {
            if sample.t < prev {
                return Err(Error::Ordering {
                    line: 0,
                    t: sample.t,
                    prev,
                });
            }
            if (sample.t - prev) as f64 > self.max_gap_ms {
                self.filter.reseed();
                self.stats.dropped_samples += self.segmenter.reset() as u64;
            }
        }
        self.last_t = Some(sample.t);

        let filtered = self.filter.step(sample)?;
        let magnitude = gravity_magnitude(filtered)?;
        let segment = self.segmenter.push(sample.t, magnitude);
        self.peak_buffered = self.peak_buffered.max(self.segmenter.buffered());
        if let Some(seg) = segment {
            let index = seg.index;
            self.process_segment(seg).map_err(|e| Error::AtSegment {
                index,
                source: Box::new(e),
            })?;
        }
        Ok(())
    }

    fn process_segment(&mut self, seg: Segment) -> Result<()> {
        self.stats.segment_count += 1;
        let coeffs = dwt(&seg.values, &self.basis)?;
        let level = self
            .roughness
            .classify_segment(&seg, &coeffs, &mut self.filter)?;
        if let Some(ev) = self.rough.observe(&seg, level) {
            self.emit(ev);
        }

        let trace = if self.cfg.bump.normalize_gain {
            match gain_normalized(&seg.values) {
                Some(v) => lipschitz_trace(&v, &self.basis, self.cfg.bump.peak_policy)?,
                None => Algorithm1Trace {
                    estimate: LipschitzEstimate::INVALID,
                    peaks: Default::default(),
                },
            }
        } else {
            lipschitz_trace(&seg.values, &self.basis, self.cfg.bump.peak_policy)?
        };
        let est = trace.estimate;
        let speed = if est.valid {
            speed_at(self.fixes, seg.time_at(est.loc)).ok()
        } else {
            None
        };
        if let Some(ev) = detect_bump(&est, speed, &self.cfg.bump, &seg) {
            if let Some(done) = self.bumps.push(ev) {
                self.emit(done);
            }
        }

        if let Some(diag) = self.diagnostics.as_mut() {
            let [p1, p2, p3] = trace.peaks;
            diag.push(SegmentDiagnostics {
                segment_index: seg.index,
                t_start: seg.t_start,
                t_end: seg.t_end,
                sigma_hat: self.roughness.history().next().map_or(0.0, |e| e.sigma_hat),
                roughness_level: level,
                alpha: self.roughness.alpha(),
                estimate: est,
                speed,
                peaks_scale1: p1,
                peaks_scale2: p2,
                peaks_scale3: p3,
            });
        }
        Ok(())
    }

    fn emit(&mut self, mut ev: RoadEvent) {
        let t = match ev.kind {
            EventKind::Bump => ev.t_start,
            EventKind::Rough => ev.t_start + (ev.t_end - ev.t_start) / 2,
        };
        let location = if in_gap(self.fixes, t, self.cfg.geo.max_gap_ms) {
            None
        } else {
            interpolate_position(self.fixes, t).ok()
        };
        ev.lat = location.map(|l| l.0);
        ev.lon = location.map(|l| l.1);
        ev.trip_id = self.meta.trip_id.clone();
        self.events.push(ev.quantized());
    }

    /// Closes open events and returns the report (plus diagnostics when
    /// enabled).
    pub fn finish(mut self) -> (TripReport, Option<Vec<SegmentDiagnostics>>) {
        self.stats.dropped_samples += self.segmenter.pending() as u64;
        if let Some(ev) = self.rough.finish() {
            self.emit(ev);
        }
        if let Some(ev) = self.bumps.finish() {
            self.emit(ev);
        }
        self.events.sort_by_key(|e| (e.t_start, e.kind, e.t_end));
        let report = TripReport {
            device_id: self.meta.device_id,
            events: self.events,
            sample_rate: self.cfg.signal.sample_rate_hz,
            schema_version: SCHEMA_VERSION.to_string(),
            stats: self.stats,
            trip_id: self.meta.trip_id,
        };
        (report, self.diagnostics)
    }
}

/// Runs the whole pipeline over one trip.
pub fn run_pipeline(
    samples: &[AccelSample],
    fixes: &[GpsFix],
    cfg: &Config,
    meta: TripMeta,
) -> Result<TripReport> {
    let mut p = Pipeline::new(cfg, meta, fixes)?;
    for s in samples {
        p.push_sample(s)?;
    }
    Ok(p.finish().0)
}
