//! Bump detection from the local regularity of the filtered magnitude.
//!
//! [`lipschitz_algorithm1`] is the production estimator: it takes the
//! strongest modulus maximum of the finest Haar details, pairs it with the
//! nearest maximum one scale up, and combines their logarithms through a
//! fixed 2x2 inverse normal matrix. [`lipschitz_lsq`] is the general
//! least-squares fit of `log2 a = log2 A + beta * log2 j` and serves as a
//! reference.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{EventKind, RoadEvent};
use crate::signal::{Segment, SEGMENT_LEN};
use crate::wavelet::{dwt, find_peaks, HaarBasis, PeakPolicy, Peaks};

/// Inverse of the normal matrix used by the fixed estimator.
pub fn estimator_matrix() -> [[f64; 2]; 2] {
    let (a, b, c, d) = (4.0, 7.0, 7.0, 25.0);
    let det = a * d - b * c;
    [[d / det, -b / det], [-c / det, a / det]]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEstimate {
    pub beta_hat: f64,
    /// Largest finest-scale modulus maximum.
    pub p1: f64,
    /// Second-scale modulus maximum nearest to `p1`.
    pub p2: f64,
    /// Sample index inside the window where the singularity sits.
    pub loc: usize,
    /// False when either scale has no maxima; the other fields are then
    /// meaningless.
    pub valid: bool,
}

impl LipschitzEstimate {
    pub const INVALID: Self = Self {
        beta_hat: 0.0,
        p1: 0.0,
        p2: 0.0,
        loc: 0,
        valid: false,
    };
}

/// Everything the estimator looked at, for diagnostics output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Algorithm1Trace {
    pub estimate: LipschitzEstimate,
    /// Modulus maxima at scales 1, 2 and 3. Scale 3 is computed but never
    /// used by the estimate.
    pub peaks: [Peaks; 3],
}

/// Least-squares fit of `log2 a = log2 A + beta * log2 j` over
/// `(scale j, magnitude a)` pairs. Returns `(A, beta)`.
pub fn lipschitz_lsq(moduli: &[(f64, f64)]) -> Result<(f64, f64)> {
    if let Some(&(j, a)) = moduli.iter().find(|(j, a)| !(*j > 0.0 && *a > 0.0)) {
        return Err(Error::Domain(format!(
            "scales and magnitudes must be positive, got ({j}, {a})"
        )));
    }
    let n = moduli.len() as f64;
    let (mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(j, a) in moduli {
        let x = j.log2();
        let y = a.log2();
        sx += x;
        sxx += x * x;
        sy += y;
        sxy += x * y;
    }
    let det = n * sxx - sx * sx;
    if moduli.len() < 2 || det.abs() <= 1e-12 * (n * sxx).abs().max(1.0) {
        return Err(Error::DegenerateFit(
            "need at least two distinct scales".into(),
        ));
    }
    let beta = (n * sxy - sx * sy) / det;
    let log_a = (sxx * sy - sx * sxy) / det;
    Ok((log_a.exp2(), beta))
}

/// Regularity estimate of one window, with the peak sets it used.
pub fn lipschitz_trace(
    values: &[f64],
    basis: &HaarBasis,
    policy: PeakPolicy,
) -> Result<Algorithm1Trace> {
    if basis.size() != SEGMENT_LEN {
        return Err(Error::Config(format!(
            "regularity estimate needs a {SEGMENT_LEN}-point basis, got {}",
            basis.size()
        )));
    }
    if values.len() != SEGMENT_LEN {
        return Err(Error::Shape {
            expected: SEGMENT_LEN,
            actual: values.len(),
        });
    }
    let m = estimator_matrix();
    let coeffs = dwt(values, basis)?;
    let mag = |j: usize| -> Result<Vec<f64>> {
        Ok(coeffs.detail_scale(j)?.iter().map(|d| d.abs()).collect())
    };
    let fine = mag(1)?;
    let mid = mag(2)?;
    let coarse = mag(3)?;
    let peaks = [
        find_peaks(&fine, policy),
        find_peaks(&mid, policy),
        find_peaks(&coarse, policy),
    ];

    let n1 = fine.len() as f64;
    let n2 = mid.len() as f64;
    let estimate = match peaks[0].max() {
        Some((p1, location)) if !peaks[1].is_empty() => {
            // locations are normalized the way a 1-based peak finder reports them
            let norm1 = (location + 1) as f64 / n1;
            let mut best = 0;
            let mut best_dist = f64::INFINITY;
            for (i, &l2) in peaks[1].locs.iter().enumerate() {
                let dist = ((l2 + 1) as f64 / n2 - norm1).abs();
                if dist < best_dist {
                    best = i;
                    best_dist = dist;
                }
            }
            let p2 = peaks[1].values[best];
            let s = p1.log2() + p2.log2();
            LipschitzEstimate {
                beta_hat: m[1][0] * s + m[1][1] * 7.0 * s,
                p1,
                p2,
                loc: 2 * location + 1,
                valid: true,
            }
        }
        _ => LipschitzEstimate::INVALID,
    };
    Ok(Algorithm1Trace { estimate, peaks })
}

/// Window divided by its own mean, which removes a constant device gain
/// from the regularity estimate. `None` when the mean is not positive.
pub fn gain_normalized(values: &[f64; SEGMENT_LEN]) -> Option<[f64; SEGMENT_LEN]> {
    let mean = values.iter().sum::<f64>() / SEGMENT_LEN as f64;
    if !(mean.is_finite() && mean > 0.0) {
        return None;
    }
    Some(values.map(|v| v / mean))
}

/// Regularity estimate of one window.
pub fn lipschitz_algorithm1(segment: &Segment, basis: &HaarBasis) -> Result<LipschitzEstimate> {
    lipschitz_trace(&segment.values, basis, PeakPolicy::Strict).map(|t| t.estimate)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BumpConfig {
    /// A window is a bump candidate when its estimate reaches this value.
    pub beta_threshold: f64,
    /// Ground speed (m/s) below which candidates are ignored.
    pub min_speed: f64,
    /// Divide each window by its mean before estimating, so the decision
    /// does not depend on the handset's accelerometer gain.
    pub normalize_gain: bool,
    /// Whether candidates pass the speed gate when no speed is available.
    pub allow_unknown_speed: bool,
    /// Candidates closer than this collapse into one event.
    pub merge_window_ms: i64,
    /// Threshold (m/s^2) for the z-axis baseline detector.
    pub z_threshold: f64,
    pub peak_policy: PeakPolicy,
}

impl Default for BumpConfig {
    fn default() -> Self {
        Self {
            beta_threshold: DEFAULT_BETA_THRESHOLD,
            min_speed: 1.5,
            normalize_gain: true,
            allow_unknown_speed: true,
            merge_window_ms: 1000,
            z_threshold: 13.0,
            peak_policy: PeakPolicy::Strict,
        }
    }
}

/// Calibrated on the synthetic bump library (see `calibrate` example).
pub const DEFAULT_BETA_THRESHOLD: f64 = -9.1;

impl BumpConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.beta_threshold.is_finite() {
            return Err(Error::Config("beta_threshold must be finite".into()));
        }
        if !(self.min_speed.is_finite() && self.min_speed >= 0.0) {
            return Err(Error::Config(format!(
                "min_speed must be non-negative, got {}",
                self.min_speed
            )));
        }
        if self.merge_window_ms < 0 {
            return Err(Error::Config("merge_window_ms must be non-negative".into()));
        }
        Ok(())
    }
}

/// Decide whether a window holds a bump. `speed` is the ground speed at
/// the singularity, `None` when unknown.
pub fn detect_bump(
    est: &LipschitzEstimate,
    speed: Option<f64>,
    cfg: &BumpConfig,
    segment: &Segment,
) -> Option<RoadEvent> {
    if !est.valid || est.beta_hat < cfg.beta_threshold {
        return None;
    }
    let moving = match speed {
        Some(v) => v >= cfg.min_speed,
        None => cfg.allow_unknown_speed,
    };
    if !moving {
        return None;
    }
    let t = segment.time_at(est.loc);
    Some(RoadEvent {
        intensity: est.beta_hat,
        kind: EventKind::Bump,
        lat: None,
        lon: None,
        t_end: t,
        t_start: t,
        trip_id: String::new(),
    })
}

/// Collapses bump candidates that follow each other within a time window,
/// keeping the strongest (largest estimate) of each run.
#[derive(Debug, Clone)]
pub struct BumpMerger {
    window_ms: i64,
    pending: Option<(RoadEvent, i64)>,
}

impl BumpMerger {
    pub fn new(window_ms: i64) -> Self {
        Self {
            window_ms,
            pending: None,
        }
    }

    /// Feed a candidate; returns a finished event once a candidate arrives
    /// outside the current run.
    pub fn push(&mut self, ev: RoadEvent) -> Option<RoadEvent> {
        match self.pending.take() {
            Some((best, last_t)) if ev.t_start - last_t <= self.window_ms => {
                let t = ev.t_start;
                let keep = if ev.intensity > best.intensity {
                    ev
                } else {
                    best
                };
                self.pending = Some((keep, t));
                None
            }
            prev => {
                let t = ev.t_start;
                self.pending = Some((ev, t));
                prev.map(|(e, _)| e)
            }
        }
    }

    /// Time of the last candidate in the open run.
    pub fn pending_since(&self) -> Option<i64> {
        self.pending.as_ref().map(|p| p.1)
    }

    pub fn finish(&mut self) -> Option<RoadEvent> {
        self.pending.take().map(|(e, _)| e)
    }
}

/// Baseline detector: flags samples whose z-axis reading exceeds the
/// threshold.
pub fn z_threshold_baseline(z: &[f64], threshold: f64) -> Vec<bool> {
    z.iter().map(|&v| v > threshold).collect()
}

/// Groups flagged samples of the z-axis baseline into detections, merging
/// flags closer than `merge_window_ms`. Returns the time of the first flag
/// of each detection.
pub fn z_threshold_detections(
    samples: &[(i64, f64)],
    threshold: f64,
    merge_window_ms: i64,
) -> Vec<i64> {
    let z: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let flags = z_threshold_baseline(&z, threshold);
    let mut out: Vec<i64> = Vec::new();
    let mut last: Option<i64> = None;
    for (&(t, _), flagged) in samples.iter().zip(flags) {
        if !flagged {
            continue;
        }
        if last.is_none_or(|l| t - l > merge_window_ms) {
            out.push(t);
        }
        last = Some(t);
    }
    out
}
