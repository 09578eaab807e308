//! Road roughness from the noise left in the filtered magnitude.
//!
//! Each window's noise level is estimated from the median absolute
//! deviation of its finest-scale Haar details. A forgetting-factor cost
//! over the last `l` estimates picks one of four smoothing factors, and the
//! index of that factor is the roughness level reported for the window.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::FilterState;
use crate::report::{EventKind, RoadEvent};
use crate::signal::Segment;
use crate::wavelet::WaveletCoeffs;

/// Scale factor relating the MAD of Gaussian samples to their standard
/// deviation.
pub const MAD_GAUSSIAN: f64 = 0.6745;

/// Standard gravity used to express noise estimates in g.
pub const STANDARD_GRAVITY: f64 = 9.8;

/// Median of `values`; the mean of the two central order statistics for
/// even lengths. Returns `None` for an empty slice.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Noise standard deviation from the finest-scale details.
pub fn estimate_sigma(coeffs: &WaveletCoeffs) -> f64 {
    let abs: Vec<f64> = coeffs.finest().iter().map(|d| d.abs()).collect();
    median(&abs).map_or(0.0, |m| m / MAD_GAUSSIAN)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseEstimate {
    pub sigma_hat: f64,
    pub segment_index: u64,
}

/// Piecewise map from cost to smoothing factor.
///
/// `alphas[0]` applies below every bound; `alphas[i]` applies for
/// `J >= bounds[i - 1] * l` (the highest matching bound wins). Bounds must
/// increase strictly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSchedule {
    pub alphas: [f64; 4],
    pub bounds: [f64; 3],
}

impl Default for AlphaSchedule {
    fn default() -> Self {
        Self {
            alphas: [0.992, 0.995, 0.996, 0.998],
            bounds: [0.007, 0.008, 0.01],
        }
    }
}

impl AlphaSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            return Err(Error::Config(format!(
                "schedule smoothing factors must lie in (0, 1): {:?}",
                self.alphas
            )));
        }
        let increasing = self.bounds.windows(2).all(|w| w[0] < w[1]);
        if !increasing || self.bounds.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::Config(format!(
                "schedule bounds must be finite, non-negative and increasing: {:?}",
                self.bounds
            )));
        }
        Ok(())
    }

    /// Roughness level (0 = smooth) for cost `j` with `taps` delays.
    pub fn level(&self, j: f64, taps: usize) -> usize {
        let l = taps as f64;
        self.bounds
            .iter()
            .rposition(|b| j >= b * l)
            .map_or(0, |i| i + 1)
    }

    pub fn alpha(&self, j: f64, taps: usize) -> f64 {
        self.alphas[self.level(j, taps)]
    }
}

/// Smoothing factor for cost `j` under the default schedule.
pub fn update_alpha(j: f64, taps: usize) -> f64 {
    AlphaSchedule::default().alpha(j, taps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoughnessConfig {
    /// Forgetting factor, 0 < lambda <= 1.
    pub lambda: f64,
    /// Number of tapped delays in the cost.
    pub taps_l: usize,
    pub thresholds: AlphaSchedule,
    /// Consecutive smooth windows needed to close a rough event.
    pub hold_off_segments: usize,
    /// Divisor applied to noise estimates before costing (9.8 = g units).
    pub sigma_normalization: f64,
}

impl Default for RoughnessConfig {
    fn default() -> Self {
        Self {
            lambda: 0.9,
            taps_l: 8,
            thresholds: AlphaSchedule::default(),
            hold_off_segments: 4,
            sigma_normalization: STANDARD_GRAVITY,
        }
    }
}

impl RoughnessConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::Config(format!(
                "forgetting factor must lie in (0, 1], got {}",
                self.lambda
            )));
        }
        if self.taps_l == 0 {
            return Err(Error::Config("taps_l must be at least 1".into()));
        }
        if !(self.sigma_normalization.is_finite() && self.sigma_normalization > 0.0) {
            return Err(Error::Config(format!(
                "sigma_normalization must be positive, got {}",
                self.sigma_normalization
            )));
        }
        self.thresholds.validate()
    }
}

#[derive(Debug, Clone)]
pub struct RoughnessState {
    cfg: RoughnessConfig,
    // newest at the front
    history: VecDeque<NoiseEstimate>,
    alpha: f64,
    level: usize,
}

impl RoughnessState {
    pub fn new(cfg: RoughnessConfig) -> Result<Self> {
        cfg.validate()?;
        let alpha = cfg.thresholds.alphas[0];
        Ok(Self {
            history: VecDeque::with_capacity(cfg.taps_l),
            cfg,
            alpha,
            level: 0,
        })
    }

    pub fn config(&self) -> &RoughnessConfig {
        &self.cfg
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Estimates from newest to oldest.
    pub fn history(&self) -> impl Iterator<Item = &NoiseEstimate> {
        self.history.iter()
    }

    pub fn push_estimate(&mut self, est: NoiseEstimate) {
        if self.history.len() == self.cfg.taps_l {
            self.history.pop_back();
        }
        self.history.push_front(est);
    }

    /// Forgetting-factor cost: the newest estimate has weight 1, the one
    /// before it `lambda`, and so on.
    pub fn cost(&self) -> Result<f64> {
        if self.history.is_empty() {
            return Err(Error::InsufficientData(
                "roughness cost needs at least one noise estimate".into(),
            ));
        }
        let mut weight = 1.0;
        let mut j = 0.0;
        for est in &self.history {
            j += weight * est.sigma_hat / self.cfg.sigma_normalization;
            weight *= self.cfg.lambda;
        }
        Ok(j)
    }

    /// Folds one window into the state, retunes `filter` and returns the
    /// window's roughness level.
    pub fn classify_segment(
        &mut self,
        segment: &Segment,
        coeffs: &WaveletCoeffs,
        filter: &mut FilterState,
    ) -> Result<usize> {
        self.push_estimate(NoiseEstimate {
            sigma_hat: estimate_sigma(coeffs),
            segment_index: segment.index,
        });
        let j = self.cost()?;
        self.level = self.cfg.thresholds.level(j, self.cfg.taps_l);
        self.alpha = self.cfg.thresholds.alphas[self.level];
        filter.set_alpha(self.alpha)?;
        Ok(self.level)
    }
}

/// Turns the per-window level sequence into rough events.
///
/// An event opens on the first window with level > 0 and closes once
/// `hold_off` consecutive windows come back at level 0. Its span covers
/// the first through the last rough window and its intensity is the
/// highest level seen.
#[derive(Debug, Clone)]
pub struct RoughTracker {
    hold_off: usize,
    open: Option<OpenRough>,
}

#[derive(Debug, Clone)]
struct OpenRough {
    t_start: i64,
    t_last_rough: i64,
    max_level: usize,
    smooth_run: usize,
}

impl RoughTracker {
    pub fn new(hold_off: usize) -> Self {
        Self {
            hold_off: hold_off.max(1),
            open: None,
        }
    }

    pub fn is_open(&self) -> bool {
        self.open.is_some()
    }

    pub fn observe(&mut self, segment: &Segment, level: usize) -> Option<RoadEvent> {
        match (&mut self.open, level) {
            (None, 0) => None,
            (None, lvl) => {
                self.open = Some(OpenRough {
                    t_start: segment.t_start,
                    t_last_rough: segment.t_end,
                    max_level: lvl,
                    smooth_run: 0,
                });
                None
            }
            (Some(ev), 0) => {
                ev.smooth_run += 1;
                if ev.smooth_run >= self.hold_off {
                    self.finish()
                } else {
                    None
                }
            }
            (Some(ev), lvl) => {
                ev.smooth_run = 0;
                ev.t_last_rough = segment.t_end;
                ev.max_level = ev.max_level.max(lvl);
                None
            }
        }
    }

    /// Closes any open event, e.g. at the end of the trip.
    pub fn finish(&mut self) -> Option<RoadEvent> {
        self.open.take().map(|ev| RoadEvent {
            intensity: ev.max_level as f64,
            kind: EventKind::Rough,
            lat: None,
            lon: None,
            t_end: ev.t_last_rough,
            t_start: ev.t_start,
            trip_id: String::new(),
        })
    }
}
