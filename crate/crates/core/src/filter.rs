//! First-order IIR low-pass isolating the slowly varying (gravity) part of
//! each accelerometer axis.
//!
//! Each axis follows `g[n] = alpha * g[n-1] + (1 - alpha) * a[n]`. The
//! first sample seeds the state directly so there is no start-up transient.

use crate::error::{Error, Result};
use crate::signal::{resultant_magnitude, AccelSample};

/// Smoothing factor used on smooth road.
pub const DEFAULT_ALPHA: f64 = 0.992;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "smoothing factor must lie in (0, 1), got {alpha}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterState {
    pub gx: f64,
    pub gy: f64,
    pub gz: f64,
    alpha: f64,
    initialized: bool,
}

impl Default for FilterState {
    fn default() -> Self {
        Self {
            gx: 0.0,
            gy: 0.0,
            gz: 0.0,
            alpha: DEFAULT_ALPHA,
            initialized: false,
        }
    }
}

impl FilterState {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            alpha,
            ..Self::default()
        })
    }

    /// A state that has already been seeded with `(gx, gy, gz)`.
    pub fn seeded(alpha: f64, seed: [f64; 3]) -> Result<Self> {
        let mut s = Self::new(alpha)?;
        [s.gx, s.gy, s.gz] = seed;
        s.initialized = true;
        Ok(s)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_initialized(&self) -> bool {
        self.initialized
    }

    /// Changes the smoothing factor for subsequent steps. Filter memory is
    /// kept.
    pub fn set_alpha(&mut self, alpha: f64) -> Result<()> {
        check_alpha(alpha)?;
        self.alpha = alpha;
        Ok(())
    }

    /// Forget the filter memory; the next sample seeds it again.
    pub fn reseed(&mut self) {
        self.initialized = false;
    }

    pub fn step(&mut self, sample: &AccelSample) -> Result<[f64; 3]> {
        check_alpha(self.alpha)?;
        let raw = [sample.ax, sample.ay, sample.az];
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSample(format!(
                "non-finite axis value at t={} ms",
                sample.t
            )));
        }
        if !self.initialized {
            [self.gx, self.gy, self.gz] = raw;
            self.initialized = true;
        } else {
            let a = self.alpha;
            self.gx = a * self.gx + (1.0 - a) * raw[0];
            self.gy = a * self.gy + (1.0 - a) * raw[1];
            self.gz = a * self.gz + (1.0 - a) * raw[2];
        }
        Ok([self.gx, self.gy, self.gz])
    }
}

/// Norm of the filtered axes.
pub fn gravity_magnitude(filtered: [f64; 3]) -> Result<f64> {
    resultant_magnitude(filtered[0], filtered[1], filtered[2])
}
