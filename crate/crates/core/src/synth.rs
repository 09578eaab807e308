//! Synthetic trips with known ground truth.
//!
//! Accelerometer rows are `gain * (gravity + baseline noise + rough-road
//! noise + bump pulses)` at 50 Hz. Road vibration (rough noise and bumps)
//! acts along the gravity direction; baseline sensor noise is independent
//! per axis. GPS fixes arrive at 1 Hz along a straight northbound path
//! integrated from the speed profile.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{GpsFix, EARTH_RADIUS_M};
use crate::report::EventKind;
use crate::roughness::STANDARD_GRAVITY;
use crate::signal::AccelSample;
use crate::tripio::write_trip_csv;

pub const SYNTH_RATE_HZ: f64 = 50.0;
const SAMPLE_MS: i64 = 20;
const GPS_MS: i64 = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoughSpan {
    pub start_s: f64,
    pub end_s: f64,
    pub sigma_g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSpec {
    pub t_s: f64,
    pub height_g: f64,
    #[serde(default = "default_width")]
    pub width_samples: usize,
}

fn default_width() -> usize {
    6
}

/// Constant speed from `t_s` until the next step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedStep {
    pub t_s: f64,
    pub speed_mps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpsDropout {
    pub start_s: f64,
    pub end_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub duration_s: f64,
    #[serde(default = "default_orientation")]
    pub base_gravity_orientation: [f64; 3],
    #[serde(default = "default_gain")]
    pub device_gain: f64,
    #[serde(default = "default_noise")]
    pub noise_sigma_g: f64,
    #[serde(default)]
    pub rough_segments: Vec<RoughSpan>,
    #[serde(default)]
    pub bumps: Vec<BumpSpec>,
    #[serde(default = "default_speed")]
    pub speed_profile: Vec<SpeedStep>,
    #[serde(default)]
    pub gps_dropouts: Vec<GpsDropout>,
    #[serde(default = "default_origin")]
    pub origin: [f64; 2],
    pub rng_seed: u64,
}

fn default_orientation() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}
fn default_gain() -> f64 {
    1.0
}
fn default_noise() -> f64 {
    0.01
}
fn default_speed() -> Vec<SpeedStep> {
    vec![SpeedStep {
        t_s: 0.0,
        speed_mps: 5.0,
    }]
}
fn default_origin() -> [f64; 2] {
    [1.3521, 103.8198]
}

impl Scenario {
    /// A quiet ride at 5 m/s with no hazards.
    pub fn quiet(duration_s: f64, rng_seed: u64) -> Self {
        Self {
            duration_s,
            base_gravity_orientation: default_orientation(),
            device_gain: default_gain(),
            noise_sigma_g: default_noise(),
            rough_segments: Vec::new(),
            bumps: Vec::new(),
            speed_profile: default_speed(),
            gps_dropouts: Vec::new(),
            origin: default_origin(),
            rng_seed,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let s: Scenario =
            toml::from_str(text).map_err(|e| Error::Scenario(format!("bad scenario file: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Scenario(m));
        let d = self.duration_s;
        if !(d.is_finite() && d > 0.0) {
            return bad(format!("duration_s must be positive, got {d}"));
        }
        if !(self.device_gain.is_finite() && self.device_gain > 0.0) {
            return bad(format!(
                "device_gain must be positive, got {}",
                self.device_gain
            ));
        }
        if !(self.noise_sigma_g.is_finite() && self.noise_sigma_g >= 0.0) {
            return bad("noise_sigma_g must be non-negative".into());
        }
        let o = self.base_gravity_orientation;
        let norm = (o[0] * o[0] + o[1] * o[1] + o[2] * o[2]).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return bad("base_gravity_orientation must be a non-zero vector".into());
        }
        for r in &self.rough_segments {
            if !(0.0 <= r.start_s && r.start_s < r.end_s && r.end_s <= d) {
                return bad(format!(
                    "rough segment {}..{} outside 0..{d}",
                    r.start_s, r.end_s
                ));
            }
            if !(r.sigma_g.is_finite() && r.sigma_g >= 0.0) {
                return bad("rough sigma_g must be non-negative".into());
            }
        }
        for b in &self.bumps {
            if !(0.0 <= b.t_s && b.t_s <= d) {
                return bad(format!("bump at {} s outside 0..{d}", b.t_s));
            }
            if b.width_samples == 0 || !b.height_g.is_finite() {
                return bad("bumps need a finite height and a width of at least one sample".into());
            }
        }
        if self.speed_profile.first().map(|s| s.t_s) != Some(0.0) {
            return bad("speed_profile must start at t_s = 0".into());
        }
        if !self.speed_profile.windows(2).all(|w| w[0].t_s < w[1].t_s) {
            return bad("speed_profile steps must be strictly increasing in time".into());
        }
        if self
            .speed_profile
            .iter()
            .any(|s| !(s.speed_mps.is_finite() && s.speed_mps >= 0.0))
        {
            return bad("speeds must be non-negative".into());
        }
        for g in &self.gps_dropouts {
            if !(g.start_s < g.end_s) {
                return bad("gps dropout must end after it starts".into());
            }
        }
        let [lat, lon] = self.origin;
        if !((-80.0..=80.0).contains(&lat) && (-180.0..=180.0).contains(&lon)) {
            return bad("origin out of range".into());
        }
        Ok(())
    }

    /// Distance travelled (m) after `t_s` seconds.
    pub fn distance_at(&self, t_s: f64) -> f64 {
        let mut dist = 0.0;
        for (i, step) in self.speed_profile.iter().enumerate() {
            if t_s <= step.t_s {
                break;
            }
            let end = self
                .speed_profile
                .get(i + 1)
                .map_or(t_s, |n| n.t_s.min(t_s));
            dist += step.speed_mps * (end - step.t_s);
        }
        dist
    }

    pub fn speed_at(&self, t_s: f64) -> f64 {
        self.speed_profile
            .iter()
            .rev()
            .find(|s| s.t_s <= t_s)
            .map_or(0.0, |s| s.speed_mps)
    }

    /// Position (lat, lon) after `t_s` seconds.
    pub fn position_at(&self, t_s: f64) -> (f64, f64) {
        let dlat = (self.distance_at(t_s) / EARTH_RADIUS_M).to_degrees();
        (self.origin[0] + dlat, self.origin[1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelEvent {
    /// Injected height (bumps, in g) or noise level (rough, in g).
    pub amplitude_g: f64,
    pub kind: EventKind,
    pub t_end_ms: i64,
    pub t_start_ms: i64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Labels {
    pub events: Vec<LabelEvent>,
}

impl Labels {
    pub fn of_kind(&self, kind: EventKind) -> impl Iterator<Item = &LabelEvent> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Format(format!("cannot serialize labels: {e}")))?;
        s.push('\n');
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTrip {
    pub samples: Vec<AccelSample>,
    pub fixes: Vec<GpsFix>,
    pub labels: Labels,
}

impl SyntheticTrip {
    pub fn to_csv(&self) -> String {
        write_trip_csv(&self.samples, &self.fixes)
    }
}

fn raised_cosine(height: f64, width: usize, m: usize) -> f64 {
    height * 0.5 * (1.0 - (2.0 * PI * (m + 1) as f64 / (width + 1) as f64).cos())
}

pub fn generate_trip(s: &Scenario) -> Result<SyntheticTrip> {
    s.validate()?;
    let g = STANDARD_GRAVITY;
    let o = s.base_gravity_orientation;
    let norm = (o[0] * o[0] + o[1] * o[1] + o[2] * o[2]).sqrt();
    let up = [o[0] / norm, o[1] / norm, o[2] / norm];

    let n = (s.duration_s * SYNTH_RATE_HZ).floor() as usize;
    let mut pulse = vec![0.0; n];
    for b in &s.bumps {
        let center = (b.t_s * SYNTH_RATE_HZ).round() as i64;
        let start = center - (b.width_samples as i64 - 1) / 2;
        for m in 0..b.width_samples {
            let idx = start + m as i64;
            if (0..n as i64).contains(&idx) {
                pulse[idx as usize] += raised_cosine(b.height_g * g, b.width_samples, m);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(s.rng_seed);
    let mut samples = Vec::with_capacity(n);
    for (i, &bump) in pulse.iter().enumerate() {
        let t_ms = i as i64 * SAMPLE_MS;
        let t_s = t_ms as f64 / 1000.0;
        // four draws per sample regardless of the scenario keep noise
        // streams aligned between scenarios sharing a seed
        let noise: [f64; 3] = [
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
        ];
        let vib: f64 = StandardNormal.sample(&mut rng);
        let rough_sigma: f64 = s
            .rough_segments
            .iter()
            .filter(|r| r.start_s <= t_s && t_s < r.end_s)
            .map(|r| r.sigma_g)
            .fold(0.0, f64::max);
        let vertical = g + rough_sigma * g * vib + bump;
        let axis = |k: usize| s.device_gain * (vertical * up[k] + s.noise_sigma_g * g * noise[k]);
        samples.push(AccelSample {
            t: t_ms,
            ax: axis(0),
            ay: axis(1),
            az: axis(2),
        });
    }

    let duration_ms = (s.duration_s * 1000.0).floor() as i64;
    let fixes = (0..=duration_ms / GPS_MS)
        .map(|k| k * GPS_MS)
        .filter(|&t| {
            let ts = t as f64 / 1000.0;
            !s.gps_dropouts
                .iter()
                .any(|d| d.start_s <= ts && ts < d.end_s)
        })
        .map(|t| {
            let (lat, lon) = s.position_at(t as f64 / 1000.0);
            GpsFix {
                t,
                lat,
                lon,
                accuracy: Some(5.0),
            }
        })
        .collect();

    let mut events: Vec<LabelEvent> = s
        .bumps
        .iter()
        .map(|b| {
            let t = (b.t_s * 1000.0).round() as i64;
            LabelEvent {
                amplitude_g: b.height_g,
                kind: EventKind::Bump,
                t_end_ms: t,
                t_start_ms: t,
            }
        })
        .chain(s.rough_segments.iter().map(|r| LabelEvent {
            amplitude_g: r.sigma_g,
            kind: EventKind::Rough,
            t_end_ms: (r.end_s * 1000.0).round() as i64,
            t_start_ms: (r.start_s * 1000.0).round() as i64,
        }))
        .collect();
    events.sort_by_key(|e| (e.t_start_ms, e.kind));

    Ok(SyntheticTrip {
        samples,
        fixes,
        labels: Labels { events },
    })
}

/// Matching of detections against injected events.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Score {
    pub true_positives: usize,
    pub false_positives: usize,
    pub missed: usize,
}

impl Score {
    pub fn f1(&self) -> f64 {
        let tp = self.true_positives as f64;
        let denom = 2.0 * tp + self.false_positives as f64 + self.missed as f64;
        if denom == 0.0 {
            1.0
        } else {
            2.0 * tp / denom
        }
    }
}

/// Pairs each truth time with the nearest unused detection within
/// `tolerance_ms`.
pub fn score_detections(detected: &[i64], truth: &[i64], tolerance_ms: i64) -> Score {
    let mut used = vec![false; detected.len()];
    let mut tp = 0;
    for &t in truth {
        let best = detected
            .iter()
            .enumerate()
            .filter(|(i, &d)| !used[*i] && (d - t).abs() <= tolerance_ms)
            .min_by_key(|(_, &d)| (d - t).abs())
            .map(|(i, _)| i);
        if let Some(i) = best {
            used[i] = true;
            tp += 1;
        }
    }
    Score {
        true_positives: tp,
        false_positives: detected.len() - tp,
        missed: truth.len() - tp,
    }
}
