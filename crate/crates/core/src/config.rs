//! Declarative pipeline configuration (TOML).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bump::BumpConfig;
use crate::error::{Error, Result};
use crate::filter::DEFAULT_ALPHA;
use crate::geo::DEFAULT_MAX_GAP_MS;
use crate::report::SCHEMA_VERSION;
use crate::roughness::RoughnessConfig;
use crate::signal::{SampleRate, SEGMENT_LEN};

/// Environment variable naming a config file used when `--config` is absent.
pub const CONFIG_ENV: &str = "ROADSENSE_CONFIG";

/// The shipped defaults, with commentary.
pub const DEFAULT_CONFIG_TOML: &str = include_str!("../config/default.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalConfig {
    pub sample_rate_hz: f64,
    /// Samples shared by consecutive windows.
    pub segment_overlap: usize,
    /// A sample gap longer than this many periods re-seeds the filter.
    pub max_gap_periods: f64,
    /// Smoothing factor before the roughness sensor has spoken.
    pub initial_alpha: f64,
}

impl Default for SignalConfig {
    fn default() -> Self {
        Self {
            sample_rate_hz: 50.0,
            segment_overlap: 0,
            max_gap_periods: 3.0,
            initial_alpha: DEFAULT_ALPHA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeoConfig {
    /// Fix intervals longer than this leave events without a location.
    pub max_gap_ms: i64,
}

impl Default for GeoConfig {
    fn default() -> Self {
        Self {
            max_gap_ms: DEFAULT_MAX_GAP_MS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AggregateConfig {
    pub radius_m: f64,
    pub min_trips: usize,
}

impl Default for AggregateConfig {
    fn default() -> Self {
        Self {
            radius_m: 15.0,
            min_trips: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub schema_version: String,
    pub signal: SignalConfig,
    pub roughness: RoughnessConfig,
    pub bump: BumpConfig,
    pub geo: GeoConfig,
    pub aggregate: AggregateConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            signal: SignalConfig::default(),
            roughness: RoughnessConfig::default(),
            bump: BumpConfig::default(),
            geo: GeoConfig::default(),
            aggregate: AggregateConfig::default(),
        }
    }
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Config =
            toml::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Explicit path first, then the environment variable, then defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self> {
        if let Some(p) = explicit {
            return Self::load(p);
        }
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
            _ => Ok(Self::default()),
        }
    }

    pub fn sample_rate(&self) -> Result<SampleRate> {
        SampleRate::new(self.signal.sample_rate_hz)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema version {:?}, expected {SCHEMA_VERSION:?}",
                self.schema_version
            )));
        }
        self.sample_rate()?;
        if self.signal.segment_overlap >= SEGMENT_LEN {
            return Err(Error::Config(format!(
                "segment_overlap must be below {SEGMENT_LEN}"
            )));
        }
        if !(self.signal.max_gap_periods.is_finite() && self.signal.max_gap_periods > 0.0) {
            return Err(Error::Config("max_gap_periods must be positive".into()));
        }
        if !(self.signal.initial_alpha > 0.0 && self.signal.initial_alpha < 1.0) {
            return Err(Error::Config("initial_alpha must lie in (0, 1)".into()));
        }
        self.roughness.validate()?;
        self.bump.validate()?;
        if self.geo.max_gap_ms <= 0 {
            return Err(Error::Config("geo.max_gap_ms must be positive".into()));
        }
        if !(self.aggregate.radius_m.is_finite() && self.aggregate.radius_m > 0.0) {
            return Err(Error::Config("aggregate.radius_m must be positive".into()));
        }
        if self.aggregate.min_trips == 0 {
            return Err(Error::Config(
                "aggregate.min_trips must be at least 1".into(),
            ));
        }
        Ok(())
    }
}
