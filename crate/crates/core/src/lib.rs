//! Road surface monitoring from smartphone accelerometer and GPS logs.
//!
//! The pipeline low-pass filters each accelerometer axis, takes the norm
//! of the filtered axes, cuts it into 32-sample windows and Haar-transforms
//! each window. The finest-scale details drive an adaptive smoothing factor
//! whose level is the road roughness; modulus maxima at the two finest
//! scales give a per-window regularity estimate used to flag bumps. Events
//! are geotagged from the GPS fixes, and many trips can be merged into a
//! hazard map that discards hazards seen only once.

pub mod aggregate;
pub mod bump;
pub mod calibrate;
pub mod config;
pub mod error;
pub mod filter;
pub mod geo;
pub mod oracle;
pub mod pipeline;
pub mod report;
pub mod roughness;
pub mod signal;
pub mod synth;
pub mod tripio;
pub mod wavelet;

pub use config::Config;
pub use error::{Error, Result};
pub use pipeline::{run_pipeline, Pipeline, TripMeta};
pub use report::{EventKind, RoadEvent, TripReport};
