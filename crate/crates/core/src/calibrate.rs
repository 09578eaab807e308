//! Threshold calibration for the bump detector on a synthetic bump
//! library.

use crate::config::Config;
use crate::error::Result;
use crate::pipeline::{run_pipeline, TripMeta};
use crate::report::EventKind;
use crate::synth::{generate_trip, score_detections, BumpSpec, Scenario, Score};

/// Device gains covered by the library.
pub const LIBRARY_GAINS: [f64; 7] = [0.5, 0.6, 0.8, 1.0, 1.25, 1.5, 2.0];

/// Detections within this distance of an injected bump count as hits.
pub const MATCH_TOLERANCE_MS: i64 = 1000;

/// Bump times (s) and heights (g) shared by the library trips.
const BUMPS: [(f64, f64); 6] = [
    (11.3, 0.8),
    (27.9, 0.5),
    (44.1, 1.2),
    (58.7, 0.8),
    (76.2, 0.5),
    (93.5, 1.2),
];

/// Six-bump trips at every library gain, two noise seeds each.
pub fn bump_library() -> Vec<Scenario> {
    let mut out = Vec::new();
    for (gi, &gain) in LIBRARY_GAINS.iter().enumerate() {
        for seed in 0..2u64 {
            let mut s = Scenario::quiet(110.0, 1000 + 10 * gi as u64 + seed);
            s.device_gain = gain;
            s.bumps = BUMPS
                .iter()
                .map(|&(t_s, height_g)| BumpSpec {
                    t_s,
                    height_g,
                    width_samples: 6,
                })
                .collect();
            out.push(s);
        }
    }
    out
}

/// Bump detection score of one scenario under `cfg`.
pub fn score_scenario(scenario: &Scenario, cfg: &Config) -> Result<Score> {
    let trip = generate_trip(scenario)?;
    let report = run_pipeline(
        &trip.samples,
        &trip.fixes,
        cfg,
        TripMeta::new("calib", "synthetic"),
    )?;
    let detected: Vec<i64> = report
        .events
        .iter()
        .filter(|e| e.kind == EventKind::Bump)
        .map(|e| e.t_start)
        .collect();
    let truth: Vec<i64> = trip
        .labels
        .of_kind(EventKind::Bump)
        .map(|l| l.t_start_ms)
        .collect();
    Ok(score_detections(&detected, &truth, MATCH_TOLERANCE_MS))
}

/// Pooled score over the library for each candidate threshold.
pub fn sweep(base: &Config, thresholds: &[f64]) -> Result<Vec<(f64, Score)>> {
    let library = bump_library();
    thresholds
        .iter()
        .map(|&thr| {
            let mut cfg = base.clone();
            cfg.bump.beta_threshold = thr;
            let mut total = Score::default();
            for s in &library {
                let sc = score_scenario(s, &cfg)?;
                total.true_positives += sc.true_positives;
                total.false_positives += sc.false_positives;
                total.missed += sc.missed;
            }
            Ok((thr, total))
        })
        .collect()
}

/// Midpoint of the widest run of thresholds sharing the best F1.
pub fn best_threshold(results: &[(f64, Score)]) -> Option<f64> {
    let best = results
        .iter()
        .map(|r| r.1.f1())
        .fold(f64::NEG_INFINITY, f64::max);
    let mut best_run: Option<(usize, usize)> = None;
    let mut start: Option<usize> = None;
    for i in 0..=results.len() {
        let on = i < results.len() && results[i].1.f1() == best;
        match (on, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if best_run.is_none_or(|(a, b)| i - s > b - a) {
                    best_run = Some((s, i));
                }
                start = None;
            }
            _ => {}
        }
    }
    best_run.map(|(a, b)| 0.5 * (results[a].0 + results[b - 1].0))
}
