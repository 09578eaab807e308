//! Scenario builders shared by the integration tests.
#![allow(dead_code)]

use roadsense::report::EventKind;
use roadsense::synth::{generate_trip, BumpSpec, RoughSpan, Scenario, SpeedStep, SyntheticTrip};
use roadsense::{run_pipeline, Config, RoadEvent, TripMeta, TripReport};

pub const BUMP_TIMES_S: [f64; 6] = [12.3, 31.7, 48.9, 66.2, 83.5, 101.1];
pub const BUMP_HEIGHT_G: f64 = 0.8;

pub fn bump(t_s: f64, height_g: f64) -> BumpSpec {
    BumpSpec {
        t_s,
        height_g,
        width_samples: 6,
    }
}

/// Two-minute ride over six speed bumps.
pub fn six_bump_scenario(gain: f64, seed: u64) -> Scenario {
    let mut s = Scenario::quiet(120.0, seed);
    s.device_gain = gain;
    s.bumps = BUMP_TIMES_S
        .iter()
        .map(|&t| bump(t, BUMP_HEIGHT_G))
        .collect();
    s
}

/// Three-minute ride with two stretches of rough surface.
pub fn two_rough_scenario(seed: u64) -> Scenario {
    let mut s = Scenario::quiet(180.0, seed);
    s.rough_segments = vec![
        RoughSpan {
            start_s: 30.0,
            end_s: 60.0,
            sigma_g: 5.0,
        },
        RoughSpan {
            start_s: 100.0,
            end_s: 130.0,
            sigma_g: 5.0,
        },
    ];
    s
}

/// One surge at 20.3 s, ridden at `speed_mps`.
pub fn surge_scenario(speed_mps: f64) -> Scenario {
    let mut s = Scenario::quiet(40.0, 77);
    s.speed_profile = vec![SpeedStep {
        t_s: 0.0,
        speed_mps,
    }];
    s.bumps = vec![bump(20.3, BUMP_HEIGHT_G)];
    s
}

pub fn analyze(trip: &SyntheticTrip, trip_id: &str) -> TripReport {
    run_pipeline(
        &trip.samples,
        &trip.fixes,
        &Config::default(),
        TripMeta::new(trip_id, "synthetic"),
    )
    .expect("pipeline runs")
}

pub fn run(s: &Scenario, trip_id: &str) -> (SyntheticTrip, TripReport) {
    let trip = generate_trip(s).expect("scenario is valid");
    let report = analyze(&trip, trip_id);
    (trip, report)
}

pub fn of_kind(report: &TripReport, kind: EventKind) -> Vec<&RoadEvent> {
    report.events.iter().filter(|e| e.kind == kind).collect()
}
