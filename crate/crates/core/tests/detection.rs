mod common;

use roadsense::calibrate::MATCH_TOLERANCE_MS;
use roadsense::report::EventKind;
use roadsense::synth::{generate_trip, Scenario};

use common::*;

/// Which injected bumps were found, plus the number of unmatched detections.
fn decisions(s: &Scenario) -> (Vec<bool>, usize) {
    let (trip, report) = run(s, "gain");
    let detected: Vec<i64> = of_kind(&report, EventKind::Bump)
        .iter()
        .map(|e| e.t_start)
        .collect();
    let truth: Vec<i64> = trip
        .labels
        .of_kind(EventKind::Bump)
        .map(|l| l.t_start_ms)
        .collect();
    let hits: Vec<bool> = truth
        .iter()
        .map(|t| detected.iter().any(|d| (d - t).abs() <= MATCH_TOLERANCE_MS))
        .collect();
    let fp = detected
        .iter()
        .filter(|d| !truth.iter().any(|t| (*d - t).abs() <= MATCH_TOLERANCE_MS))
        .count();
    (hits, fp)
}

#[test]
fn bump_decisions_agree_across_device_gains() {
    for seed in [3u64, 4, 5] {
        let reference = decisions(&six_bump_scenario(1.0, seed));
        for gain in [0.5, 0.75, 1.5, 2.0] {
            assert_eq!(
                decisions(&six_bump_scenario(gain, seed)),
                reference,
                "seed {seed}, gain {gain}"
            );
        }
    }
}

#[test]
fn quiet_ride_has_no_events() {
    for gain in [0.5, 1.0, 2.0] {
        let mut s = Scenario::quiet(300.0, 8);
        s.device_gain = gain;
        let (_, report) = run(&s, "quiet");
        assert!(report.events.is_empty(), "gain {gain}: {:?}", report.events);
    }
}

#[test]
fn tilted_phone_sees_the_same_bumps() {
    let upright = decisions(&six_bump_scenario(1.0, 9));
    let mut tilted = six_bump_scenario(1.0, 9);
    tilted.base_gravity_orientation = [0.3, -0.5, 0.81];
    assert_eq!(decisions(&tilted), upright);
}

#[test]
fn bumps_are_geotagged_on_the_route() {
    let s = six_bump_scenario(1.0, 12);
    let (_, report) = run(&s, "geo");
    for ev in of_kind(&report, EventKind::Bump) {
        let (lat, lon) = ev.location().expect("gps covers the whole ride");
        let (want_lat, want_lon) = s.position_at(ev.t_start as f64 / 1000.0);
        let d = roadsense::geo::haversine_m(lat, lon, want_lat, want_lon);
        assert!(
            d < 0.5,
            "bump at {} ms tagged {d:.2} m off route",
            ev.t_start
        );
    }
}

#[test]
fn gps_dropout_leaves_events_untagged() {
    let mut s = six_bump_scenario(1.0, 13);
    s.gps_dropouts = vec![roadsense::synth::GpsDropout {
        start_s: 40.0,
        end_s: 60.0,
    }];
    let (_, report) = run(&s, "dropout");
    assert_eq!(report.stats.gps_gap_count, 1);
    let in_gap = of_kind(&report, EventKind::Bump)
        .into_iter()
        .filter(|e| (41_000..59_000).contains(&e.t_start))
        .collect::<Vec<_>>();
    assert!(!in_gap.is_empty());
    assert!(in_gap.iter().all(|e| e.location().is_none()));
}

#[test]
fn rough_span_noise_matches_requested_sigma() {
    let mut s = Scenario::quiet(60.0, 21);
    s.noise_sigma_g = 0.0;
    s.rough_segments = vec![roadsense::synth::RoughSpan {
        start_s: 10.0,
        end_s: 50.0,
        sigma_g: 0.4,
    }];
    let trip = generate_trip(&s).unwrap();
    let g = roadsense::roughness::STANDARD_GRAVITY;
    let z: Vec<f64> = trip
        .samples
        .iter()
        .filter(|x| (10_000..50_000).contains(&x.t))
        .map(|x| x.az / g - 1.0)
        .collect();
    assert!(z.len() >= 2000);
    let mean = z.iter().sum::<f64>() / z.len() as f64;
    let sd = (z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (z.len() - 1) as f64).sqrt();
    assert!((sd / 0.4 - 1.0).abs() < 0.05, "sample sd {sd}");
}

#[test]
fn same_seed_same_trip() {
    let a = generate_trip(&two_rough_scenario(4)).unwrap();
    let b = generate_trip(&two_rough_scenario(4)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, generate_trip(&two_rough_scenario(5)).unwrap());
}
