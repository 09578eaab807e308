//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use roadsense::aggregate::{cluster_events, prune_isolated, HazardMap};
use roadsense::bump::{lipschitz_algorithm1, z_threshold_detections};
use roadsense::calibrate::MATCH_TOLERANCE_MS;
use roadsense::filter::FilterState;
use roadsense::oracle::{oracle_algorithm1, oracle_dwt};
use roadsense::report::EventKind;
use roadsense::roughness::{estimate_sigma, update_alpha, RoughnessConfig};
use roadsense::signal::{AccelSample, Segment, SEGMENT_LEN};
use roadsense::synth::{generate_trip, score_detections, Scenario};
use roadsense::wavelet::{dwt, HaarBasis};
use roadsense::{Config, Pipeline, TripMeta};

use common::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit_s: u64) -> Result<Duration, String> {
    let took = start.elapsed();
    check(took < Duration::from_secs(limit_s), || {
        format!("took {took:.2?}, limit {limit_s} s")
    })?;
    Ok(took)
}

fn random_segment(rng: &mut ChaCha8Rng) -> Segment {
    let mut values = [0.0; SEGMENT_LEN];
    let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
    for v in values.iter_mut() {
        *v = 9.8 + scale * rng.sample::<f64, _>(StandardNormal);
    }
    Segment {
        index: 0,
        values,
        t_start: 0,
        t_end: 620,
    }
}

fn c1_filter() -> Outcome {
    let start = Instant::now();
    let alphas = [0.992, 0.995, 0.996, 0.998];

    for &alpha in &alphas {
        let c = [0.37, -9.81, 4.2];
        let mut f = FilterState::seeded(alpha, c).unwrap();
        for i in 0..1000 {
            let out = f
                .step(&AccelSample::new(i, c[0], c[1], c[2]).unwrap())
                .unwrap();
            check(out == c, || {
                format!("fixed point drifted at alpha {alpha}: {out:?}")
            })?;
        }
    }

    let mut worst = 0.0f64;
    for &alpha in &alphas {
        let mut f = FilterState::seeded(alpha, [0.0; 3]).unwrap();
        for n in 1..=3000i32 {
            let out = f
                .step(&AccelSample::new(n as i64, 1.0, 1.0, 1.0).unwrap())
                .unwrap();
            let expected = 1.0 - alpha.powi(n);
            for v in out {
                worst = worst.max((v - expected).abs());
            }
        }
    }
    check(worst <= 1e-12, || {
        format!("step response error {worst:.3e}")
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for stream in 0..10_000 {
        let alpha = alphas[stream % alphas.len()];
        let mut f = FilterState::new(alpha).unwrap();
        let len = rng.gen_range(1..200);
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for i in 0..len {
            let a: [f64; 3] = [
                rng.gen_range(-20.0..20.0),
                rng.gen_range(-20.0..20.0),
                rng.gen_range(-20.0..20.0),
            ];
            for k in 0..3 {
                lo[k] = lo[k].min(a[k]);
                hi[k] = hi[k].max(a[k]);
            }
            let out = f
                .step(&AccelSample::new(i, a[0], a[1], a[2]).unwrap())
                .unwrap();
            for k in 0..3 {
                check(out[k] >= lo[k] && out[k] <= hi[k], || {
                    format!("stream {stream} left the input hull on axis {k}")
                })?;
            }
        }
    }
    let took = within(start, 5)?;
    Ok(format!(
        "step error {worst:.1e}, 10000 streams bounded, {took:.2?}"
    ))
}

fn c2_dwt() -> Outcome {
    let start = Instant::now();
    let basis = HaarBasis::new(SEGMENT_LEN).unwrap();
    let ortho = basis.orthonormality_error();
    check(ortho <= 1e-9, || {
        format!("orthonormality error {ortho:.3e}")
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_energy, mut worst_oracle) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let seg = random_segment(&mut rng);
        let coeffs = dwt(&seg.values, &basis).unwrap();
        let energy: f64 = seg.values.iter().map(|v| v * v).sum();
        worst_energy = worst_energy.max((coeffs.energy() - energy).abs() / energy);
        let oracle = oracle_dwt(&seg.values).to_flat();
        for (a, b) in coeffs.to_flat().iter().zip(&oracle) {
            worst_oracle = worst_oracle.max((a - b).abs());
        }
    }
    check(worst_energy <= 1e-9, || {
        format!("relative energy error {worst_energy:.3e}")
    })?;
    check(worst_oracle <= 1e-9, || {
        format!("oracle mismatch {worst_oracle:.3e}")
    })?;
    let took = within(start, 10)?;
    Ok(format!(
        "orthonormality {ortho:.1e}, energy {worst_energy:.1e}, oracle {worst_oracle:.1e}, {took:.2?}"
    ))
}

fn c3_mad() -> Outcome {
    let start = Instant::now();
    let basis = HaarBasis::new(SEGMENT_LEN).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 10_000;
    let mut sum = 0.0;
    for _ in 0..n {
        let values: Vec<f64> = (0..SEGMENT_LEN)
            .map(|_| rng.sample(StandardNormal))
            .collect();
        sum += estimate_sigma(&dwt(&values, &basis).unwrap());
    }
    let mean = sum / n as f64;
    check((0.9..=1.1).contains(&mean), || {
        format!("mean estimate {mean:.4}")
    })?;
    let flat = estimate_sigma(&dwt(&[9.8; SEGMENT_LEN], &basis).unwrap());
    check(flat == 0.0, || format!("constant segment gave {flat:e}"))?;
    let took = within(start, 30)?;
    Ok(format!(
        "mean estimate {mean:.4}, constant segment 0, {took:.2?}"
    ))
}

fn c4_schedule() -> Outcome {
    let l = RoughnessConfig::default().taps_l;
    let b = |x: f64| x * l as f64;
    let cases = [
        (0.0, 0.992),
        (b(0.0075), 0.995),
        (b(0.009), 0.996),
        (b(0.05), 0.998),
        (b(0.007), 0.995),
        (b(0.008), 0.996),
        (b(0.01), 0.998),
    ];
    for (j, want) in cases {
        let got = update_alpha(j, l);
        check(got == want, || format!("cost {j}: got {got}, want {want}"))?;
    }
    Ok(format!("{} cases exact", cases.len()))
}

fn c5_rough() -> Outcome {
    let start = Instant::now();
    let scenario = two_rough_scenario(5);
    let (trip, report) = run(&scenario, "rough");
    let rough = of_kind(&report, EventKind::Rough);
    check(rough.len() == 2, || format!("{} rough events", rough.len()))?;
    let seg_ms = (SEGMENT_LEN as i64) * 20;
    let tolerance = 2 * RoughnessConfig::default().taps_l as i64 * seg_ms;
    let mut onsets = Vec::new();
    for (ev, truth) in rough.iter().zip(trip.labels.of_kind(EventKind::Rough)) {
        let off = (ev.t_start - truth.t_start_ms).abs();
        check(off <= tolerance, || {
            format!("onset off by {off} ms, limit {tolerance}")
        })?;
        onsets.push(off);
    }

    let mut control = scenario.clone();
    control.rough_segments.clear();
    let (_, smooth) = run(&control, "smooth");
    let n = of_kind(&smooth, EventKind::Rough).len();
    check(n == 0, || format!("{n} rough events on the smooth trip"))?;
    let took = within(start, 10)?;
    Ok(format!(
        "2 events, onset offsets {onsets:?} ms, smooth trip clean, {took:.2?}"
    ))
}

fn c6_lipschitz() -> Outcome {
    let basis = HaarBasis::new(SEGMENT_LEN).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst, mut worst_identity, mut valid) = (0.0f64, 0.0f64, 0);
    for i in 0..1000 {
        let seg = random_segment(&mut rng);
        let got = lipschitz_algorithm1(&seg, &basis).unwrap();
        let want = oracle_algorithm1(&seg.values);
        check(got.valid == want.valid, || {
            format!("segment {i}: validity differs")
        })?;
        if !got.valid {
            continue;
        }
        valid += 1;
        check(got.loc == want.loc, || {
            format!("segment {i}: location {} vs {}", got.loc, want.loc)
        })?;
        for (a, b) in [
            (got.beta_hat, want.beta_hat),
            (got.p1, want.p1),
            (got.p2, want.p2),
        ] {
            worst = worst.max((a - b).abs());
        }
        let closed = 7.0 / 17.0 * (got.p1 * got.p2).log2();
        worst_identity = worst_identity.max((got.beta_hat - closed).abs());
    }
    check(worst <= 1e-9, || format!("oracle mismatch {worst:.3e}"))?;
    check(worst_identity <= 1e-12, || {
        format!("closed form off by {worst_identity:.3e}")
    })?;
    check(valid > 900, || format!("only {valid} valid estimates"))?;
    Ok(format!(
        "{valid} valid, oracle {worst:.1e}, closed form {worst_identity:.1e}"
    ))
}

fn c7_bumps() -> Outcome {
    let start = Instant::now();
    let cfg = Config::default();
    let mut summary = Vec::new();
    let mut found_at_low_gain = Vec::new();
    for (gain, seed) in [(1.0, 71), (0.6, 72)] {
        let (trip, report) = run(&six_bump_scenario(gain, seed), "bumps");
        let detected: Vec<i64> = of_kind(&report, EventKind::Bump)
            .iter()
            .map(|e| e.t_start)
            .collect();
        let truth: Vec<i64> = trip
            .labels
            .of_kind(EventKind::Bump)
            .map(|l| l.t_start_ms)
            .collect();
        let score = score_detections(&detected, &truth, MATCH_TOLERANCE_MS);
        check(score.true_positives >= 5, || {
            format!("gain {gain}: {} of 6 bumps", score.true_positives)
        })?;
        check(score.false_positives <= 1, || {
            format!("gain {gain}: {} false positives", score.false_positives)
        })?;
        summary.push(format!(
            "gain {gain}: {}/6, {} fp",
            score.true_positives, score.false_positives
        ));

        if gain == 0.6 {
            let z: Vec<(i64, f64)> = trip.samples.iter().map(|s| (s.t, s.az)).collect();
            let baseline =
                z_threshold_detections(&z, cfg.bump.z_threshold, cfg.bump.merge_window_ms);
            for &t in &truth {
                let lip = detected.iter().any(|d| (d - t).abs() <= MATCH_TOLERANCE_MS);
                let zt = baseline.iter().any(|d| (d - t).abs() <= MATCH_TOLERANCE_MS);
                if lip && !zt {
                    found_at_low_gain.push(t);
                }
            }
        }
    }
    check(!found_at_low_gain.is_empty(), || {
        "z-axis baseline finds every bump the detector finds at gain 0.6".into()
    })?;
    let took = within(start, 10)?;
    Ok(format!(
        "{}; baseline misses {} found bumps at gain 0.6; {took:.2?}",
        summary.join(", "),
        found_at_low_gain.len()
    ))
}

fn c8_speed_gate() -> Outcome {
    let (_, still) = run(&surge_scenario(0.0), "still");
    let n_still = of_kind(&still, EventKind::Bump).len();
    check(n_still == 0, || format!("{n_still} bumps while stationary"))?;
    let (_, moving) = run(&surge_scenario(5.0), "moving");
    let n_moving = of_kind(&moving, EventKind::Bump).len();
    check(n_moving == 1, || format!("{n_moving} bumps at 5 m/s"))?;
    Ok("stationary 0 events, 5 m/s 1 event".into())
}

fn c9_aggregate() -> Outcome {
    let mut reports = Vec::new();
    for (i, seed) in [91u64, 92, 93].into_iter().enumerate() {
        let mut s = six_bump_scenario(1.0, seed);
        if i == 2 {
            s.bumps.push(bump(57.4, BUMP_HEIGHT_G));
        }
        let trip = generate_trip(&s).unwrap();
        reports.push(analyze(&trip, &format!("trip{}", i + 1)));
    }
    let cfg = Config::default();
    let map = HazardMap::build(&reports, cfg.aggregate.radius_m, 2);

    let route = Scenario::quiet(120.0, 0);
    let near = |lat: f64, lon: f64, t_s: f64| {
        let (a, b) = route.position_at(t_s);
        roadsense::geo::haversine_m(lat, lon, a, b) <= cfg.aggregate.radius_m
    };
    let seen_in = |t_s: f64| {
        let t = (t_s * 1000.0) as i64;
        reports
            .iter()
            .filter(|r| {
                of_kind(r, EventKind::Bump)
                    .iter()
                    .any(|e| (e.t_start - t).abs() <= MATCH_TOLERANCE_MS)
            })
            .count()
    };
    check(seen_in(57.4) == 1, || {
        "trip 3 did not report its spurious bump".into()
    })?;
    let shared: Vec<f64> = BUMP_TIMES_S
        .iter()
        .copied()
        .filter(|&t| seen_in(t) >= 2)
        .collect();
    let bumps: Vec<_> = map
        .clusters
        .iter()
        .filter(|c| c.kind == EventKind::Bump)
        .collect();
    check(bumps.len() == shared.len(), || {
        format!("{} confirmed bumps, {} shared", bumps.len(), shared.len())
    })?;
    for &t in &shared {
        check(bumps.iter().any(|c| near(c.lat, c.lon, t)), || {
            format!("shared bump at {t} s missing from the map")
        })?;
    }
    check(
        !map.clusters.iter().any(|c| near(c.lat, c.lon, 57.4)),
        || "spurious bump survived pruning".into(),
    )?;
    check(map.clusters.iter().all(|c| c.supporting_trips >= 2), || {
        "map holds a single-trip cluster".into()
    })?;

    let clusters = cluster_events(&reports, cfg.aggregate.radius_m);
    let (kept, dropped) = prune_isolated(clusters.clone(), 1);
    check(kept == clusters && dropped.is_empty(), || {
        "min_trips = 1 changed the cluster set".into()
    })?;
    Ok(format!(
        "{} confirmed ({} shared bumps), {} discarded, min_trips 1 keeps all {}",
        map.clusters.len(),
        shared.len(),
        map.discarded,
        clusters.len()
    ))
}

fn c10_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut s = two_rough_scenario(10);
    s.bumps = BUMP_TIMES_S
        .iter()
        .map(|&t| bump(t, BUMP_HEIGHT_G))
        .collect();
    let trip = generate_trip(&s).unwrap();
    let csv = dir.path().join("ride.csv");
    std::fs::write(&csv, trip.to_csv()).map_err(|e| e.to_string())?;

    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("report{k}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_roadsense"))
            .arg("analyze")
            .arg(&csv)
            .arg("--out")
            .arg(&out)
            .env_remove("ROADSENSE_CONFIG")
            .status()
            .map_err(|e| e.to_string())?;
        check(status.success(), || format!("analyze exited with {status}"))?;
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    check(outputs[0] == outputs[1], || {
        "reports differ between runs".into()
    })?;

    let hour = Scenario::quiet(3600.0, 11);
    let trip = generate_trip(&hour).unwrap();
    let start = Instant::now();
    let mut p = Pipeline::new(
        &Config::default(),
        TripMeta::new("hour", "synthetic"),
        &trip.fixes,
    )
    .map_err(|e| e.to_string())?;
    for sample in &trip.samples {
        p.push_sample(sample).map_err(|e| e.to_string())?;
    }
    let peak = p.peak_buffered();
    let (report, _) = p.finish();
    let took = within(start, 30)?;
    check(peak <= SEGMENT_LEN, || {
        format!("window buffer peaked at {peak} samples")
    })?;
    Ok(format!(
        "byte-identical reports ({} bytes); 1 h trip in {took:.2?}, {} windows, buffer peak {peak}",
        outputs[0].len(),
        report.stats.segment_count
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("filter correctness", c1_filter),
        ("wavelet transform correctness", c2_dwt),
        ("noise estimator", c3_mad),
        ("adaptive schedule", c4_schedule),
        ("rough-road scenario", c5_rough),
        ("regularity estimator equivalence", c6_lipschitz),
        ("bump scenario", c7_bumps),
        ("speed gate", c8_speed_gate),
        ("aggregation", c9_aggregate),
        ("end-to-end determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {reason}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
