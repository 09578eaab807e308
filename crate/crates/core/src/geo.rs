//! GPS fix stream lookups: position and ground speed at arbitrary times.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean Earth radius in metres.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Fix-to-fix intervals longer than this count as a GPS dropout.
pub const DEFAULT_MAX_GAP_MS: i64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpsFix {
    pub t: i64,
    pub lat: f64,
    pub lon: f64,
    pub accuracy: Option<f64>,
}

impl GpsFix {
    pub fn new(t: i64, lat: f64, lon: f64, accuracy: Option<f64>) -> Result<Self> {
        if !(lat.is_finite() && (-90.0..=90.0).contains(&lat)) {
            return Err(Error::InvalidSample(format!("latitude {lat} out of range")));
        }
        if !(lon.is_finite() && (-180.0..=180.0).contains(&lon)) {
            return Err(Error::InvalidSample(format!(
                "longitude {lon} out of range"
            )));
        }
        if accuracy.is_some_and(|a| !a.is_finite() || a < 0.0) {
            return Err(Error::InvalidSample(
                "accuracy must be a non-negative number".into(),
            ));
        }
        Ok(Self {
            t,
            lat,
            lon,
            accuracy,
        })
    }
}

/// Great-circle distance in metres.
pub fn haversine_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dphi = p2 - p1;
    let dlambda = (lon2 - lon1).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Speed in m/s travelled between two fixes.
pub fn speed_between(a: &GpsFix, b: &GpsFix) -> Result<f64> {
    let dt = (b.t - a.t).abs();
    if dt == 0 {
        return Err(Error::NoSpeed("fixes share a timestamp".into()));
    }
    Ok(haversine_m(a.lat, a.lon, b.lat, b.lon) / (dt as f64 / 1000.0))
}

/// Index of the first fix strictly after `t`.
fn upper(fixes: &[GpsFix], t: i64) -> usize {
    fixes.partition_point(|f| f.t <= t)
}

/// Position at time `t`, linearly interpolated in degrees between the
/// bracketing fixes and clamped to the first/last fix outside the stream.
pub fn interpolate_position(fixes: &[GpsFix], t: i64) -> Result<(f64, f64)> {
    let (first, last) = match (fixes.first(), fixes.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::NoLocation),
    };
    if t <= first.t {
        return Ok((first.lat, first.lon));
    }
    if t >= last.t {
        return Ok((last.lat, last.lon));
    }
    let hi = upper(fixes, t);
    let (a, b) = (&fixes[hi - 1], &fixes[hi]);
    let w = (t - a.t) as f64 / (b.t - a.t) as f64;
    Ok((a.lat + w * (b.lat - a.lat), a.lon + w * (b.lon - a.lon)))
}

/// Ground speed at `t` from the haversine distance between the bracketing
/// fixes. Outside the stream the first or last interval is used.
pub fn speed_at(fixes: &[GpsFix], t: i64) -> Result<f64> {
    if fixes.len() < 2 {
        return Err(Error::NoSpeed(format!(
            "need at least two fixes, have {}",
            fixes.len()
        )));
    }
    let first_t = fixes[0].t;
    let last_t = fixes[fixes.len() - 1].t;
    let (lo, hi) = if t < first_t {
        (0, upper(fixes, first_t))
    } else if t >= last_t {
        (
            fixes.partition_point(|f| f.t < last_t).saturating_sub(1),
            fixes.len() - 1,
        )
    } else {
        let hi = upper(fixes, t);
        (hi - 1, hi)
    };
    if hi >= fixes.len() || fixes[lo].t == fixes[hi].t {
        return Err(Error::NoSpeed("all fixes share one timestamp".into()));
    }
    speed_between(&fixes[lo], &fixes[hi])
}

/// True when `t` falls inside a dropout: a fix interval longer than
/// `max_gap_ms`, or further than that before the first / after the last fix.
pub fn in_gap(fixes: &[GpsFix], t: i64, max_gap_ms: i64) -> bool {
    let (first, last) = match (fixes.first(), fixes.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return true,
    };
    if t < first.t {
        return first.t - t > max_gap_ms;
    }
    if t > last.t {
        return t - last.t > max_gap_ms;
    }
    let hi = upper(fixes, t);
    if hi == 0 || hi >= fixes.len() {
        return false;
    }
    fixes[hi].t - fixes[hi - 1].t > max_gap_ms
}

/// Number of fix intervals longer than `max_gap_ms`.
pub fn count_gaps(fixes: &[GpsFix], max_gap_ms: i64) -> usize {
    fixes
        .windows(2)
        .filter(|w| w[1].t - w[0].t > max_gap_ms)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fix(t: i64, lat: f64, lon: f64) -> GpsFix {
        GpsFix {
            t,
            lat,
            lon,
            accuracy: None,
        }
    }

    #[test]
    fn validates_ranges() {
        assert!(GpsFix::new(0, 91.0, 0.0, None).is_err());
        assert!(GpsFix::new(0, 0.0, -180.5, None).is_err());
        assert!(GpsFix::new(0, 0.0, 0.0, Some(-1.0)).is_err());
        assert!(GpsFix::new(0, -90.0, 180.0, Some(4.0)).is_ok());
    }

    #[test]
    fn interpolation_examples() {
        let fixes = [fix(0, 0.0, 0.0), fix(1000, 0.0, 0.001)];
        assert_eq!(interpolate_position(&fixes, 0).unwrap(), (0.0, 0.0));
        assert_eq!(interpolate_position(&fixes, 1000).unwrap(), (0.0, 0.001));
        let (lat, lon) = interpolate_position(&fixes, 500).unwrap();
        assert_eq!(lat, 0.0);
        assert!((lon - 0.0005).abs() < 1e-15);
        assert_eq!(interpolate_position(&fixes, -300).unwrap(), (0.0, 0.0));
        assert_eq!(interpolate_position(&fixes, 9000).unwrap(), (0.0, 0.001));
        assert_eq!(interpolate_position(&[], 0), Err(Error::NoLocation));
    }

    #[test]
    fn speed_examples() {
        let still = [fix(0, 1.0, 2.0), fix(1000, 1.0, 2.0)];
        assert_eq!(speed_at(&still, 500).unwrap(), 0.0);

        // 0.001 degree of latitude is R * pi / 180_000 metres
        let moving = [fix(0, 0.0, 0.0), fix(10_000, 0.001, 0.0)];
        let expect = EARTH_RADIUS_M * std::f64::consts::PI / 180_000.0 / 10.0;
        let v = speed_at(&moving, 5000).unwrap();
        assert!((v - expect).abs() < 1e-9);
        assert!((v - 11.12).abs() < 0.01);

        let antipodal = [fix(0, 0.0, 0.0), fix(1000, 0.0, 180.0)];
        let v = speed_at(&antipodal, 10).unwrap();
        assert!((v - std::f64::consts::PI * EARTH_RADIUS_M).abs() < 1e-3);

        assert!(matches!(
            speed_at(&[fix(0, 0.0, 0.0)], 0),
            Err(Error::NoSpeed(_))
        ));
        assert!(speed_at(&[fix(0, 0.0, 0.0), fix(0, 1.0, 0.0)], 0).is_err());
    }

    #[test]
    fn speed_uses_bracketing_interval() {
        let fixes = [
            fix(0, 0.0, 0.0),
            fix(1000, 0.0, 0.0),
            fix(2000, 0.0001, 0.0),
        ];
        assert_eq!(speed_at(&fixes, 500).unwrap(), 0.0);
        assert!(speed_at(&fixes, 1500).unwrap() > 10.0);
        assert!(speed_at(&fixes, 5000).unwrap() > 10.0);
        assert_eq!(speed_at(&fixes, -100).unwrap(), 0.0);
    }

    #[test]
    fn gaps() {
        let fixes = [
            fix(0, 0.0, 0.0),
            fix(1000, 0.0, 0.0),
            fix(20_000, 0.0, 0.0),
            fix(21_000, 0.0, 0.0),
        ];
        assert_eq!(count_gaps(&fixes, DEFAULT_MAX_GAP_MS), 1);
        assert!(!in_gap(&fixes, 500, DEFAULT_MAX_GAP_MS));
        assert!(in_gap(&fixes, 5000, DEFAULT_MAX_GAP_MS));
        assert!(!in_gap(&fixes, 25_000, DEFAULT_MAX_GAP_MS));
        assert!(in_gap(&fixes, 40_000, DEFAULT_MAX_GAP_MS));
        assert!(in_gap(&[], 0, DEFAULT_MAX_GAP_MS));
    }

    proptest! {
        #[test]
        fn speed_is_symmetric_and_non_negative(
            lat1 in -80.0f64..80.0, lon1 in -179.0f64..179.0,
            lat2 in -80.0f64..80.0, lon2 in -179.0f64..179.0,
            dt in 1i64..100_000,
        ) {
            let a = fix(0, lat1, lon1);
            let b = fix(dt, lat2, lon2);
            let ab = speed_between(&a, &b).unwrap();
            let ba = speed_between(&b, &a).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - ba).abs() <= 1e-9 * ab.max(1.0));
        }

        #[test]
        fn interpolation_is_exact_at_fixes_and_continuous(
            steps in proptest::collection::vec((1i64..5000, -0.01f64..0.01, -0.01f64..0.01), 1..20),
        ) {
            let mut fixes = vec![fix(0, 10.0, 20.0)];
            for (dt, dlat, dlon) in steps {
                let p = *fixes.last().unwrap();
                fixes.push(fix(p.t + dt, p.lat + dlat, p.lon + dlon));
            }
            for f in &fixes {
                let (lat, lon) = interpolate_position(&fixes, f.t).unwrap();
                prop_assert!((lat - f.lat).abs() < 1e-12 && (lon - f.lon).abs() < 1e-12);
                let (l1, o1) = interpolate_position(&fixes, f.t - 1).unwrap();
                let (l2, o2) = interpolate_position(&fixes, f.t + 1).unwrap();
                prop_assert!((l1 - lat).abs() <= 0.01 + 1e-12 && (l2 - lat).abs() <= 0.01 + 1e-12);
                prop_assert!((o1 - lon).abs() <= 0.01 + 1e-12 && (o2 - lon).abs() <= 0.01 + 1e-12);
            }
        }
    }
}
