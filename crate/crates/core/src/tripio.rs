//! Trip log CSV.
//!
//! One file holds both sensor streams in timestamp order:
//!
//! ```text
//! type,t_ms,a,b,c
//! A,0,0.012000,-0.034000,9.801000
//! G,0,1.3521000,103.8198000,5.0
//! ```
//!
//! `A` rows carry `ax, ay, az` in m/s^2, `G` rows carry latitude,
//! longitude and an optional accuracy in metres.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geo::GpsFix;
use crate::signal::AccelSample;

pub const HEADER: &str = "type,t_ms,a,b,c";

/// Largest tolerated fraction of malformed data rows.
pub const MAX_MALFORMED_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedTrip {
    pub samples: Vec<AccelSample>,
    pub fixes: Vec<GpsFix>,
    pub malformed_rows: usize,
    pub data_rows: usize,
}

enum Row {
    Accel(AccelSample),
    Gps(GpsFix),
}

fn parse_row(line: &str) -> Option<Row> {
    let cols: Vec<&str> = line.split(',').map(str::trim).collect();
    if cols.len() != 5 {
        return None;
    }
    let t: i64 = cols[1].parse().ok()?;
    let num = |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite());
    match cols[0] {
        "A" => AccelSample::new(t, num(cols[2])?, num(cols[3])?, num(cols[4])?)
            .ok()
            .map(Row::Accel),
        "G" => {
            let acc = if cols[4].is_empty() {
                None
            } else {
                Some(num(cols[4])?)
            };
            GpsFix::new(t, num(cols[2])?, num(cols[3])?, acc)
                .ok()
                .map(Row::Gps)
        }
        _ => None,
    }
}

pub fn parse_trip_csv(text: &str) -> Result<ParsedTrip> {
    let mut lines = text.lines().enumerate();
    let header = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .map(|(_, l)| l.trim().trim_start_matches('\u{feff}'));
    if header != Some(HEADER) {
        return Err(Error::Format(format!(
            "missing header {HEADER:?}, found {:?}",
            header.unwrap_or("")
        )));
    }

    let mut trip = ParsedTrip::default();
    let mut last_a: Option<i64> = None;
    let mut last_g: Option<i64> = None;
    for (i, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        trip.data_rows += 1;
        let lineno = i + 1;
        match parse_row(line) {
            Some(Row::Accel(s)) => {
                if let Some(prev) = last_a.filter(|&p| s.t < p) {
                    return Err(Error::Ordering {
                        line: lineno,
                        t: s.t,
                        prev,
                    });
                }
                last_a = Some(s.t);
                trip.samples.push(s);
            }
            Some(Row::Gps(f)) => {
                if let Some(prev) = last_g.filter(|&p| f.t < p) {
                    return Err(Error::Ordering {
                        line: lineno,
                        t: f.t,
                        prev,
                    });
                }
                last_g = Some(f.t);
                trip.fixes.push(f);
            }
            None => trip.malformed_rows += 1,
        }
    }
    if trip.malformed_rows as f64 > MAX_MALFORMED_FRACTION * trip.data_rows as f64 {
        return Err(Error::Corrupt {
            malformed: trip.malformed_rows,
            total: trip.data_rows,
        });
    }
    Ok(trip)
}

/// Writes both streams merged by time; at equal timestamps accelerometer
/// rows come first.
pub fn write_trip_csv(samples: &[AccelSample], fixes: &[GpsFix]) -> String {
    let mut out = String::with_capacity(32 * (samples.len() + fixes.len()) + 16);
    out.push_str(HEADER);
    out.push('\n');
    let (mut i, mut k) = (0, 0);
    while i < samples.len() || k < fixes.len() {
        let take_accel = match (samples.get(i), fixes.get(k)) {
            (Some(s), Some(f)) => s.t <= f.t,
            (Some(_), None) => true,
            _ => false,
        };
        if take_accel {
            let s = &samples[i];
            let _ = writeln!(out, "A,{},{:.6},{:.6},{:.6}", s.t, s.ax, s.ay, s.az);
            i += 1;
        } else {
            let f = &fixes[k];
            let acc = f.accuracy.map(|a| format!("{a:.1}")).unwrap_or_default();
            let _ = writeln!(out, "G,{},{:.7},{:.7},{}", f.t, f.lat, f.lon, acc);
            k += 1;
        }
    }
    out
}
