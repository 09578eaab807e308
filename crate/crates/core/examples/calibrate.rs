//! Sweeps the bump threshold over the synthetic library and prints the
//! pooled score per candidate.
//!
//!     cargo run --release --example calibrate

use roadsense::calibrate::{best_threshold, sweep};
use roadsense::Config;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let thresholds: Vec<f64> = (0..=40).map(|i| -14.0 + 0.25 * i as f64).collect();
    let results = sweep(&Config::default(), &thresholds)?;
    println!("threshold      tp   fp  miss     f1");
    for (thr, s) in &results {
        println!(
            "{thr:9.2} {:7} {:4} {:5} {:6.3}",
            s.true_positives,
            s.false_positives,
            s.missed,
            s.f1()
        );
    }
    match best_threshold(&results) {
        Some(t) => println!("best threshold: {t:.2}"),
        None => println!("no threshold evaluated"),
    }
    Ok(())
}
