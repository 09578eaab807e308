use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use roadsense::aggregate::HazardMap;
use roadsense::report::SCHEMA_VERSION;
use roadsense::synth::{generate_trip, Scenario};
use roadsense::tripio::parse_trip_csv;
use roadsense::{Config, Error, Pipeline, TripMeta, TripReport};

#[derive(Parser)]
#[command(name = "roadsense", version = SCHEMA_VERSION, about = "Road bump and roughness detection from phone sensor logs")]
struct Cli {
    /// Configuration file (TOML). Falls back to $ROADSENSE_CONFIG, then built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyse one trip log and write its event report.
    Analyze {
        trip: PathBuf,
        /// Report path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write one JSON line per window to this path.
        #[arg(long)]
        diagnostics: Option<PathBuf>,
        /// Defaults to the file stem of the trip log.
        #[arg(long)]
        trip_id: Option<String>,
        #[arg(long, default_value = "unknown")]
        device_id: String,
    },
    /// Merge trip reports into a hazard map.
    Aggregate {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic trip log and its ground-truth labels.
    Synth {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Labels path; defaults to the output path with a .labels.json suffix.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn analyze(
    cfg: &Config,
    trip: &Path,
    out: Option<&Path>,
    diagnostics: Option<&Path>,
    trip_id: Option<String>,
    device_id: String,
) -> Result<(), Error> {
    let parsed = parse_trip_csv(&read(trip)?)?;
    let trip_id = trip_id.unwrap_or_else(|| {
        trip.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "trip".into())
    });
    let mut pipeline = Pipeline::new(cfg, TripMeta::new(trip_id, device_id), &parsed.fixes)?;
    if diagnostics.is_some() {
        pipeline = pipeline.with_diagnostics();
    }
    pipeline.set_malformed_rows(parsed.malformed_rows);
    for s in &parsed.samples {
        pipeline.push_sample(s)?;
    }
    let (report, diag) = pipeline.finish();
    if let (Some(path), Some(records)) = (diagnostics, diag) {
        let mut text = String::new();
        for r in &records {
            let line = serde_json::to_string(r)
                .map_err(|e| Error::Format(format!("cannot serialize diagnostics: {e}")))?;
            text.push_str(&line);
            text.push('\n');
        }
        write(path, &text)?;
    }
    emit(out, &report.to_canonical_string()?)
}

fn aggregate(cfg: &Config, reports: &[PathBuf], out: Option<&Path>) -> Result<(), Error> {
    let reports = reports
        .iter()
        .map(|p| read(p)?.parse::<TripReport>())
        .collect::<Result<Vec<_>, _>>()?;
    let map = HazardMap::build(&reports, cfg.aggregate.radius_m, cfg.aggregate.min_trips);
    emit(out, &map.to_canonical_string()?)
}

fn synth(scenario: &Path, out: &Path, labels: Option<PathBuf>) -> Result<(), Error> {
    let trip = generate_trip(&Scenario::from_toml_str(&read(scenario)?)?)?;
    write(out, &trip.to_csv())?;
    let labels = labels.unwrap_or_else(|| out.with_extension("labels.json"));
    write(&labels, &trip.labels.to_json()?)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Format(_) | Error::Ordering { .. } => 2,
        Error::Corrupt { .. } => 3,
        Error::Config(_) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = Config::resolve(cli.config.as_deref()).and_then(|cfg| match cli.command {
        Command::Analyze {
            trip,
            out,
            diagnostics,
            trip_id,
            device_id,
        } => analyze(
            &cfg,
            &trip,
            out.as_deref(),
            diagnostics.as_deref(),
            trip_id,
            device_id,
        ),
        Command::Aggregate { reports, out } => aggregate(&cfg, &reports, out.as_deref()),
        Command::Synth {
            scenario,
            out,
            labels,
        } => synth(&scenario, &out, labels),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("roadsense: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
