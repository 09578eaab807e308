//! Cross-trip hazard map: clusters geotagged events and drops hazards that
//! only one trip has seen.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::haversine_m;
use crate::report::{fixed3, fixed6, round_to, EventKind, RoadEvent, TripReport, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq)]
pub struct HazardCluster {
    pub centroid: (f64, f64),
    pub kind: EventKind,
    pub events: Vec<RoadEvent>,
    pub trip_ids: BTreeSet<String>,
    pub mean_intensity: f64,
}

impl HazardCluster {
    fn new(ev: RoadEvent, loc: (f64, f64)) -> Self {
        let mut trip_ids = BTreeSet::new();
        trip_ids.insert(ev.trip_id.clone());
        Self {
            centroid: loc,
            kind: ev.kind,
            mean_intensity: ev.intensity,
            events: vec![ev],
            trip_ids,
        }
    }

    /// Distinct trips contributing to the cluster.
    pub fn supporting_trips(&self) -> usize {
        self.trip_ids.len()
    }

    fn centroid_with(&self, loc: (f64, f64)) -> (f64, f64) {
        let n = self.events.len() as f64;
        (
            (self.centroid.0 * n + loc.0) / (n + 1.0),
            (self.centroid.1 * n + loc.1) / (n + 1.0),
        )
    }

    fn recompute(&mut self) {
        let n = self.events.len() as f64;
        let (mut lat, mut lon, mut inten) = (0.0, 0.0, 0.0);
        for e in &self.events {
            let (a, b) = e.location().expect("clustered events carry a location");
            lat += a;
            lon += b;
            inten += e.intensity;
        }
        self.centroid = (lat / n, lon / n);
        self.mean_intensity = inten / n;
    }

    /// Largest member distance from the centroid, in metres.
    pub fn radius(&self) -> f64 {
        self.events
            .iter()
            .filter_map(RoadEvent::location)
            .map(|(a, b)| haversine_m(a, b, self.centroid.0, self.centroid.1))
            .fold(0.0, f64::max)
    }
}

/// Greedy clustering. Reports are visited in trip-id order and events in
/// time order; each event joins the nearest same-kind cluster whose
/// centroid is within `radius_m`, provided every member stays within
/// `radius_m` of the moved centroid. Otherwise it starts a new cluster.
/// Events without a location are skipped.
pub fn cluster_events(reports: &[TripReport], radius_m: f64) -> Vec<HazardCluster> {
    let mut ordered: Vec<&TripReport> = reports.iter().collect();
    ordered.sort_by(|a, b| a.trip_id.cmp(&b.trip_id));

    let mut clusters: Vec<HazardCluster> = Vec::new();
    for report in ordered {
        let mut events: Vec<&RoadEvent> = report.events.iter().collect();
        events.sort_by_key(|e| (e.t_start, e.t_end, e.kind));
        for ev in events {
            let Some(loc) = ev.location() else { continue };
            let mut candidates: Vec<(f64, usize)> = clusters
                .iter()
                .enumerate()
                .filter(|(_, c)| c.kind == ev.kind)
                .map(|(i, c)| (haversine_m(loc.0, loc.1, c.centroid.0, c.centroid.1), i))
                .filter(|(d, _)| *d <= radius_m)
                .collect();
            candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

            let target = candidates.into_iter().map(|(_, i)| i).find(|&i| {
                let c = &clusters[i];
                let moved = c.centroid_with(loc);
                c.events
                    .iter()
                    .filter_map(RoadEvent::location)
                    .chain(std::iter::once(loc))
                    .all(|(a, b)| haversine_m(a, b, moved.0, moved.1) <= radius_m)
            });
            let mut ev = ev.clone();
            if ev.trip_id.is_empty() {
                ev.trip_id = report.trip_id.clone();
            }
            match target {
                Some(i) => {
                    let c = &mut clusters[i];
                    c.trip_ids.insert(ev.trip_id.clone());
                    c.events.push(ev);
                    c.recompute();
                }
                None => clusters.push(HazardCluster::new(ev, loc)),
            }
        }
    }
    clusters
}

/// Splits clusters into those seen by at least `min_trips` trips and the
/// rest.
pub fn prune_isolated(
    clusters: Vec<HazardCluster>,
    min_trips: usize,
) -> (Vec<HazardCluster>, Vec<HazardCluster>) {
    clusters
        .into_iter()
        .partition(|c| c.supporting_trips() >= min_trips.max(1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapEntry {
    pub event_count: usize,
    pub kind: EventKind,
    #[serde(serialize_with = "fixed6")]
    pub lat: f64,
    #[serde(serialize_with = "fixed6")]
    pub lon: f64,
    #[serde(serialize_with = "fixed3")]
    pub mean_intensity: f64,
    pub supporting_trips: usize,
    pub trip_ids: Vec<String>,
}

impl From<&HazardCluster> for MapEntry {
    fn from(c: &HazardCluster) -> Self {
        Self {
            event_count: c.events.len(),
            kind: c.kind,
            lat: round_to(c.centroid.0, 6),
            lon: round_to(c.centroid.1, 6),
            mean_intensity: round_to(c.mean_intensity, 3),
            supporting_trips: c.supporting_trips(),
            trip_ids: c.trip_ids.iter().cloned().collect(),
        }
    }
}

/// The confirmed hazard map file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HazardMap {
    pub clusters: Vec<MapEntry>,
    pub discarded: usize,
    pub min_trips: usize,
    #[serde(serialize_with = "fixed3")]
    pub radius_m: f64,
    pub schema_version: String,
    pub trips: Vec<String>,
}

impl HazardMap {
    pub fn build(reports: &[TripReport], radius_m: f64, min_trips: usize) -> Self {
        let (confirmed, discarded) = prune_isolated(cluster_events(reports, radius_m), min_trips);
        let mut trips: Vec<String> = reports.iter().map(|r| r.trip_id.clone()).collect();
        trips.sort();
        trips.dedup();
        Self {
            clusters: confirmed.iter().map(MapEntry::from).collect(),
            discarded: discarded.len(),
            min_trips,
            radius_m,
            schema_version: SCHEMA_VERSION.to_string(),
            trips,
        }
    }

    pub fn to_canonical_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Format(format!("cannot serialize map: {e}")))?;
        s.push('\n');
        Ok(s)
    }
}

impl std::str::FromStr for HazardMap {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(format!("bad map: {e}")))
    }
}
