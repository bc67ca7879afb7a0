//! CSV output and JSON run manifests.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::Serialize;

use super::grid::FieldGrid;
use super::langevin::EnsembleStats;
use super::ode::{Metadata, Trajectory};
use crate::error::NumericError;

fn io(e: impl std::fmt::Display) -> NumericError {
    NumericError::InvalidArgument(format!("export failed: {e}"))
}

/// `t`, state columns, then derived series.
pub fn write_trajectory_csv(tr: &Trajectory, path: &Path) -> Result<(), NumericError> {
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let mut header = vec!["t".to_string()];
    header.extend(tr.columns.iter().cloned());
    header.extend(tr.invariants.iter().map(|(n, _)| n.clone()));
    w.write_record(&header).map_err(io)?;
    for (i, s) in tr.states.iter().enumerate() {
        let mut row = vec![tr.time(i).to_string()];
        row.extend(s.iter().map(f64::to_string));
        row.extend(tr.invariants.iter().map(|(_, v)| v[i].to_string()));
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Long format: one `t, x, value` row per grid point and snapshot.
pub fn write_field_csv(g: &FieldGrid, path: &Path) -> Result<(), NumericError> {
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["t", "x", g.field.as_str()]).map_err(io)?;
    let xs = g.xs();
    for (t, s) in g.times.iter().zip(&g.snapshots) {
        for (x, v) in xs.iter().zip(s) {
            w.write_record([t.to_string(), x.to_string(), v.to_string()]).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// `t`, then each monitored integral of the field.
pub fn write_conserved_csv(g: &FieldGrid, path: &Path) -> Result<(), NumericError> {
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let mut header = vec!["t".to_string()];
    header.extend(g.conserved.iter().map(|(n, _)| n.clone()));
    w.write_record(&header).map_err(io)?;
    for (j, t) in g.times.iter().enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(g.conserved.iter().map(|(_, v)| v[j].to_string()));
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_ensemble_csv(s: &EnsembleStats, path: &Path) -> Result<(), NumericError> {
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["t", "msd", "msd_stderr", "v2", "v2_stderr"]).map_err(io)?;
    for j in 0..s.times.len() {
        w.serialize((s.times[j], s.msd[j], s.msd_stderr[j], s.v2[j], s.v2_stderr[j])).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Everything needed to reproduce and judge a run.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub meta: Metadata,
    pub dt: f64,
    pub t1: f64,
    pub files: Vec<String>,
    pub tolerances: Vec<(String, f64)>,
    pub invariants: Vec<InvariantSummary>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantSummary {
    pub name: String,
    pub initial: f64,
    pub last: f64,
    pub max_relative_drift: f64,
}

impl InvariantSummary {
    pub fn of(name: &str, series: &[f64]) -> Self {
        let v0 = series[0];
        let scale = if v0 != 0.0 { v0.abs() } else { 1.0 };
        Self {
            name: name.to_string(),
            initial: v0,
            last: *series.last().unwrap_or(&v0),
            max_relative_drift: series.iter().map(|v| (v - v0).abs() / scale).fold(0.0, f64::max),
        }
    }
}

pub fn write_manifest(m: &Manifest, path: &Path) -> Result<(), NumericError> {
    let f = BufWriter::new(File::create(path).map_err(io)?);
    serde_json::to_writer_pretty(f, m).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ode::{integrate_ode, Method};

    #[test]
    fn trajectory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tr.csv");
        let mut tr = integrate_ode(|_, y| vec![-y[0]], &[1.0], (0.0, 0.1), 1e-2, Method::Rk4).unwrap();
        tr.derive("double", |_, s| 2.0 * s[0]);
        write_trajectory_csv(&tr, &path).unwrap();
        let mut r = csv::Reader::from_path(&path).unwrap();
        assert_eq!(r.headers().unwrap(), vec!["t", "y0", "double"]);
        let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
        assert_eq!(rows.len(), tr.n);
        let back: f64 = rows[5][1].parse().unwrap();
        assert_eq!(back, tr.states[5][0]);
    }
}
