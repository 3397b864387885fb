//! Trajectory serialization: CSV and JSON with round-trippable floats.

use std::io::Write;

use serde::{Deserialize, Serialize};

use magdisk::error::Result;
use magdisk::flow::{FieldStrength, Trajectory};
use magdisk::quotient::{align_to_chart, FuchsianGroup};

/// Formats a double with 17 significant digits, enough to round-trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub const CSV_HEADER: &str = "t,re,im,p_x,p_y,energy,k_g";

/// One output record; keys match the CSV columns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleRecord {
    pub t: f64,
    pub re: f64,
    pub im: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub energy: f64,
    pub k_g: f64,
}

/// Trajectory file payload: run metadata plus the sample records.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryDocument {
    pub schema_version: u32,
    pub e: f64,
    pub dt: f64,
    pub seed: u64,
    pub samples: Vec<SampleRecord>,
}

pub const SCHEMA_VERSION: u32 = 1;

/// Builds records from a trajectory. The curvature column is the central-
/// difference estimate; when the trajectory lives on the quotient the
/// neighbors are aligned into each sample's chart first. Endpoint rows copy
/// the nearest interior estimate.
pub fn records_from_trajectory(
    traj: &Trajectory,
    group: Option<&FuchsianGroup>,
    field: FieldStrength,
) -> Result<Vec<SampleRecord>> {
    let samples = traj.samples();
    let n = samples.len();
    let mut curvature = vec![f64::NAN; n];
    for i in 1..n.saturating_sub(1) {
        let k = match group {
            None => traj.geodesic_curvature(i)?,
            Some(g) => {
                let prev = align_to_chart(&samples[i].state, &samples[i - 1].state, g)?;
                let next = align_to_chart(&samples[i].state, &samples[i + 1].state, g)?;
                magdisk::flow::geodesic_curvature_of_triple(
                    &prev,
                    &samples[i].state,
                    &next,
                    traj.step(),
                )?
            }
        };
        curvature[i] = k;
    }
    if n > 2 {
        curvature[0] = curvature[1];
        curvature[n - 1] = curvature[n - 2];
    } else if n == 2 {
        // No centered stencil exists; fall back to a one-sided O(dt)
        // estimate shared by both rows.
        let prev = &samples[0].state;
        let next = &samples[1].state;
        let mid = magdisk::flow::step(prev, 0.5 * traj.step(), field)?;
        let k = magdisk::flow::geodesic_curvature_of_triple(prev, &mid, next, 0.5 * traj.step())?;
        curvature[0] = k;
        curvature[1] = k;
    }
    Ok(samples
        .iter()
        .zip(curvature)
        .map(|(s, k_g)| SampleRecord {
            t: s.t,
            re: s.state.position().re(),
            im: s.state.position().im(),
            p_x: s.state.momentum().re,
            p_y: s.state.momentum().im,
            energy: s.state.energy(),
            k_g,
        })
        .collect())
}

pub fn write_csv(out: &mut dyn Write, records: &[SampleRecord]) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f64(r.t),
            fmt_f64(r.re),
            fmt_f64(r.im),
            fmt_f64(r.p_x),
            fmt_f64(r.p_y),
            fmt_f64(r.energy),
            fmt_f64(r.k_g),
        )?;
    }
    Ok(())
}

pub fn write_json(out: &mut dyn Write, doc: &TrajectoryDocument) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(doc).expect("document serializes");
    writeln!(out, "{text}")
}

/// Parses a trajectory file by content: JSON documents start with '{',
/// anything else is treated as CSV.
pub fn parse_trajectory_file(text: &str) -> std::result::Result<TrajectoryDocument, String> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        return serde_json::from_str(trimmed).map_err(|e| format!("invalid JSON: {e}"));
    }
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    if header.trim() != CSV_HEADER {
        return Err(format!("unexpected CSV header: {header}"));
    }
    let mut samples = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(format!("line {}: expected 7 fields", lineno + 2));
        }
        let mut values = [0.0f64; 7];
        for (v, f) in values.iter_mut().zip(fields.iter()) {
            *v = f
                .trim()
                .parse()
                .map_err(|e| format!("line {}: {e}", lineno + 2))?;
        }
        samples.push(SampleRecord {
            t: values[0],
            re: values[1],
            im: values[2],
            p_x: values[3],
            p_y: values[4],
            energy: values[5],
            k_g: values[6],
        });
    }
    let dt = if samples.len() > 1 {
        samples[1].t - samples[0].t
    } else {
        0.0
    };
    let e = samples.first().map(|s| s.energy).unwrap_or(0.0);
    Ok(TrajectoryDocument {
        schema_version: SCHEMA_VERSION,
        e,
        dt,
        seed: 0,
        samples,
    })
}
