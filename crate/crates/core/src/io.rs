//! Serialized outputs: profile tables and the versioned branch summary.
//!
//! Everything written here is a pure function of its inputs so that reruns
//! produce byte-identical files.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::continuation::{Branch, NodalFlags, Termination};
use crate::model::WaveProfile;
use crate::solver::System;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
    GnuplotDat,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "gnuplot-dat" => Ok(Self::GnuplotDat),
            other => Err(format!("unknown output format `{other}` (csv, json, gnuplot-dat)")),
        }
    }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `x,u,eta` table, one row per grid node.
pub fn write_profile_csv<W: Write>(mut w: W, profile: &WaveProfile) -> io::Result<()> {
    writeln!(w, "x,u,eta")?;
    for j in 0..profile.grid.len() {
        writeln!(
            w,
            "{},{},{}",
            fmt_f64(profile.grid.x(j)),
            fmt_f64(profile.u[j]),
            fmt_f64(profile.eta[j])
        )?;
    }
    Ok(())
}

/// Whitespace-separated `x u eta` triples under a `#` header.
pub fn write_profile_dat<W: Write>(mut w: W, profile: &WaveProfile) -> io::Result<()> {
    writeln!(w, "# x u eta")?;
    for j in 0..profile.grid.len() {
        writeln!(
            w,
            "{} {} {}",
            fmt_f64(profile.grid.x(j)),
            fmt_f64(profile.u[j]),
            fmt_f64(profile.eta[j])
        )?;
    }
    Ok(())
}

/// Parses an `x,u,eta` table back into columns.
pub fn read_profile_csv(text: &str) -> Result<[Vec<f64>; 3], String> {
    let mut lines = text.lines();
    if lines.next() != Some("x,u,eta") {
        return Err("missing `x,u,eta` header".into());
    }
    let mut cols: [Vec<f64>; 3] = Default::default();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(format!("row {} has {} fields", i + 1, fields.len()));
        }
        for (c, f) in cols.iter_mut().zip(fields) {
            c.push(f.parse().map_err(|e| format!("row {}: {e}", i + 1))?);
        }
    }
    Ok(cols)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub param: f64,
    pub u0: f64,
    pub eta0: f64,
    pub residual: f64,
    pub ellipticity_gap: f64,
    pub stagnation_gap: Option<f64>,
    pub nodal: NodalFlags,
    #[serde(rename = "N")]
    pub n: Option<f64>,
    pub decay_rate: Option<f64>,
    pub smallest_singular_value: f64,
    pub newton_iterations: usize,
    pub grid_points: usize,
    pub half_length: f64,
    pub arclength: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub schema: u32,
    pub system: System,
    /// Largest parameter reached by an accepted point.
    pub furthest_param: f64,
    /// Where ellipticity is lost: `λ*` (slow) or `s*` (fast).
    pub critical_param: f64,
    pub points: Vec<PointRecord>,
    pub termination: Termination,
}

impl BranchRecord {
    pub fn from_branch(branch: &Branch) -> Self {
        let critical_param = match branch.system {
            System::Slow { beta } => (1.0 + 1.0 / (3.0 * beta * beta)).powf(-0.5),
            System::Fast { k, lambda } => crate::model::fast_critical_s(k, lambda),
        };
        let points = branch
            .points
            .iter()
            .map(|p| PointRecord {
                param: p.param,
                u0: p.diagnostics.u0,
                eta0: p.diagnostics.eta0,
                residual: p.diagnostics.residual,
                ellipticity_gap: p.diagnostics.ellipticity_gap,
                stagnation_gap: p.diagnostics.stagnation_gap,
                nodal: p.diagnostics.nodal,
                n: p.diagnostics.blowup,
                decay_rate: p.diagnostics.decay_rate,
                smallest_singular_value: p.linearization.smallest_singular_value,
                newton_iterations: p.newton_iterations,
                grid_points: p.profile.grid.len(),
                half_length: p.profile.grid.half_length(),
                arclength: p.arclength,
            })
            .collect();
        Self {
            schema: SCHEMA_VERSION,
            system: branch.system,
            furthest_param: branch.furthest_param(),
            critical_param,
            points,
            termination: branch.termination.clone(),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
