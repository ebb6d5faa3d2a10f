//! Profile CSV files and JSON run records.
//!
//! Numbers are written with 17 significant digits so every f64 survives a
//! write/read cycle unchanged. JSON keys follow struct field order.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{DecayFits, ProfileDiagnostics};
use crate::dynamics::{RelaxationConfig, RelaxationResult};
use crate::energy::{EnergyBreakdown, Profile};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridSpec};
use crate::params::ModelParams;

pub fn write_profile_csv(p: &Profile, path: &Path) -> Result<()> {
    fs::write(path, profile_csv_string(p)).map_err(|e| Error::io(path, e))
}

pub fn profile_csv_string(p: &Profile) -> String {
    let mut out = String::with_capacity(48 * p.theta.len() + 8);
    out.push_str("x,theta\n");
    for (x, t) in p.grid.nodes().iter().zip(&p.theta) {
        out.push_str(&format!("{x:.16e},{t:.16e}\n"));
    }
    out
}

/// Reads a profile written by [`write_profile_csv`]. The edge value β is the
/// first θ sample.
pub fn read_profile_csv(path: &Path) -> Result<Profile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_profile_csv(&text)
}

pub fn parse_profile_csv(text: &str) -> Result<Profile> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "x,theta" => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: "expected header \"x,theta\"".into(),
            })
        }
    }
    let mut xs = Vec::new();
    let mut ts = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::Parse { line, message };
        let (a, b) = raw
            .split_once(',')
            .ok_or_else(|| bad(format!("expected two columns, got {raw:?}")))?;
        let x: f64 = a.trim().parse().map_err(|_| bad(format!("bad x value {a:?}")))?;
        let t: f64 = b.trim().parse().map_err(|_| bad(format!("bad theta value {b:?}")))?;
        if !x.is_finite() || !t.is_finite() {
            return Err(bad("non-finite value".into()));
        }
        match xs.last() {
            None if x != 0.0 => return Err(bad(format!("first x must be 0, got {x}"))),
            Some(&prev) if x <= prev => {
                return Err(bad(format!("x column must increase, {x} follows {prev}")))
            }
            _ => {}
        }
        xs.push(x);
        ts.push(t);
    }
    if xs.len() < 2 {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            message: "a profile needs at least two rows".into(),
        });
    }
    let beta = ts[0];
    Profile::new(Grid::from_nodes(xs)?, ts, beta)
}

/// Scalar outcome of a relaxation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSummary {
    pub converged: bool,
    pub steps_taken: usize,
    pub final_residual: f64,
    pub max_energy_increase: f64,
    pub energy_history: Vec<(usize, f64)>,
}

impl From<&RelaxationResult> for ResultSummary {
    fn from(r: &RelaxationResult) -> Self {
        ResultSummary {
            converged: r.converged,
            steps_taken: r.steps_taken,
            final_residual: r.final_residual,
            max_energy_increase: r.max_energy_increase,
            energy_history: r.energy_history.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ArtifactPaths {
    pub profile_csv: Option<PathBuf>,
    pub grid_csv: Option<PathBuf>,
    pub run_json: Option<PathBuf>,
}

/// Everything needed to reproduce and inspect one relaxation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub params: ModelParams,
    pub grid: GridSpec,
    pub relaxation: RelaxationConfig,
    pub result: ResultSummary,
    pub diagnostics: ProfileDiagnostics,
    pub energy: EnergyBreakdown,
    pub decay: Option<DecayFits>,
    pub artifacts: ArtifactPaths,
}

/// One row of a sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub beta: f64,
    pub nu: f64,
    pub ok: bool,
    pub error: Option<String>,
    pub converged: bool,
    pub steps_taken: usize,
    pub energy_total: Option<f64>,
    pub boundary_slope: Option<f64>,
    pub diagnostics: Option<ProfileDiagnostics>,
    pub decay: Option<DecayFits>,
    pub decay_error: Option<String>,
    pub profile_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepRecord {
    pub results: Vec<SweepEntry>,
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_run_json(record: &RunRecord, path: &Path) -> Result<()> {
    write_json(record, path)
}

pub fn read_run_json(path: &Path) -> Result<RunRecord> {
    read_json(path)
}

pub fn write_sweep_json(record: &SweepRecord, path: &Path) -> Result<()> {
    write_json(record, path)
}

pub fn read_sweep_json(path: &Path) -> Result<SweepRecord> {
    read_json(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn three_node_round_trip() {
        let g = Grid::from_nodes(vec![0.0, 0.1, 0.30000000000000004]).unwrap();
        let p = Profile::new(g, vec![FRAC_PI_4, 1.0 / 3.0, -2e-300], FRAC_PI_4).unwrap();
        let q = parse_profile_csv(&profile_csv_string(&p)).unwrap();
        assert_eq!(p, q);
        assert!(profile_csv_string(&p).starts_with("x,theta\n0.0000000000000000e0,7.8539816339744828e-1\n"));
    }

    #[test]
    fn malformed_rows_name_their_line() {
        let cases = [
            ("x,theta\n0,1\n0.5,0.2\n0.4,0.1\n", 4),
            ("x,theta\n0,1\n0.5\n", 3),
            ("x,theta\n0,1\n0.5,abc\n", 3),
            ("x,theta\n0.1,1\n0.5,0\n", 2),
            ("theta,x\n0,1\n", 1),
        ];
        for (text, want) in cases {
            match parse_profile_csv(text) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn empty_sweep_serializes_to_empty_list() {
        let text = serde_json::to_string(&SweepRecord::default()).unwrap();
        assert_eq!(text, r#"{"results":[]}"#);
    }
}
