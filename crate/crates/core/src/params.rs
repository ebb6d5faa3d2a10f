//! Material constants, dimensionless model parameters and run configuration.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vacuum permeability in SI units.
pub const MU0: f64 = 4.0e-7 * PI;

/// Physical constants of a uniaxial film, SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    /// Ms, A/m.
    pub saturation_magnetization: f64,
    /// A, J/m.
    pub exchange_constant: f64,
    /// K, J/m³.
    pub anisotropy_constant: f64,
    /// d, m.
    pub thickness: f64,
}

impl MaterialParams {
    /// Permalloy with the constants used throughout the examples and tests.
    pub fn permalloy(thickness: f64) -> Self {
        MaterialParams {
            saturation_magnetization: 8.0e5,
            exchange_constant: 1.3e-11,
            anisotropy_constant: 5.0e2,
            thickness,
        }
    }

    fn validate(&self) -> Result<()> {
        let fields = [
            ("saturation_magnetization", self.saturation_magnetization),
            ("exchange_constant", self.exchange_constant),
            ("anisotropy_constant", self.anisotropy_constant),
            ("thickness", self.thickness),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::domain(format!("{name} must be positive, got {value}")));
            }
        }
        Ok(())
    }
}

/// Length scales and the thin-film parameter derived from [`MaterialParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessScales {
    /// Exchange length ℓ = √(2A/(μ₀Ms²)), m.
    pub exchange_length_ell: f64,
    /// Bloch wall width L = √(A/K), m; the unit of length of the model.
    pub bloch_width_l: f64,
    /// ν = μ₀Ms²d / (2√(AK)).
    pub nu: f64,
    /// δ = d / L.
    pub delta: f64,
}

pub fn derive_scales(m: &MaterialParams) -> Result<DimensionlessScales> {
    m.validate()?;
    let ms2 = m.saturation_magnetization * m.saturation_magnetization;
    let a = m.exchange_constant;
    let k = m.anisotropy_constant;
    let ell = (2.0 * a / (MU0 * ms2)).sqrt();
    let l = (a / k).sqrt();
    let nu = MU0 * ms2 * m.thickness / (2.0 * (a * k).sqrt());
    Ok(DimensionlessScales {
        exchange_length_ell: ell,
        bloch_width_l: l,
        nu,
        delta: m.thickness / l,
    })
}

/// Wall angle β at the edge and thin-film parameter ν.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    pub nu: f64,
}

impl ModelParams {
    pub fn new(beta: f64, nu: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::domain(format!("beta must be finite, got {beta}")));
        }
        if !(nu.is_finite() && nu >= 0.0) {
            return Err(Error::domain(format!("nu must be finite and >= 0, got {nu}")));
        }
        Ok(ModelParams { beta, nu })
    }
}

/// Parses an angle given either as a decimal number of radians or as a
/// rational multiple of π: `pi`, `-pi`, `pi/4`, `3*pi/2`, `3pi/2`, `-3*pi/4`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::domain(format!("cannot parse angle {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    let lower = s.to_ascii_lowercase();
    let Some(pos) = lower.find("pi") else {
        let v: f64 = lower.parse().map_err(|_| bad())?;
        return if v.is_finite() { Ok(v) } else { Err(bad()) };
    };
    let (head, tail) = (&lower[..pos], &lower[pos + 2..]);
    let numerator = match head.strip_suffix('*').unwrap_or(head) {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| bad())?,
    };
    let denominator = match tail {
        "" => 1.0,
        t => {
            let d = t.strip_prefix('/').ok_or_else(bad)?;
            d.parse::<f64>().map_err(|_| bad())?
        }
    };
    if denominator == 0.0 || !numerator.is_finite() || !denominator.is_finite() {
        return Err(bad());
    }
    Ok(numerator * PI / denominator)
}

/// Settings for one relaxation run. Any field can come from a key=value
/// config file; command-line flags override the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub beta: f64,
    pub nu: f64,
    pub dx0: f64,
    pub stretch_b: f64,
    pub x_max: f64,
    pub h_max: f64,
    /// `None` selects the default step min(0.05, h_min/(1+ν)).
    pub dt: Option<f64>,
    pub tol: f64,
    pub max_steps: usize,
    pub out_prefix: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            beta: PI / 4.0,
            nu: 1.0,
            dx0: 0.125,
            stretch_b: 20.0,
            x_max: 6.0e3,
            h_max: crate::grid::DEFAULT_H_MAX,
            dt: None,
            tol: 1.0e-8,
            max_steps: 2_000_000,
            out_prefix: "edgewall".to_string(),
        }
    }
}

impl RunConfig {
    /// Applies the entries of a flat `key=value` file. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_str(&text)
    }

    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (key, (line, value)) in parse_key_values(text)? {
            let num = |v: &str| -> Result<f64> {
                v.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("{key}: not a number: {v:?}"),
                })
            };
            match key.as_str() {
                "beta" => {
                    self.beta = parse_angle(&value).map_err(|e| Error::Parse {
                        line,
                        message: e.to_string(),
                    })?
                }
                "nu" => self.nu = num(&value)?,
                "dx0" => self.dx0 = num(&value)?,
                "stretch_b" => self.stretch_b = num(&value)?,
                "x_max" => self.x_max = num(&value)?,
                "h_max" => self.h_max = num(&value)?,
                "dt" => self.dt = Some(num(&value)?),
                "tol" => self.tol = num(&value)?,
                "max_steps" => {
                    self.max_steps = value.parse().map_err(|_| Error::Parse {
                        line,
                        message: format!("max_steps: not a count: {value:?}"),
                    })?
                }
                "out_prefix" => self.out_prefix = value,
                other => {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown key {other:?}"),
                    })
                }
            }
        }
        Ok(())
    }
}

fn parse_key_values(text: &str) -> Result<BTreeMap<String, (usize, String)>> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: idx + 1,
            message: format!("expected key=value, got {line:?}"),
        })?;
        out.insert(k.trim().to_string(), (idx + 1, v.trim().to_string()));
    }
    Ok(out)
}
