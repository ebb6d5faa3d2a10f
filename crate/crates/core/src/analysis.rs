//! Post-processing of relaxed profiles: tail fits and shape diagnostics.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::energy::Profile;
use crate::error::{Error, Result};

/// Departures from θ∞ below this size are treated as zero when looking for
/// sign changes.
const TAIL_NOISE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    /// |θ − θ∞| ≈ A·x^p; `exponent_or_rate` is p.
    Power,
    /// |θ − θ∞| ≈ A·e^{−λx}; `exponent_or_rate` is λ.
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub model: DecayModel,
    pub exponent_or_rate: f64,
    pub prefactor: f64,
    pub window: [f64; 2],
    pub r_squared: f64,
}

/// Both tail fits and the one with the larger r².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFits {
    pub power: DecayFit,
    pub exponential: DecayFit,
    pub best: DecayModel,
}

impl DecayFits {
    pub fn best_fit(&self) -> &DecayFit {
        match self.best {
            DecayModel::Power => &self.power,
            DecayModel::Exponential => &self.exponential,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileDiagnostics {
    pub theta_infinity: f64,
    pub total_variation: f64,
    pub winding_flag: bool,
    pub monotone_flag: bool,
    pub overshoot_flag: bool,
    pub boundary_slope: f64,
}

/// Least squares y = a + b·t; returns (a, b, r²).
fn linear_fit(t: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let stt: f64 = t.iter().map(|v| (v - tm).powi(2)).sum();
    let sty: f64 = t.iter().zip(y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    let syy: f64 = y.iter().map(|v| (v - ym).powi(2)).sum();
    let b = sty / stt;
    let a = ym - b * tm;
    let r2 = if syy == 0.0 { 1.0 } else { (sty * sty / (stt * syy)).min(1.0) };
    (a, b, r2)
}

/// Fits power and exponential decay of |θ − θ∞| on the nodes inside
/// `window`, in log coordinates.
pub fn fit_decay(p: &Profile, window: [f64; 2]) -> Result<DecayFits> {
    let [lo, hi] = window;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Window(format!("need 0 < x_lo < x_hi, got [{lo}, {hi}]")));
    }
    if hi > p.grid.x_max() {
        return Err(Error::Window(format!(
            "window end {hi} lies beyond the grid end {}",
            p.grid.x_max()
        )));
    }
    let theta_inf = theta_infinity(p);
    let (xs, ds): (Vec<f64>, Vec<f64>) = p
        .grid
        .nodes()
        .iter()
        .zip(&p.theta)
        .filter(|(&x, _)| x >= lo && x <= hi)
        .map(|(&x, &t)| (x, t - theta_inf))
        .unzip();
    if xs.len() < 8 {
        return Err(Error::Window(format!(
            "window [{lo}, {hi}] holds {} nodes, at least 8 needed",
            xs.len()
        )));
    }
    if ds.contains(&0.0) {
        return Err(Error::Window("profile reaches its limit inside the window".into()));
    }
    if ds.iter().any(|&d| d.signum() != ds[0].signum()) {
        return Err(Error::Window("profile changes sign inside the window".into()));
    }
    let ly: Vec<f64> = ds.iter().map(|d| d.abs().ln()).collect();
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let (a, b, r2) = linear_fit(&lx, &ly);
    let power = DecayFit {
        model: DecayModel::Power,
        exponent_or_rate: b,
        prefactor: a.exp(),
        window,
        r_squared: r2,
    };
    let (a, b, r2) = linear_fit(&xs, &ly);
    let exponential = DecayFit {
        model: DecayModel::Exponential,
        exponent_or_rate: -b,
        prefactor: a.exp(),
        window,
        r_squared: r2,
    };
    let best = if exponential.r_squared > power.r_squared {
        DecayModel::Exponential
    } else {
        DecayModel::Power
    };
    Ok(DecayFits {
        power,
        exponential,
        best,
    })
}

/// Mean of θ over x ≥ x_max/10, rounded to the nearest multiple of π.
pub fn theta_infinity(p: &Profile) -> f64 {
    let cut = p.grid.x_max() / 10.0;
    let tail: Vec<f64> = p
        .grid
        .nodes()
        .iter()
        .zip(&p.theta)
        .filter(|(&x, _)| x >= cut)
        .map(|(_, &t)| t)
        .collect();
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    // Adding 0.0 turns −0 into +0.
    (mean / PI).round() * PI + 0.0
}

/// Second-order one-sided θ′(0).
pub fn boundary_slope(p: &Profile) -> f64 {
    let x = p.grid.nodes();
    let t = &p.theta;
    if x.len() < 3 {
        return (t[1] - t[0]) / x[1];
    }
    let (h0, h1) = (x[1] - x[0], x[2] - x[1]);
    -(2.0 * h0 + h1) / (h0 * (h0 + h1)) * t[0] + (h0 + h1) / (h0 * h1) * t[1] - h0 / (h1 * (h0 + h1)) * t[2]
}

pub fn diagnostics(p: &Profile) -> ProfileDiagnostics {
    let theta_inf = theta_infinity(p);
    let t = &p.theta;
    let beta = p.beta;
    let total_variation: f64 = t.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let peak = t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (lo, hi) = (beta.min(0.0), beta.max(0.0));
    let leaves_range = t.iter().any(|&v| v < lo - 1e-6 || v > hi + 1e-6);
    let winding_flag = total_variation > PI / 2.0 + 0.1 || peak > beta.abs().max(PI / 2.0) + 0.1 || leaves_range;

    let mut dir = 0.0;
    let mut monotone_flag = true;
    for w in t.windows(2) {
        let d = w[1] - w[0];
        if d.abs() <= 1e-12 {
            continue;
        }
        if dir == 0.0 {
            dir = d.signum();
        } else if d.signum() != dir {
            monotone_flag = false;
            break;
        }
    }

    let mut sign = 0.0;
    let mut overshoot_flag = false;
    for &v in &t[1..] {
        let d = v - theta_inf;
        if d.abs() <= TAIL_NOISE {
            continue;
        }
        if sign == 0.0 {
            sign = d.signum();
        } else if d.signum() != sign {
            overshoot_flag = true;
            break;
        }
    }

    ProfileDiagnostics {
        theta_infinity: theta_inf,
        total_variation,
        winding_flag,
        monotone_flag,
        overshoot_flag,
        boundary_slope: boundary_slope(p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::initial_profile;
    use crate::grid::Grid;

    fn synthetic(f: impl Fn(f64) -> f64) -> Profile {
        let g = Grid::stretched(0.125, 20.0, 1000.0, 16.0).unwrap();
        Profile::from_fn(g, f(0.0), f).unwrap()
    }

    #[test]
    fn power_law_is_recovered() {
        let p = synthetic(|x| 3.0 / (1.0 + x));
        let fit = fit_decay(&p, [100.0, 900.0]).unwrap();
        assert_eq!(fit.best, DecayModel::Power);
        assert!((fit.power.exponent_or_rate + 1.0).abs() < 1e-2);
        let q = synthetic(|x| if x == 0.0 { 3.0 } else { 3.0 / x });
        let fit = fit_decay(&q, [10.0, 100.0]).unwrap();
        assert!((fit.power.exponent_or_rate + 1.0).abs() < 1e-12);
        assert!((fit.power.prefactor - 3.0).abs() < 1e-10);
        assert!(fit.power.r_squared > 0.9999);
    }

    #[test]
    fn exponential_is_recovered() {
        let p = synthetic(|x| 0.5 * (-0.8 * x).exp());
        let fit = fit_decay(&p, [5.0, 30.0]).unwrap();
        assert_eq!(fit.best, DecayModel::Exponential);
        assert!((fit.exponential.exponent_or_rate - 0.8).abs() < 1e-10);
        assert!((fit.exponential.prefactor - 0.5).abs() < 1e-10);
    }

    #[test]
    fn negative_tails_fit_by_magnitude() {
        let p = synthetic(|x| -2.0 * (1.0 + x).powf(-1.5));
        let fit = fit_decay(&p, [200.0, 900.0]).unwrap();
        assert!((fit.power.exponent_or_rate + 1.5).abs() < 1e-2);
    }

    #[test]
    fn window_errors() {
        let p = synthetic(|x| (0.05 * x).sin() / (1.0 + x));
        assert!(matches!(fit_decay(&p, [10.0, 200.0]), Err(Error::Window(_))));
        let q = synthetic(|x| 1.0 / (1.0 + x));
        assert!(matches!(fit_decay(&q, [10.0, 11.0]), Err(Error::Window(_))));
        assert!(matches!(fit_decay(&q, [50.0, 1e5]), Err(Error::Window(_))));
        assert!(matches!(fit_decay(&q, [0.0, 100.0]), Err(Error::Window(_))));
    }

    #[test]
    fn initial_profile_diagnostics() {
        let g = Grid::stretched(0.125, 20.0, 6.0e3, 16.0).unwrap();
        let d = diagnostics(&initial_profile(PI / 4.0, &g).unwrap());
        assert!(d.monotone_flag);
        assert!(!d.winding_flag);
        assert!(!d.overshoot_flag);
        assert_eq!(d.theta_infinity, 0.0);
        // θ′(0) = −β/4 for 2β/(1 + e^{x/2})
        assert!((d.boundary_slope + PI / 16.0).abs() < 1e-3);
    }

    #[test]
    fn winding_and_overshoot_detection() {
        let wind = synthetic(|x| 1.5 * PI * (-x).exp());
        let d = diagnostics(&wind);
        assert!(d.winding_flag && d.monotone_flag && !d.overshoot_flag);
        let over = synthetic(|x| -0.75 * PI * (-x).exp() + 0.1 * x * (-x / 3.0).exp());
        let d = diagnostics(&over);
        assert!(d.overshoot_flag && !d.monotone_flag);
        let shifted = synthetic(|x| 2.0 * PI + 0.5 * (-x).exp());
        assert_eq!(diagnostics(&shifted).theta_infinity, 2.0 * PI);
    }

    #[test]
    fn diagnostics_are_odd_under_reflection() {
        let p = synthetic(|x| 2.0 * (-x).exp() - 0.3 * x * (-x / 2.0).exp());
        let (a, b) = (diagnostics(&p), diagnostics(&p.negated()));
        assert_eq!(a.theta_infinity, -b.theta_infinity);
        assert_eq!(a.boundary_slope, -b.boundary_slope);
        assert_eq!(
            (a.winding_flag, a.monotone_flag, a.overshoot_flag),
            (b.winding_flag, b.monotone_flag, b.overshoot_flag)
        );
    }

    #[test]
    fn slope_stencil_is_exact_for_quadratics() {
        let g = Grid::from_nodes(vec![0.0, 0.1, 0.3, 1.0]).unwrap();
        let p = Profile::from_fn(g, 1.0, |x| 1.0 - 2.0 * x + 3.0 * x * x).unwrap();
        assert!((boundary_slope(&p) + 2.0).abs() < 1e-12);
    }
}
