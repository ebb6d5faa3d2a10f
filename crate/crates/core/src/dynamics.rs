//! Relaxation of profiles along the gradient flow of the renormalized energy.
//!
//! The flow W θ_t = −∂E/∂θ is stepped semi-implicitly: exchange is implicit
//! (a tridiagonal solve), anisotropy and the nonlocal term are explicit.

use serde::{Deserialize, Serialize};

use crate::energy::{Cutoff, EnergyBreakdown, EnergyFunctional, Profile};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::operators::Field;
use crate::params::ModelParams;

/// Consecutive energy increases that trigger a stability error.
const STABILITY_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxationConfig {
    pub dt: f64,
    /// Stop once the residual sup-norm is at most `tol`.
    pub tol: f64,
    pub max_steps: usize,
    /// Interval between progress reports and energy-history samples; 0
    /// records only the first and last energies.
    pub report_every: usize,
}

impl RelaxationConfig {
    /// min(0.05, h_min/(1 + ν)).
    pub fn default_dt(grid: &Grid, nu: f64) -> f64 {
        0.05f64.min(grid.min_spacing() / (1.0 + nu))
    }

    pub fn new(dt: f64, tol: f64, max_steps: usize) -> Result<Self> {
        let cfg = RelaxationConfig {
            dt,
            tol,
            max_steps,
            report_every: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::domain(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::domain(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_steps == 0 {
            return Err(Error::domain("max_steps must be at least 1"));
        }
        Ok(())
    }
}

/// State reported every `report_every` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Progress {
    pub step: usize,
    pub residual: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationResult {
    pub profile: Profile,
    pub steps_taken: usize,
    pub final_residual: f64,
    /// (step, total renormalized energy) samples.
    pub energy_history: Vec<(usize, f64)>,
    /// Largest single-step energy increase seen, 0 if the energy never rose.
    pub max_energy_increase: f64,
    pub energy: EnergyBreakdown,
    pub converged: bool,
}

/// θ(x, 0) = 2β/(1 + e^{x/2}).
pub fn initial_profile(beta: f64, grid: &Grid) -> Result<Profile> {
    Profile::from_fn(grid.clone(), beta, |x| 2.0 * beta / (1.0 + (0.5 * x).exp()))
}

/// θ(x) = 2 arctan(e^{−x} tan(β/2)), the minimizer without stray field.
pub fn analytic_zero_nu_profile(beta: f64, grid: &Grid) -> Result<Profile> {
    if beta.is_nan() || beta.abs() >= std::f64::consts::PI {
        return Err(Error::domain(format!("|beta| must be below pi, got {beta}")));
    }
    let t = (0.5 * beta).tan();
    Profile::from_fn(grid.clone(), beta, |x| 2.0 * ((-x).exp() * t).atan())
}

/// θ″ − sinθcosθ − (ν/2)cos(θ − β)(−Δ)^{1/2}sin(θ − β) at each node, with
/// θ = β continued to x < 0. The value at x = 0 is 0.
pub fn el_residual(p: &Profile, params: &ModelParams) -> Result<Field> {
    check_beta(p, params)?;
    let f = EnergyFunctional::new(&p.grid, params.beta, params.nu, &Cutoff::new(params.beta));
    Field::new(p.grid.clone(), f.residual(&p.theta))
}

/// Three-point θ″ on the non-uniform grid, at nodes 1..n−1.
pub fn second_derivative(p: &Profile) -> Vec<f64> {
    let x = p.grid.nodes();
    let t = &p.theta;
    (1..x.len() - 1)
        .map(|i| {
            let (hl, hr) = (x[i] - x[i - 1], x[i + 1] - x[i]);
            2.0 * ((t[i + 1] - t[i]) / hr - (t[i] - t[i - 1]) / hl) / (hl + hr)
        })
        .collect()
}

fn check_beta(p: &Profile, params: &ModelParams) -> Result<()> {
    if p.beta != params.beta {
        return Err(Error::domain(format!(
            "profile edge value {} differs from beta {}",
            p.beta, params.beta
        )));
    }
    Ok(())
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn relax(params: &ModelParams, grid: &Grid, initial: &Profile, cfg: &RelaxationConfig) -> Result<RelaxationResult> {
    relax_with_progress(params, grid, initial, cfg, |_| {})
}

/// Runs [`relax`], calling `on_progress` every `cfg.report_every` steps.
pub fn relax_with_progress(
    params: &ModelParams,
    grid: &Grid,
    initial: &Profile,
    cfg: &RelaxationConfig,
    mut on_progress: impl FnMut(&Progress),
) -> Result<RelaxationResult> {
    cfg.validate()?;
    check_beta(initial, params)?;
    if initial.grid != *grid {
        return Err(Error::domain("initial profile lives on a different grid"));
    }
    let functional = EnergyFunctional::new(grid, params.beta, params.nu, &Cutoff::new(params.beta));
    let n = grid.len();
    let w = functional.operator().weights().to_vec();
    let h = grid.spacings();
    let dt = cfg.dt;

    // Tridiagonal system for nodes 1..n−1 (unknown index k = i − 1).
    let m = n - 1;
    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    for k in 0..m {
        let i = k + 1;
        let cl = dt / h[i - 1];
        let cr = if i + 1 < n { dt / h[i] } else { 0.0 };
        diag[k] = w[i] + cl + cr;
        if k > 0 {
            lower[k] = -cl;
        }
        upper[k] = -cr;
    }
    let solver = Tridiagonal::factor(&lower, &diag, &upper);

    let mut theta = initial.theta.clone();
    theta[0] = params.beta;
    let mut history = Vec::new();
    let mut prev_energy = f64::INFINITY;
    let mut best_energy = f64::INFINITY;
    let mut rising = 0usize;
    let mut max_increase: f64 = 0.0;
    let mut step = 0usize;
    let mut rhs = vec![0.0; m];
    let (residual, converged) = loop {
        let eval = functional.evaluate(&theta, true);
        let energy = eval.energy.expect("requested");
        let residual = sup_norm(&eval.residual);
        if !energy.is_finite() || !residual.is_finite() {
            return Err(Error::Divergence { step });
        }
        if energy > prev_energy {
            max_increase = max_increase.max(energy - prev_energy);
        }
        // Increases are measured against the lowest energy so far, so that
        // oscillating blow-ups count as well as monotone ones.
        if energy > best_energy + 1e-10 * energy.abs().max(1.0) {
            rising += 1;
            if rising >= STABILITY_WINDOW {
                return Err(Error::Stability {
                    step,
                    samples: rising,
                    suggested_dt: 0.5 * dt,
                });
            }
        } else {
            rising = 0;
        }
        best_energy = best_energy.min(energy);
        prev_energy = energy;
        let done = residual <= cfg.tol;
        let report = cfg.report_every > 0 && step.is_multiple_of(cfg.report_every);
        if step == 0 || report || done || step == cfg.max_steps {
            history.push((step, energy));
        }
        if report {
            on_progress(&Progress { step, residual, energy });
        }
        if done || step == cfg.max_steps {
            break (residual, done);
        }
        for (k, r) in rhs.iter_mut().enumerate() {
            let i = k + 1;
            *r = w[i] * (theta[i] - dt * eval.force[i]);
        }
        rhs[0] += dt / h[0] * params.beta;
        solver.solve(&mut rhs);
        theta[1..].copy_from_slice(&rhs);
        step += 1;
    };

    let profile = Profile::new(grid.clone(), theta, params.beta)?;
    let energy = functional.breakdown(&profile.theta);
    Ok(RelaxationResult {
        profile,
        steps_taken: step,
        final_residual: residual,
        energy_history: history,
        max_energy_increase: max_increase,
        energy,
        converged,
    })
}

/// LU factors of a diagonally dominant tridiagonal matrix (Thomas algorithm).
struct Tridiagonal {
    lower: Vec<f64>,
    /// Modified super-diagonal c′.
    upper: Vec<f64>,
    /// Pivots.
    pivot: Vec<f64>,
}

impl Tridiagonal {
    fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Self {
        let m = diag.len();
        let mut pivot = vec![0.0; m];
        let mut up = vec![0.0; m];
        pivot[0] = diag[0];
        up[0] = upper[0] / pivot[0];
        for k in 1..m {
            pivot[k] = diag[k] - lower[k] * up[k - 1];
            up[k] = upper[k] / pivot[k];
        }
        Tridiagonal {
            lower: lower.to_vec(),
            upper: up,
            pivot,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let m = b.len();
        b[0] /= self.pivot[0];
        for k in 1..m {
            b[k] = (b[k] - self.lower[k] * b[k - 1]) / self.pivot[k];
        }
        for k in (0..m - 1).rev() {
            b[k] -= self.upper[k] * b[k + 1];
        }
    }
}
