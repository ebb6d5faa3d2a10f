//! Local, nonlocal and renormalized wall energies.
//!
//! All energies use the same piecewise-linear reconstruction as the
//! operators, so that the discrete Euler–Lagrange residual is exactly the
//! weighted gradient of the discrete renormalized energy.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::operators::{gauss01, Extension, Field, HalfLaplacian};

/// Smooth monotone step used to renormalize the energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CutoffShape {
    /// β(1 − 10t³ + 15t⁴ − 6t⁵), C².
    #[default]
    Quintic,
    /// β(1 − 3t² + 2t³), C¹.
    Cubic,
}

/// The comparison profile η_β: equal to β for x ≤ 0 and to 0 for x ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub beta: f64,
    pub shape: CutoffShape,
}

impl Cutoff {
    pub fn new(beta: f64) -> Self {
        Cutoff {
            beta,
            shape: CutoffShape::Quintic,
        }
    }

    pub fn with_shape(beta: f64, shape: CutoffShape) -> Self {
        Cutoff { beta, shape }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = x.clamp(0.0, 1.0);
        let s = match self.shape {
            CutoffShape::Quintic => t * t * t * (10.0 - 15.0 * t + 6.0 * t * t),
            CutoffShape::Cubic => t * t * (3.0 - 2.0 * t),
        };
        self.beta * (1.0 - s)
    }

    pub fn sample(&self, grid: &Grid) -> Vec<f64> {
        grid.nodes().iter().map(|&x| self.eval(x)).collect()
    }
}

/// η_β(x) for the default quintic cutoff.
pub fn cutoff_eval(beta: f64, x: f64) -> f64 {
    Cutoff::new(beta).eval(x)
}

/// Angle field on a grid with the edge value β at x = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub grid: Grid,
    pub theta: Vec<f64>,
    pub beta: f64,
}

impl Profile {
    pub fn new(grid: Grid, theta: Vec<f64>, beta: f64) -> Result<Self> {
        if theta.len() != grid.len() {
            return Err(Error::domain(format!(
                "profile has {} samples for {} nodes",
                theta.len(),
                grid.len()
            )));
        }
        if !beta.is_finite() || theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::domain("profile values must be finite"));
        }
        if (theta[0] - beta).abs() > 1e-12 * beta.abs().max(1.0) {
            return Err(Error::domain(format!(
                "profile must satisfy theta(0) = beta, got {} vs {beta}",
                theta[0]
            )));
        }
        Ok(Profile { grid, theta, beta })
    }

    pub fn from_fn(grid: Grid, beta: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut theta: Vec<f64> = grid.nodes().iter().map(|&x| f(x)).collect();
        theta[0] = beta;
        Profile::new(grid, theta, beta)
    }

    /// u = sin(θ − β) at every node.
    pub fn charge(&self) -> Vec<f64> {
        self.theta.iter().map(|&t| (t - self.beta).sin()).collect()
    }

    pub fn negated(&self) -> Profile {
        Profile {
            grid: self.grid.clone(),
            theta: self.theta.iter().map(|t| -t).collect(),
            beta: -self.beta,
        }
    }
}

/// Energy split into its named parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub exchange: f64,
    pub anisotropy: f64,
    pub edge_charge_term: f64,
    #[serde(rename = "gagliardo_J_theta")]
    pub gagliardo_j_theta: f64,
    #[serde(rename = "gagliardo_J_eta")]
    pub gagliardo_j_eta: f64,
    pub total_renormalized: f64,
}

fn exchange(grid: &Grid, theta: &[f64]) -> f64 {
    grid.spacings()
        .iter()
        .zip(theta.windows(2))
        .map(|(h, t)| 0.5 * (t[1] - t[0]).powi(2) / h)
        .sum()
}

fn anisotropy(weights: &[f64], theta: &[f64]) -> f64 {
    weights
        .iter()
        .zip(theta)
        .map(|(w, t)| 0.5 * w * t.sin().powi(2))
        .sum()
}

/// E⁰ = ½∫(θ′² + sin²θ): exact for the slope term, trapezoid for sin²θ.
pub fn local_energy(p: &Profile) -> f64 {
    exchange(&p.grid, &p.theta) + anisotropy(&p.grid.trapezoid_weights(), &p.theta)
}

/// Half-line double integral of (u(x) − u(y))²/(x − y)² for u = sin(θ − β),
/// with u held at its last value past the grid end.
pub fn gagliardo_j(p: &Profile) -> f64 {
    HalfLaplacian::new(&p.grid).half_line_seminorm(&p.charge())
}

/// 1 − cos β.
pub fn energy_lower_bound(beta: f64) -> f64 {
    1.0 - beta.cos()
}

/// The discrete renormalized energy on one grid, with the cutoff terms
/// precomputed. Shared by energy evaluation and the relaxation loop.
#[derive(Debug, Clone)]
pub struct EnergyFunctional {
    op: HalfLaplacian,
    beta: f64,
    nu: f64,
    /// w_i / x_i, zero at x = 0.
    edge_weights: Vec<f64>,
    eta_edge_sum: f64,
    j_eta: f64,
}

impl EnergyFunctional {
    pub fn new(grid: &Grid, beta: f64, nu: f64, cutoff: &Cutoff) -> Self {
        Self::with_operator(HalfLaplacian::new(grid), beta, nu, cutoff)
    }

    pub fn with_operator(op: HalfLaplacian, beta: f64, nu: f64, cutoff: &Cutoff) -> Self {
        let x = op.grid().nodes();
        let edge_weights: Vec<f64> = op
            .weights()
            .iter()
            .zip(x)
            .map(|(&w, &xi)| if xi > 0.0 { w / xi } else { 0.0 })
            .collect();
        let eta_u: Vec<f64> = cutoff
            .sample(op.grid())
            .iter()
            .map(|&e| (e - beta).sin())
            .collect();
        let eta_edge_sum = edge_weights.iter().zip(&eta_u).map(|(l, u)| l * u * u).sum();
        let j_eta = op.half_line_seminorm(&eta_u);
        EnergyFunctional {
            op,
            beta,
            nu,
            edge_weights,
            eta_edge_sum,
            j_eta,
        }
    }

    pub fn operator(&self) -> &HalfLaplacian {
        &self.op
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn breakdown(&self, theta: &[f64]) -> EnergyBreakdown {
        let u: Vec<f64> = theta.iter().map(|&t| (t - self.beta).sin()).collect();
        let gu = self.op.interior_apply(&u);
        self.breakdown_with(theta, &u, &gu)
    }

    /// Exchange plus anisotropy, the whole energy when ν = 0.
    pub(crate) fn local_total(&self, theta: &[f64]) -> f64 {
        exchange(self.op.grid(), theta) + anisotropy(self.op.weights(), theta)
    }

    /// Breakdown from precomputed u = sin(θ − β) and Gu.
    pub(crate) fn breakdown_with(&self, theta: &[f64], u: &[f64], gu: &[f64]) -> EnergyBreakdown {
        let grid = self.op.grid();
        let exchange = exchange(grid, theta);
        let anisotropy = anisotropy(self.op.weights(), theta);
        let interior: f64 = u.iter().zip(gu).map(|(a, b)| a * b).sum();
        let un = *u.last().expect("non-empty");
        let j_theta = interior + 2.0 * self.op.right_tail(u, un);
        let edge_sum: f64 = self.edge_weights.iter().zip(u).map(|(l, v)| l * v * v).sum();
        let edge = self.nu / (4.0 * PI) * (edge_sum - self.eta_edge_sum);
        let j_eta = self.j_eta;
        EnergyBreakdown {
            exchange,
            anisotropy,
            edge_charge_term: edge,
            gagliardo_j_theta: j_theta,
            gagliardo_j_eta: j_eta,
            total_renormalized: exchange + anisotropy + edge + self.nu / (8.0 * PI) * (j_theta - j_eta),
        }
    }

    /// −(1/w_i) ∂E/∂θ_i at every node; node 0 is set to 0 because θ_0 is
    /// fixed. The last node carries the natural (zero-slope) condition.
    pub fn residual(&self, theta: &[f64]) -> Vec<f64> {
        self.evaluate(theta, false).residual
    }

    /// Residual, the non-diffusive part of the force, and optionally the
    /// total energy, sharing one operator application.
    pub(crate) fn evaluate(&self, theta: &[f64], with_energy: bool) -> Evaluation {
        let n = theta.len();
        let w = self.op.weights();
        let h = self.op.grid().spacings();
        let (op, energy) = if self.nu == 0.0 {
            (vec![0.0; n], with_energy.then(|| self.local_total(theta)))
        } else {
            let u: Vec<f64> = theta.iter().map(|&t| (t - self.beta).sin()).collect();
            let gu = self.op.interior_apply(&u);
            let energy = with_energy.then(|| self.breakdown_with(theta, &u, &gu).total_renormalized);
            (self.op.apply_with(&u, &gu, &Extension::edge()), energy)
        };
        let mut residual = vec![0.0; n];
        let mut force = vec![0.0; n];
        for i in 1..n {
            let flux_right = if i + 1 < n { (theta[i + 1] - theta[i]) / h[i] } else { 0.0 };
            let flux_left = (theta[i] - theta[i - 1]) / h[i - 1];
            let d2 = (flux_right - flux_left) / w[i];
            let (s, c) = theta[i].sin_cos();
            force[i] = s * c + 0.5 * self.nu * (theta[i] - self.beta).cos() * op[i];
            residual[i] = d2 - force[i];
        }
        Evaluation {
            residual,
            force,
            energy,
        }
    }

    /// ∂E/∂θ_i, the unweighted gradient.
    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        self.residual(theta)
            .iter()
            .zip(self.op.weights())
            .map(|(r, w)| -r * w)
            .collect()
    }
}

pub(crate) struct Evaluation {
    pub residual: Vec<f64>,
    /// sinθcosθ + (ν/2)cos(θ − β)·(−Δ)^{1/2}sin(θ − β).
    pub force: Vec<f64>,
    pub energy: Option<f64>,
}

/// E_β of a profile with respect to a cutoff.
pub fn renormalized_energy(p: &Profile, c: &Cutoff, nu: f64) -> Result<EnergyBreakdown> {
    if !(nu.is_finite() && nu >= 0.0) {
        return Err(Error::domain(format!("nu must be finite and >= 0, got {nu}")));
    }
    if c.beta != p.beta {
        return Err(Error::domain(format!(
            "cutoff beta {} differs from profile beta {}",
            c.beta, p.beta
        )));
    }
    Ok(EnergyFunctional::new(&p.grid, p.beta, nu, c).breakdown(&p.theta))
}

/// ½sin²θ + (ν/4π)(sin²(θ − β) − sin²(η_β − β))/x, the pointwise integrand
/// of the local part of the renormalized energy, for x > 0.
pub fn edge_integrand(x: f64, theta: f64, beta: f64, nu: f64, c: &Cutoff) -> f64 {
    let eta = c.eval(x);
    0.5 * theta.sin().powi(2) + nu / (4.0 * PI) * ((theta - beta).sin().powi(2) - (eta - beta).sin().powi(2)) / x
}

/// A constant C with edge_integrand ≥ −C/(1 + x²) for every θ and x > 0,
/// for the quintic cutoff.
///
/// On (0, 1): the integrand is at least −(ν/4π)(η − β)²/x and
/// (η − β)²/x = β²x⁵(10 − 15x + 6x²)², maximal at x = 5/6; 1 + x² ≤ 2.
/// On [1, ∞): sin(θ − 2β)sinθ/x ≥ −ε sin²θ − 1/(4εx²) with ε = 1/ν leaves
/// −ν²/(16πx²) ≥ −(ν²/8π)/(1 + x²).
pub fn integrand_bound_constant(beta: f64, nu: f64) -> f64 {
    let xs: f64 = 5.0 / 6.0;
    let peak = xs.powi(5) * (10.0 - 15.0 * xs + 6.0 * xs * xs).powi(2);
    let near = 2.0 * nu / (4.0 * PI) * beta * beta * peak;
    let far = nu * nu / (8.0 * PI);
    near.max(far)
}

/// The nonlocal energy of a compactly supported m in three equivalent forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlocalForms {
    /// (1/4π)∫∫ ln|x − y|⁻¹ m′(x)m′(y).
    pub log_kernel: f64,
    /// (1/4)∫|k||m̂(k)|² dk/2π.
    pub spectral: f64,
    /// (1/8π)∫∫ (m(x) − m(y))²/(x − y)².
    pub gagliardo: f64,
}

impl NonlocalForms {
    /// Largest pairwise relative difference.
    pub fn max_relative_spread(&self) -> f64 {
        let v = [self.log_kernel, self.spectral, self.gagliardo];
        let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut spread: f64 = 0.0;
        for i in 0..3 {
            for j in i + 1..3 {
                spread = spread.max((v[i] - v[j]).abs() / scale);
            }
        }
        spread
    }
}

/// Evaluates the three forms for samples on a uniform grid that vanish at
/// both ends.
pub fn nonlocal_three_ways(m: &Field) -> Result<NonlocalForms> {
    let h = m
        .grid
        .uniform_spacing(1e-9)
        .ok_or_else(|| Error::domain("nonlocal_three_ways needs a uniform grid"))?;
    let v = &m.values;
    let n = v.len();
    let scale = v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if v[0].abs() > 1e-14 * scale || v[n - 1].abs() > 1e-14 * scale {
        return Err(Error::domain("m must vanish at both ends of the grid"));
    }
    if scale == 0.0 {
        return Ok(NonlocalForms {
            log_kernel: 0.0,
            spectral: 0.0,
            gagliardo: 0.0,
        });
    }
    let x = m.grid.nodes();

    let op = HalfLaplacian::new(&m.grid);
    let gagliardo = op.quadratic_form(v, &Extension::zero()) / (8.0 * PI);

    let slopes: Vec<f64> = v.windows(2).map(|p| (p[1] - p[0]) / h).collect();
    let active: Vec<usize> = (0..n - 1).filter(|&a| slopes[a] != 0.0).collect();
    let g = |t: f64| if t == 0.0 { 0.0 } else { 0.5 * t * t * t.abs().ln() - 0.75 * t * t };
    let rule = gauss01(4);
    let pair = |a: usize, b: usize| -> f64 {
        let (a0, a1, b0, b1) = (x[a], x[a + 1], x[b], x[b + 1]);
        let gap = if a < b { b0 - a1 } else { a0 - b1 };
        if gap >= 2.0 * h {
            let mut s = 0.0;
            for &(t, wt) in rule {
                for &(tau, wtau) in rule {
                    s += wt * wtau * ((a0 + t * h) - (b0 + tau * h)).abs().ln();
                }
            }
            s * h * h
        } else {
            g(a1 - b0) - g(a1 - b1) - g(a0 - b0) + g(a0 - b1)
        }
    };
    let log_integral: f64 = {
        use rayon::prelude::*;
        let rows: Vec<f64> = active
            .par_iter()
            .map(|&a| active.iter().map(|&b| slopes[a] * slopes[b] * pair(a, b)).sum::<f64>())
            .collect();
        rows.iter().sum()
    };
    let log_kernel = -log_integral / (4.0 * PI);

    // Zero padding makes the periodic images far enough apart that the
    // Riemann sum over k approximates the line integral.
    let padded = (16 * n).max(1 << 18).next_power_of_two();
    let period = padded as f64 * h;
    let mut planner = rustfft::FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(padded);
    let mut buf = vec![rustfft::num_complex::Complex::new(0.0, 0.0); padded];
    for (b, &vi) in buf.iter_mut().zip(v) {
        b.re = vi * h;
    }
    fft.process(&mut buf);
    let spectral: f64 = buf
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let jj = if j <= padded / 2 { j as f64 } else { j as f64 - padded as f64 };
            (2.0 * PI * jj / period).abs() * c.norm_sqr()
        })
        .sum::<f64>()
        / (4.0 * period);

    Ok(NonlocalForms {
        log_kernel,
        spectral,
        gagliardo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zero_nu_profile(beta: f64) -> impl Fn(f64) -> f64 {
        move |x: f64| 2.0 * ((-x).exp() * (beta / 2.0).tan()).atan()
    }

    /// Adaptive Simpson quadrature, used as an independent oracle.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 40)
    }

    #[test]
    fn cutoff_values() {
        let b = 0.7;
        assert_eq!(cutoff_eval(b, -1.0), b);
        assert_eq!(cutoff_eval(b, 2.0), 0.0);
        assert!((cutoff_eval(b, 0.5) - b / 2.0).abs() < 1e-15);
        let c = Cutoff::with_shape(b, CutoffShape::Cubic);
        assert!((c.eval(0.5) - b / 2.0).abs() < 1e-15);
        let mut prev = b;
        for i in 0..=1000 {
            let v = cutoff_eval(b, i as f64 / 1000.0);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn local_energy_of_zero_is_zero() {
        let g = Grid::uniform(0.1, 5.0).unwrap();
        let p = Profile::from_fn(g, 0.0, |_| 0.0).unwrap();
        assert_eq!(local_energy(&p), 0.0);
    }

    #[test]
    fn local_energy_attains_the_bound() {
        let beta = PI / 2.0;
        let g = Grid::uniform(0.01, 40.0).unwrap();
        let p = Profile::from_fn(g, beta, zero_nu_profile(beta)).unwrap();
        assert!((local_energy(&p) - 1.0).abs() < 1e-3);
        assert_eq!(energy_lower_bound(0.0), 0.0);
        assert!((energy_lower_bound(beta) - 1.0).abs() < 1e-15);
        assert!((energy_lower_bound(PI / 4.0) - (1.0 - 0.5f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn local_energy_of_ramp_matches_quadrature() {
        let beta = PI / 4.0;
        let ramp = move |x: f64| beta * (1.0 - x).max(0.0);
        let exact = 0.5 * beta * beta + simpson(&|x| 0.5 * ramp(x).sin().powi(2), 0.0, 1.0, 1e-13);
        let g = Grid::uniform(0.001, 3.0).unwrap();
        let p = Profile::from_fn(g, beta, ramp).unwrap();
        // Trapezoid error on the smooth part is O(h²).
        assert!((local_energy(&p) - exact).abs() < 1e-6, "{} {exact}", local_energy(&p));
    }

    #[test]
    fn gagliardo_of_constant_profile_is_zero() {
        let g = Grid::stretched(0.1, 20.0, 100.0, 16.0).unwrap();
        let p = Profile::from_fn(g, 0.3, |_| 0.3).unwrap();
        assert_eq!(gagliardo_j(&p), 0.0);
    }

    /// Midpoint product rule on [0,1]², with the diagonal cells replaced by
    /// u′², plus the tail 2∫(u − c)²/(1 − x) against the constant c = u(1).
    fn brute_j_eta(beta: f64, m: usize) -> f64 {
        let c = Cutoff::new(beta);
        let u = |x: f64| (c.eval(x) - beta).sin();
        let du = |x: f64| {
            let e = 1e-6;
            (u(x + e) - u(x - e)) / (2.0 * e)
        };
        let h = 1.0 / m as f64;
        let xs: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) * h).collect();
        let us: Vec<f64> = xs.iter().map(|&x| u(x)).collect();
        let mut s = 0.0;
        for i in 0..m {
            for j in 0..m {
                s += if i == j {
                    du(xs[i]).powi(2)
                } else {
                    (us[i] - us[j]).powi(2) / (xs[i] - xs[j]).powi(2)
                };
            }
        }
        let tail_c = u(1.0);
        let tail = simpson(&|x| if x < 1.0 { (u(x) - tail_c).powi(2) / (1.0 - x) } else { 0.0 }, 0.0, 1.0, 1e-12);
        s * h * h + 2.0 * tail
    }

    #[test]
    fn gagliardo_of_cutoff_matches_brute_force() {
        let beta = PI / 4.0;
        let (a, b) = (brute_j_eta(beta, 400), brute_j_eta(beta, 800));
        let oracle = (4.0 * b - a) / 3.0;
        let g = Grid::uniform(0.002, 3.0).unwrap();
        let c = Cutoff::new(beta);
        let p = Profile::from_fn(g, beta, |x| c.eval(x)).unwrap();
        let j = gagliardo_j(&p);
        assert!(j.is_finite() && j > 0.0);
        assert!((j - oracle).abs() < 1e-4 * oracle, "{j} vs {oracle} ({a}, {b})");
    }

    #[test]
    fn gagliardo_is_scale_invariant() {
        let f = |x: f64| x * (-x).exp() * (3.0 * x).sin();
        let g1 = Grid::stretched(0.02, 50.0, 60.0, 0.1).unwrap();
        let g2 = Grid::from_nodes(g1.nodes().iter().map(|x| 2.0 * x).collect()).unwrap();
        let op1 = HalfLaplacian::new(&g1);
        let op2 = HalfLaplacian::new(&g2);
        let u1: Vec<f64> = g1.nodes().iter().map(|&x| f(x)).collect();
        let u2: Vec<f64> = g2.nodes().iter().map(|&x| f(x / 2.0)).collect();
        let (j1, j2) = (op1.half_line_seminorm(&u1), op2.half_line_seminorm(&u2));
        assert!((j1 - j2).abs() < 1e-12 * j1);
        // and on an unrelated finer grid
        let g3 = Grid::uniform(0.02, 120.0).unwrap();
        let u3: Vec<f64> = g3.nodes().iter().map(|&x| f(x / 2.0)).collect();
        let j3 = HalfLaplacian::new(&g3).half_line_seminorm(&u3);
        assert!((j1 - j3).abs() < 1e-2 * j1, "{j1} {j3}");
    }

    #[test]
    fn zero_nu_energy_is_local_energy() {
        let beta = 0.6;
        let g = Grid::stretched(0.1, 20.0, 200.0, 16.0).unwrap();
        let p = Profile::from_fn(g, beta, zero_nu_profile(beta)).unwrap();
        let e = renormalized_energy(&p, &Cutoff::new(beta), 0.0).unwrap();
        assert_eq!(e.total_renormalized, local_energy(&p));
    }

    #[test]
    fn cutoff_profile_cancels() {
        let beta = PI / 4.0;
        let c = Cutoff::new(beta);
        let g = Grid::stretched(0.05, 20.0, 200.0, 16.0).unwrap();
        let p = Profile::from_fn(g, beta, |x| c.eval(x)).unwrap();
        let e = renormalized_energy(&p, &c, 3.0).unwrap();
        assert_eq!(e.gagliardo_j_theta, e.gagliardo_j_eta);
        assert_eq!(e.edge_charge_term, 0.0);
        assert!((e.total_renormalized - local_energy(&p)).abs() < 1e-14);
        let sum = e.exchange + e.anisotropy + e.edge_charge_term + 3.0 / (8.0 * PI) * (e.gagliardo_j_theta - e.gagliardo_j_eta);
        assert_eq!(sum, e.total_renormalized);
    }

    #[test]
    fn cutoff_choice_shifts_energy_by_a_constant() {
        let beta = 0.9;
        let nu = 5.0;
        let g = Grid::stretched(0.05, 20.0, 500.0, 16.0).unwrap();
        let quintic = Cutoff::new(beta);
        let cubic = Cutoff::with_shape(beta, CutoffShape::Cubic);
        let p1 = Profile::from_fn(g.clone(), beta, zero_nu_profile(beta)).unwrap();
        let p2 = Profile::from_fn(g, beta, |x| 2.0 * beta / (1.0 + (x / 2.0).exp())).unwrap();
        let e = |p: &Profile, c: &Cutoff| renormalized_energy(p, c, nu).unwrap().total_renormalized;
        let d1 = e(&p1, &quintic) - e(&p1, &cubic);
        let d2 = e(&p2, &quintic) - e(&p2, &cubic);
        assert!(d1.abs() > 1e-6);
        assert!((d1 - d2).abs() < 1e-10, "{d1} {d2}");
    }

    #[test]
    fn integrand_bound_constant_peak() {
        // x⁵(10 − 15x + 6x²)² sampled densely never exceeds the closed-form peak.
        // ν = 0.4π: the near-edge branch dominates and equals 0.2·peak.
        let c = integrand_bound_constant(1.0, 0.4 * PI) / 0.2;
        let dense = (1..100000)
            .map(|i| {
                let x = i as f64 / 100000.0;
                x.powi(5) * (10.0 - 15.0 * x + 6.0 * x * x).powi(2)
            })
            .fold(0.0f64, f64::max);
        assert!(dense <= c + 1e-12 && dense > c - 1e-6, "{dense} {c}");
    }

    #[test]
    fn three_ways_of_zero() {
        let g = Grid::uniform(0.1, 4.0).unwrap();
        let m = Field::from_fn(g, |_| 0.0).unwrap();
        let f = nonlocal_three_ways(&m).unwrap();
        assert_eq!((f.log_kernel, f.spectral, f.gagliardo), (0.0, 0.0, 0.0));
    }

    #[test]
    fn three_ways_rejects_nonzero_ends() {
        let g = Grid::uniform(0.1, 4.0).unwrap();
        let m = Field::from_fn(g, |x| 1.0 + x).unwrap();
        assert!(matches!(nonlocal_three_ways(&m), Err(Error::Domain(_))));
    }

    #[test]
    fn three_ways_of_a_hat_agree() {
        // A hat is exactly piecewise linear, so the log-kernel and Gagliardo
        // forms evaluate the same function. Its energy in closed form:
        // m̂(k) = sinc²(k/2), (1/4)∫|k| sinc⁴(k/2) dk/2π = ln 2 / π.
        let g = Grid::uniform(0.05, 4.0).unwrap();
        let m = Field::from_fn(g, |x| (1.0 - (x - 2.0).abs()).max(0.0)).unwrap();
        let f = nonlocal_three_ways(&m).unwrap();
        let exact = 2.0f64.ln() / PI;
        assert!((f.log_kernel - exact).abs() < 1e-9 * exact, "{f:?}");
        assert!((f.gagliardo - exact).abs() < 2e-3 * exact, "{f:?}");
        assert!((f.spectral - exact).abs() < 1e-2 * exact, "{f:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn modica_mortola_bound_holds(beta in -3.0f64..3.0, a in prop::collection::vec(-1.0f64..1.0, 4)) {
            let g = Grid::stretched(0.05, 20.0, 60.0, 1.0).unwrap();
            let f = move |x: f64| {
                let pert: f64 = a.iter().enumerate().map(|(k, c)| c * ((k + 1) as f64 * x).sin()).sum();
                beta * (-x).exp() + x * (-x / 2.0).exp() * pert
            };
            let p = Profile::from_fn(g, beta, f).unwrap();
            prop_assert!(local_energy(&p) >= energy_lower_bound(beta) - 1e-9);
        }

        #[test]
        fn reflection_symmetry(beta in -3.0f64..3.0, nu in 0.0f64..20.0, s in 0.3f64..3.0) {
            let g = Grid::stretched(0.1, 20.0, 200.0, 16.0).unwrap();
            let p = Profile::from_fn(g, beta, |x| beta / (1.0 + x / s).powi(2)).unwrap();
            let e1 = renormalized_energy(&p, &Cutoff::new(beta), nu).unwrap();
            let e2 = renormalized_energy(&p.negated(), &Cutoff::new(-beta), nu).unwrap();
            prop_assert!((e1.total_renormalized - e2.total_renormalized).abs() <= 1e-12 * e1.total_renormalized.abs().max(1.0));
            prop_assert!(e1.gagliardo_j_theta >= 0.0);
        }

        #[test]
        fn integrand_is_bounded_below(beta in -3.0f64..3.0, nu in 0.01f64..60.0, x in 1e-4f64..1e4, theta in -10.0f64..10.0) {
            let c = Cutoff::new(beta);
            let bound = integrand_bound_constant(beta, nu);
            prop_assert!(edge_integrand(x, theta, beta, nu, &c) >= -bound / (1.0 + x * x) - 1e-12);
        }
    }
}
