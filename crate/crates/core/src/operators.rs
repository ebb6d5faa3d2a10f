//! Discrete half-Laplacian (−d²/dx²)^{1/2} on non-uniform grids.
//!
//! Fields are reconstructed as piecewise-linear interpolants ū, extended by a
//! constant `left_value` on (−∞, 0) and by the right rule on (x_max, ∞). The
//! operator is the variational (Galerkin) form of the principal-value integral
//!
//! ```text
//!   (−Δ)^{1/2}u(x) = (1/π) PV∫ (u(x) − u(y)) / (x − y)² dy
//! ```
//!
//! tested against hat functions φ_i and divided by the lumped mass w_i = ∫φ_i.
//! It is split into three parts:
//!
//! * the interior double integral ∫∫_{[0,X]²} (ū(x) − ū(y))²/(x − y)², a
//!   quadratic form uᵀGu whose cell-pair integrals are evaluated in closed
//!   form for touching cells and by Gauss–Legendre quadrature otherwise;
//! * the left half-line, lumped to (u_i − s)/x_i;
//! * the right half-line, lumped to (u_i − r)/(X − x_i).
//!
//! Because the operator is the gradient of the quadratic form
//! `Q(u) = uᵀGu + 2Σ w_i (u_i − s)²/x_i + 2Σ w_i (u_i − r)²/(X − x_i)`,
//! it is symmetric and positive with respect to the trapezoid weights.

use std::f64::consts::PI;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// How the operand continues past the last node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RightRule {
    /// u(x) = u(x_max) for x > x_max.
    #[default]
    ConstantTail,
    /// u(x) = 0 for x > x_max. A nonzero last sample then jumps; the jump's
    /// own singular contribution at the last node is dropped.
    Zero,
}

/// Values of the operand outside the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extension {
    pub left_value: f64,
    pub right_rule: RightRule,
}

impl Extension {
    pub fn new(left_value: f64, right_rule: RightRule) -> Result<Self> {
        if !left_value.is_finite() {
            return Err(Error::domain("left extension value must be finite"));
        }
        Ok(Extension {
            left_value,
            right_rule,
        })
    }

    /// Zero on both sides.
    pub fn zero() -> Self {
        Extension {
            left_value: 0.0,
            right_rule: RightRule::Zero,
        }
    }

    /// Zero on the left, constant tail on the right: the extension used for
    /// u = sin(θ − β) with θ = β on x < 0.
    pub fn edge() -> Self {
        Extension {
            left_value: 0.0,
            right_rule: RightRule::ConstantTail,
        }
    }

    fn right_value(&self, u: &[f64]) -> f64 {
        match self.right_rule {
            RightRule::ConstantTail => *u.last().expect("non-empty"),
            RightRule::Zero => 0.0,
        }
    }
}

/// Samples of a function on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::domain(format!(
                "field has {} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("field values must be finite"));
        }
        Ok(Field { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Field::new(grid, values)
    }
}

struct Rules {
    by_order: Vec<Option<Vec<(f64, f64)>>>,
}

fn rules() -> &'static Rules {
    static RULES: OnceLock<Rules> = OnceLock::new();
    RULES.get_or_init(|| {
        let mut by_order = vec![None; 17];
        for n in [2usize, 3, 4, 5, 6, 7, 8, 10, 16] {
            let rule = GaussLegendre::new(n.try_into().expect("n >= 2"));
            // Map from [-1, 1] to [0, 1].
            by_order[n] = Some(rule.iter().map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect());
        }
        Rules { by_order }
    })
}

/// Gauss–Legendre nodes and weights on [0, 1].
pub(crate) fn gauss01(n: usize) -> &'static [(f64, f64)] {
    rules().by_order[n].as_deref().expect("tabulated rule")
}

fn order_for_separation(ratio: f64) -> usize {
    if ratio < 2.0 {
        10
    } else if ratio < 4.0 {
        7
    } else if ratio < 10.0 {
        5
    } else if ratio < 40.0 {
        3
    } else {
        2
    }
}

/// Element matrix of ∫_a∫_b (ū(x) − ū(y))²/(x − y)² dx dy for two cells
/// [a0, a1] < [b0, b1] separated by a positive gap, in the local node order
/// (a0, a1, b0, b1).
fn separated_element(a0: f64, a1: f64, b0: f64, b1: f64) -> [[f64; 4]; 4] {
    let ha = a1 - a0;
    let hb = b1 - b0;
    let gap = b0 - a1;
    debug_assert!(gap > 0.0);
    if gap < ha.max(hb) {
        // Split the wider cell and map the halves back with the midpoint value
        // (u_0 + u_1)/2.
        if ha >= hb {
            let m = 0.5 * (a0 + a1);
            let left = separated_element(a0, m, b0, b1);
            let right = separated_element(m, a1, b0, b1);
            // local maps: left uses (a0, mid), right uses (mid, a1)
            let map_l = [[1.0, 0.0, 0.0, 0.0], [0.5, 0.5, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
            let map_r = [[0.5, 0.5, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
            return add4(&congruence(&left, &map_l), &congruence(&right, &map_r));
        } else {
            let m = 0.5 * (b0 + b1);
            let left = separated_element(a0, a1, b0, m);
            let right = separated_element(a0, a1, m, b1);
            let map_l = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.5, 0.5]];
            let map_r = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.5, 0.5], [0.0, 0.0, 0.0, 1.0]];
            return add4(&congruence(&left, &map_l), &congruence(&right, &map_r));
        }
    }
    let rule = gauss01(order_for_separation(gap / ha.max(hb)));
    let mut s = [0.0; 3]; // (1-t)², (1-t)t, t²
    let mut t_ = [0.0; 3]; // same for τ
    let mut c = [[0.0; 2]; 2]; // (1-t, t) ⊗ (1-τ, τ)
    for &(t, wt) in rule {
        let x = a0 + t * ha;
        let a = [1.0 - t, t];
        for &(tau, wtau) in rule {
            let y = b0 + tau * hb;
            let r = x - y;
            let w = wt * wtau * ha * hb / (r * r);
            let b = [1.0 - tau, tau];
            s[0] += w * a[0] * a[0];
            s[1] += w * a[0] * a[1];
            s[2] += w * a[1] * a[1];
            t_[0] += w * b[0] * b[0];
            t_[1] += w * b[0] * b[1];
            t_[2] += w * b[1] * b[1];
            for j in 0..2 {
                for k in 0..2 {
                    c[j][k] += w * a[j] * b[k];
                }
            }
        }
    }
    [
        [s[0], s[1], -c[0][0], -c[0][1]],
        [s[1], s[2], -c[1][0], -c[1][1]],
        [-c[0][0], -c[1][0], t_[0], t_[1]],
        [-c[0][1], -c[1][1], t_[1], t_[2]],
    ]
}

/// Mᵀ K M for a local-to-local linear map M (rows: sub-element nodes).
fn congruence(k: &[[f64; 4]; 4], m: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut km = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            km[i][j] = (0..4).map(|l| k[i][l] * m[l][j]).sum();
        }
    }
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|l| m[l][i] * km[l][j]).sum();
        }
    }
    out
}

fn add4(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut out = *a;
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] += b[i][j];
        }
    }
    out
}

/// Element matrix for two cells sharing a node, local order (left, shared,
/// right). Exact: with ξ, η the distances from the shared node,
/// ∫∫ ξ²/(ξ+η)² = B(A − B ln(1 + A/B)) and symmetrically.
fn touching_element(ha: f64, hb: f64) -> [[f64; 3]; 3] {
    let (a, b) = (ha, hb);
    let i1 = b * (a - b * (a / b).ln_1p());
    let i3 = a * (b - a * (b / a).ln_1p());
    let i2 = 0.5 * (a * b - i1 - i3);
    // Quadratic form in (δa, δb) = (u_left − u_shared, u_right − u_shared).
    let alpha = i1 / (a * a);
    let gamma = -i2 / (a * b);
    let zeta = i3 / (b * b);
    [
        [alpha, -alpha - gamma, gamma],
        [-alpha - gamma, alpha + 2.0 * gamma + zeta, -gamma - zeta],
        [gamma, -gamma - zeta, zeta],
    ]
}

/// Assembled discrete half-Laplacian for one grid. Immutable once built and
/// safe to share across threads.
#[derive(Debug, Clone)]
pub struct HalfLaplacian {
    grid: Grid,
    weights: Vec<f64>,
    /// Row-major n×n matrix of the interior form.
    interior: Vec<f64>,
    /// w_i / x_i (zero at i = 0).
    left: Vec<f64>,
    /// w_i / (X − x_i) (zero at the last node).
    right: Vec<f64>,
}

impl HalfLaplacian {
    pub fn new(grid: &Grid) -> Self {
        let x = grid.nodes();
        let n = x.len();
        let ncell = n - 1;
        let mut interior = vec![0.0; n * n];
        interior.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let touching: Vec<usize> = [i.checked_sub(1), (i < ncell).then_some(i)]
                .into_iter()
                .flatten()
                .collect();
            for &a in &touching {
                for b in 0..ncell {
                    if b == a {
                        // ∫_a∫_a = (u_{a+1} − u_a)²
                        let (p, q) = (a, a + 1);
                        let sign = if i == p { 1.0 } else { -1.0 };
                        row[p] += sign;
                        row[q] -= sign;
                        continue;
                    }
                    if touching.contains(&b) && b < a {
                        continue;
                    }
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    if hi == lo + 1 {
                        let e = touching_element(x[lo + 1] - x[lo], x[hi + 1] - x[hi]);
                        let nodes = [lo, lo + 1, lo + 2];
                        let li = nodes.iter().position(|&v| v == i).expect("row node in element");
                        for (lj, &j) in nodes.iter().enumerate() {
                            row[j] += 2.0 * e[li][lj];
                        }
                    } else {
                        let e = separated_element(x[lo], x[lo + 1], x[hi], x[hi + 1]);
                        let nodes = [lo, lo + 1, hi, hi + 1];
                        let li = nodes.iter().position(|&v| v == i).expect("row node in element");
                        for (lj, &j) in nodes.iter().enumerate() {
                            row[j] += 2.0 * e[li][lj];
                        }
                    }
                }
            }
        });
        let weights = grid.trapezoid_weights();
        let xm = grid.x_max();
        let left = (0..n)
            .map(|i| if i == 0 { 0.0 } else { weights[i] / x[i] })
            .collect();
        let right = (0..n)
            .map(|i| if i + 1 == n { 0.0 } else { weights[i] / (xm - x[i]) })
            .collect();
        HalfLaplacian {
            grid: grid.clone(),
            weights,
            interior,
            left,
            right,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Entry (i, j) of the interior form G.
    pub fn interior_entry(&self, i: usize, j: usize) -> f64 {
        self.interior[i * self.len() + j]
    }

    /// Gu for the interior form.
    pub fn interior_apply(&self, u: &[f64]) -> Vec<f64> {
        let n = self.len();
        assert_eq!(u.len(), n);
        let row_dot = |row: &[f64]| row.iter().zip(u).map(|(a, b)| a * b).sum::<f64>();
        if n < 256 {
            self.interior.chunks(n).map(row_dot).collect()
        } else {
            self.interior.par_chunks(n).map(row_dot).collect()
        }
    }

    /// ½∂Q/∂u_i for every node, given Gu.
    fn half_gradient(&self, u: &[f64], gu: &[f64], ext: &Extension) -> Vec<f64> {
        let n = self.len();
        let s = ext.left_value;
        let r = ext.right_value(u);
        let mut g: Vec<f64> = (0..n)
            .map(|i| gu[i] + 2.0 * self.left[i] * (u[i] - s) + 2.0 * self.right[i] * (u[i] - r))
            .collect();
        if ext.right_rule == RightRule::ConstantTail {
            let un = u[n - 1];
            let pull: f64 = (0..n).map(|j| self.right[j] * (u[j] - un)).sum();
            g[n - 1] -= 2.0 * pull;
        }
        g
    }

    /// Operator values at every node. Fails when u(0) differs from the left
    /// extension, where the integral is singular.
    pub fn apply(&self, u: &[f64], ext: &Extension) -> Result<Vec<f64>> {
        check_edge(u, ext)?;
        let gu = self.interior_apply(u);
        Ok(self.apply_with(u, &gu, ext))
    }

    /// Operator values at nodes 1..n, which stay finite even when the operand
    /// jumps at x = 0.
    pub fn apply_interior(&self, u: &[f64], ext: &Extension) -> Vec<f64> {
        let gu = self.interior_apply(u);
        let mut out = self.apply_with(u, &gu, ext);
        out.remove(0);
        out
    }

    /// Operator values from a precomputed Gu.
    pub(crate) fn apply_with(&self, u: &[f64], gu: &[f64], ext: &Extension) -> Vec<f64> {
        self.half_gradient(u, gu, ext)
            .into_iter()
            .zip(&self.weights)
            .map(|(g, w)| g / (2.0 * PI * w))
            .collect()
    }

    /// The quadratic form Q(u): the double integral of (ū(x) − ū(y))²/(x − y)²
    /// over the plane, with the (infinite) interaction of the two half-lines
    /// removed.
    pub fn quadratic_form(&self, u: &[f64], ext: &Extension) -> f64 {
        let gu = self.interior_apply(u);
        self.quadratic_form_with(u, &gu, ext)
    }

    pub(crate) fn quadratic_form_with(&self, u: &[f64], gu: &[f64], ext: &Extension) -> f64 {
        let interior: f64 = u.iter().zip(gu).map(|(a, b)| a * b).sum();
        interior + 2.0 * self.left_tail(u, ext.left_value) + 2.0 * self.right_tail(u, ext.right_value(u))
    }

    /// Σ w_i (u_i − s)²/x_i ≈ ∫_0^X (ū − s)²/x.
    pub(crate) fn left_tail(&self, u: &[f64], s: f64) -> f64 {
        u.iter()
            .zip(&self.left)
            .map(|(&ui, &l)| l * (ui - s) * (ui - s))
            .sum()
    }

    /// Σ w_i (u_i − r)²/(X − x_i) ≈ ∫_0^X (ū − r)²/(X − x).
    pub(crate) fn right_tail(&self, u: &[f64], r: f64) -> f64 {
        u.iter()
            .zip(&self.right)
            .map(|(&ui, &t)| t * (ui - r) * (ui - r))
            .sum()
    }

    /// ∫∫ over [0,∞)² of (ū(x) − ū(y))²/(x − y)² with a constant tail past
    /// the last node: the interior form plus the tail cross term.
    pub fn half_line_seminorm(&self, u: &[f64]) -> f64 {
        let gu = self.interior_apply(u);
        let interior: f64 = u.iter().zip(&gu).map(|(a, b)| a * b).sum();
        interior + 2.0 * self.right_tail(u, u[u.len() - 1])
    }
}

fn check_edge(u: &[f64], ext: &Extension) -> Result<()> {
    let s = ext.left_value;
    if (u[0] - s).abs() > 1e-12 * s.abs().max(1.0) {
        return Err(Error::SingularEndpoint {
            value: u[0],
            left_value: s,
        });
    }
    Ok(())
}

/// (−d²/dx²)^{1/2} of a field with the given extensions, at every node.
pub fn half_laplacian_pv(u: &Field, ext: &Extension) -> Result<Field> {
    let op = HalfLaplacian::new(&u.grid);
    let values = op.apply(&u.values, ext)?;
    Ok(Field {
        grid: u.grid.clone(),
        values,
    })
}

/// Periodic half-Laplacian by FFT: mode k is multiplied by |k|.
///
/// The samples must sit on a uniform grid and cover one period, either as
/// `period = n·dx` or with the last node repeating the first
/// (`period = (n − 1)·dx`).
pub fn half_laplacian_spectral(u: &Field, period: f64) -> Result<Field> {
    let n = u.values.len();
    let dx = u
        .grid
        .uniform_spacing(1e-9)
        .ok_or_else(|| Error::domain("spectral half-Laplacian needs a uniform grid"))?;
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::domain(format!("period must be positive, got {period}")));
    }
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b;
    let m = if close(period, n as f64 * dx) {
        n
    } else if close(period, (n - 1) as f64 * dx) {
        n - 1
    } else {
        return Err(Error::domain(format!(
            "period {period} does not match {n} samples with spacing {dx}"
        )));
    };
    let mut out = periodic_multiplier(&u.values[..m], period, |k| k.abs());
    if m < n {
        out.push(out[0]);
    }
    Ok(Field {
        grid: u.grid.clone(),
        values: out,
    })
}

/// Applies a real even Fourier multiplier to one period of samples.
pub(crate) fn periodic_multiplier(u: &[f64], period: f64, symbol: impl Fn(f64) -> f64) -> Vec<f64> {
    let m = u.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let mut buf: Vec<Complex<f64>> = u.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    for (j, c) in buf.iter_mut().enumerate() {
        let jj = if j <= m / 2 { j as f64 } else { j as f64 - m as f64 };
        *c *= symbol(2.0 * PI * jj / period) / m as f64;
    }
    inv.process(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

/// ∫_p^q (x − p) ln|x − c| dx and ∫_p^q (q − x) ln|x − c| dx.
fn linear_log_moments(p: f64, q: f64, c: f64) -> (f64, f64) {
    let l0 = |t: f64| if t == 0.0 { 0.0 } else { t * t.abs().ln() - t };
    let l1 = |t: f64| if t == 0.0 { 0.0 } else { 0.5 * t * t * t.abs().ln() - 0.25 * t * t };
    let (t0, t1) = (p - c, q - c);
    let m0 = l0(t1) - l0(t0);
    let m1 = l1(t1) - l1(t0);
    // ∫ (x − p) ln = ∫ (t − t0) ln|t|, ∫ (q − x) ln = ∫ (t1 − t) ln|t|
    (m1 - t0 * m0, t1 * m0 - m1)
}

/// PV∫ ū′(y)/(x − y) dy tested against the hat function of every node and
/// divided by its mass. The distributional derivative includes the jumps of
/// the extensions at 0 and X.
///
/// For smooth data this matches π times [`half_laplacian_pv`] up to the
/// quadrature of the two half-line terms.
pub fn hilbert_of_derivative(u: &Field, ext: &Extension) -> Result<Field> {
    check_edge(&u.values, ext)?;
    let x = u.grid.nodes();
    let n = x.len();
    let xm = u.grid.x_max();
    let w = u.grid.trapezoid_weights();
    let slopes: Vec<f64> = (0..n - 1)
        .map(|a| (u.values[a + 1] - u.values[a]) / (x[a + 1] - x[a]))
        .collect();
    let right_jump = match ext.right_rule {
        RightRule::ConstantTail => 0.0,
        RightRule::Zero => -u.values[n - 1],
    };
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let lo = if i > 0 { x[i - 1] } else { x[0] };
            let hi = if i + 1 < n { x[i + 1] } else { x[n - 1] };
            let width = hi - lo;
            let mut acc = 0.0;
            for (a, &c) in slopes.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                let (a0, a1) = (x[a], x[a + 1]);
                let dist = if a1 <= lo { lo - a1 } else if a0 >= hi { a0 - hi } else { 0.0 };
                let integral = if dist > 2.0 * width.max(a1 - a0) {
                    // ∫φ_i(x) ln|(x − a0)/(x − a1)| by Gauss–Legendre on each
                    // half of the hat.
                    hat_integral(x, i, |xx| ((a1 - a0) / (xx - a1)).ln_1p())
                } else {
                    hat_log(x, i, a0) - hat_log(x, i, a1)
                };
                acc += c * integral;
            }
            // jump at 0 of size (u_0 − s) is zero here by check_edge
            if right_jump != 0.0 && i + 1 < n {
                acc += right_jump * hat_integral(x, i, |xx| 1.0 / (xx - xm));
            }
            acc / w[i]
        })
        .collect();
    Ok(Field {
        grid: u.grid.clone(),
        values,
    })
}

/// ∫ φ_i(x) ln|x − c| dx in closed form.
fn hat_log(x: &[f64], i: usize, c: f64) -> f64 {
    let n = x.len();
    let mut total = 0.0;
    if i > 0 {
        let (p, q) = (x[i - 1], x[i]);
        total += linear_log_moments(p, q, c).0 / (q - p);
    }
    if i + 1 < n {
        let (p, q) = (x[i], x[i + 1]);
        total += linear_log_moments(p, q, c).1 / (q - p);
    }
    total
}

/// ∫ φ_i(x) f(x) dx with an 8-point rule per half-hat.
fn hat_integral(x: &[f64], i: usize, f: impl Fn(f64) -> f64) -> f64 {
    let n = x.len();
    let rule = gauss01(8);
    let mut total = 0.0;
    if i > 0 {
        let (p, q) = (x[i - 1], x[i]);
        total += rule.iter().map(|&(t, wt)| wt * t * f(p + t * (q - p))).sum::<f64>() * (q - p);
    }
    if i + 1 < n {
        let (p, q) = (x[i], x[i + 1]);
        total += rule
            .iter()
            .map(|&(t, wt)| wt * (1.0 - t) * f(p + t * (q - p)))
            .sum::<f64>()
            * (q - p);
    }
    total
}
