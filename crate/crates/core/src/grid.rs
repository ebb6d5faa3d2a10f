//! One-dimensional grids on [0, x_max], fine near the edge and stretched in
//! the far field.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the far-field spacing.
pub const DEFAULT_H_MAX: f64 = 16.0;

/// Ordered node set starting at x = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
}

/// Parameters a grid was built from, kept for run records.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    Uniform { dx: f64, x_max: f64 },
    Stretched { dx0: f64, stretch_b: f64, x_max: f64, h_max: f64 },
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        match *self {
            GridSpec::Uniform { dx, x_max } => Grid::uniform(dx, x_max),
            GridSpec::Stretched {
                dx0,
                stretch_b,
                x_max,
                h_max,
            } => Grid::stretched(dx0, stretch_b, x_max, h_max),
        }
    }
}

impl Grid {
    /// Wraps an explicit node list, checking that it starts at 0 and is
    /// strictly increasing.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Grid> {
        if nodes.len() < 2 {
            return Err(Error::domain("a grid needs at least two nodes"));
        }
        if nodes[0] != 0.0 {
            return Err(Error::domain(format!("first node must be 0, got {}", nodes[0])));
        }
        for (i, w) in nodes.windows(2).enumerate() {
            if !(w[1].is_finite() && w[1] > w[0]) {
                return Err(Error::domain(format!(
                    "nodes must increase strictly: x[{}] = {} after {}",
                    i + 1,
                    w[1],
                    w[0]
                )));
            }
        }
        Ok(Grid { nodes })
    }

    /// Nodes i·dx for i = 0..⌈x_max/dx⌉.
    pub fn uniform(dx: f64, x_max: f64) -> Result<Grid> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::domain(format!("dx must be positive, got {dx}")));
        }
        if !(x_max.is_finite() && x_max > 0.0) {
            return Err(Error::domain(format!("x_max must be positive, got {x_max}")));
        }
        // Guard against ⌈·⌉ rounding 40/0.05 = 800.0000000001 up by one.
        let ratio = x_max / dx;
        let n = if (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0) {
            ratio.round() as usize
        } else {
            ratio.ceil() as usize
        };
        let n = n.max(1);
        Ok(Grid {
            nodes: (0..=n).map(|i| i as f64 * dx).collect(),
        })
    }

    /// Geometric stretching: h₁ = dx0, h_{i+1} = min(h_i·(1 + 1/b), h_max),
    /// nodes accumulated until the last one reaches x_max. `stretch_b` may be
    /// `f64::INFINITY` for a uniform grid.
    pub fn stretched(dx0: f64, stretch_b: f64, x_max: f64, h_max: f64) -> Result<Grid> {
        if !(dx0.is_finite() && dx0 > 0.0) {
            return Err(Error::domain(format!("dx0 must be positive, got {dx0}")));
        }
        if stretch_b.is_nan() || stretch_b <= 0.0 {
            return Err(Error::domain(format!("stretch factor must be positive, got {stretch_b}")));
        }
        if !(x_max.is_finite() && x_max > 0.0) {
            return Err(Error::domain(format!("x_max must be positive, got {x_max}")));
        }
        if h_max.is_nan() || h_max < dx0 {
            return Err(Error::domain(format!("h_max = {h_max} must be >= dx0 = {dx0}")));
        }
        let growth = 1.0 + 1.0 / stretch_b;
        let mut nodes = vec![0.0];
        let mut h = dx0;
        let mut x = 0.0;
        // Relative slack so that x_max = k·dx0 on an unstretched grid does not
        // gain a spurious extra node from rounding.
        while x < x_max * (1.0 - 1e-12) {
            x += h;
            nodes.push(x);
            h = (h * growth).min(h_max);
        }
        Ok(Grid { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn x_max(&self) -> f64 {
        *self.nodes.last().expect("grid has nodes")
    }

    /// Cell widths h_i = x_{i+1} − x_i.
    pub fn spacings(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacings().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Trapezoid (lumped mass) weights ∫φ_i of the hat functions.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let h = self.spacings();
        let n = self.nodes.len();
        let mut w = vec![0.0; n];
        for (i, &hi) in h.iter().enumerate() {
            w[i] += 0.5 * hi;
            w[i + 1] += 0.5 * hi;
        }
        w
    }

    /// Uniform spacing if every cell has the same width to relative `rtol`.
    pub fn uniform_spacing(&self, rtol: f64) -> Option<f64> {
        let h = self.spacings();
        let h0 = h[0];
        h.iter()
            .all(|&hi| (hi - h0).abs() <= rtol * h0)
            .then_some((self.x_max()) / h.len() as f64)
    }

    /// Writes `index,x` rows with 17 significant digits.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("index,x\n");
        for (i, x) in self.nodes.iter().enumerate() {
            out.push_str(&format!("{i},{x:.16e}\n"));
        }
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_examples() {
        assert_eq!(Grid::uniform(1.0, 3.0).unwrap().nodes(), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(Grid::uniform(0.125, 1.0).unwrap().len(), 9);
        assert_eq!(Grid::uniform(0.5, 0.4).unwrap().nodes(), &[0.0, 0.5]);
        assert_eq!(Grid::uniform(0.05, 40.0).unwrap().len(), 801);
        assert!(Grid::uniform(0.0, 1.0).is_err());
        assert!(Grid::uniform(-1.0, 1.0).is_err());
    }

    #[test]
    fn stretched_node_count_matches_geometric_sum() {
        let g = Grid::stretched(0.125, 20.0, 6.0e3, f64::INFINITY).unwrap();
        // N ≈ ln(1 + x_max/(b·dx0)) / ln(1 + 1/b) = 159.5
        let predicted = (1.0f64 + 6.0e3 / (20.0 * 0.125)).ln() / (1.05f64).ln();
        assert!((g.len() as f64 - 1.0 - predicted).abs() <= 1.0, "{}", g.len());
        assert_eq!(g.spacings()[0], 0.125);
        assert!(g.x_max() >= 6.0e3);
    }

    #[test]
    fn infinite_stretch_is_uniform() {
        let g = Grid::stretched(1.0, f64::INFINITY, 10.0, f64::INFINITY).unwrap();
        let want: Vec<f64> = (0..=10).map(f64::from).collect();
        assert_eq!(g.nodes(), want.as_slice());
    }

    #[test]
    fn spacing_cap_and_monotonicity() {
        let g = Grid::stretched(0.125, 20.0, 6.0e3, 8.0).unwrap();
        // Differences of large cumulative sums carry round-off.
        let tol = 1e-9;
        let h = g.spacings();
        assert!(h.iter().all(|&hi| hi <= 8.0 + tol));
        for w in h.windows(2) {
            assert!(w[1] >= w[0] - tol);
            if (w[1] - w[0]).abs() <= tol {
                assert!((w[0] - 8.0).abs() <= tol);
            }
        }
    }

    #[test]
    fn refinement_doubles_edge_density() {
        let coarse = Grid::stretched(0.125, 20.0, 100.0, 16.0).unwrap();
        let fine = Grid::stretched(0.0625, 20.0, 100.0, 16.0).unwrap();
        let count = |g: &Grid| g.nodes().iter().filter(|&&x| x <= 1.0).count() as i64;
        assert!((count(&fine) - 2 * count(&coarse)).abs() <= 1);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Grid::stretched(0.0, 20.0, 10.0, 16.0).is_err());
        assert!(Grid::stretched(0.1, 0.0, 10.0, 16.0).is_err());
        assert!(Grid::stretched(0.1, 20.0, -1.0, 16.0).is_err());
        assert!(Grid::stretched(0.1, 20.0, 10.0, 0.05).is_err());
        assert!(Grid::from_nodes(vec![0.0, 1.0, 1.0]).is_err());
        assert!(Grid::from_nodes(vec![0.5, 1.0]).is_err());
    }

    #[test]
    fn weights_integrate_constants() {
        let g = Grid::stretched(0.125, 20.0, 50.0, 16.0).unwrap();
        let total: f64 = g.trapezoid_weights().iter().sum();
        assert!((total - g.x_max()).abs() < 1e-12 * g.x_max());
    }
}
