//! Edge domain wall profiles in thin ferromagnetic films.
//!
//! The wall angle θ(x) on the half-line x > 0 minimizes a local
//! exchange/anisotropy energy plus a nonlocal stray-field term built on the
//! half-Laplacian (−d²/dx²)^{1/2}. The crate provides grids, discrete
//! operators, energies, a relaxation solver, profile analysis, file formats,
//! and a command-line front end.

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod energy;
pub mod error;
pub mod grid;
pub mod io;
pub mod operators;
pub mod params;
pub mod validation;

pub use error::{Error, Result};
