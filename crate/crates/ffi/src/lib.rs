//! C interface to the edgewall solver.
//!
//! Objects are opaque handles created by `ew_*` constructors and released
//! with the matching `*_free`. Every fallible call returns an [`EwStatus`];
//! on failure [`ew_last_error`] describes the cause. Handles are immutable
//! after construction and may be read from several threads at once.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use edgewall::dynamics::{analytic_zero_nu_profile, initial_profile, relax, RelaxationConfig, RelaxationResult};
use edgewall::energy::{renormalized_energy, Cutoff, EnergyBreakdown, Profile};
use edgewall::grid::Grid;
use edgewall::operators::{Extension, HalfLaplacian, RightRule};
use edgewall::params::{derive_scales, MaterialParams, ModelParams};
use edgewall::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EwStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument is outside its domain.
    InvalidArgument = 2,
    /// A caller buffer is shorter than the data to copy.
    BufferTooSmall = 3,
    /// The relaxation diverged or became unstable.
    Numerical = 4,
    /// A Rust panic was caught at the boundary.
    Internal = 5,
}

/// Right continuation u(x) = u(x_max) for x > x_max.
pub const EW_RIGHT_RULE_CONSTANT_TAIL: u32 = 0;
/// Right continuation u(x) = 0 for x > x_max.
pub const EW_RIGHT_RULE_ZERO: u32 = 1;

/// Opaque grid on [0, x_max].
pub struct EwGrid(Grid);

/// Opaque profile θ sampled on a grid.
pub struct EwProfile(Profile);

/// Opaque outcome of a relaxation.
pub struct EwRelaxResult(RelaxationResult);

/// Time-stepping settings. A non-positive `dt` selects min(0.05, h_min/(1 + ν)).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EwRelaxOptions {
    pub dt: f64,
    pub tol: f64,
    pub max_steps: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EwEnergy {
    pub exchange: f64,
    pub anisotropy: f64,
    pub edge_charge_term: f64,
    pub gagliardo_j_theta: f64,
    pub gagliardo_j_eta: f64,
    pub total_renormalized: f64,
}

/// Dimensionless scales; lengths in metres.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EwScales {
    pub exchange_length_ell: f64,
    pub bloch_width_l: f64,
    pub nu: f64,
    pub delta: f64,
}

impl From<EnergyBreakdown> for EwEnergy {
    fn from(e: EnergyBreakdown) -> Self {
        EwEnergy {
            exchange: e.exchange,
            anisotropy: e.anisotropy,
            edge_charge_term: e.edge_charge_term,
            gagliardo_j_theta: e.gagliardo_j_theta,
            gagliardo_j_eta: e.gagliardo_j_eta,
            total_renormalized: e.total_renormalized,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Fail(EwStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Divergence { .. } | Error::Stability { .. } => EwStatus::Numerical,
            _ => EwStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(EwStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, records any failure, and converts panics into `Internal`.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> EwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            EwStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("internal error: {msg}"));
            EwStatus::Internal
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn copy_out(src: &[f64], out: *mut f64, len: usize) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output buffer"));
    }
    if len < src.len() {
        return Err(Fail(
            EwStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn release<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message for the last failed call on this thread; empty after a
/// successful call that returns an [`EwStatus`].
/// The pointer stays valid until the next `ew_*` call on the same thread.
#[no_mangle]
pub extern "C" fn ew_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ew_grid_uniform(dx: f64, x_max: f64, out: *mut *mut EwGrid) -> EwStatus {
    guard(|| emit(out, EwGrid(Grid::uniform(dx, x_max)?)))
}

/// Spacing starts at `dx0` and grows by 1 + 1/`stretch_b` per cell up to `h_max`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ew_grid_stretched(
    dx0: f64,
    stretch_b: f64,
    x_max: f64,
    h_max: f64,
    out: *mut *mut EwGrid,
) -> EwStatus {
    guard(|| emit(out, EwGrid(Grid::stretched(dx0, stretch_b, x_max, h_max)?)))
}

/// Number of nodes, or 0 for a null handle.
///
/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ew_grid_len(grid: *const EwGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.len())
}

/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ew_grid_nodes(grid: *const EwGrid, out: *mut f64, len: usize) -> EwStatus {
    guard(|| copy_out(get(grid, "grid")?.0.nodes(), out, len))
}

/// # Safety
/// `grid` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ew_grid_free(grid: *mut EwGrid) {
    release(grid)
}

/// θ(x) = 2β/(1 + e^{x/2}).
///
/// # Safety
/// `grid` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ew_profile_initial(grid: *const EwGrid, beta: f64, out: *mut *mut EwProfile) -> EwStatus {
    guard(|| emit(out, EwProfile(initial_profile(beta, &get(grid, "grid")?.0)?)))
}

/// θ(x) = 2 arctan(e^{−x} tan(β/2)), for |β| < π.
///
/// # Safety
/// `grid` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ew_profile_analytic(grid: *const EwGrid, beta: f64, out: *mut *mut EwProfile) -> EwStatus {
    guard(|| emit(out, EwProfile(analytic_zero_nu_profile(beta, &get(grid, "grid")?.0)?)))
}

/// Profile from one θ sample per node; the edge angle is `theta[0]`.
///
/// # Safety
/// `grid` must be live, `theta` must hold `len` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn ew_profile_from_samples(
    grid: *const EwGrid,
    theta: *const f64,
    len: usize,
    out: *mut *mut EwProfile,
) -> EwStatus {
    guard(|| {
        let g = &get(grid, "grid")?.0;
        let t = slice(theta, len, "theta")?;
        let beta = *t.first().ok_or_else(|| Fail(EwStatus::InvalidArgument, "theta is empty".into()))?;
        emit(out, EwProfile(Profile::new(g.clone(), t.to_vec(), beta)?))
    })
}

/// # Safety
/// `profile` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn ew_profile_len(profile: *const EwProfile) -> usize {
    profile.as_ref().map_or(0, |p| p.0.theta.len())
}

/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ew_profile_theta(profile: *const EwProfile, out: *mut f64, len: usize) -> EwStatus {
    guard(|| copy_out(&get(profile, "profile")?.0.theta, out, len))
}

/// # Safety
/// `profile` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ew_profile_free(profile: *mut EwProfile) {
    release(profile)
}

#[no_mangle]
pub extern "C" fn ew_relax_options_default() -> EwRelaxOptions {
    EwRelaxOptions {
        dt: 0.0,
        tol: 1e-8,
        max_steps: 2_000_000,
    }
}

/// Relaxes `initial` at thin-film parameter `nu`. A run that stops at
/// `max_steps` still succeeds; check [`ew_result_converged`].
///
/// # Safety
/// `initial` and `options` must be live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ew_relax(
    initial: *const EwProfile,
    nu: f64,
    options: *const EwRelaxOptions,
    out: *mut *mut EwRelaxResult,
) -> EwStatus {
    guard(|| {
        let p = &get(initial, "initial profile")?.0;
        let o = get(options, "options")?;
        let params = ModelParams::new(p.beta, nu)?;
        let dt = if o.dt > 0.0 { o.dt } else { RelaxationConfig::default_dt(&p.grid, nu) };
        let cfg = RelaxationConfig::new(dt, o.tol, o.max_steps)?;
        emit(out, EwRelaxResult(relax(&params, &p.grid, p, &cfg)?))
    })
}

/// # Safety
/// `result` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn ew_result_converged(result: *const EwRelaxResult) -> bool {
    result.as_ref().is_some_and(|r| r.0.converged)
}

/// # Safety
/// `result` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn ew_result_steps(result: *const EwRelaxResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.steps_taken)
}

/// Final residual sup-norm, NaN for a null handle.
///
/// # Safety
/// `result` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn ew_result_residual(result: *const EwRelaxResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.0.final_residual)
}

/// # Safety
/// `result` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ew_result_energy(result: *const EwRelaxResult, out: *mut EwEnergy) -> EwStatus {
    guard(|| {
        let e = get(result, "result")?.0.energy;
        let out = out.as_mut().ok_or_else(|| null("output"))?;
        *out = e.into();
        Ok(())
    })
}

/// Copies the relaxed profile into a new handle.
///
/// # Safety
/// `result` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ew_result_profile(result: *const EwRelaxResult, out: *mut *mut EwProfile) -> EwStatus {
    guard(|| emit(out, EwProfile(get(result, "result")?.0.profile.clone())))
}

/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ew_result_free(result: *mut EwRelaxResult) {
    release(result)
}

/// Renormalized energy of a profile with the default cutoff.
///
/// # Safety
/// `profile` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ew_energy(profile: *const EwProfile, nu: f64, out: *mut EwEnergy) -> EwStatus {
    guard(|| {
        let p = &get(profile, "profile")?.0;
        let e = renormalized_energy(p, &Cutoff::new(p.beta), nu)?;
        let out = out.as_mut().ok_or_else(|| null("output"))?;
        *out = e.into();
        Ok(())
    })
}

/// Scales from Ms (A/m), A (J/m), K (J/m³) and thickness d (m).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ew_scales(ms: f64, a: f64, k: f64, d: f64, out: *mut EwScales) -> EwStatus {
    guard(|| {
        let s = derive_scales(&MaterialParams {
            saturation_magnetization: ms,
            exchange_constant: a,
            anisotropy_constant: k,
            thickness: d,
        })?;
        let out = out.as_mut().ok_or_else(|| null("output"))?;
        *out = EwScales {
            exchange_length_ell: s.exchange_length_ell,
            bloch_width_l: s.bloch_width_l,
            nu: s.nu,
            delta: s.delta,
        };
        Ok(())
    })
}

/// (−d²/dx²)^{1/2}u at every node, with u = `left_value` for x < 0 and the
/// right continuation given by `rule` (an `EW_RIGHT_RULE_*` value). `u[0]` must equal `left_value`.
///
/// # Safety
/// `u` and `out` must each hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ew_half_laplacian(
    grid: *const EwGrid,
    u: *const f64,
    len: usize,
    left_value: f64,
    rule: u32,
    out: *mut f64,
) -> EwStatus {
    guard(|| {
        let g = &get(grid, "grid")?.0;
        let u = slice(u, len, "u")?;
        if len != g.len() {
            return Err(Fail(
                EwStatus::InvalidArgument,
                format!("u has {len} values, the grid has {} nodes", g.len()),
            ));
        }
        let rule = match rule {
            EW_RIGHT_RULE_CONSTANT_TAIL => RightRule::ConstantTail,
            EW_RIGHT_RULE_ZERO => RightRule::Zero,
            other => return Err(Fail(EwStatus::InvalidArgument, format!("unknown right rule {other}"))),
        };
        let v = HalfLaplacian::new(g).apply(u, &Extension::new(left_value, rule)?)?;
        copy_out(&v, out, len)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    fn message() -> String {
        unsafe { CStr::from_ptr(ew_last_error()) }.to_string_lossy().into_owned()
    }

    #[test]
    fn panics_become_internal_errors() {
        let hook = std::panic::take_hook();
        std::panic::set_hook(Box::new(|_| {}));
        let status = guard(|| panic!("boom"));
        std::panic::set_hook(hook);
        assert_eq!(status, EwStatus::Internal);
        assert_eq!(message(), "internal error: boom");
        assert_eq!(guard(|| Ok(())), EwStatus::Ok);
        assert_eq!(message(), "");
    }

    #[test]
    fn library_errors_map_to_status_codes() {
        assert_eq!(Fail::from(Error::Divergence { step: 3 }).0, EwStatus::Numerical);
        assert_eq!(Fail::from(Error::Window("w".into())).0, EwStatus::InvalidArgument);
    }
}
