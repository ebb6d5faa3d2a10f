use std::f64::consts::PI;
use std::ffi::CStr;
use std::ptr;

use edgewall_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ew_last_error()) }.to_string_lossy().into_owned()
}

fn grid() -> *mut EwGrid {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { ew_grid_stretched(0.125, 20.0, 2000.0, 16.0, &mut g) }, EwStatus::Ok);
    g
}

#[test]
fn relax_round_trip() {
    unsafe {
        let g = grid();
        let n = ew_grid_len(g);
        assert!(n > 100);
        let mut p = ptr::null_mut();
        assert_eq!(ew_profile_initial(g, PI / 4.0, &mut p), EwStatus::Ok);
        let mut r = ptr::null_mut();
        let opts = ew_relax_options_default();
        assert_eq!(ew_relax(p, 1.0, &opts, &mut r), EwStatus::Ok, "{}", last_error());
        assert!(ew_result_converged(r));
        assert!(ew_result_residual(r) <= opts.tol);
        assert!(ew_result_steps(r) > 0);

        let mut e = EwEnergy::default();
        assert_eq!(ew_result_energy(r, &mut e), EwStatus::Ok);
        let mut relaxed = ptr::null_mut();
        assert_eq!(ew_result_profile(r, &mut relaxed), EwStatus::Ok);
        let mut again = EwEnergy::default();
        assert_eq!(ew_energy(relaxed, 1.0, &mut again), EwStatus::Ok);
        assert!((again.total_renormalized - e.total_renormalized).abs() < 1e-12);

        let mut theta = vec![0.0; n];
        assert_eq!(ew_profile_theta(relaxed, theta.as_mut_ptr(), n), EwStatus::Ok);
        assert_eq!(theta[0], PI / 4.0);
        let mut copy = ptr::null_mut();
        assert_eq!(ew_profile_from_samples(g, theta.as_ptr(), n, &mut copy), EwStatus::Ok);
        let mut e2 = EwEnergy::default();
        assert_eq!(ew_energy(copy, 1.0, &mut e2), EwStatus::Ok);
        assert_eq!(e2.total_renormalized, again.total_renormalized);

        for h in [p, relaxed, copy] {
            ew_profile_free(h);
        }
        ew_result_free(r);
        ew_grid_free(g);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(ew_grid_uniform(-1.0, 10.0, &mut g), EwStatus::InvalidArgument);
        assert!(g.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(ew_grid_uniform(0.1, 10.0, ptr::null_mut()), EwStatus::NullPointer);

        let g = grid();
        let mut small = [0.0; 3];
        assert_eq!(ew_grid_nodes(g, small.as_mut_ptr(), 3), EwStatus::BufferTooSmall);
        let mut p = ptr::null_mut();
        assert_eq!(ew_profile_analytic(g, 4.0, &mut p), EwStatus::InvalidArgument);
        assert_eq!(ew_profile_from_samples(g, small.as_ptr(), 3, &mut p), EwStatus::InvalidArgument);
        assert_eq!(ew_relax(ptr::null(), 1.0, &ew_relax_options_default(), &mut ptr::null_mut()), EwStatus::NullPointer);

        assert_eq!(ew_profile_initial(g, 1.0, &mut p), EwStatus::Ok);
        assert!(last_error().is_empty());
        let opts = EwRelaxOptions { dt: 50.0, tol: 1e-8, max_steps: 10_000 };
        let mut r = ptr::null_mut();
        assert_eq!(ew_relax(p, 1.0, &opts, &mut r), EwStatus::Numerical);
        assert!(r.is_null());
        let opts = EwRelaxOptions { dt: 0.0, tol: 1e-8, max_steps: 3 };
        assert_eq!(ew_relax(p, 1.0, &opts, &mut r), EwStatus::Ok);
        assert!(!ew_result_converged(r));
        assert_eq!(ew_result_steps(r), 3);
        ew_result_free(r);
        ew_profile_free(p);
        ew_grid_free(g);

        assert_eq!(ew_grid_len(ptr::null()), 0);
        assert!(ew_result_residual(ptr::null()).is_nan());
        ew_grid_free(ptr::null_mut());
    }
}

#[test]
fn scales_and_operator() {
    unsafe {
        let mut s = EwScales::default();
        assert_eq!(ew_scales(8.0e5, 1.3e-11, 5.0e2, 4.0e-9, &mut s), EwStatus::Ok);
        assert!((s.nu - 19.95).abs() < 0.01);
        assert_eq!(ew_scales(8.0e5, 1.3e-11, 5.0e2, 0.0, &mut s), EwStatus::InvalidArgument);

        let g = grid();
        let n = ew_grid_len(g);
        let ones = vec![1.0; n];
        let mut out = vec![f64::NAN; n];
        assert_eq!(
            ew_half_laplacian(g, ones.as_ptr(), n, 1.0, EW_RIGHT_RULE_CONSTANT_TAIL, out.as_mut_ptr()),
            EwStatus::Ok
        );
        assert!(out.iter().all(|v| v.abs() < 1e-10));
        assert_eq!(
            ew_half_laplacian(g, ones.as_ptr(), n, 0.0, EW_RIGHT_RULE_CONSTANT_TAIL, out.as_mut_ptr()),
            EwStatus::InvalidArgument
        );
        assert_eq!(ew_half_laplacian(g, ones.as_ptr(), n, 1.0, 7, out.as_mut_ptr()), EwStatus::InvalidArgument);
        ew_grid_free(g);
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/edgewall.h");
    let src = include_str!("../src/lib.rs");
    let exports: Vec<&str> = src
        .split("extern \"C\" fn ")
        .skip(1)
        .map(|s| s.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 20);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile::tempdir().unwrap();
    let main = dir.path().join("main.c");
    std::fs::write(&main, "#include \"edgewall.h\"\nint main(void) { EwRelaxOptions o = ew_relax_options_default(); return o.max_steps == 0; }\n").unwrap();
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&main)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc);
        }
    }
    Err(())
}
