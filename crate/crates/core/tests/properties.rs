use std::f64::consts::PI;

use edgewall::dynamics::{initial_profile, relax, RelaxationConfig};
use edgewall::energy::{energy_lower_bound, renormalized_energy, Cutoff};
use edgewall::grid::Grid;
use edgewall::io::{parse_profile_csv, profile_csv_string};
use edgewall::params::ModelParams;
use proptest::prelude::*;

fn coarse() -> Grid {
    Grid::stretched(0.05, 40.0, 400.0, 16.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn relaxed_profiles_respect_the_bound_and_reflect(beta in -3.0f64..3.0, nu in 0.0f64..4.0) {
        let g = coarse();
        let cfg = RelaxationConfig::new(RelaxationConfig::default_dt(&g, nu), 1e-7, 200_000).unwrap();
        let run = |b: f64| relax(&ModelParams::new(b, nu).unwrap(), &g, &initial_profile(b, &g).unwrap(), &cfg).unwrap();
        let up = run(beta);
        let down = run(-beta);
        prop_assert!(up.converged);
        prop_assert!(up.max_energy_increase <= 1e-10 * up.energy.total_renormalized.abs().max(1.0));
        for (a, b) in up.profile.theta.iter().zip(&down.profile.theta) {
            prop_assert!((a + b).abs() < 1e-10);
        }
        // the discrete local energy may undershoot the continuum bound by O(h²)
        let local = up.energy.exchange + up.energy.anisotropy;
        prop_assert!(local >= energy_lower_bound(beta) - 1e-3);
        let again = renormalized_energy(&up.profile, &Cutoff::new(beta), nu).unwrap();
        prop_assert!((again.total_renormalized - up.energy.total_renormalized).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip_is_exact(beta in -PI..PI) {
        let p = initial_profile(beta, &coarse()).unwrap();
        prop_assert_eq!(parse_profile_csv(&profile_csv_string(&p)).unwrap(), p);
    }
}
