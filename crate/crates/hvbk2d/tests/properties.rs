//! Property tests of the spectral kernel and the two right-hand-side forms.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

use hvbk2d::init::random_band_vorticity;
use hvbk2d::model::{rhs_velocity, rhs_vorticity, PhysParams, TwoFluidState};
use hvbk2d::spectral::{
    biot_savart, curl, ddx, divergence, leray_project, max_conjugate_asymmetry, perp_grad, Grid,
    ScalarField, VectorField,
};

const TAU: f64 = 2.0 * std::f64::consts::PI;

fn grid(n: usize) -> Arc<Grid<f64>> {
    Grid::shared(n, TAU).unwrap()
}

fn random_field(n: usize, seed: u64) -> ScalarField<f64> {
    let g = grid(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k_max = (n / 4).max(2);
    random_band_vorticity(&g, 1.0, k_max, 1.5, &mut rng).unwrap()
}

fn spectral_distance(a: &ScalarField<f64>, b: &ScalarField<f64>) -> f64 {
    a.spectral_data()
        .unwrap()
        .iter()
        .zip(b.spectral_data().unwrap())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
        * a.grid().length()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transform_round_trip(seed in 0u64..1_000_000, n_idx in 0usize..4) {
        let n = [8usize, 16, 32, 64][n_idx];
        let f = random_field(n, seed).to_physical();
        let back = f.to_spectral().to_physical();
        let scale = f.l2_norm().max(1e-300);
        let worst = f
            .physical_data()
            .unwrap()
            .iter()
            .zip(back.physical_data().unwrap())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        prop_assert!(worst <= 1e-12 * scale, "round trip error {worst:.3e}");
    }

    #[test]
    fn parseval_identity(seed in 0u64..1_000_000, n_idx in 0usize..4) {
        let n = [8usize, 16, 32, 64][n_idx];
        let f = random_field(n, seed);
        let spectral = f.l2_norm();
        let physical = f.to_physical().l2_norm();
        prop_assert!((spectral - physical).abs() <= 1e-12 * spectral.max(1e-300));
    }

    #[test]
    fn conjugate_symmetry_of_real_fields(seed in 0u64..1_000_000) {
        let f = random_field(32, seed).to_physical().to_spectral();
        prop_assert!(max_conjugate_asymmetry(&f).unwrap() < 1e-13);
    }

    #[test]
    fn leray_output_is_divergence_free_and_idempotent(seed in 0u64..1_000_000) {
        // Random (generally compressible) vector field from two scalars.
        let a = random_field(32, seed);
        let b = random_field(32, seed.wrapping_add(1));
        let v = VectorField::new(a, b).unwrap();
        let w = leray_project(&v).unwrap();
        let div_norm = divergence(&w).unwrap().l2_norm();
        let scale = w.l2_norm().max(1e-300);
        prop_assert!(div_norm <= 1e-12 * scale.max(v.l2_norm()));

        let w2 = leray_project(&w).unwrap();
        let drift = spectral_distance(&w.x, &w2.x).max(spectral_distance(&w.y, &w2.y));
        prop_assert!(drift <= 1e-13 * scale);
    }

    #[test]
    fn biot_savart_inverts_curl(seed in 0u64..1_000_000) {
        // curl(biot_savart(w)) = w for any zero-mean vorticity; the oracle
        // is the independent spectral curl.
        let w = random_field(64, seed);
        let u = biot_savart(&w).unwrap();
        let back = curl(&u).unwrap();
        let err = spectral_distance(&w, &back);
        prop_assert!(err <= 1e-10 * w.l2_norm().max(1e-300));
        let div = divergence(&u).unwrap().l2_norm();
        prop_assert!(div <= 1e-12 * u.l2_norm().max(1e-300));
    }

    #[test]
    fn derivative_commutes_with_leray_on_divergence_free(seed in 0u64..1_000_000) {
        let w = random_field(32, seed);
        let u = biot_savart(&w).unwrap();
        let first = leray_project(&VectorField::new(
            ddx(&u.x).unwrap(),
            ddx(&u.y).unwrap(),
        ).unwrap()).unwrap();
        let second = {
            let p = leray_project(&u).unwrap();
            VectorField::new(ddx(&p.x).unwrap(), ddx(&p.y).unwrap()).unwrap()
        };
        let err = spectral_distance(&first.x, &second.x)
            .max(spectral_distance(&first.y, &second.y));
        prop_assert!(err <= 1e-12 * u.l2_norm().max(1e-300));
    }

    #[test]
    fn perp_grad_fields_are_divergence_free(seed in 0u64..1_000_000) {
        let psi = random_field(32, seed);
        let v = perp_grad(&psi).unwrap();
        let div = divergence(&v).unwrap().l2_norm();
        prop_assert!(div <= 1e-12 * v.l2_norm().max(1e-300));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// The two forms of the equations agree under the curl for random
    /// smooth coupled states.
    #[test]
    fn vorticity_form_is_curl_of_velocity_form(seed in 0u64..1_000_000) {
        let g = grid(32);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let wn = random_band_vorticity(&g, 1.0, 5, 2.0, &mut rng).unwrap();
        let ws = random_band_vorticity(&g, 1.0, 5, 2.0, &mut rng).unwrap();
        let st = TwoFluidState::new(0.0, wn, ws).unwrap();
        let p = PhysParams::new(1.0, 1.4, 0.02, 0.03, 1.1, 0.7).unwrap();

        let (u_n, u_s) = st.velocities().unwrap();
        let (fv_n, fv_s) = rhs_velocity(&u_n, &u_s, &p).unwrap();
        let (gw_n, gw_s) = rhs_vorticity(&st, &p).unwrap();
        let scale = gw_n.l2_norm().max(gw_s.l2_norm()).max(1.0);
        let dn = spectral_distance(&curl(&fv_n).unwrap(), &gw_n);
        let ds = spectral_distance(&curl(&fv_s).unwrap(), &gw_s);
        prop_assert!(dn <= 1e-9 * scale, "normal mismatch {dn:.3e}");
        prop_assert!(ds <= 1e-9 * scale, "superfluid mismatch {ds:.3e}");
    }
}
