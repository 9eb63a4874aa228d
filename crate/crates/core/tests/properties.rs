//! Property tests for the invariants every space and operator must keep,
//! under randomized parameters.

use proptest::prelude::*;

use juntalab::functions;
use juntalab::junta::{self, ErrorNorm};
use juntalab::semigroup;
use juntalab::slice;
use juntalab::spaces;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn stationary_measures_are_probabilities(
        n in 1usize..=6,
        p in 0.05f64..0.95,
        m in 2usize..=6,
        k in 1usize..=5,
    ) {
        let cube = spaces::build_biased_cube(n, p).unwrap();
        let torus = spaces::build_torus(n.min(3), m).unwrap();
        let sl = spaces::build_slice(6, k).unwrap();
        for space in [&cube, &torus, &sl] {
            let total: f64 = space.measure.iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
            prop_assert!(space.measure.iter().all(|w| *w > 0.0));
        }
    }

    #[test]
    fn evolution_preserves_mean_and_contracts(
        n in 1usize..=6,
        p in 0.1f64..0.9,
        seed in 0u64..1000,
        t in 0.0f64..2.0,
    ) {
        let space = spaces::build_biased_cube(n, p).unwrap();
        let gen = semigroup::generator(&space);
        let f = functions::random_table(&space, seed);
        let evolved = semigroup::evolve(&gen, &f, t).unwrap();
        prop_assert!((space.mean(&evolved) - space.mean(&f)).abs() <= 1e-10);
        let sup_before = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let sup_after = evolved.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        prop_assert!(sup_after <= sup_before + 1e-12);
        let var_before = space.variance(&f);
        let var_after = space.variance(&evolved);
        prop_assert!(var_after <= var_before + 1e-12);
    }

    #[test]
    fn slice_fourier_round_trips(
        n in 2usize..=6,
        k_raw in 1usize..=5,
        seed in 0u64..1000,
    ) {
        let k = k_raw.min(n - 1);
        let space = spaces::build_slice(n, k).unwrap();
        let basis = slice::build_basis(n, k).unwrap();
        let f = functions::random_table(&space, seed);
        let coeffs = slice::fourier_expand(&basis, &f).unwrap();
        let back = slice::reconstruct(&basis, &coeffs).unwrap();
        for (a, b) in f.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn hypercontractivity_never_violates_with_certified_rho(
        n in 1usize..=5,
        p in 0.2f64..0.8,
        seed in 0u64..1000,
        t in 0.01f64..2.0,
        q in 1.1f64..4.0,
    ) {
        let space = spaces::build_biased_cube(n, p).unwrap();
        let gen = semigroup::generator(&space);
        let rho = semigroup::certified_lsi_floor(&gen).unwrap();
        let f = functions::random_table(&space, seed);
        let rep = semigroup::hypercontractivity_check(&gen, rho, &f, t, q).unwrap();
        prop_assert!(rep.slack >= -1e-9);
    }

    #[test]
    fn two_point_constant_is_symmetric_and_peaks_at_half(p in 0.01f64..0.5) {
        let a = semigroup::two_point_rho(p);
        let b = semigroup::two_point_rho(1.0 - p);
        prop_assert!((a - b).abs() <= 1e-12);
        prop_assert!(a > 0.0);
        prop_assert!(a <= 1.0 + 1e-12);
        prop_assert!((semigroup::two_point_rho(0.5) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn extraction_certificates_are_coherent(
        k in 1usize..=3,
        noise in 0.0f64..0.02,
        seed in 0u64..500,
    ) {
        let space = spaces::build_biased_cube(8, 0.5).unwrap();
        let gen = semigroup::generator(&space);
        let (f, _) = functions::planted_junta(&space, k, noise, seed).unwrap();
        let (g, cert) = junta::extract_junta(&space, &gen, 1.0, &f, 0.2, ErrorNorm::L2).unwrap();
        prop_assert!(cert.measured_error <= 0.2);
        prop_assert_eq!(g.len(), space.n_states);
        // kept set is sorted, unique, in range
        for w in cert.kept_set.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        for &i in &cert.kept_set {
            prop_assert!(i < 8);
        }
        // the realized error is measured on the returned table
        let diff: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a - b).collect();
        prop_assert!((space.l2_norm_sq(&diff).sqrt() - cert.measured_error).abs() <= 1e-12);
    }
}
