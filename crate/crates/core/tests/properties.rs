//! Property tests of invariants that hold on arbitrary inputs.

use proptest::prelude::*;

use hcssa_core::channel::{beam_gain, draw_realization, steering_vector, SeedState};
use hcssa_core::convex::ExpTangent;
use hcssa_core::harness::SweptParameter;
use hcssa_core::linalg::{c, generalized_top_eig, outer, CMat, CVec};
use hcssa_core::lowcomplexity::{is_direction, null_space_direction, recombine, NormalizedBeamformers, PowerAllocation};
use hcssa_core::network::ScenarioConfig;

fn cvec(parts: &[f64]) -> CVec {
    CVec::from_iterator(parts.len() / 2, parts.chunks(2).map(|p| c(p[0], p[1])))
}

fn quad(x: &CVec, m: &CMat) -> f64 {
    x.dotc(&(m * x)).re
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exp_tangent_is_a_global_minorant(point in -20.0f64..20.0, u in -30.0f64..30.0) {
        let t = ExpTangent::new(point);
        prop_assert!(t.value(u) <= u.exp() * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn null_space_direction_is_orthogonal(
        cols in proptest::collection::vec(-1.0f64..1.0, 2 * 6 * 3),
        h in proptest::collection::vec(-1.0f64..1.0, 2 * 6),
    ) {
        let t = CMat::from_columns(&cols.chunks(12).map(cvec).collect::<Vec<_>>());
        let h = cvec(&h);
        if let Ok(w) = null_space_direction(&t, &h) {
            prop_assert!((w.norm() - 1.0).abs() < 1e-12);
            for col in t.column_iter() {
                prop_assert!(col.dotc(&w).norm() <= 1e-10 * col.norm().max(1.0));
            }
            // the projection keeps the desired channel's in-null-space part
            prop_assert!(h.dotc(&w).norm() >= 0.0);
        }
    }

    #[test]
    fn is_direction_respects_the_cap(
        hv in proptest::collection::vec(-1.0f64..1.0, 2 * 4),
        gs in proptest::collection::vec(-1.0f64..1.0, 2 * 4 * 2),
        log_chi in -6.0f64..0.0,
    ) {
        let h = outer(&cvec(&hv));
        let mut d = CMat::zeros(4, 4);
        for g in gs.chunks(8) {
            d += outer(&cvec(g));
        }
        let chi = 10f64.powf(log_chi);
        let r = is_direction(&h, &d, chi, 1e-18, 500).unwrap();
        prop_assert!((r.w.norm() - 1.0).abs() < 1e-10);
        prop_assert!(r.interference <= chi * (1.0 + 1e-6), "{} > {}", r.interference, chi);
        prop_assert!((0.0..=1.0).contains(&r.rho));
    }

    #[test]
    fn generalized_eigenvector_maximizes_the_quotient(
        a in proptest::collection::vec(-1.0f64..1.0, 2 * 9),
        b in proptest::collection::vec(-1.0f64..1.0, 2 * 9),
        x in proptest::collection::vec(-1.0f64..1.0, 2 * 3),
    ) {
        let am = CMat::from_fn(3, 3, |i, j| c(a[2 * (3 * i + j)], a[2 * (3 * i + j) + 1]));
        let bm = CMat::from_fn(3, 3, |i, j| c(b[2 * (3 * i + j)], b[2 * (3 * i + j) + 1]));
        let a_psd = &am * am.adjoint();
        let b_pd = &bm * bm.adjoint() + CMat::identity(3, 3) * c(0.1, 0.0);
        let (psi, w) = generalized_top_eig(&a_psd, &b_pd).unwrap();
        let at_w = quad(&w, &a_psd) / quad(&w, &b_pd);
        prop_assert!((at_w - psi).abs() <= 1e-8 * psi.abs().max(1.0));
        let x = cvec(&x);
        if x.norm() > 1e-6 {
            prop_assert!(quad(&x, &a_psd) / quad(&x, &b_pd) <= psi * (1.0 + 1e-9) + 1e-12);
        }
    }

    #[test]
    fn beam_gain_is_bounded_by_its_peak(phi in 0.0f64..2.0) {
        let b_max = 10f64.powf(5.21);
        let g = beam_gain(phi, 0.4, b_max).unwrap();
        prop_assert!(g >= 0.0 && g <= b_max * (1.0 + 1e-12));
    }

    #[test]
    fn steering_vectors_have_unit_modulus_entries(angle in -3.2f64..3.2, dim in 1usize..16) {
        let a = steering_vector(angle, dim, 0.5).unwrap();
        prop_assert!(a.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn recombined_beams_carry_the_allocated_power(q in 0.0f64..100.0, p in proptest::collection::vec(0.0f64..100.0, 4)) {
        let unit = |k: usize| {
            let mut x = CVec::from_element(8, c(0.0, 0.0));
            x[k] = c(0.6, 0.8);
            x
        };
        let nb = NormalizedBeamformers { v: unit(0), w: (0..4).map(unit).collect() };
        let bf = recombine(&nb, &PowerAllocation { q, p: p.clone() });
        prop_assert!((bf.v.norm_squared() - q).abs() <= 1e-12 * q.max(1.0));
        for (w, &pj) in bf.w.iter().zip(&p) {
            prop_assert!((w.norm_squared() - pj).abs() <= 1e-12 * pj.max(1.0));
        }
    }

    #[test]
    fn swept_scenarios_round_trip_through_toml(v in 0.1f64..100.0, which in 0usize..3) {
        let param = [SweptParameter::Power, SweptParameter::InterferenceTemperature, SweptParameter::AerialRateFloor][which];
        let sc = param.apply(&ScenarioConfig::default(), v);
        let back = ScenarioConfig::from_toml_str(&sc.to_toml_string().unwrap()).unwrap();
        prop_assert_eq!(back, sc);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn realizations_are_a_function_of_the_seed(master in any::<u64>(), trial in 0u64..1000) {
        let sc = ScenarioConfig::default();
        let a = draw_realization(SeedState::new(master, trial), &sc).unwrap();
        let b = draw_realization(SeedState::new(master, trial), &sc).unwrap();
        prop_assert_eq!(&a, &b);
        let other = draw_realization(SeedState::new(master, trial + 1), &sc).unwrap();
        prop_assert_ne!(a.h, other.h);
    }
}
