use bgc_core::entropy::{entropy_cov, entropy_f, entropy_f_log_route};
use bgc_core::exact_channel::{char_evolved_state, ChannelSpec};
use bgc_core::gaussian_channel::{cp_check, semigroup_matrices, LindbladLinearSpec};
use bgc_core::observables::{moments_closed, purity_ratio};
use bgc_core::phase_space::{cat_state, GaussianTerm, StateSum};
use nalgebra::Vector2;
use proptest::prelude::*;

fn coherent(p0: f64, q0: f64, g: f64) -> GaussianTerm {
    GaussianTerm::coherent(Vector2::new(p0, q0), g).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_is_preserved(sigma in 0.1f64..2.0, gamma in 0.0f64..1.5, p0 in -2.0f64..2.0, q0 in -2.0f64..2.0, t in 0.0f64..1.5) {
        let spec = ChannelSpec::new(sigma, gamma, 1.0).unwrap();
        let state = StateSum::single(coherent(p0, q0, 1.0), 1.0).unwrap();
        let chi0 = char_evolved_state(&spec, &state, 0.0, 0.0, t).unwrap();
        prop_assert!((chi0.re - 1.0).abs() < 1e-10 && chi0.im.abs() < 1e-10, "{chi0}");
    }

    #[test]
    fn purity_ratio_decays(gamma in 0.0f64..1.5, a in 3.0f64..6.0, t in 0.01f64..0.8, dt in 0.01f64..0.3) {
        let spec = ChannelSpec::new(1.0, gamma, 1.0).unwrap();
        let cat = cat_state(Vector2::new(0.0, a), Vector2::new(0.0, -a), 1.0, 1.0).unwrap();
        let (r1, r2) = (purity_ratio(&spec, &cat, t).unwrap(), purity_ratio(&spec, &cat, t + dt).unwrap());
        prop_assert!(r1 > 0.0 && r1 <= 1.0 + 1e-12);
        prop_assert!(r2 <= r1 + 1e-12, "{r1} -> {r2}");
    }

    #[test]
    fn entropy_routes_agree(z in 1.0f64..50.0) {
        let (a, b) = (entropy_f(z).unwrap(), entropy_f_log_route(z).unwrap());
        prop_assert!((a - b).abs() < 1e-12 * a.abs().max(1.0), "{a} vs {b}");
        prop_assert!(a >= -1e-15);
    }

    #[test]
    fn dephasing_raises_covariance_entropy(g in 0.5f64..2.0, t in 0.05f64..1.0, gamma in 0.05f64..1.5) {
        let term = coherent(0.0, 0.0, g);
        let clean = entropy_cov(&ChannelSpec::new(1.0, 0.0, 1.0).unwrap(), &term, t).unwrap();
        let dephased = entropy_cov(&ChannelSpec::new(1.0, gamma, 1.0).unwrap(), &term, t).unwrap();
        prop_assert!(dephased > clean, "{clean} vs {dephased}");
    }

    #[test]
    fn covariance_respects_uncertainty(sigma in 0.0f64..2.0, gamma in 0.0f64..1.5, p0 in -2.0f64..2.0, t in 0.0f64..1.5) {
        let spec = ChannelSpec::new(sigma, gamma, 1.0).unwrap();
        let m = moments_closed(&spec, &coherent(p0, 0.0, 1.0), t).unwrap();
        let det = m.var_p() * m.var_q() - m.cov_pq() * m.cov_pq();
        prop_assert!(det >= 0.25 - 1e-9, "det {det}");
    }

    #[test]
    fn free_particle_channel_is_cp(sigma in 0.0f64..3.0, t in 0.0f64..3.0) {
        let m = semigroup_matrices(&LindbladLinearSpec::free_particle(sigma), t).unwrap();
        prop_assert!(cp_check(&m));
    }
}
