use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use quasih_core::analytics::{
    averaged_state, concurrence, concurrence_closed_form, disentanglement_times, entropy, Side,
};
use quasih_core::dynamics::{StateH1, Trajectory};
use quasih_core::dyson::{h_of_t, MetricFlow, UnitaryPath};
use quasih_core::linalg::{herm_eig, CMat2};
use quasih_core::model::{metric, ModelParams, Unitary2};
use quasih_core::quadrature::simpson_mean;
use quasih_core::rng;

fn params() -> impl Strategy<Value = ModelParams> {
    (0.2f64..3.0, 0.5f64..2.0, -0.9f64..0.9, 1u32..=16, 0.25f64..4.0)
        .prop_map(|(nu, g, k, n, x)| ModelParams::diagonal(nu, g, k * g, n, x).unwrap())
}

fn trajectory() -> impl Strategy<Value = Trajectory> {
    (params(), 0.0f64..=1.0, 0.0f64..2.0 * PI, 0.0f64..2.0 * PI, any::<u64>()).prop_map(|(p, alpha, f1, f2, seed)| {
        let s = StateH1::from_alpha(&p, alpha, f1, f2).unwrap();
        Trajectory::new(p, s, Unitary2::haar(&mut rng::seeded(seed))).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn eta_norm_conserved(traj in trajectory(), t in 0.0f64..50.0) {
        prop_assert!((traj.eta_norm_sqr(t) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn populations_in_unit_interval(traj in trajectory(), t in 0.0f64..50.0) {
        let (p, q) = (traj.p(t), traj.q(t));
        prop_assert!((-1e-10..=1.0 + 1e-10).contains(&p));
        prop_assert!((-1e-10..=1.0 + 1e-10).contains(&q));
    }

    #[test]
    fn q_closed_form_matches_amplitudes(traj in trajectory(), t in 0.0f64..50.0) {
        prop_assert!((traj.q(t) - traj.q_from_amplitudes(t)).abs() < 1e-10);
        prop_assert!((traj.rho_hw(t)[(1, 1)].re - traj.q(t)).abs() < 1e-10);
    }

    #[test]
    fn population_period(traj in trajectory(), t in 0.0f64..20.0) {
        let period = traj.params().population_period();
        prop_assert!((traj.p(t + period) - traj.p(t)).abs() < 1e-10);
        prop_assert!((traj.q(t + period) - traj.q(t)).abs() < 1e-10);
        // p(t + π/2ω) = 1 − p(t), so 𝓔(p) has half the period
        prop_assert!((traj.p(t + 0.5 * period) - (1.0 - traj.p(t))).abs() < 1e-10);
        let e = |v: f64| entropy(v).unwrap();
        prop_assert!((e(traj.p(t + 0.5 * period)) - e(traj.p(t))).abs() < 1e-9);
    }

    #[test]
    fn phase_unitaries_tie_q_to_p(traj in trajectory(), f1 in 0.0f64..6.3, f2 in 0.0f64..6.3, t in 0.0f64..20.0) {
        let d = traj.with_unitary(Unitary2::diagonal(f1, f2));
        let a = traj.with_unitary(Unitary2::anti_diagonal(f1, f2));
        prop_assert!((d.q(t) - d.p(t)).abs() < 1e-10);
        prop_assert!((a.q(t) - (1.0 - a.p(t))).abs() < 1e-10);
    }

    #[test]
    fn means_match_quadrature(traj in trajectory()) {
        let period = traj.params().population_period();
        let mp: f64 = simpson_mean(|t| traj.p(t), 0.0, period, 256);
        let mq: f64 = simpson_mean(|t| traj.q(t), 0.0, period, 256);
        prop_assert!((mp - 0.5).abs() < 1e-8);
        prop_assert!((mq - traj.mean_q()).abs() < 1e-8);
    }

    #[test]
    fn averaged_state_is_a_density_matrix(traj in trajectory()) {
        let avg = averaged_state(&traj);
        let rho = avg.embed();
        prop_assert!(rho.hermiticity_defect() < 1e-15);
        prop_assert!((rho.trace() - 1.0).norm() < 1e-14);
        let vals = herm_eig(&rho).unwrap().values;
        prop_assert!(vals[0] > -1e-12);
    }

    #[test]
    fn concurrence_independent_of_w(traj in trajectory(), seed in any::<u64>()) {
        let other = traj.with_unitary(Unitary2::haar(&mut rng::seeded(seed)));
        let c = concurrence(&averaged_state(&traj));
        prop_assert!((0.0..=1.0).contains(&c));
        prop_assert!((c - concurrence(&averaged_state(&other))).abs() < 1e-12);
        prop_assert!((c - concurrence_closed_form(&traj)).abs() < 1e-12);
    }

    #[test]
    fn disentanglement_roots_are_roots(p in params(), alpha in 0.05f64..0.95, f in 0.0f64..6.3, sign in prop::bool::ANY, seed in any::<u64>()) {
        // Re(AB*) = 0 makes the quasi-Hermitian state touch a product state
        let shift = if sign { 0.5 * PI } else { -0.5 * PI };
        let s = StateH1::from_alpha(&p, alpha, f + shift, f).unwrap();
        let traj = Trajectory::new(p, s, Unitary2::haar(&mut rng::seeded(seed))).unwrap();
        let d = disentanglement_times(&traj, Side::NonHermitian, 4.0 * PI / p.omega());
        prop_assert!(d.times.len() >= 4);
        for t in d.times {
            let (a, b) = traj.amplitudes(t);
            prop_assert!((a * b).norm() < 1e-10);
        }
    }

    #[test]
    fn constant_generator_recovered(p in params(), t in 0.0f64..5.0, d1 in -2.0f64..2.0, d2 in -2.0f64..2.0, off_re in -1.0f64..1.0, off_im in -1.0f64..1.0) {
        let a = CMat2::new(C64::new(d1, 0.0), C64::new(off_re, off_im), C64::new(off_re, -off_im), C64::new(d2, 0.0));
        let flow = MetricFlow::new(p, metric(&p));
        let h = h_of_t(&flow, &UnitaryPath::Exponential(a), t).unwrap();
        prop_assert!(h.dist(&a) < 1e-6);
    }
}
