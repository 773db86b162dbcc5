mod common;

use condent::kernels::{self, OuParams};
use condent::model::{ChannelSpec, SpectralDensity};
use proptest::prelude::*;

#[test]
fn ohmic_cutoff_q_matches_double_integral() {
    let q = kernels::q_of_t(SpectralDensity::OhmicCutoff { omega_d: 10.0 }, 2.0).unwrap();
    let reference = common::q_double_integral(|s| common::ohmic_cutoff_alpha(10.0, s), 2.0);
    assert!((q - reference).abs() < 1e-8, "{q} vs {reference}");
    assert!((q - 1.745597277003696).abs() < 1e-12);
}

#[test]
fn superohmic_q_matches_double_integral() {
    for t in [0.05, 0.3, 1.0, 3.0] {
        let q = kernels::q_of_t(SpectralDensity::Superohmic { omega_d: 2.0 }, t).unwrap();
        let reference = common::q_double_integral(|s| common::superohmic_alpha(2.0, s), t);
        assert!((q - reference).abs() < 1e-8, "t = {t}: {q} vs {reference}");
    }
}

#[test]
fn purely_ohmic_q_is_t() {
    assert_eq!(kernels::q_of_t(SpectralDensity::PurelyOhmic, 1.7).unwrap(), 1.7);
}

#[test]
fn lorentzian_alpha_pointwise_only() {
    let d = SpectralDensity::Lorentzian { omega_d: 3.0 };
    let a = kernels::alpha(d, 0.4).unwrap();
    assert!((a.re - common::ou_alpha(3.0, 0.4)).abs() < 1e-15);
    assert!(kernels::q_of_t(d, 1.0).is_err());
    assert!(kernels::alpha(SpectralDensity::PurelyOhmic, 0.4).is_err());
}

#[test]
fn damping_rate_at_unit_time() {
    let k = OuParams::new(1.0, 4.0).unwrap();
    let g = k.gamma_fn(1.0).unwrap();
    assert!((g - 0.5568096679436695).abs() < 1e-13);
    let from_ode = -common::derivative(|s| common::ou_c_by_ode(1.0, 4.0, s, 4000).ln(), 1.0, 1e-3);
    assert!((g - from_ode).abs() < 1e-8, "{g} vs {from_ode}");
}

#[test]
fn scaled_disentanglement_time_values() {
    let v = kernels::scaled_disentanglement_time(5.0).unwrap();
    assert!((v - 5.086109839489257).abs() < 1e-12);
    let v2 = kernels::scaled_disentanglement_time(2.0).unwrap();
    assert!((v2 - 1.5 * std::f64::consts::PI).abs() < 1e-13);
    assert!(kernels::scaled_disentanglement_time(1.0).is_none());
    assert!(kernels::scaled_disentanglement_time(0.3).is_none());
}

#[test]
fn disentanglement_time_is_first_zero_of_memory_equation() {
    for (gamma, omega_d) in [(1.0, 1.0), (2.5, 1.0), (1.0, 0.4)] {
        let tau = kernels::disentanglement_time(gamma, omega_d).unwrap().unwrap();
        let root = common::ou_first_zero(gamma, omega_d, 10.0 * tau).unwrap();
        assert!((tau - root).abs() < 1e-6 * tau, "{tau} vs {root}");
    }
    assert!(kernels::disentanglement_time(1.0, 4.0).unwrap().is_none());
}

#[test]
fn pole_is_reported() {
    let k = OuParams::new(2.0, 1.0).unwrap();
    let tau = k.disentanglement_time().unwrap();
    assert!(k.gamma_fn(tau * 1.01).is_err());
    assert_eq!(k.integrated_damping(tau).unwrap(), f64::INFINITY);
    assert_eq!(k.mean_entanglement(tau * 2.0).unwrap(), 0.0);
}

#[test]
fn weak_coupling_rate_limit() {
    let k = OuParams::new(1e-9, 3.0).unwrap();
    for s in [0.1, 0.5, 2.0] {
        let limit = 0.5 * (1.0 - (-3.0f64 * s).exp());
        assert!((k.gamma_fn(s).unwrap() - limit).abs() < 1e-8);
    }
}

#[test]
fn markov_p_round_trip() {
    let ch = ChannelSpec::markov_amplitude_damping(0, 0.7);
    let p = kernels::p_of_t(&ch, 1.3).unwrap();
    assert!((p - (1.0 - (-0.91f64).exp())).abs() < 1e-15);
    assert!((kernels::time_for_p(&ch, p).unwrap() - 1.3).abs() < 1e-12);
}

#[test]
fn dephasing_p_round_trip() {
    let ch = ChannelSpec::dephasing(0, 1.0, SpectralDensity::OhmicCutoff { omega_d: 10.0 });
    let p = kernels::p_of_t(&ch, 2.0).unwrap();
    let q: f64 = 1.745597277003696;
    assert!((p - (1.0 - (-q).exp())).abs() < 1e-12);
    assert!((kernels::time_for_p(&ch, p).unwrap() - 2.0).abs() < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn c_matches_memory_equation(gamma in 0.1f64..3.0, omega_d in 0.2f64..5.0, frac in 0.05f64..0.9) {
        let k = OuParams::new(gamma, omega_d).unwrap();
        let t = k.disentanglement_time().map_or(3.0, |tau| frac * tau);
        let c = k.c(t).unwrap();
        let reference = common::ou_c_by_ode(gamma, omega_d, t, 4000);
        prop_assert!((c - reference).abs() < 1e-9, "{} vs {}", c, reference);
    }

    #[test]
    fn integrated_damping_closed_form_equals_quadrature(gamma in 0.1f64..3.0, omega_d in 0.2f64..5.0, frac in 0.05f64..0.9) {
        let k = OuParams::new(gamma, omega_d).unwrap();
        let t = k.disentanglement_time().map_or(3.0, |tau| frac * tau);
        let a = k.integrated_damping(t).unwrap();
        let b = k.integrated_damping_quadrature(t).unwrap();
        prop_assert!((a - b).abs() < 1e-8 * a.max(1.0));
    }

    #[test]
    fn ohmic_q_is_monotone_and_below_t(omega_d in 0.5f64..20.0, t in 0.01f64..5.0) {
        let d = SpectralDensity::OhmicCutoff { omega_d };
        let q = kernels::q_of_t(d, t).unwrap();
        prop_assert!(q > 0.0 && q <= t);
        prop_assert!(kernels::q_of_t(d, 1.1 * t).unwrap() > q);
    }
}
