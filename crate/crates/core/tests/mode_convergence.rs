use condent::kernels::OuParams;
use condent::model::{ChannelSpec, PureState, SubsystemLayout, SystemSpec};
use condent::oracle::{self, DiscreteBath, OracleOptions};

fn survival_error(n_modes: usize, spacing: f64, gamma: f64, omega_d: f64, t: f64) -> f64 {
    let spec = SystemSpec::new(SubsystemLayout::new(vec![2, 2]).unwrap(), PureState::basis(4, 2))
        .with_channel(ChannelSpec::ou_amplitude_damping(0, gamma, omega_d));
    let bath = DiscreteBath::lorentzian(n_modes, spacing, omega_d, 2).unwrap();
    let total = oracle::evolve_total(&spec, &bath, t, &OracleOptions::default()).unwrap();
    let rho = total.reduced_cs();
    let c = OuParams::new(gamma, omega_d).unwrap().c(t).unwrap();
    (rho[(2, 2)].re + rho[(3, 3)].re - c * c).abs()
}

/// Excited population of an emitter on a Lorentzian bath against `c(t)²`.
/// Four modes are far from the continuum, so only the trend is checked.
#[test]
fn survival_error_decreases_with_mode_count() {
    for spacing in [1.0, 2.0] {
        let errors: Vec<f64> = (1..=4).map(|l| survival_error(l, spacing, 0.5, 2.0, 0.8)).collect();
        for pair in errors.windows(2) {
            assert!(pair[1] < pair[0], "spacing {spacing}: {errors:?}");
        }
    }
    assert!(survival_error(4, 2.0, 0.5, 2.0, 0.8) < 1e-2);
}
