//! Closed-form entanglement distributions, support boundaries and means for
//! a single open qubit channel, parameterized by `p` and the initial marginal.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernels::{self, OuParams};
use crate::model::{ChannelKind, ChannelSpec, QubitMarginal};
use crate::propagator;
use crate::quad::{self, QuadOptions};
use crate::special::bessel_i0_scaled;

/// The two distribution families: amplitude damping (Markov or OU, with
/// `p = 1 − f²`) and qubit dephasing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    AmplitudeDamping,
    Dephasing,
}

impl Family {
    pub fn of(channel: &ChannelSpec) -> Result<Self> {
        match &channel.kind {
            ChannelKind::MarkovAmplitudeDamping { .. } | ChannelKind::OuAmplitudeDamping { .. } => {
                Ok(Self::AmplitudeDamping)
            }
            ChannelKind::Dephasing { generator, .. } => match generator {
                Some(g) if g.len() != 2 => Err(Error::Capability(
                    "closed-form distributions are available for qubit dephasing only".into(),
                )),
                _ => Ok(Self::Dephasing),
            },
        }
    }
}

/// Upper edge of the support of `P_G(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    Bounded(f64),
    /// Square-root divergence of the boundary for pure (or unexcited) marginals.
    Unbounded,
}

impl Support {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Self::Bounded(x) => Some(x),
            Self::Unbounded => None,
        }
    }
}

fn check_p(p: f64, allow_zero: bool) -> Result<()> {
    let ok = if allow_zero { (0.0..1.0).contains(&p) } else { p > 0.0 && p < 1.0 };
    if ok {
        Ok(())
    } else {
        Err(Error::Validation(format!("p = {p} outside the allowed range")))
    }
}

/// `x^max`: `(√(1−p)/ρ11)·[(1−ρ11 p)/ρ11 − |ρ10|²/ρ11²]⁻¹` for amplitude damping,
/// `(4ρ11ρ00)^{−1/2}` for dephasing.
pub fn x_max(family: Family, m: &QubitMarginal, p: f64) -> Result<Support> {
    check_p(p, true)?;
    match family {
        Family::AmplitudeDamping => {
            if m.rho11 == 0.0 {
                return Ok(Support::Unbounded);
            }
            let r = m.rho11;
            let denom = (1.0 - r * p) / r - m.rho10.norm_sqr() / (r * r);
            if denom <= 0.0 {
                return Ok(Support::Unbounded);
            }
            Ok(Support::Bounded((1.0 - p).sqrt() / r / denom))
        }
        Family::Dephasing => {
            let prod = m.rho11 * m.rho00();
            if prod == 0.0 {
                Ok(Support::Unbounded)
            } else {
                Ok(Support::Bounded(1.0 / (4.0 * prod).sqrt()))
            }
        }
    }
}

pub fn x_max_for_channel(channel: &ChannelSpec, m: &QubitMarginal, p: f64) -> Result<Support> {
    x_max(Family::of(channel)?, m, p)
}

/// Normalized density `P_G(x)` of the conditional entanglement at decay probability `p`.
///
/// Amplitude damping, with `s = √(1−p)/(ρ11 x) − (1−ρ11 p)/ρ11 + |ρ10|²/ρ11²` and `c = ρ10/ρ11`:
/// `(1−p)/(p ρ11 x³) · exp(−(s+|c|²)/p) · I0(2|c|√s/p)` for `s ≥ 0`.
///
/// Dephasing, with `σ² = −log(1−p)` and `D = √(1−4x²ρ11ρ00)`:
/// `√(1−p)/(x² D) · [φ_σ(u₊) + φ_σ(u₋)]`, `u₊ = log((1+D)/(2xρ11))`, `u₋ = −log((1+D)/(2xρ00))`.
pub fn closed_form_pg(family: Family, m: &QubitMarginal, x: f64, p: f64) -> Result<f64> {
    check_p(p, false)?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Validation(format!("x must be positive, got {x}")));
    }
    match family {
        Family::AmplitudeDamping => {
            let r = m.rho11;
            if r == 0.0 {
                return Err(Error::Domain(
                    "unexcited marginal: the distribution is a point mass at x = 1".into(),
                ));
            }
            let c = m.rho10.norm() / r;
            let s = (1.0 - p).sqrt() / (r * x) - (1.0 - r * p) / r + c * c;
            if s < 0.0 {
                return Ok(0.0);
            }
            let z = 2.0 * c * s.sqrt() / p;
            // e^{−(s+c²)/p} I0(z) = e^{−(√s−c)²/p} i0e(z)
            let d = s.sqrt() - c;
            let tail = (-(d * d) / p).exp() * bessel_i0_scaled(z);
            if tail == 0.0 {
                return Ok(0.0);
            }
            Ok((1.0 - p) / (p * r * x.powi(3)) * tail)
        }
        Family::Dephasing => {
            let (r1, r0) = (m.rho11, m.rho00());
            let disc = 1.0 - 4.0 * x * x * r1 * r0;
            if disc <= 0.0 {
                return Ok(0.0);
            }
            let dd = disc.sqrt();
            let var = -(-p).ln_1p();
            let phi = |u: f64| (-u * u / (2.0 * var)).exp() / (2.0 * PI * var).sqrt();
            let mut sum = 0.0;
            if r1 > 0.0 {
                sum += phi(((1.0 + dd) / (2.0 * x * r1)).ln());
            }
            if r0 > 0.0 {
                sum += phi(((1.0 + dd) / (2.0 * x * r0)).ln());
            }
            Ok((1.0 - p).sqrt() / (x * x * dd) * sum)
        }
    }
}

pub fn closed_form_pg_for_channel(channel: &ChannelSpec, m: &QubitMarginal, x: f64, p: f64) -> Result<f64> {
    closed_form_pg(Family::of(channel)?, m, x, p)
}

/// `∫_a^b P_G(x) dx`, with the inverse square-root edge of the dephasing
/// density handled by substitution.
pub fn closed_form_probability(family: Family, m: &QubitMarginal, p: f64, a: f64, b: f64) -> Result<f64> {
    let a = a.max(0.0);
    let top = match x_max(family, m, p)? {
        Support::Bounded(x) => x,
        Support::Unbounded => f64::INFINITY,
    };
    let b = b.min(top);
    if b <= a {
        return Ok(0.0);
    }
    let opts = QuadOptions::tol(1e-13, 1e-10);
    let density = |x: f64| {
        if x <= 0.0 {
            0.0
        } else {
            closed_form_pg(family, m, x, p).unwrap_or(f64::NAN)
        }
    };
    let r = if b == top && family == Family::Dephasing {
        quad::integrate_sqrt_endpoint(density, a, b, opts)?
    } else {
        quad::integrate(density, a, b, opts)?
    };
    Ok(r.value)
}

/// Mean conditional entanglement `x̄(t) = f(t)`: `√(1−p(t))` for qubit amplitude
/// damping and dephasing, `exp{−γ∫₀ᵗΓ}` (zero from τ on) for the OU channel.
pub fn mean_entanglement(channel: &ChannelSpec, t: f64) -> Result<f64> {
    match &channel.kind {
        ChannelKind::OuAmplitudeDamping { .. } => OuParams::from_channel(channel)?.mean_entanglement(t),
        ChannelKind::MarkovAmplitudeDamping { .. } => Ok((1.0 - kernels::p_of_t(channel, t)?).sqrt()),
        ChannelKind::Dephasing { generator, .. } => {
            let d = generator.as_ref().map_or(2, Vec::len);
            propagator::channel_scaling(channel, d, t)
        }
    }
}

/// Predicts `x(a)` from a calibrated reference outcome `a'` and Husimi values:
/// `x(a) = x(a') e^{−(N_a − N_a')} Q(a')/Q(a)`.
pub fn tomography_ratio(x_ref: f64, q_ref: f64, n_ref: f64, q_new: f64, n_new: f64) -> Result<f64> {
    if !(q_ref > 0.0) || !(q_new > 0.0) {
        return Err(Error::Domain(format!(
            "Husimi densities must be positive, got Q_ref = {q_ref}, Q_new = {q_new}"
        )));
    }
    Ok(x_ref * (n_ref - n_new).exp() * q_ref / q_new)
}

/// `e^{−N_a} x̄`, a lower bound to `x(a,t)` for an outcome with mean photon number `N_a`.
pub fn entanglement_lower_bound(n_a: f64, xbar: f64) -> Result<f64> {
    if !(n_a >= 0.0) {
        return Err(Error::Validation(format!("photon number must be >= 0, got {n_a}")));
    }
    if !(0.0..=1.0).contains(&xbar) {
        return Err(Error::Validation(format!("x̄ must lie in [0, 1], got {xbar}")));
    }
    Ok((-n_a).exp() * xbar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::model::SpectralDensity;
    use approx::assert_relative_eq;

    fn half() -> QubitMarginal {
        QubitMarginal::diagonal(0.5).unwrap()
    }

    #[test]
    fn support_examples() {
        let m = half();
        assert_eq!(x_max(Family::Dephasing, &m, 0.3).unwrap(), Support::Bounded(1.0));
        assert_eq!(x_max(Family::AmplitudeDamping, &m, 0.0).unwrap(), Support::Bounded(1.0));
        let Support::Bounded(x) = x_max(Family::AmplitudeDamping, &m, 0.75).unwrap() else {
            panic!()
        };
        assert_relative_eq!(x, 0.8, max_relative = 1e-14);
        let ground = QubitMarginal::diagonal(0.0).unwrap();
        assert_eq!(x_max(Family::AmplitudeDamping, &ground, 0.5).unwrap(), Support::Unbounded);
        assert_eq!(x_max(Family::Dephasing, &ground, 0.5).unwrap(), Support::Unbounded);
    }

    #[test]
    fn excited_marginal_boundary_exceeds_one() {
        let m = QubitMarginal::diagonal(0.75).unwrap();
        let x = x_max(Family::AmplitudeDamping, &m, 0.5).unwrap().value().unwrap();
        assert!(x > 1.0);
    }

    #[test]
    fn outside_support_is_zero() {
        assert_eq!(closed_form_pg(Family::AmplitudeDamping, &half(), 1.0, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn normalized_spot_values() {
        // Values of the unit-mass densities; these are half the Bessel expression
        // at x = 0.8 and 1/x times the log-Gaussian expression at x = 0.6.
        let ad = closed_form_pg(Family::AmplitudeDamping, &half(), 0.8, 0.5).unwrap();
        let s = (0.5f64).sqrt() / 0.4 - 1.5;
        let doubled = 2.0 * 0.5 / (0.512 * 0.25) * (-s / 0.5).exp();
        assert_relative_eq!(ad, doubled / 2.0, max_relative = 1e-13);
        let p = 1.0 - (-1.0f64).exp();
        let dp = closed_form_pg(Family::Dephasing, &half(), 0.6, p).unwrap();
        let x: f64 = 0.6;
        let lg = ((1.0 + (1.0 - x * x).sqrt()) / x).ln();
        let literal = (2.0 * (1.0 - p) / PI).sqrt() / (x * (1.0 - x * x).sqrt()) * (-lg * lg / 2.0).exp();
        assert_relative_eq!(dp, literal / x, max_relative = 1e-13);
    }

    #[test]
    fn unit_mass() {
        let cases = [
            (Family::AmplitudeDamping, QubitMarginal::diagonal(0.5).unwrap(), 0.5),
            (Family::AmplitudeDamping, QubitMarginal::new(0.6, c(0.2, 0.3)).unwrap(), 0.3),
            (Family::AmplitudeDamping, QubitMarginal::diagonal(0.75).unwrap(), 0.8),
            (Family::Dephasing, QubitMarginal::diagonal(0.5).unwrap(), 1.0 - (-1.0f64).exp()),
            (Family::Dephasing, QubitMarginal::diagonal(0.2).unwrap(), 0.5),
            (Family::Dephasing, QubitMarginal::new(0.3, c(0.1, 0.1)).unwrap(), 0.9),
        ];
        for (fam, m, p) in cases {
            let mass = closed_form_probability(fam, &m, p, 0.0, f64::INFINITY).unwrap();
            assert_relative_eq!(mass, 1.0, max_relative = 1e-6);
        }
    }

    #[test]
    fn means() {
        let ad = ChannelSpec::markov_amplitude_damping(0, 1.0);
        assert_relative_eq!(mean_entanglement(&ad, 4f64.ln()).unwrap(), 0.5, max_relative = 1e-14);
        let dp = ChannelSpec::dephasing(0, 2.0, SpectralDensity::PurelyOhmic);
        assert_relative_eq!(mean_entanglement(&dp, 0.3).unwrap(), (-0.6f64).exp(), max_relative = 1e-14);
        let ou = ChannelSpec::ou_amplitude_damping(0, 1.0, 1.0);
        assert_eq!(mean_entanglement(&ou, 1.5 * PI).unwrap(), 0.0);
        assert_eq!(mean_entanglement(&ou, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn tomography_and_bound() {
        assert!((tomography_ratio(0.7, 0.2, 1.3, 0.2, 1.3).unwrap() - 0.7).abs() < 1e-15);
        assert!(tomography_ratio(0.7, 0.0, 1.0, 0.2, 1.0).is_err());
        assert_eq!(entanglement_lower_bound(0.0, 0.6).unwrap(), 0.6);
        assert_eq!(entanglement_lower_bound(2.0, 0.0).unwrap(), 0.0);
    }
}
