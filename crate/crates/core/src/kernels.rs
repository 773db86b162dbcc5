//! Bath memory functions: correlation kernels, the dephasing time rescaling
//! `q(t)`, `p(t)`, and the Ornstein–Uhlenbeck chain `c(s)`, `u(s,s')`, `Γ(s)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{ChannelKind, ChannelSpec, SpectralDensity};
use crate::quad::{self, QuadOptions};
use crate::special::sinhc;

fn require_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("time must be finite and >= 0, got {t}")))
    }
}

fn require_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!("{name} must be positive, got {x}")))
    }
}

/// Bath correlation function `α(s) = ∫ I(ω) e^{-iωs} dω` for `s >= 0`.
///
/// Only the Lorentzian density has a pointwise closed form here; the others
/// enter the dephasing channel exclusively through [`q_of_t`].
pub fn alpha(density: SpectralDensity, s: f64) -> Result<Complex64> {
    require_time(s)?;
    match density {
        SpectralDensity::Lorentzian { omega_d } => {
            require_positive("omega_d", omega_d)?;
            Ok(Complex64::new(0.5 * omega_d * (-omega_d * s).exp(), 0.0))
        }
        other => Err(Error::Capability(format!(
            "pointwise α(s) is not available for the {} density; use q_of_t",
            other.name()
        ))),
    }
}

/// Dephasing time rescaling `q(t) = Re ∫₀ᵗ∫₀ˢ α(s−s') ds' ds`.
pub fn q_of_t(density: SpectralDensity, t: f64) -> Result<f64> {
    require_time(t)?;
    match density {
        SpectralDensity::PurelyOhmic => Ok(t),
        SpectralDensity::OhmicCutoff { omega_d } => {
            require_positive("omega_d", omega_d)?;
            let wt = omega_d * t;
            Ok(2.0 * t / PI * wt.atan() - (wt * wt).ln_1p() / (PI * omega_d))
        }
        SpectralDensity::Superohmic { omega_d } => {
            require_positive("omega_d", omega_d)?;
            let wt = omega_d * t;
            Ok((wt * wt).ln_1p() / (PI * omega_d))
        }
        SpectralDensity::Lorentzian { .. } => Err(Error::Capability(
            "dephasing time rescaling is not defined for the Lorentzian density".into(),
        )),
    }
}

/// `Tr Ĵ²` of a dephasing channel and the target dimension.
pub(crate) fn dephasing_trace_sq(channel: &ChannelSpec) -> Result<(f64, usize)> {
    let d = match &channel.kind {
        ChannelKind::Dephasing { generator, .. } => generator.as_ref().map_or(2, Vec::len),
        _ => return Err(Error::Capability("not a dephasing channel".into())),
    };
    let j = channel.lindblad_operator(d)?.matrix;
    let tr: f64 = (0..d).map(|i| j[(i, i)].norm_sqr()).sum();
    Ok((tr, d))
}

/// `p(t) = 1 − e^{−γt}` for Markov amplitude damping and `1 − e^{−2 Tr Ĵ² q(t)}` for dephasing.
pub fn p_of_t(channel: &ChannelSpec, t: f64) -> Result<f64> {
    require_time(t)?;
    match &channel.kind {
        ChannelKind::MarkovAmplitudeDamping { gamma } => {
            require_positive("gamma", *gamma)?;
            Ok(-(-gamma * t).exp_m1())
        }
        ChannelKind::Dephasing { density, .. } => {
            let (tr, _) = dephasing_trace_sq(channel)?;
            let q = q_of_t(*density, t)?;
            Ok(-(-2.0 * tr * q).exp_m1())
        }
        ChannelKind::OuAmplitudeDamping { .. } => Err(Error::Capability(
            "p(t) is not defined for the OU channel; use the Γ-based mean entanglement".into(),
        )),
    }
}

/// Inverts [`p_of_t`]: the time at which the channel reaches `p`.
pub fn time_for_p(channel: &ChannelSpec, p: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Domain(format!("p must lie in [0, 1), got {p}")));
    }
    let log_survival = -(-p).ln_1p();
    match &channel.kind {
        ChannelKind::MarkovAmplitudeDamping { gamma } => {
            require_positive("gamma", *gamma)?;
            Ok(log_survival / gamma)
        }
        ChannelKind::Dephasing { density, .. } => {
            let (tr, _) = dephasing_trace_sq(channel)?;
            let q = log_survival / (2.0 * tr);
            invert_q(*density, q)
        }
        ChannelKind::OuAmplitudeDamping { .. } => Err(Error::Capability(
            "p(t) is not defined for the OU channel".into(),
        )),
    }
}

fn invert_q(density: SpectralDensity, q: f64) -> Result<f64> {
    if q == 0.0 {
        return Ok(0.0);
    }
    match density {
        SpectralDensity::PurelyOhmic => Ok(q),
        SpectralDensity::Superohmic { omega_d } => {
            require_positive("omega_d", omega_d)?;
            let t = (PI * omega_d * q).exp_m1().sqrt() / omega_d;
            if t.is_finite() {
                Ok(t)
            } else {
                Err(Error::Domain(format!(
                    "q = {q} is not reached in finite representable time"
                )))
            }
        }
        SpectralDensity::OhmicCutoff { .. } => {
            // q grows linearly at large t; bracket by doubling.
            let mut hi = q.max(1e-12);
            while q_of_t(density, hi)? < q {
                hi *= 2.0;
                if !hi.is_finite() {
                    return Err(Error::Domain(format!("q = {q} not bracketed")));
                }
            }
            quad::brent(
                |t| q_of_t(density, t).unwrap_or(f64::NAN) - q,
                0.0,
                hi,
                1e-14 * hi,
            )
        }
        SpectralDensity::Lorentzian { .. } => q_of_t(density, 0.0),
    }
}

/// Parameters of the Ornstein–Uhlenbeck amplitude-damping kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuParams {
    pub gamma: f64,
    pub omega_d: f64,
}

impl OuParams {
    pub fn new(gamma: f64, omega_d: f64) -> Result<Self> {
        require_positive("gamma", gamma)?;
        require_positive("omega_d", omega_d)?;
        Ok(Self { gamma, omega_d })
    }

    pub fn from_channel(channel: &ChannelSpec) -> Result<Self> {
        match channel.kind {
            ChannelKind::OuAmplitudeDamping { gamma, omega_d } => Self::new(gamma, omega_d),
            _ => Err(Error::Capability("not an OU amplitude-damping channel".into())),
        }
    }

    /// Coupling ratio `μ = 2γ/ω_d`.
    pub fn mu(&self) -> f64 {
        2.0 * self.gamma / self.omega_d
    }

    /// `Ω = (ω_d/2)√(1−μ)`, imaginary for `μ > 1`.
    fn omega(&self) -> Complex64 {
        0.5 * self.omega_d * Complex64::new(1.0 - self.mu(), 0.0).sqrt()
    }

    /// `(ω_d/(2Ω)) sinh(Ωs)` and `cosh(Ωs)`; real for every `μ`.
    fn sinh_cosh(&self, s: f64) -> (f64, f64) {
        let w = self.omega() * s;
        let a = 0.5 * self.omega_d * s * sinhc(w);
        (a.re, w.cosh().re)
    }

    /// Amplitude survival `c(s)`, solving `c' = −γ∫₀ˢ α(s−s') c(s') ds'`, `c(0) = 1`.
    pub fn c(&self, s: f64) -> Result<f64> {
        require_time(s)?;
        let (a, b) = self.sinh_cosh(s);
        Ok((-0.5 * self.omega_d * s).exp() * (a + b))
    }

    /// Memory function `u(s,s') = c(s')/c(s)` of the conditional propagator.
    pub fn u(&self, s: f64, s_prime: f64) -> Result<f64> {
        if s_prime > s {
            return Err(Error::Domain(format!("u(s, s') needs s' <= s, got s' = {s_prime} > s = {s}")));
        }
        self.check_pole(s)?;
        Ok(self.c(s_prime)? / self.c(s)?)
    }

    /// `Γ(s) = (ω_d/(2Ω))sinh(Ωs) / [(ω_d/(2Ω))sinh(Ωs) + cosh(Ωs)]`, so that `γΓ = −c'/c`.
    pub fn gamma_fn(&self, s: f64) -> Result<f64> {
        require_time(s)?;
        self.check_pole(s)?;
        let (a, b) = self.sinh_cosh(s);
        Ok(a / (a + b))
    }

    fn check_pole(&self, s: f64) -> Result<()> {
        if let Some(tau) = self.disentanglement_time() {
            if s >= tau {
                return Err(Error::Pole { s, tau });
            }
        }
        Ok(())
    }

    /// First zero of `c`, present only for `μ > 1`.
    pub fn disentanglement_time(&self) -> Option<f64> {
        let mu = self.mu();
        if mu <= 1.0 {
            return None;
        }
        let r = (mu - 1.0).sqrt();
        Some(mu / r * (PI - r.atan()) / self.gamma)
    }

    /// `γ∫₀ᵗ Γ(s) ds`. Equal to `−log c(t)` since `γΓ = −c'/c`; infinite from τ on.
    pub fn integrated_damping(&self, t: f64) -> Result<f64> {
        require_time(t)?;
        if matches!(self.disentanglement_time(), Some(tau) if t >= tau) {
            return Ok(f64::INFINITY);
        }
        Ok(-self.c(t)?.ln())
    }

    /// `γ∫₀ᵗ Γ(s) ds` by adaptive quadrature of the closed-form `Γ`.
    pub fn integrated_damping_quadrature(&self, t: f64) -> Result<f64> {
        require_time(t)?;
        self.check_pole(t)?;
        let r = quad::integrate(
            |s| self.gamma_fn(s).unwrap_or(f64::NAN),
            0.0,
            t,
            QuadOptions::tol(1e-10, 1e-12),
        )?;
        Ok(self.gamma * r.value)
    }

    /// `x̄(t) = exp{−γ∫₀ᵗ Γ}`, zero from τ onward.
    pub fn mean_entanglement(&self, t: f64) -> Result<f64> {
        Ok((-self.integrated_damping(t)?).exp())
    }
}

pub fn ou_c(gamma: f64, omega_d: f64, s: f64) -> Result<f64> {
    OuParams::new(gamma, omega_d)?.c(s)
}

pub fn ou_gamma(gamma: f64, omega_d: f64, s: f64) -> Result<f64> {
    OuParams::new(gamma, omega_d)?.gamma_fn(s)
}

/// Disentanglement time τ for `μ = 2γ/ω_d > 1`; `None` when the mean entanglement never vanishes.
pub fn disentanglement_time(gamma: f64, omega_d: f64) -> Result<Option<f64>> {
    Ok(OuParams::new(gamma, omega_d)?.disentanglement_time())
}

/// `γτ` as a function of `μ` alone.
pub fn scaled_disentanglement_time(mu: f64) -> Option<f64> {
    if !(mu > 1.0) {
        return None;
    }
    let r = (mu - 1.0).sqrt();
    Some(mu / r * (PI - r.atan()))
}
