//! Finite sets of bosonic modes and the outcome contractions they induce.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violations};
use crate::kernels::OuParams;
use crate::propagator::ModeContraction;
use crate::quad::{self, QuadOptions};

pub const MAX_MODES: usize = 4;
pub const DEFAULT_FOCK_CUTOFF: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathMode {
    /// Coupling `g_λ` in √rate units.
    pub g: f64,
    /// Frequency `ω_λ` in the interaction picture.
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteBath {
    pub modes: Vec<BathMode>,
    /// Highest photon number kept per mode.
    pub fock_cutoff: usize,
}

impl DiscreteBath {
    pub fn new(modes: Vec<BathMode>, fock_cutoff: usize) -> Result<Self> {
        let bath = Self { modes, fock_cutoff };
        bath.validate()?;
        Ok(bath)
    }

    pub fn validate(&self) -> Result<()> {
        let mut v = Violations::default();
        if self.modes.is_empty() || self.modes.len() > MAX_MODES {
            v.push(
                "modes",
                format!("between 1 and {MAX_MODES} modes required, got {}", self.modes.len()),
            );
        }
        if self.fock_cutoff < 1 {
            v.push("fock_cutoff", "must be >= 1");
        }
        for (i, m) in self.modes.iter().enumerate() {
            if !m.g.is_finite() || !m.omega.is_finite() {
                v.push(format!("modes[{i}]"), "coupling and frequency must be finite");
            }
        }
        v.into_result()
    }

    /// `L` modes with flat coupling `g² = Δω/(2π)` on a window of spacing `Δω`
    /// centered at zero detuning: the discretization of a memoryless bath with
    /// `Re α(s) = δ(s)`.
    pub fn flat(n_modes: usize, spacing: f64, fock_cutoff: usize) -> Result<Self> {
        let g = (spacing / (2.0 * std::f64::consts::PI)).sqrt();
        let mid = 0.5 * (n_modes as f64 - 1.0);
        let modes = (0..n_modes)
            .map(|k| BathMode {
                g,
                omega: (k as f64 - mid) * spacing,
            })
            .collect();
        Self::new(modes, fock_cutoff)
    }

    /// `L` modes sampling the Lorentzian density `I(ω) = ω_d²/(2π(ω_d² + ω²))`,
    /// whose correlation function is `(ω_d/2) e^{−ω_d|s|}`; `g² = I(ω)Δω`.
    pub fn lorentzian(n_modes: usize, spacing: f64, omega_d: f64, fock_cutoff: usize) -> Result<Self> {
        if !(omega_d > 0.0 && omega_d.is_finite()) {
            return Err(Error::Validation(format!("omega_d must be positive, got {omega_d}")));
        }
        let mid = 0.5 * (n_modes as f64 - 1.0);
        let modes = (0..n_modes)
            .map(|k| {
                let omega = (k as f64 - mid) * spacing;
                let density = omega_d * omega_d / (2.0 * std::f64::consts::PI * (omega_d * omega_d + omega * omega));
                BathMode {
                    g: (density * spacing).sqrt(),
                    omega,
                }
            })
            .collect();
        Self::new(modes, fock_cutoff)
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Number of Fock levels per mode.
    pub fn levels(&self) -> usize {
        self.fock_cutoff + 1
    }

    pub fn dim(&self) -> usize {
        self.levels().pow(self.modes.len() as u32)
    }

    /// Weights `√γ g_λ (e^{(iω−γ/2)t} − 1)/(iω − γ/2)` of the memoryless
    /// amplitude-damping statistic `y`.
    pub fn markov_contraction(&self, gamma: f64, t: f64) -> ModeContraction {
        let weights = self
            .modes
            .iter()
            .map(|m| {
                let z = Complex64::new(-0.5 * gamma, m.omega);
                let integral = if z.norm() == 0.0 {
                    Complex64::new(t, 0.0)
                } else {
                    ((z * t).exp() - 1.0) / z
                };
                integral * (gamma.sqrt() * m.g)
            })
            .collect();
        ModeContraction::new(weights, false)
    }

    /// Weights `g_λ ∫₀ᵗ e^{iωs} ds` of the dephasing statistic; exact for this bath.
    pub fn dephasing_contraction(&self, t: f64) -> ModeContraction {
        let weights = self
            .modes
            .iter()
            .map(|m| {
                let integral = if m.omega == 0.0 {
                    Complex64::new(t, 0.0)
                } else {
                    ((Complex64::new(0.0, m.omega * t)).exp() - 1.0) / Complex64::new(0.0, m.omega)
                };
                integral * m.g
            })
            .collect();
        ModeContraction::new(weights, true)
    }

    /// `q(t) = Σ g² (1 − cos ωt)/ω²` of this bath.
    pub fn q(&self, t: f64) -> f64 {
        self.modes
            .iter()
            .map(|m| {
                if m.omega == 0.0 {
                    0.5 * m.g * m.g * t * t
                } else {
                    m.g * m.g * (1.0 - (m.omega * t).cos()) / (m.omega * m.omega)
                }
            })
            .sum()
    }

    /// Weights `√γ g_λ ∫₀ᵗ e^{iωs} c(s) ds` of the OU amplitude-damping statistic.
    pub fn ou_contraction(&self, k: &OuParams, t: f64) -> Result<ModeContraction> {
        let opts = QuadOptions::tol(1e-13, 1e-11);
        let weights = self
            .modes
            .iter()
            .map(|m| {
                let re = quad::integrate(|s| (m.omega * s).cos() * k.c(s).unwrap_or(f64::NAN), 0.0, t, opts)?;
                let im = quad::integrate(|s| (m.omega * s).sin() * k.c(s).unwrap_or(f64::NAN), 0.0, t, opts)?;
                Ok(Complex64::new(re.value, im.value) * (k.gamma.sqrt() * m.g))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ModeContraction::new(weights, false))
    }
}

impl std::fmt::Display for DiscreteBath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} modes, Fock cutoff {}", self.modes.len(), self.fock_cutoff)
    }
}

/// Rejects outcomes whose amplitudes the truncated Fock space cannot represent.
pub(crate) fn check_amplitudes(bath_modes: usize, fock_cutoff: usize, a: &[Complex64]) -> Result<()> {
    if a.len() != bath_modes {
        return Err(Error::Dimension(format!(
            "outcome has {} amplitudes for {bath_modes} modes",
            a.len()
        )));
    }
    for (i, z) in a.iter().enumerate() {
        if z.norm_sqr() > fock_cutoff as f64 {
            return Err(Error::Accuracy(format!(
                "|a_{i}|² = {} exceeds the Fock cutoff {fock_cutoff}; increase fock_cutoff",
                z.norm_sqr()
            )));
        }
    }
    Ok(())
}
