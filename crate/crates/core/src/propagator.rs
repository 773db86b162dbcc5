//! Closed-form conditional propagators, the scaling function `f`, and
//! conditional-state construction.
//!
//! For an outcome `a` of the bath measurement the coupled subsystem evolves
//! under a non-unitary local operator that depends on `a` only through a
//! scalar contraction `y`:
//!
//! | channel                  | local operator                       | `f`              |
//! |--------------------------|--------------------------------------|------------------|
//! | Markov amplitude damping | `|0><0| + y|0><1| + e^{-γt/2}|1><1|`  | `e^{-γt/2}`      |
//! | dephasing                | `e^{-Ĵ²q(t) + Ĵy}`                   | `e^{-(2/d)TrĴ² q}` |
//! | OU amplitude damping     | `|0><0| + y|0><1| + c(t)|1><1|`       | `c(t)`           |

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{self, OuParams};
use crate::linalg::{self, CMat, ONE, ZERO};
use crate::model::{ChannelKind, ChannelSpec, PureState, QubitMarginal, SystemSpec};

/// Linear map from full mode amplitudes `a_λ` to the outcome statistic
/// `y = Σ w_λ a_λ*` (real part only for dephasing).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeContraction {
    pub weights: Vec<Complex64>,
    pub real_part: bool,
}

impl ModeContraction {
    pub fn new(weights: Vec<Complex64>, real_part: bool) -> Self {
        Self { weights, real_part }
    }

    pub fn apply(&self, modes: &[Complex64]) -> Result<Complex64> {
        if modes.len() != self.weights.len() {
            return Err(Error::Dimension(format!(
                "contraction has {} modes, outcome has {}",
                self.weights.len(),
                modes.len()
            )));
        }
        let y: Complex64 = self
            .weights
            .iter()
            .zip(modes)
            .map(|(w, a)| w * a.conj())
            .sum();
        Ok(if self.real_part { Complex64::new(y.re, 0.0) } else { y })
    }

    /// `Σ|w_λ|²`: the variance of `y` under the vacuum outcome distribution
    /// (per real component for the dephasing convention, halved).
    pub fn weight_norm_sqr(&self) -> f64 {
        linalg::norm_sqr(&self.weights)
    }
}

/// A coherent-state measurement outcome reduced to its sufficient statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomePoint {
    /// Complex for amplitude damping, real (imaginary part zero) for dephasing.
    pub y: Complex64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_modes: Option<Vec<Complex64>>,
    pub t: f64,
}

impl OutcomePoint {
    pub fn new(y: Complex64, t: f64) -> Self {
        Self {
            y,
            full_modes: None,
            t,
        }
    }

    pub fn real(y: f64, t: f64) -> Self {
        Self::new(Complex64::new(y, 0.0), t)
    }

    pub fn from_modes(contraction: &ModeContraction, modes: Vec<Complex64>, t: f64) -> Result<Self> {
        let y = contraction.apply(&modes)?;
        Ok(Self {
            y,
            full_modes: Some(modes),
            t,
        })
    }

    /// Checks that `y` agrees with the contraction of the attached modes.
    pub fn check_modes(&self, contraction: &ModeContraction) -> Result<()> {
        if let Some(modes) = &self.full_modes {
            let y = contraction.apply(modes)?;
            if (y - self.y).norm() > 1e-10 {
                return Err(Error::Validation(format!(
                    "outcome statistic {} disagrees with mode contraction {}",
                    self.y, y
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalState {
    pub state: PureState,
    /// `F(a,t) = <ψ(a,t)|ψ(a,t)> = P(a,t)/P(a,0)`.
    pub norm_sq: f64,
    /// `f(a,t)`.
    pub scaling_value: f64,
}

impl ConditionalState {
    /// Normalized conditional entanglement `x = f/F`.
    pub fn x(&self) -> f64 {
        self.scaling_value / self.norm_sq
    }
}

fn require_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("time must be finite and >= 0, got {t}")))
    }
}

/// Local `d×d` conditional propagator of `channel` for a given outcome, and `f`.
pub fn local_propagator(channel: &ChannelSpec, d: usize, outcome: &OutcomePoint) -> Result<(CMat, f64)> {
    require_time(outcome.t)?;
    let t = outcome.t;
    match &channel.kind {
        ChannelKind::MarkovAmplitudeDamping { gamma } => {
            if d != 2 {
                return Err(Error::Dimension("channel requires qubit".into()));
            }
            let f = (-0.5 * gamma * t).exp();
            Ok((upper_triangular(outcome.y, f), f))
        }
        ChannelKind::OuAmplitudeDamping { .. } => {
            if d != 2 {
                return Err(Error::Dimension("channel requires qubit".into()));
            }
            let k = OuParams::from_channel(channel)?;
            if let Some(tau) = k.disentanglement_time() {
                if t >= tau {
                    return Err(Error::Domain(format!(
                        "OU propagator is singular from the disentanglement time τ = {tau} on (t = {t})"
                    )));
                }
            }
            let f = k.c(t)?;
            Ok((upper_triangular(outcome.y, f), f))
        }
        ChannelKind::Dephasing { density, .. } => {
            if outcome.y.im.abs() > 1e-12 {
                return Err(Error::Validation(format!(
                    "dephasing outcome statistic must be real, got {}",
                    outcome.y
                )));
            }
            let j = channel.lindblad_operator(d)?.matrix;
            let q = kernels::q_of_t(*density, t)?;
            let y = outcome.y.re;
            let diag: Vec<f64> = (0..d).map(|i| j[(i, i)].re).collect();
            let tr_sq: f64 = diag.iter().map(|x| x * x).sum();
            let u = DMatrix::from_fn(d, d, |r, c| {
                if r == c {
                    Complex64::new((-diag[r] * diag[r] * q + diag[r] * y).exp(), 0.0)
                } else {
                    ZERO
                }
            });
            Ok((u, (-2.0 / d as f64 * tr_sq * q).exp()))
        }
    }
}

/// `|0><0| + y|0><1| + f|1><1|`.
fn upper_triangular(y: Complex64, f: f64) -> CMat {
    DMatrix::from_row_slice(2, 2, &[ONE, y, ZERO, Complex64::new(f, 0.0)])
}

fn check_kind(channel: &ChannelSpec, wanted: &str) -> Result<()> {
    if channel.kind_name() == wanted {
        Ok(())
    } else {
        Err(Error::Capability(format!(
            "expected a {wanted} channel, found {}",
            channel.kind_name()
        )))
    }
}

/// Conditional state of a system with a single open channel.
pub fn propagate(spec: &SystemSpec, outcome: &OutcomePoint) -> Result<ConditionalState> {
    let channel = spec.single_channel()?;
    let dims = spec.layout.dims();
    let d = *dims
        .get(channel.target)
        .ok_or_else(|| Error::Dimension(format!("subsystem {} out of range", channel.target)))?;
    let (u, f) = local_propagator(channel, d, outcome)?;
    let mut psi = linalg::apply_local(&spec.initial.amplitudes, dims, channel.target, &u)?;
    // Local internal dynamics: zero on damping targets, commuting with Ĵ on dephasing targets.
    for (k, h) in spec.local_hamiltonians.iter().enumerate() {
        if linalg::max_abs(h) > 0.0 {
            psi = linalg::apply_local(&psi, dims, k, &linalg::unitary_evolution(h, outcome.t))?;
        }
    }
    let norm_sq = linalg::norm_sqr(&psi);
    if !(norm_sq > 0.0) || !norm_sq.is_finite() {
        return Err(Error::Numerical(format!(
            "conditional state has norm² {norm_sq}"
        )));
    }
    linalg::scale(&mut psi, Complex64::new(1.0 / norm_sq.sqrt(), 0.0));
    Ok(ConditionalState {
        state: PureState::new(psi),
        norm_sq,
        scaling_value: f,
    })
}

pub fn propagate_amplitude_damping(spec: &SystemSpec, outcome: &OutcomePoint) -> Result<ConditionalState> {
    check_kind(spec.single_channel()?, "markov_amplitude_damping")?;
    propagate(spec, outcome)
}

pub fn propagate_dephasing(spec: &SystemSpec, outcome: &OutcomePoint) -> Result<ConditionalState> {
    check_kind(spec.single_channel()?, "dephasing")?;
    propagate(spec, outcome)
}

pub fn propagate_ou(spec: &SystemSpec, outcome: &OutcomePoint) -> Result<ConditionalState> {
    check_kind(spec.single_channel()?, "ou_amplitude_damping")?;
    propagate(spec, outcome)
}

/// Scaling function of one channel at time `t`; independent of the outcome.
pub fn channel_scaling(channel: &ChannelSpec, d: usize, t: f64) -> Result<f64> {
    Ok(local_propagator(channel, d, &OutcomePoint::new(ZERO, t))?.1)
}

/// `f(a,t)`: product of the per-channel scaling functions.
pub fn scaling_function(spec: &SystemSpec, outcome: &OutcomePoint) -> Result<f64> {
    let dims = spec.layout.dims();
    spec.channels.iter().try_fold(1.0, |acc, ch| {
        let d = *dims
            .get(ch.target)
            .ok_or_else(|| Error::Dimension(format!("subsystem {} out of range", ch.target)))?;
        Ok(acc * channel_scaling(ch, d, outcome.t)?)
    })
}

/// `x(a,t) = f(a,t)/F(a,t)`.
pub fn scaling_law_x(spec: &SystemSpec, outcome: &OutcomePoint) -> Result<f64> {
    Ok(propagate(spec, outcome)?.x())
}

/// `F` for amplitude damping with decay probability `p`:
/// `1 − ρ11 p + ρ11 |y|² + 2 Re(y ρ10)`.
pub fn amplitude_damping_norm_sq(m: &QubitMarginal, p: f64, y: Complex64) -> f64 {
    1.0 - m.rho11 * p + m.rho11 * y.norm_sqr() + 2.0 * (y * m.rho10).re
}

/// `F` for qubit dephasing in terms of `σ² = Δ²q = −log(1−p)` and `η = Δy`:
/// `ρ11 e^{η − σ²/2} + ρ00 e^{−η − σ²/2}`.
pub fn dephasing_norm_sq(m: &QubitMarginal, sigma_sq: f64, eta: f64) -> f64 {
    let base = (-0.5 * sigma_sq).exp();
    base * (m.rho11 * eta.exp() + m.rho00() * (-eta).exp())
}
