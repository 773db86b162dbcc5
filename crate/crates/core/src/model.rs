//! Multipartite central system, its open channels, and initial data.
//!
//! Basis ordering is row-major over subsystem indices: for dims `[d0, d1, ...]`
//! the amplitude of `|i0 i1 ...>` sits at `i0*d1*d2*... + i1*d2*... + ...`.
//! On a qubit, `|0>` is the ground state and `|1>` the excited state.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violations};
use crate::linalg::{self, CMat, ONE, ZERO};

/// Default cap on the total Hilbert-space dimension of the central system.
pub const DEFAULT_MAX_DIMENSION: usize = 64;

pub const NORMALIZATION_TOL: f64 = 1e-12;
pub const HERMITICITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemLayout {
    dims: Vec<usize>,
}

impl SubsystemLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        Self::with_cap(dims, DEFAULT_MAX_DIMENSION)
    }

    pub fn with_cap(dims: Vec<usize>, max_dimension: usize) -> Result<Self> {
        let layout = Self { dims };
        let mut v = Violations::default();
        layout.check(max_dimension, &mut v);
        v.into_result()?;
        Ok(layout)
    }

    /// Layout without invariant checks; `validate_system` reports the violations.
    pub fn unchecked(dims: Vec<usize>) -> Self {
        Self { dims }
    }

    fn check(&self, max_dimension: usize, v: &mut Violations) {
        if self.dims.is_empty() {
            v.push("dims", "at least one subsystem is required");
        }
        for (i, &d) in self.dims.iter().enumerate() {
            if d < 2 {
                v.push(format!("dims[{i}]"), format!("dimension {d} < 2"));
            }
        }
        let total = self
            .dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d));
        match total {
            Some(t) if t <= max_dimension => {}
            _ => v.push(
                "dims",
                format!("total dimension exceeds the cap of {max_dimension}"),
            ),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dim(&self, i: usize) -> usize {
        self.dims[i]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }
}

/// Amplitudes over the tensor-product basis of a [`SubsystemLayout`].
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    pub amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn from_real(amplitudes: &[f64]) -> Self {
        Self::new(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        linalg::norm_sqr(&self.amplitudes)
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORMALIZATION_TOL
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Numerical(format!("cannot normalize state with norm² {n}")));
        }
        let s = 1.0 / n.sqrt();
        Ok(Self::new(self.amplitudes.iter().map(|a| a * s).collect()))
    }

    /// Computational basis state `|index>`.
    pub fn basis(total_dim: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; total_dim];
        amps[index] = ONE;
        Self::new(amps)
    }
}

/// A traceless local coupling operator.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladOperator {
    pub matrix: CMat,
    pub target: usize,
    /// Rate parameter: γ (1/time) for amplitude damping, Δ (1/√time) for dephasing.
    pub coupling: f64,
}

/// Splits `L = J + αI` with `α = Tr L / d`, so that `J` is traceless.
///
/// The shift `α` is returned for bookkeeping of the accompanying Hamiltonian
/// redefinition `H → H − Σ g²/ω (α* J + α J†)`.
pub fn renormalize_lindblad(l: &CMat) -> Result<(CMat, Complex64)> {
    if !l.is_square() {
        return Err(Error::Dimension(format!(
            "Lindblad operator must be square, got {}x{}",
            l.nrows(),
            l.ncols()
        )));
    }
    let d = l.nrows();
    if d < 2 {
        return Err(Error::Dimension(format!(
            "Lindblad operator needs dimension >= 2, got {d}"
        )));
    }
    let alpha = linalg::trace(l) / d as f64;
    let mut j = l.clone();
    for i in 0..d {
        j[(i, i)] -= alpha;
    }
    Ok((j, alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum SpectralDensity {
    /// Flat `I(ω) = 1/π`, memoryless.
    PurelyOhmic,
    OhmicCutoff { omega_d: f64 },
    Superohmic { omega_d: f64 },
    /// Ornstein–Uhlenbeck kernel `α(s) = (ω_d/2) e^{-ω_d |s|}`.
    Lorentzian { omega_d: f64 },
}

impl SpectralDensity {
    pub fn cutoff(&self) -> Option<f64> {
        match *self {
            Self::PurelyOhmic => None,
            Self::OhmicCutoff { omega_d }
            | Self::Superohmic { omega_d }
            | Self::Lorentzian { omega_d } => Some(omega_d),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::PurelyOhmic => "purely_ohmic",
            Self::OhmicCutoff { .. } => "ohmic_cutoff",
            Self::Superohmic { .. } => "superohmic",
            Self::Lorentzian { .. } => "lorentzian",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelKind {
    /// Zero-temperature Markovian decay, `J = √γ σ₋`.
    MarkovAmplitudeDamping { gamma: f64 },
    /// Non-demolition channel, `J = (Δ/2) σ_z` on a qubit. On a qudit the
    /// diagonal `generator` replaces `σ_z` and is made traceless.
    Dephasing {
        delta: f64,
        density: SpectralDensity,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generator: Option<Vec<f64>>,
    },
    /// Amplitude damping into a bath with an Ornstein–Uhlenbeck memory kernel.
    OuAmplitudeDamping { gamma: f64, omega_d: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    #[serde(flatten)]
    pub kind: ChannelKind,
    pub target: usize,
}

impl ChannelSpec {
    pub fn markov_amplitude_damping(target: usize, gamma: f64) -> Self {
        Self {
            kind: ChannelKind::MarkovAmplitudeDamping { gamma },
            target,
        }
    }

    pub fn dephasing(target: usize, delta: f64, density: SpectralDensity) -> Self {
        Self {
            kind: ChannelKind::Dephasing {
                delta,
                density,
                generator: None,
            },
            target,
        }
    }

    pub fn ou_amplitude_damping(target: usize, gamma: f64, omega_d: f64) -> Self {
        Self {
            kind: ChannelKind::OuAmplitudeDamping { gamma, omega_d },
            target,
        }
    }

    pub fn is_amplitude_damping(&self) -> bool {
        matches!(
            self.kind,
            ChannelKind::MarkovAmplitudeDamping { .. } | ChannelKind::OuAmplitudeDamping { .. }
        )
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ChannelKind::MarkovAmplitudeDamping { .. } => "markov_amplitude_damping",
            ChannelKind::Dephasing { .. } => "dephasing",
            ChannelKind::OuAmplitudeDamping { .. } => "ou_amplitude_damping",
        }
    }

    fn check(&self, path: &str, dims: &[usize], v: &mut Violations) {
        let positive = |v: &mut Violations, name: &str, x: f64| {
            if !(x > 0.0 && x.is_finite()) {
                v.push(format!("{path}.{name}"), format!("must be positive, got {x}"));
            }
        };
        let target_dim = dims.get(self.target).copied();
        if target_dim.is_none() {
            v.push(
                format!("{path}.target"),
                format!("subsystem {} does not exist", self.target),
            );
        }
        match &self.kind {
            ChannelKind::MarkovAmplitudeDamping { gamma } => {
                positive(v, "gamma", *gamma);
            }
            ChannelKind::OuAmplitudeDamping { gamma, omega_d } => {
                positive(v, "gamma", *gamma);
                positive(v, "omega_d", *omega_d);
            }
            ChannelKind::Dephasing {
                delta,
                density,
                generator,
            } => {
                positive(v, "delta", *delta);
                if let Some(w) = density.cutoff() {
                    positive(v, "density.omega_d", w);
                }
                if matches!(density, SpectralDensity::Lorentzian { .. }) {
                    v.push(
                        format!("{path}.density"),
                        "dephasing time rescaling is not available for a Lorentzian density",
                    );
                }
                match (generator, target_dim) {
                    (Some(g), Some(d)) if g.len() != d => v.push(
                        format!("{path}.generator"),
                        format!("needs {d} diagonal entries, got {}", g.len()),
                    ),
                    (Some(g), Some(_)) if g.iter().all(|&x| x == g[0]) => v.push(
                        format!("{path}.generator"),
                        "generator is proportional to the identity",
                    ),
                    (None, Some(d)) if d != 2 => v.push(
                        format!("{path}.generator"),
                        "a diagonal generator is required for dephasing on a qudit",
                    ),
                    _ => {}
                }
            }
        }
        if self.is_amplitude_damping() && matches!(target_dim, Some(d) if d != 2) {
            v.push(format!("{path}.target"), "channel requires qubit");
        }
    }

    /// The traceless coupling operator of this channel on a subsystem of dimension `d`.
    pub fn lindblad_operator(&self, d: usize) -> Result<LindbladOperator> {
        let (raw, coupling) = match &self.kind {
            ChannelKind::MarkovAmplitudeDamping { gamma }
            | ChannelKind::OuAmplitudeDamping { gamma, .. } => {
                if d != 2 {
                    return Err(Error::Dimension("channel requires qubit".into()));
                }
                (linalg::to_dynamic(&linalg::sigma_minus()) * linalg::re(gamma.sqrt()), *gamma)
            }
            ChannelKind::Dephasing {
                delta, generator, ..
            } => {
                let diag: Vec<f64> = match generator {
                    Some(g) => g.clone(),
                    None if d == 2 => vec![-1.0, 1.0],
                    None => {
                        return Err(Error::Validation(
                            "a diagonal generator is required for dephasing on a qudit".into(),
                        ))
                    }
                };
                if diag.len() != d {
                    return Err(Error::Dimension(format!(
                        "generator has {} entries for dimension {d}",
                        diag.len()
                    )));
                }
                let m = DMatrix::from_fn(d, d, |i, j| {
                    if i == j {
                        Complex64::new(0.5 * delta * diag[i], 0.0)
                    } else {
                        ZERO
                    }
                });
                (m, *delta)
            }
        };
        let (matrix, _) = renormalize_lindblad(&raw)?;
        Ok(LindbladOperator {
            matrix,
            target: self.target,
            coupling,
        })
    }
}

/// Limits applied during validation.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub max_dimension: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_dimension: DEFAULT_MAX_DIMENSION,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub layout: SubsystemLayout,
    pub initial: PureState,
    pub channels: Vec<ChannelSpec>,
    /// One Hermitian matrix per subsystem (ħ = 1); zero for frozen dynamics.
    pub local_hamiltonians: Vec<CMat>,
}

impl SystemSpec {
    /// A closed system with frozen internal dynamics.
    pub fn new(layout: SubsystemLayout, initial: PureState) -> Self {
        let local_hamiltonians = layout
            .dims()
            .iter()
            .map(|&d| DMatrix::zeros(d, d))
            .collect();
        Self {
            layout,
            initial,
            channels: Vec::new(),
            local_hamiltonians,
        }
    }

    pub fn with_channel(mut self, channel: ChannelSpec) -> Self {
        self.channels.push(channel);
        self
    }

    pub fn with_hamiltonian(mut self, subsystem: usize, h: CMat) -> Self {
        self.local_hamiltonians[subsystem] = h;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with(Limits::default())
    }

    pub fn validate_with(&self, limits: Limits) -> Result<()> {
        let mut v = Violations::default();
        self.layout.check(limits.max_dimension, &mut v);
        let dims = self.layout.dims();
        let total: usize = dims.iter().product();
        if self.initial.len() != total {
            v.push(
                "initial_state",
                format!("expected {total} amplitudes, got {}", self.initial.len()),
            );
        } else if !self.initial.is_normalized() {
            v.push(
                "initial_state",
                format!("not normalized: norm² = {}", self.initial.norm_sqr()),
            );
        }
        if self.local_hamiltonians.len() != dims.len() {
            v.push(
                "local_hamiltonians",
                format!(
                    "expected {} matrices, got {}",
                    dims.len(),
                    self.local_hamiltonians.len()
                ),
            );
        }
        for (i, h) in self.local_hamiltonians.iter().enumerate() {
            let path = format!("local_hamiltonians[{i}]");
            if let Some(&d) = dims.get(i) {
                if h.nrows() != d || h.ncols() != d {
                    v.push(&path, format!("must be {d}x{d}, got {}x{}", h.nrows(), h.ncols()));
                    continue;
                }
            }
            if !linalg::is_hermitian(h, HERMITICITY_TOL) {
                v.push(&path, "not Hermitian");
            }
        }
        let mut seen = vec![false; dims.len()];
        for (k, ch) in self.channels.iter().enumerate() {
            let path = format!("channels[{k}]");
            ch.check(&path, dims, &mut v);
            let Some(slot) = seen.get_mut(ch.target) else {
                continue;
            };
            if *slot {
                v.push(
                    format!("{path}.target"),
                    "at most one channel per subsystem",
                );
            }
            *slot = true;
            let Some(h) = self.local_hamiltonians.get(ch.target) else {
                continue;
            };
            if h.nrows() != dims[ch.target] {
                continue;
            }
            if ch.is_amplitude_damping() {
                if linalg::max_abs(h) > HERMITICITY_TOL {
                    v.push(
                        format!("local_hamiltonians[{}]", ch.target),
                        "frozen dynamics required on an amplitude-damping target",
                    );
                }
            } else if let Ok(op) = ch.lindblad_operator(dims[ch.target]) {
                if !proportional(h, &op.matrix) {
                    v.push(
                        format!("local_hamiltonians[{}]", ch.target),
                        "must be proportional to the dephasing operator",
                    );
                }
            }
        }
        v.into_result()
    }

    pub fn channel_on(&self, subsystem: usize) -> Option<&ChannelSpec> {
        self.channels.iter().find(|c| c.target == subsystem)
    }

    pub fn single_channel(&self) -> Result<&ChannelSpec> {
        match self.channels.as_slice() {
            [c] => Ok(c),
            other => Err(Error::Validation(format!(
                "exactly one open channel expected, found {}",
                other.len()
            ))),
        }
    }
}

/// `h = λ j` for some real λ (including λ = 0).
fn proportional(h: &CMat, j: &CMat) -> bool {
    let jj: f64 = j.iter().map(|z| z.norm_sqr()).sum();
    if jj == 0.0 {
        return linalg::max_abs(h) <= HERMITICITY_TOL;
    }
    let lambda: Complex64 = j.iter().zip(h.iter()).map(|(a, b)| a.conj() * b).sum::<Complex64>() / jj;
    let residual = h - j * Complex64::new(lambda.re, 0.0);
    lambda.im.abs() <= HERMITICITY_TOL && linalg::max_abs(&residual) <= HERMITICITY_TOL
}

/// Validates every invariant of a system specification.
pub fn validate_system(spec: SystemSpec) -> Result<SystemSpec> {
    spec.validate()?;
    Ok(spec)
}

/// Reduced density matrix of one subsystem, `Tr_{others} |φ><φ|`.
pub fn reduced_density_matrix(
    state: &PureState,
    layout: &SubsystemLayout,
    target: usize,
) -> Result<CMat> {
    let dims = layout.dims();
    if state.len() != layout.total_dim() {
        return Err(Error::Dimension(format!(
            "state has {} amplitudes, layout needs {}",
            state.len(),
            layout.total_dim()
        )));
    }
    if target >= dims.len() {
        return Err(Error::Dimension(format!("subsystem {target} out of range")));
    }
    if !state.is_normalized() {
        return Err(Error::Validation(format!(
            "state is not normalized: norm² = {}",
            state.norm_sqr()
        )));
    }
    Ok(partial_trace_unnormalized(&state.amplitudes, dims, target))
}

pub(crate) fn partial_trace_unnormalized(amps: &[Complex64], dims: &[usize], target: usize) -> CMat {
    let d = dims[target];
    let stride = linalg::strides(dims)[target];
    let block = stride * d;
    let mut rho = DMatrix::from_element(d, d, ZERO);
    for outer in (0..amps.len()).step_by(block) {
        for inner in 0..stride {
            let base = outer + inner;
            for i in 0..d {
                let ai = amps[base + i * stride];
                for j in 0..d {
                    rho[(i, j)] += ai * amps[base + j * stride].conj();
                }
            }
        }
    }
    rho
}

/// The reduced state of a coupled qubit in the `(ρ11, ρ10; ρ10*, ρ00)` parameterization,
/// with `ρ10 = <1|ρ|0>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitMarginal {
    pub rho11: f64,
    pub rho10: Complex64,
}

impl QubitMarginal {
    pub fn new(rho11: f64, rho10: Complex64) -> Result<Self> {
        let m = Self { rho11, rho10 };
        m.check()?;
        Ok(m)
    }

    pub fn diagonal(rho11: f64) -> Result<Self> {
        Self::new(rho11, ZERO)
    }

    pub fn from_matrix(rho: &CMat) -> Result<Self> {
        if rho.nrows() != 2 || rho.ncols() != 2 {
            return Err(Error::Dimension("qubit marginal must be 2x2".into()));
        }
        Self::new(rho[(1, 1)].re, rho[(1, 0)])
    }

    pub fn rho00(&self) -> f64 {
        1.0 - self.rho11
    }

    pub fn purity(&self) -> f64 {
        self.rho11 * self.rho11 + self.rho00() * self.rho00() + 2.0 * self.rho10.norm_sqr()
    }

    pub fn to_matrix(&self) -> CMat {
        DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(self.rho00(), 0.0),
                self.rho10.conj(),
                self.rho10,
                Complex64::new(self.rho11, 0.0),
            ],
        )
    }

    fn check(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rho11) {
            return Err(Error::Validation(format!("rho11 = {} outside [0, 1]", self.rho11)));
        }
        if self.rho10.norm_sqr() > self.rho11 * self.rho00() + 1e-12 {
            return Err(Error::Validation(format!(
                "|rho10|² = {} exceeds rho11*rho00 = {}: not positive semidefinite",
                self.rho10.norm_sqr(),
                self.rho11 * self.rho00()
            )));
        }
        Ok(())
    }

    /// A two-qubit pure state whose first qubit has this marginal
    /// (Schmidt purification onto an ancilla).
    pub fn purification(&self) -> PureState {
        let rho = self.to_matrix();
        let eig = rho.symmetric_eigen();
        let mut amps = vec![ZERO; 4];
        for k in 0..2 {
            let w = eig.eigenvalues[k].max(0.0).sqrt();
            for i in 0..2 {
                amps[2 * i + k] += eig.eigenvectors[(i, k)] * w;
            }
        }
        PureState::new(amps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use approx::assert_abs_diff_eq;

    fn bell() -> PureState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureState::from_real(&[s, 0.0, 0.0, s])
    }

    #[test]
    fn renormalize_sigma_minus_is_unchanged() {
        let (j, a) = renormalize_lindblad(&linalg::to_dynamic(&linalg::sigma_minus())).unwrap();
        assert_eq!(a, ZERO);
        assert_eq!(j, linalg::to_dynamic(&linalg::sigma_minus()));
    }

    #[test]
    fn renormalize_identity_is_pure_shift() {
        let (j, a) = renormalize_lindblad(&DMatrix::identity(2, 2)).unwrap();
        assert_eq!(a, ONE);
        assert!(linalg::max_abs(&j) == 0.0);
    }

    #[test]
    fn renormalize_projector() {
        let l = DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
        let (j, a) = renormalize_lindblad(&l).unwrap();
        assert_eq!(a, c(0.5, 0.0));
        assert_eq!(j[(0, 0)], c(0.5, 0.0));
        assert_eq!(j[(1, 1)], c(-0.5, 0.0));
    }

    #[test]
    fn renormalize_rejects_non_square() {
        let l = DMatrix::from_element(2, 3, ONE);
        assert!(matches!(renormalize_lindblad(&l), Err(Error::Dimension(_))));
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let layout = SubsystemLayout::new(vec![2, 2]).unwrap();
        let rho = reduced_density_matrix(&bell(), &layout, 0).unwrap();
        assert_abs_diff_eq!(rho[(0, 0)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho[(1, 1)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho[(0, 1)].norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn product_state_marginal() {
        // |0> ⊗ |+>
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let layout = SubsystemLayout::new(vec![2, 2]).unwrap();
        let st = PureState::from_real(&[s, s, 0.0, 0.0]);
        let m = QubitMarginal::from_matrix(&reduced_density_matrix(&st, &layout, 1).unwrap())
            .unwrap();
        assert_abs_diff_eq!(m.rho11, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.rho10.re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn weighted_superposition_marginal() {
        // √3/2 |10> + 1/2 |01>
        let layout = SubsystemLayout::new(vec![2, 2]).unwrap();
        let st = PureState::from_real(&[0.0, 0.5, 3f64.sqrt() / 2.0, 0.0]);
        let rho = reduced_density_matrix(&st, &layout, 0).unwrap();
        assert_abs_diff_eq!(rho[(1, 1)].re, 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(rho[(0, 0)].re, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(rho[(1, 0)].norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn unnormalized_state_is_rejected() {
        let layout = SubsystemLayout::new(vec![2, 2]).unwrap();
        let st = PureState::from_real(&[1.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            reduced_density_matrix(&st, &layout, 0),
            Err(Error::Validation(_))
        ));
    }

    fn violations(spec: &SystemSpec) -> Vec<String> {
        match spec.validate() {
            Err(Error::InvalidSpec(v)) => v.iter().map(|x| x.to_string()).collect(),
            Ok(()) => vec![],
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn bell_with_markov_channel_is_valid() {
        let spec = SystemSpec::new(SubsystemLayout::new(vec![2, 2]).unwrap(), bell())
            .with_channel(ChannelSpec::markov_amplitude_damping(0, 1.0));
        assert!(validate_system(spec).is_ok());
    }

    #[test]
    fn amplitude_damping_on_qutrit_is_rejected() {
        let st = PureState::basis(6, 0);
        let spec = SystemSpec::new(SubsystemLayout::new(vec![3, 2]).unwrap(), st)
            .with_channel(ChannelSpec::markov_amplitude_damping(0, 1.0));
        let v = violations(&spec);
        assert!(v.iter().any(|m| m.contains("channels[0].target") && m.contains("channel requires qubit")));
    }

    #[test]
    fn amplitude_damping_requires_frozen_dynamics() {
        let h = linalg::to_dynamic(&linalg::sigma_z());
        let spec = SystemSpec::new(SubsystemLayout::new(vec![2, 2]).unwrap(), bell())
            .with_channel(ChannelSpec::markov_amplitude_damping(0, 1.0))
            .with_hamiltonian(0, h);
        let v = violations(&spec);
        assert!(v.iter().any(|m| m.contains("frozen dynamics required")));
    }

    #[test]
    fn dephasing_accepts_commuting_hamiltonian_only() {
        let base = SystemSpec::new(SubsystemLayout::new(vec![2, 2]).unwrap(), bell())
            .with_channel(ChannelSpec::dephasing(1, 1.0, SpectralDensity::PurelyOhmic));
        let ok = base
            .clone()
            .with_hamiltonian(1, linalg::to_dynamic(&linalg::sigma_z()) * c(0.3, 0.0));
        assert!(ok.validate().is_ok());
        let sx = DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let bad = base.with_hamiltonian(1, sx);
        assert!(violations(&bad)
            .iter()
            .any(|m| m.contains("proportional to the dephasing operator")));
    }

    #[test]
    fn several_violations_are_reported_together() {
        let spec = SystemSpec {
            layout: SubsystemLayout::unchecked(vec![2, 1]),
            initial: PureState::from_real(&[1.0, 1.0]),
            channels: vec![
                ChannelSpec::markov_amplitude_damping(0, -1.0),
                ChannelSpec::markov_amplitude_damping(0, 1.0),
            ],
            local_hamiltonians: vec![DMatrix::zeros(2, 2), DMatrix::zeros(1, 1)],
        };
        let v = violations(&spec);
        assert!(v.iter().any(|m| m.starts_with("dims[1]")));
        assert!(v.iter().any(|m| m.starts_with("initial_state")));
        assert!(v.iter().any(|m| m.starts_with("channels[0].gamma")));
        assert!(v.iter().any(|m| m.contains("at most one channel")));
    }

    #[test]
    fn size_cap_is_enforced() {
        assert!(SubsystemLayout::new(vec![2; 7]).is_err());
        assert!(SubsystemLayout::with_cap(vec![2; 7], 128).is_ok());
    }

    #[test]
    fn purification_reproduces_marginal() {
        let m = QubitMarginal::new(0.7, c(0.2, -0.1)).unwrap();
        let p = m.purification();
        let layout = SubsystemLayout::new(vec![2, 2]).unwrap();
        let back =
            QubitMarginal::from_matrix(&reduced_density_matrix(&p, &layout, 0).unwrap()).unwrap();
        assert_abs_diff_eq!(back.rho11, 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!((back.rho10 - m.rho10).norm(), 0.0, epsilon = 1e-12);
    }
}
