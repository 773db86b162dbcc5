//! G-invariant entanglement measures and the mixed-state concurrence.
//!
//! Both pure-state measures are homogeneous of degree two and invariant under
//! local transformations of unit determinant, so they accept unnormalized
//! vectors. Complex conjugation is taken in the computational basis.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ZERO};
use crate::model::PureState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    /// Two-qubit concurrence `|<ψ*|σ_y⊗σ_y|ψ>|`.
    Concurrence2Q,
    /// `2√|Det|` of the Cayley hyperdeterminant of three qubits, GHZ = 1.
    SqrtThreeTangle,
}

impl MeasureKind {
    pub fn dims(&self) -> &'static [usize] {
        match self {
            Self::Concurrence2Q => &[2, 2],
            Self::SqrtThreeTangle => &[2, 2, 2],
        }
    }

    pub fn for_dims(dims: &[usize]) -> Result<Self> {
        match dims {
            [2, 2] => Ok(Self::Concurrence2Q),
            [2, 2, 2] => Ok(Self::SqrtThreeTangle),
            _ => Err(Error::Dimension(format!(
                "no implemented G-invariant measure for layout {dims:?}"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Concurrence2Q => "concurrence",
            Self::SqrtThreeTangle => "sqrt_three_tangle",
        }
    }
}

fn check_layout(kind: MeasureKind, dims: &[usize], len: usize) -> Result<()> {
    let expected = kind.dims();
    if dims != expected {
        return Err(Error::Dimension(format!(
            "{} requires layout {expected:?}, got {dims:?}",
            kind.name()
        )));
    }
    let total: usize = expected.iter().product();
    if len != total {
        return Err(Error::Dimension(format!(
            "{} requires {total} amplitudes, got {len}",
            kind.name()
        )));
    }
    Ok(())
}

/// Cayley hyperdeterminant of the 2×2×2 tensor `a[4i + 2j + k]`.
pub fn cayley_hyperdeterminant(a: &[Complex64]) -> Complex64 {
    let [a000, a001, a010, a011, a100, a101, a110, a111] =
        [a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7]];
    let sq = a000 * a000 * a111 * a111
        + a001 * a001 * a110 * a110
        + a010 * a010 * a101 * a101
        + a100 * a100 * a011 * a011;
    let pairs = a000 * a001 * a110 * a111
        + a000 * a010 * a101 * a111
        + a000 * a100 * a011 * a111
        + a001 * a010 * a101 * a110
        + a001 * a100 * a011 * a110
        + a010 * a100 * a011 * a101;
    let quads = a000 * a011 * a101 * a110 + a001 * a010 * a100 * a111;
    sq - 2.0 * pairs + 4.0 * quads
}

/// Pure-state measure `G` over `dims`; the state need not be normalized.
pub fn measure_pure(kind: MeasureKind, dims: &[usize], state: &[Complex64]) -> Result<f64> {
    check_layout(kind, dims, state.len())?;
    Ok(match kind {
        MeasureKind::Concurrence2Q => 2.0 * (state[0] * state[3] - state[1] * state[2]).norm(),
        MeasureKind::SqrtThreeTangle => 2.0 * cayley_hyperdeterminant(state).norm().sqrt(),
    })
}

pub fn measure_state(kind: MeasureKind, dims: &[usize], state: &PureState) -> Result<f64> {
    measure_pure(kind, dims, &state.amplitudes)
}

/// `|G(A₁⊗…⊗A_N ψ) − G(ψ)|` for local matrices with `|det A_i| = 1`.
pub fn verify_g_invariance(
    kind: MeasureKind,
    dims: &[usize],
    state: &[Complex64],
    locals: &[CMat],
) -> Result<f64> {
    check_layout(kind, dims, state.len())?;
    if locals.len() != dims.len() {
        return Err(Error::Dimension(format!(
            "expected {} local matrices, got {}",
            dims.len(),
            locals.len()
        )));
    }
    let mut out = state.to_vec();
    for (k, m) in locals.iter().enumerate() {
        let det = m.clone().determinant();
        if (det.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!(
                "local matrix {k} has |det| = {}, expected 1",
                det.norm()
            )));
        }
        out = linalg::apply_local(&out, dims, k, m)?;
    }
    Ok((measure_pure(kind, dims, &out)? - measure_pure(kind, dims, state)?).abs())
}

fn check_density(rho: &CMat, dim: usize) -> Result<Vec<f64>> {
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::Dimension(format!(
            "density matrix must be {dim}x{dim}, got {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    if !linalg::is_hermitian(rho, 1e-10) {
        return Err(Error::Validation("density matrix is not Hermitian".into()));
    }
    let tr = linalg::trace(rho).re;
    if (tr - 1.0).abs() > 1e-10 {
        return Err(Error::Validation(format!("density matrix has trace {tr}")));
    }
    let ev = linalg::hermitian_eigenvalues(rho);
    if ev[0] < -1e-10 {
        return Err(Error::Validation(format!(
            "density matrix has negative eigenvalue {}",
            ev[0]
        )));
    }
    Ok(ev)
}

/// Wootters concurrence of a two-qubit density matrix.
pub fn measure_mixed_concurrence(rho: &CMat) -> Result<f64> {
    check_density(rho, 4)?;
    let eig = rho.clone().symmetric_eigen();
    let vectors: Vec<Vec<Complex64>> = (0..4)
        .filter(|&k| eig.eigenvalues[k] > 0.0)
        .map(|k| {
            let w = eig.eigenvalues[k].sqrt();
            eig.eigenvectors.column(k).iter().map(|z| z * w).collect()
        })
        .collect();
    concurrence_of_ensemble(&vectors)
}

/// Wootters concurrence of `ρ = Σ_k |w_k><w_k|` from any such decomposition.
///
/// The λ's are the singular values of `τ_kl = w_kᵀ (σ_y⊗σ_y) w_l`, which avoids
/// square roots of near-zero eigenvalues.
pub fn concurrence_of_ensemble(vectors: &[Vec<Complex64>]) -> Result<f64> {
    if vectors.iter().any(|v| v.len() != 4) {
        return Err(Error::Dimension("two-qubit ensemble vectors need 4 amplitudes".into()));
    }
    if vectors.is_empty() {
        return Ok(0.0);
    }
    // σ_y⊗σ_y = antidiag(−1, 1, 1, −1).
    let flip = |v: &[Complex64]| [-v[3], v[2], v[1], -v[0]];
    let n = vectors.len();
    let tau = DMatrix::from_fn(n, n, |k, l| {
        let f = flip(&vectors[l]);
        (0..4).map(|i| vectors[k][i] * f[i]).sum::<Complex64>()
    });
    let mut lambdas: Vec<f64> = tau.singular_values().iter().copied().collect();
    lambdas.resize(lambdas.len().max(4), 0.0);
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Kraus branches `K_k ψ` of amplitude damping with decay probability `p` on subsystem `target`.
pub fn amplitude_damping_ensemble(
    state: &[Complex64],
    dims: &[usize],
    target: usize,
    p: f64,
) -> Result<Vec<Vec<Complex64>>> {
    let (k0, k1) = amplitude_damping_operators(dims, target, p)?;
    Ok(vec![
        linalg::apply_local(state, dims, target, &k0)?,
        linalg::apply_local(state, dims, target, &k1)?,
    ])
}

fn amplitude_damping_operators(dims: &[usize], target: usize, p: f64) -> Result<(CMat, CMat)> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p must lie in [0, 1], got {p}")));
    }
    if dims.get(target) != Some(&2) {
        return Err(Error::Dimension("channel requires qubit".into()));
    }
    let k0 = DMatrix::from_row_slice(
        2,
        2,
        &[linalg::ONE, ZERO, ZERO, Complex64::new((1.0 - p).sqrt(), 0.0)],
    );
    let k1 = DMatrix::from_row_slice(2, 2, &[ZERO, Complex64::new(p.sqrt(), 0.0), ZERO, ZERO]);
    Ok((k0, k1))
}

/// Applies the amplitude-damping Kraus pair with decay probability `p` to subsystem `target` of `rho`.
pub fn amplitude_damping_kraus(rho: &CMat, dims: &[usize], target: usize, p: f64) -> Result<CMat> {
    let (k0, k1) = amplitude_damping_operators(dims, target, p)?;
    let total: usize = dims.iter().product();
    let embed = |k: &CMat| -> Result<CMat> {
        let mut full = DMatrix::from_element(total, total, ZERO);
        for col in 0..total {
            let mut e = vec![ZERO; total];
            e[col] = linalg::ONE;
            let v = linalg::apply_local(&e, dims, target, k)?;
            full.set_column(col, &nalgebra::DVector::from_vec(v));
        }
        Ok(full)
    };
    let a = embed(&k0)?;
    let b = embed(&k1)?;
    Ok(&a * rho * a.adjoint() + &b * rho * b.adjoint())
}

/// `|ψ><ψ|` for a state vector.
pub fn projector(state: &[Complex64]) -> CMat {
    let n = state.len();
    DMatrix::from_fn(n, n, |i, j| state[i] * state[j].conj())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use approx::assert_abs_diff_eq;

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn bell() -> Vec<Complex64> {
        vec![c(S, 0.0), ZERO, ZERO, c(S, 0.0)]
    }

    #[test]
    fn bell_and_homogeneity() {
        assert_abs_diff_eq!(measure_pure(MeasureKind::Concurrence2Q, &[2, 2], &bell()).unwrap(), 1.0, epsilon = 1e-15);
        let u = vec![c(1.0, 0.0), ZERO, ZERO, c(1.0, 0.0)];
        assert_abs_diff_eq!(measure_pure(MeasureKind::Concurrence2Q, &[2, 2], &u).unwrap(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn ghz_and_w() {
        let mut ghz = vec![ZERO; 8];
        ghz[0] = c(S, 0.0);
        ghz[7] = c(S, 0.0);
        assert_abs_diff_eq!(measure_pure(MeasureKind::SqrtThreeTangle, &[2, 2, 2], &ghz).unwrap(), 1.0, epsilon = 1e-15);
        let w3 = 1.0 / 3f64.sqrt();
        let mut w = vec![ZERO; 8];
        for i in [1, 2, 4] {
            w[i] = c(w3, 0.0);
        }
        assert_abs_diff_eq!(measure_pure(MeasureKind::SqrtThreeTangle, &[2, 2, 2], &w).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn layout_mismatch() {
        assert!(matches!(
            measure_pure(MeasureKind::SqrtThreeTangle, &[2, 2], &bell()),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn wootters_examples() {
        let b = projector(&bell());
        assert_abs_diff_eq!(measure_mixed_concurrence(&b).unwrap(), 1.0, epsilon = 1e-7);
        let mixed = DMatrix::identity(4, 4) * c(0.25, 0.0);
        assert_abs_diff_eq!(measure_mixed_concurrence(&mixed).unwrap(), 0.0, epsilon = 1e-12);
        let werner = &b * c(0.5, 0.0) + &mixed * c(0.5, 0.0);
        assert_abs_diff_eq!(measure_mixed_concurrence(&werner).unwrap(), 0.25, epsilon = 1e-10);
    }

    #[test]
    fn invalid_density_rejected() {
        let m = DMatrix::identity(4, 4) * c(0.5, 0.0);
        assert!(matches!(measure_mixed_concurrence(&m), Err(Error::Validation(_))));
    }

    #[test]
    fn identity_locals_have_zero_residual() {
        let id = DMatrix::identity(2, 2);
        let r = verify_g_invariance(MeasureKind::Concurrence2Q, &[2, 2], &bell(), &[id.clone(), id]).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn non_unit_determinant_rejected() {
        let id = DMatrix::identity(2, 2);
        let big = &id * c(2.0, 0.0);
        assert!(matches!(
            verify_g_invariance(MeasureKind::Concurrence2Q, &[2, 2], &bell(), &[big, id]),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn kraus_full_decay_disentangles() {
        let rho = projector(&bell());
        let out = amplitude_damping_kraus(&rho, &[2, 2], 0, 1.0).unwrap();
        assert_abs_diff_eq!(linalg::trace(&out).re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(measure_mixed_concurrence(&out).unwrap(), 0.0, epsilon = 1e-7);
    }
}
