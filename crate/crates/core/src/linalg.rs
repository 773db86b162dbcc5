//! Small dense complex linear-algebra helpers over row-major tensor-product bases.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CMat2 = Matrix2<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Deexcitation `|0><1|` in the basis (|0>, |1>), |1> excited.
pub fn sigma_minus() -> CMat2 {
    CMat2::new(ZERO, ONE, ZERO, ZERO)
}

pub fn sigma_plus() -> CMat2 {
    CMat2::new(ZERO, ZERO, ONE, ZERO)
}

/// `|1><1| - |0><0|`.
pub fn sigma_z() -> CMat2 {
    CMat2::new(-ONE, ZERO, ZERO, ONE)
}

pub fn sigma_y() -> CMat2 {
    CMat2::new(ZERO, -I, I, ZERO)
}

pub fn to_dynamic(m: &CMat2) -> CMat {
    DMatrix::from_fn(2, 2, |i, j| m[(i, j)])
}

pub fn to_fixed(m: &CMat) -> CMat2 {
    CMat2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

pub fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn scale(v: &mut [Complex64], s: Complex64) {
    for z in v {
        *z *= s;
    }
}

/// Strides of a row-major tensor layout: the last subsystem varies fastest.
pub fn strides(dims: &[usize]) -> Vec<usize> {
    let mut out = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        out[k] = out[k + 1] * dims[k + 1];
    }
    out
}

/// Applies `op` to subsystem `target` of a state laid out over `dims`.
pub fn apply_local(
    state: &[Complex64],
    dims: &[usize],
    target: usize,
    op: &CMat,
) -> Result<Vec<Complex64>> {
    let total: usize = dims.iter().product();
    if state.len() != total {
        return Err(Error::Dimension(format!(
            "state has {} amplitudes but layout {:?} needs {total}",
            state.len(),
            dims
        )));
    }
    let d = *dims
        .get(target)
        .ok_or_else(|| Error::Dimension(format!("subsystem {target} out of range")))?;
    if op.nrows() != d || op.ncols() != d {
        return Err(Error::Dimension(format!(
            "local operator is {}x{} but subsystem {target} has dimension {d}",
            op.nrows(),
            op.ncols()
        )));
    }
    let stride = strides(dims)[target];
    let block = stride * d;
    let mut out = vec![ZERO; total];
    for outer in (0..total).step_by(block) {
        for inner_idx in 0..stride {
            let base = outer + inner_idx;
            for i in 0..d {
                let mut acc = ZERO;
                for j in 0..d {
                    acc += op[(i, j)] * state[base + j * stride];
                }
                out[base + i * stride] = acc;
            }
        }
    }
    Ok(out)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    DMatrix::from_fn(ra * rb, ca * cb, |i, j| {
        a[(i / rb, j / cb)] * b[(i % rb, j % cb)]
    })
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square()
        && (0..m.nrows())
            .all(|i| (0..m.ncols()).all(|j| (m[(i, j)] - m[(j, i)].conj()).norm() <= tol))
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn trace(m: &CMat) -> Complex64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// `exp(-i H t)` for Hermitian `H`, via its eigendecomposition.
pub fn unitary_evolution(h: &CMat, t: f64) -> CMat {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| (-I * e * t).exp()));
    v * phases * v.adjoint()
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Eigenvalues of a general 2x2 complex matrix.
pub fn eigenvalues_2x2(m: &CMat2) -> [Complex64; 2] {
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = (tr * tr - 4.0 * det).sqrt();
    [(tr + disc) * 0.5, (tr - disc) * 0.5]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strides_are_row_major() {
        assert_eq!(strides(&[2, 3, 4]), vec![12, 4, 1]);
        assert_eq!(strides(&[5]), vec![1]);
    }

    #[test]
    fn apply_local_matches_kron() {
        let dims = [2, 3];
        let state: Vec<Complex64> = (0..6).map(|k| c(k as f64, 0.5 - k as f64)).collect();
        let op = DMatrix::from_fn(3, 3, |i, j| c((i + 2 * j) as f64, (i * j) as f64));
        let full = kron(&DMatrix::identity(2, 2), &op);
        let direct = full * nalgebra::DVector::from_vec(state.clone());
        let local = apply_local(&state, &dims, 1, &op).unwrap();
        for (a, b) in local.iter().zip(direct.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn unitary_evolution_of_sigma_z() {
        let h = to_dynamic(&sigma_z());
        let u = unitary_evolution(&h, 0.3);
        assert!((u[(0, 0)] - (I * 0.3).exp()).norm() < 1e-14);
        assert!((u[(1, 1)] - (-I * 0.3).exp()).norm() < 1e-14);
    }
}
