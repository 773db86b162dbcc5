//! Random states and local transformations for property checks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::CMat;
use crate::model::PureState;

/// Standard complex Gaussian, `E|z|² = 1`.
pub fn complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random normalized state of dimension `dim`.
pub fn random_state<R: Rng>(rng: &mut R, dim: usize) -> PureState {
    let v: Vec<Complex64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
    PureState::new(v)
        .normalized()
        .expect("a Gaussian vector is nonzero with probability one")
}

/// Largest `‖A‖²_F / d` accepted by [`random_sl`]; bounds the condition number
/// near `2·MAX_SL_SPREAD` for `d = 2`.
pub const MAX_SL_SPREAD: f64 = 4.0;

/// Random `d×d` matrix of unit determinant, `M / det(M)^{1/d}`, redrawn until
/// `‖A‖²_F ≤ MAX_SL_SPREAD·d` so that round-off stays far below invariance tolerances.
pub fn random_sl<R: Rng>(rng: &mut R, d: usize) -> CMat {
    loop {
        let m = DMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
        let det = m.clone().determinant();
        if det.norm() < 1e-3 {
            continue;
        }
        let a = m * det.powf(-1.0 / d as f64);
        if a.norm_squared() <= MAX_SL_SPREAD * d as f64 {
            return a;
        }
    }
}

/// Random unitary via QR of a complex Gaussian matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, d: usize) -> CMat {
    let m = DMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
    let qr = m.qr();
    let q = qr.q();
    let r = qr.r();
    let phases = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            let z = r[(i, i)];
            if z.norm() > 0.0 { z / z.norm() } else { Complex64::new(1.0, 0.0) }
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    q * phases
}
