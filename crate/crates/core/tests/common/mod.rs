//! Independent reference computations shared by the integration tests.
//! Nothing here calls the closed forms under test.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

/// Adaptive Simpson quadrature.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Real correlation function whose double integral is `q(t)` for a finite Debye cutoff.
pub fn ohmic_cutoff_alpha(omega_d: f64, s: f64) -> f64 {
    let e = 1.0 / omega_d;
    2.0 * e / (PI * (e * e + s * s))
}

pub fn superohmic_alpha(omega_d: f64, s: f64) -> f64 {
    let e = 1.0 / omega_d;
    2.0 / (PI * omega_d) * (e * e - s * s) / (e * e + s * s).powi(2)
}

/// `Re ∫₀ᵗ ∫₀ˢ α(s − s') ds' ds` by nested quadrature.
pub fn q_double_integral<A: Fn(f64) -> f64>(alpha: A, t: f64) -> f64 {
    let inner = |s: f64| simpson(&|sp: f64| alpha(s - sp), 0.0, s, 1e-13);
    simpson(&inner, 0.0, t, 1e-11)
}

/// Lorentzian correlation `(ω_d/2) e^{−ω_d s}`.
pub fn ou_alpha(omega_d: f64, s: f64) -> f64 {
    0.5 * omega_d * (-omega_d * s).exp()
}

fn ou_rk4(gamma: f64, omega_d: f64, state: (f64, f64), h: f64) -> (f64, f64) {
    let rhs = |c: f64, z: f64| (-gamma * z, 0.5 * omega_d * c - omega_d * z);
    let (c, z) = state;
    let k1 = rhs(c, z);
    let k2 = rhs(c + 0.5 * h * k1.0, z + 0.5 * h * k1.1);
    let k3 = rhs(c + 0.5 * h * k2.0, z + 0.5 * h * k2.1);
    let k4 = rhs(c + h * k3.0, z + h * k3.1);
    (
        c + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        z + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

/// `c(t)` from the memory equation `c' = −γ z`, `z' = (ω_d/2) c − ω_d z`,
/// with `z = ∫₀ˢ α(s−s') c(s') ds'`, by fixed-step RK4.
pub fn ou_c_by_ode(gamma: f64, omega_d: f64, t: f64, steps: usize) -> f64 {
    let h = t / steps as f64;
    let mut state = (1.0, 0.0);
    for _ in 0..steps {
        state = ou_rk4(gamma, omega_d, state, h);
    }
    state.0
}

/// First zero of `c(t)` from the memory equation: RK4 march to the sign
/// change, then bisection on the length of the final step.
pub fn ou_first_zero(gamma: f64, omega_d: f64, t_max: f64) -> Option<f64> {
    let h = 1e-4 / gamma.max(omega_d);
    let mut t = 0.0;
    let mut state = (1.0, 0.0);
    while t < t_max {
        let next = ou_rk4(gamma, omega_d, state, h);
        if next.0 <= 0.0 {
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if ou_rk4(gamma, omega_d, state, mid).0 > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(t + 0.5 * (lo + hi));
        }
        state = next;
        t += h;
    }
    None
}

/// Five-point central derivative.
pub fn derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

/// Concurrence of the two-qubit reduced state of a three-qubit pure state,
/// tracing out qubit `traced`. With `ρ = Σ_k |w_k><w_k|` and the symmetric
/// `τ_kl = w_kᵀ (σ_y⊗σ_y) w_l`, the concurrence is `σ₁ − σ₂ = √(‖τ‖² − 2|det τ|)`.
fn wootters_from_amplitudes(psi: &[Complex64], traced: usize) -> f64 {
    let idx = |a: usize, b: usize, c: usize| 4 * a + 2 * b + c;
    let w: Vec<[Complex64; 4]> = (0..2)
        .map(|k| {
            let mut v = [Complex64::new(0.0, 0.0); 4];
            for (i, slot) in v.iter_mut().enumerate() {
                let (a, b) = (i / 2, i % 2);
                *slot = psi[match traced {
                    2 => idx(a, b, k),
                    1 => idx(a, k, b),
                    _ => idx(k, a, b),
                }];
            }
            v
        })
        .collect();
    // σ_y⊗σ_y is anti-diagonal (−1, 1, 1, −1).
    let flip = |v: &[Complex64; 4]| [-v[3], v[2], v[1], -v[0]];
    let tau = |k: usize, l: usize| -> Complex64 {
        let f = flip(&w[l]);
        (0..4).map(|i| w[k][i] * f[i]).sum()
    };
    let t = [[tau(0, 0), tau(0, 1)], [tau(1, 0), tau(1, 1)]];
    let frob: f64 = t.iter().flatten().map(|z| z.norm_sqr()).sum();
    let det = (t[0][0] * t[1][1] - t[0][1] * t[1][0]).norm();
    (frob - 2.0 * det).max(0.0).sqrt()
}

/// Three-tangle through the monogamy identity `τ₃ = 4 det ρ_A − C²_AB − C²_AC`.
pub fn three_tangle_ckw(psi: &[Complex64]) -> f64 {
    let mut rho_a = [[Complex64::new(0.0, 0.0); 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for r in 0..4 {
                rho_a[a][b] += psi[4 * a + r] * psi[4 * b + r].conj();
            }
        }
    }
    let det = (rho_a[0][0] * rho_a[1][1] - rho_a[0][1] * rho_a[1][0]).re;
    let c_ab = wootters_from_amplitudes(psi, 2);
    let c_ac = wootters_from_amplitudes(psi, 1);
    4.0 * det - c_ab * c_ab - c_ac * c_ac
}

/// Bessel `I₀` by its power series; adequate for moderate arguments.
pub fn bessel_i0_series(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let q = 0.25 * x * x;
    for k in 1..400 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}
