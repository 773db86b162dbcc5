//! Adaptive Dormand–Prince 5(4) integration of complex linear ODE systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth- minus fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine(out: &mut [Complex64], y: &[Complex64], h: f64, terms: &[(f64, &[Complex64])]) {
    for i in 0..y.len() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, k) in terms {
            acc += k[i] * *c;
        }
        out[i] = y[i] + acc * h;
    }
}

/// Integrates `dy/dt = rhs(t, y)` from `t0` to `t1`.
///
/// `rhs(t, y, out)` writes the derivative into `out`.
pub fn dopri5<F>(
    mut rhs: F,
    y0: Vec<Complex64>,
    t0: f64,
    t1: f64,
    ctl: StepControl,
) -> Result<(Vec<Complex64>, IntegrationStats)>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let n = y0.len();
    let mut stats = IntegrationStats::default();
    if t1 == t0 {
        return Ok((y0, stats));
    }
    if t1 < t0 {
        return Err(Error::Domain(format!("cannot integrate backwards from {t0} to {t1}")));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut y = y0;
    let mut t = t0;
    let mut k1 = vec![zero; n];
    let mut k2 = vec![zero; n];
    let mut k3 = vec![zero; n];
    let mut k4 = vec![zero; n];
    let mut k5 = vec![zero; n];
    let mut k6 = vec![zero; n];
    let mut k7 = vec![zero; n];
    let mut tmp = vec![zero; n];
    let mut y_new = vec![zero; n];
    rhs(t, &y, &mut k1);

    let span = t1 - t0;
    let scale0: f64 = y.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let d1: f64 = k1.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut h = if d1 > 0.0 { 0.01 * scale0 / d1 } else { span };
    h = h.min(span).max(span * 1e-12);
    let mut err_prev: f64 = 1e-4;

    while t < t1 {
        if stats.accepted + stats.rejected >= ctl.max_steps {
            return Err(Error::Numerical(format!(
                "integrator exceeded {} steps at t = {t}",
                ctl.max_steps
            )));
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        combine(&mut tmp, &y, h, &[(A21, &k1)]);
        rhs(t + C2 * h, &tmp, &mut k2);
        combine(&mut tmp, &y, h, &[(A31, &k1), (A32, &k2)]);
        rhs(t + C3 * h, &tmp, &mut k3);
        combine(&mut tmp, &y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        rhs(t + C4 * h, &tmp, &mut k4);
        combine(&mut tmp, &y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        rhs(t + C5 * h, &tmp, &mut k5);
        combine(
            &mut tmp,
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        );
        rhs(t + h, &tmp, &mut k6);
        combine(
            &mut y_new,
            &y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        rhs(t + h, &y_new, &mut k7);

        let mut err: f64 = 0.0;
        for i in 0..n {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let sc = ctl.abs_tol + ctl.rel_tol * y[i].norm().max(y_new[i].norm());
            err = err.max(e.norm() / sc);
        }
        if !err.is_finite() {
            return Err(Error::Numerical(format!("non-finite state at t = {t}")));
        }
        if err <= 1.0 {
            t = if last { t1 } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            stats.accepted += 1;
            // PI step-size controller.
            let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
            h *= fac.clamp(0.2, 5.0);
            err_prev = err.max(1e-4);
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
        }
        if h < span * 1e-14 {
            return Err(Error::Numerical(format!("step size underflow at t = {t}")));
        }
    }
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_phase() {
        // dy/dt = -i ω y
        let w = 3.0;
        let (y, stats) = dopri5(
            |_, y, out| out[0] = Complex64::new(0.0, -w) * y[0],
            vec![Complex64::new(1.0, 0.0)],
            0.0,
            2.0,
            StepControl::default(),
        )
        .unwrap();
        let exact = Complex64::new(0.0, -w * 2.0).exp();
        assert!((y[0] - exact).norm() < 1e-9);
        assert!(stats.accepted > 10);
    }

    #[test]
    fn explicit_time_dependence() {
        // dy/dt = cos(t) y  =>  y = exp(sin t)
        let (y, _) = dopri5(
            |t, y, out| out[0] = y[0] * t.cos(),
            vec![Complex64::new(1.0, 0.0)],
            0.0,
            5.0,
            StepControl::default(),
        )
        .unwrap();
        assert!((y[0].re - 5f64.sin().exp()).abs() < 1e-9);
    }
}
