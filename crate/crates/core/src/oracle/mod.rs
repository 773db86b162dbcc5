//! Brute-force reference: the central system coupled to a few truncated
//! bosonic modes, evolved by direct integration of the Schrödinger equation
//! in the interaction picture of the bath,
//!
//! `H(s) = H_CS + i Σ_λ g_λ (Ĵ a_λ† e^{iω_λ s} − Ĵ† a_λ e^{−iω_λ s})`,
//!
//! from the bath vacuum. Coherent-state projections of the result give the
//! conditional states, Born-rule ratios and Husimi values without touching
//! any closed-form propagator.
//!
//! The total basis index is `cs * B + b`, with `b` row-major over the mode
//! occupation numbers and `B = (cutoff + 1)^L`.

pub mod bath;
pub mod integrator;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use bath::{BathMode, DiscreteBath, DEFAULT_FOCK_CUTOFF, MAX_MODES};
pub use integrator::{IntegrationStats, StepControl};

use crate::entanglement::{self, MeasureKind};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ZERO};
use crate::model::{PureState, SystemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    pub rel_tol: f64,
    /// Largest tolerated population of the top Fock level of any mode.
    pub leakage_threshold: f64,
    /// Cap on the total (system ⊗ bath) dimension.
    pub max_total_dim: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            leakage_threshold: 1e-6,
            max_total_dim: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TotalState {
    pub amplitudes: Vec<Complex64>,
    pub t: f64,
    pub cs_dims: Vec<usize>,
    pub n_modes: usize,
    pub fock_cutoff: usize,
    /// Population with some mode at the top Fock level.
    pub top_level_population: f64,
    pub stats: IntegrationStats,
}

impl TotalState {
    pub fn cs_dim(&self) -> usize {
        self.cs_dims.iter().product()
    }

    pub fn bath_dim(&self) -> usize {
        (self.fock_cutoff + 1).pow(self.n_modes as u32)
    }

    pub fn norm_sqr(&self) -> f64 {
        linalg::norm_sqr(&self.amplitudes)
    }

    /// Occupation numbers of bath index `b`.
    fn occupations(&self, b: usize) -> Vec<usize> {
        occupations(b, self.n_modes, self.fock_cutoff + 1)
    }

    /// `<Σ_λ a_λ† a_λ>`.
    pub fn bath_photon_number(&self) -> f64 {
        let bd = self.bath_dim();
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, z)| z.norm_sqr() * self.occupations(i % bd).iter().sum::<usize>() as f64)
            .sum()
    }

    /// Reduced density matrix of the central system, `Tr_B |Ψ><Ψ|`.
    pub fn reduced_cs(&self) -> CMat {
        let (d, bd) = (self.cs_dim(), self.bath_dim());
        CMat::from_fn(d, d, |i, j| {
            (0..bd)
                .map(|b| self.amplitudes[i * bd + b] * self.amplitudes[j * bd + b].conj())
                .sum()
        })
    }

    /// Reduced density matrix of the bath, `Tr_CS |Ψ><Ψ|`.
    pub fn reduced_bath(&self) -> CMat {
        let (d, bd) = (self.cs_dim(), self.bath_dim());
        let mut rho = CMat::from_element(bd, bd, ZERO);
        for cs in 0..d {
            let row = &self.amplitudes[cs * bd..(cs + 1) * bd];
            for m in 0..bd {
                if row[m] == ZERO {
                    continue;
                }
                for n in 0..bd {
                    rho[(m, n)] += row[m] * row[n].conj();
                }
            }
        }
        rho
    }
}

fn occupations(mut b: usize, n_modes: usize, levels: usize) -> Vec<usize> {
    let mut occ = vec![0; n_modes];
    for k in (0..n_modes).rev() {
        occ[k] = b % levels;
        b /= levels;
    }
    occ
}

/// Sparse `(row, col, value)` entries of a dense matrix.
fn sparse(m: &CMat) -> Vec<(usize, usize, Complex64)> {
    let mut out = Vec::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if m[(i, j)] != ZERO {
                out.push((i, j, m[(i, j)]));
            }
        }
    }
    out
}

/// Embeds a local operator on subsystem `target` into the full system space.
fn embed(dims: &[usize], target: usize, op: &CMat) -> Result<CMat> {
    let total: usize = dims.iter().product();
    let mut full = CMat::from_element(total, total, ZERO);
    for col in 0..total {
        let mut e = vec![ZERO; total];
        e[col] = linalg::ONE;
        let v = linalg::apply_local(&e, dims, target, op)?;
        for (row, z) in v.into_iter().enumerate() {
            full[(row, col)] = z;
        }
    }
    Ok(full)
}

struct Generator {
    bath_dim: usize,
    h_cs: Vec<(usize, usize, Complex64)>,
    j: Vec<(usize, usize, Complex64)>,
    /// Per mode: `(to, from, √(n+1))` entries of `a_λ†`.
    raise: Vec<Vec<(usize, usize, f64)>>,
    modes: Vec<BathMode>,
}

impl Generator {
    fn new(spec: &SystemSpec, bath: &DiscreteBath) -> Result<Self> {
        let dims = spec.layout.dims();
        let channel = spec.single_channel()?;
        let d = dims[channel.target];
        let j_local = channel.lindblad_operator(d)?.matrix;
        let j = sparse(&embed(dims, channel.target, &j_local)?);
        let cs_dim = spec.layout.total_dim();
        let mut h = CMat::from_element(cs_dim, cs_dim, ZERO);
        for (k, hk) in spec.local_hamiltonians.iter().enumerate() {
            if linalg::max_abs(hk) > 0.0 {
                h += embed(dims, k, hk)?;
            }
        }
        let levels = bath.levels();
        let bath_dim = bath.dim();
        let n_modes = bath.len();
        let raise = (0..n_modes)
            .map(|lam| {
                let stride = levels.pow((n_modes - 1 - lam) as u32);
                (0..bath_dim)
                    .filter_map(|b| {
                        let n = occupations(b, n_modes, levels)[lam];
                        (n < bath.fock_cutoff).then(|| (b + stride, b, ((n + 1) as f64).sqrt()))
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            bath_dim,
            h_cs: sparse(&h),
            j,
            raise,
            modes: bath.modes.clone(),
        })
    }

    fn apply(&self, s: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let bd = self.bath_dim;
        out.fill(ZERO);
        let mi = Complex64::new(0.0, -1.0);
        for &(r, c, h) in &self.h_cs {
            let coef = mi * h;
            for b in 0..bd {
                out[r * bd + b] += coef * psi[c * bd + b];
            }
        }
        for (mode, raise) in self.modes.iter().zip(&self.raise) {
            if mode.g == 0.0 {
                continue;
            }
            let phase = Complex64::new(0.0, mode.omega * s).exp() * mode.g;
            for &(r, c, jv) in &self.j {
                // + g e^{iωs} (Ĵ ⊗ a†)
                let up = phase * jv;
                // − g e^{−iωs} (Ĵ† ⊗ a): maps (r, to) -> (c, from)
                let down = -(phase * jv).conj();
                for &(to, from, amp) in raise {
                    out[r * bd + to] += up * amp * psi[c * bd + from];
                    out[c * bd + from] += down * amp * psi[r * bd + to];
                }
            }
        }
    }
}

/// Evolves `|φ(0)> ⊗ |vac>` to time `t` with the bath coupled to the single open channel of `spec`.
pub fn evolve_total(spec: &SystemSpec, bath: &DiscreteBath, t: f64, opts: &OracleOptions) -> Result<TotalState> {
    bath.validate()?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time must be finite and >= 0, got {t}")));
    }
    let cs_dim = spec.layout.total_dim();
    let total_dim = cs_dim
        .checked_mul(bath.dim())
        .filter(|&n| n <= opts.max_total_dim)
        .ok_or_else(|| {
            Error::Dimension(format!(
                "system ⊗ bath dimension exceeds the oracle cap of {}",
                opts.max_total_dim
            ))
        })?;
    if spec.initial.len() != cs_dim {
        return Err(Error::Dimension(format!(
            "initial state has {} amplitudes, layout needs {cs_dim}",
            spec.initial.len()
        )));
    }
    let gen = Generator::new(spec, bath)?;
    let bd = bath.dim();
    let mut psi0 = vec![ZERO; total_dim];
    for (cs, a) in spec.initial.amplitudes.iter().enumerate() {
        psi0[cs * bd] = *a;
    }
    let ctl = StepControl {
        rel_tol: opts.rel_tol,
        abs_tol: opts.rel_tol * 1e-2,
        ..StepControl::default()
    };
    let (amplitudes, stats) = integrator::dopri5(|s, y, out| gen.apply(s, y, out), psi0, 0.0, t, ctl)?;
    let levels = bath.levels();
    let top_level_population = amplitudes
        .iter()
        .enumerate()
        .filter(|(i, _)| occupations(i % bd, bath.len(), levels).contains(&bath.fock_cutoff))
        .map(|(_, z)| z.norm_sqr())
        .sum();
    let state = TotalState {
        amplitudes,
        t,
        cs_dims: spec.layout.dims().to_vec(),
        n_modes: bath.len(),
        fock_cutoff: bath.fock_cutoff,
        top_level_population,
        stats,
    };
    if top_level_population > opts.leakage_threshold {
        return Err(Error::Accuracy(format!(
            "top Fock level holds population {top_level_population:.3e} > {:.1e}; increase fock_cutoff",
            opts.leakage_threshold
        )));
    }
    Ok(state)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    /// `|ψ(a,t)> = e^{|a|²/2} <a|Ψ(t)>`, unnormalized.
    pub relative_state: Vec<Complex64>,
    /// `P(a,t)/P(a,0) = <ψ|ψ>`.
    pub ratio: f64,
    /// Mean photon number `N_a = Σ|a_λ|²` of the outcome.
    pub photon_number: f64,
}

/// `Π_λ (a_λ*)^{n_λ} / √(n_λ!)` for every bath index.
fn coherent_coefficients(total: &TotalState, a: &[Complex64]) -> Vec<Complex64> {
    let levels = total.fock_cutoff + 1;
    let per_mode: Vec<Vec<Complex64>> = a
        .iter()
        .map(|z| {
            let mut v = vec![linalg::ONE; levels];
            for n in 1..levels {
                v[n] = v[n - 1] * z.conj() / (n as f64).sqrt();
            }
            v
        })
        .collect();
    (0..total.bath_dim())
        .map(|b| {
            occupations(b, total.n_modes, levels)
                .iter()
                .zip(&per_mode)
                .map(|(&n, v)| v[n])
                .product()
        })
        .collect()
}

/// Projects the bath onto the coherent state `|a>`.
pub fn project_coherent(total: &TotalState, a: &[Complex64]) -> Result<Projection> {
    bath::check_amplitudes(total.n_modes, total.fock_cutoff, a)?;
    let coeff = coherent_coefficients(total, a);
    let bd = total.bath_dim();
    let relative_state: Vec<Complex64> = (0..total.cs_dim())
        .map(|cs| {
            coeff
                .iter()
                .zip(&total.amplitudes[cs * bd..(cs + 1) * bd])
                .map(|(c, z)| c * z)
                .sum()
        })
        .collect();
    Ok(Projection {
        ratio: linalg::norm_sqr(&relative_state),
        relative_state,
        photon_number: linalg::norm_sqr(a),
    })
}

/// Husimi function `Q(a,t) = <a| Tr_CS |Ψ><Ψ| |a>` of the bath, as a density
/// with respect to `d²a/π^L`.
pub fn oracle_husimi(total: &TotalState, a: &[Complex64]) -> Result<f64> {
    bath::check_amplitudes(total.n_modes, total.fock_cutoff, a)?;
    let coeff = coherent_coefficients(total, a);
    let rho = total.reduced_bath();
    let bd = total.bath_dim();
    let mut q = ZERO;
    for m in 0..bd {
        if coeff[m] == ZERO {
            continue;
        }
        let mut row = ZERO;
        for n in 0..bd {
            row += rho[(m, n)] * coeff[n].conj();
        }
        q += coeff[m] * row;
    }
    Ok((-linalg::norm_sqr(a)).exp() * q.re)
}

/// `P(a,t) = e^{−N_a} <ψ(a,t)|ψ(a,t)>` with respect to `d²a/π^L`.
pub fn born_density(projection: &Projection) -> f64 {
    (-projection.photon_number).exp() * projection.ratio
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingCheck {
    /// `G(ψ(a,t)/|ψ|) / G(φ(0))` from the projected state.
    pub lhs: f64,
    /// `f(a,t) P(a,0)/P(a,t)` with `f = exp{(2/d) Re Tr log Û}` of the extracted propagator.
    pub rhs: f64,
    pub scaling_value: f64,
    pub ratio: f64,
    /// Extracted 2×2 conditional propagator of the coupled qubit, row-major.
    pub propagator: [Complex64; 4],
}

impl ScalingCheck {
    pub fn relative_error(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.rhs.abs()
    }
}

/// Conditional propagator of the coupled qubit, extracted by evolving its basis
/// states with every other subsystem in `|0>`.
pub fn extract_local_propagator(
    spec: &SystemSpec,
    bath: &DiscreteBath,
    t: f64,
    a: &[Complex64],
    opts: &OracleOptions,
) -> Result<CMat> {
    let channel = spec.single_channel()?;
    let dims = spec.layout.dims();
    let target = channel.target;
    let d = dims[target];
    let strides = linalg::strides(dims);
    let total = spec.layout.total_dim();
    let mut columns = Vec::with_capacity(d);
    for j in 0..d {
        let mut probe = spec.clone();
        probe.initial = PureState::basis(total, j * strides[target]);
        let state = evolve_total(&probe, bath, t, opts)?;
        columns.push(project_coherent(&state, a)?.relative_state);
    }
    // Each column is (K e_j) ⊗ v for a common spectator vector v; recover v
    // from the largest block and contract it out.
    let rest: Vec<usize> = (0..total).filter(|i| (i / strides[target]) % d == 0).collect();
    let block = |col: &[Complex64], i: usize| -> Vec<Complex64> {
        rest.iter().map(|&o| col[o + i * strides[target]]).collect()
    };
    let mut best = Vec::new();
    let mut best_norm = 0.0;
    for col in &columns {
        for i in 0..d {
            let v = block(col, i);
            let n = linalg::norm_sqr(&v);
            if n > best_norm {
                best_norm = n;
                best = v;
            }
        }
    }
    if best_norm == 0.0 {
        return Err(Error::Domain("degenerate outcome: conditional propagator vanishes".into()));
    }
    linalg::scale(&mut best, Complex64::new(1.0 / best_norm.sqrt(), 0.0));
    Ok(CMat::from_fn(d, d, |i, j| linalg::inner(&best, &block(&columns[j], i))))
}

/// Checks `G(ψ)/G(φ) = f/F` on the oracle's conditional state.
pub fn oracle_scaling_check(
    spec: &SystemSpec,
    bath: &DiscreteBath,
    t: f64,
    a: &[Complex64],
    kind: MeasureKind,
    opts: &OracleOptions,
) -> Result<ScalingCheck> {
    let channel = spec.single_channel()?;
    let dims = spec.layout.dims();
    if dims[channel.target] != 2 {
        return Err(Error::Dimension("the scaling check needs a coupled qubit".into()));
    }
    let g0 = entanglement::measure_pure(kind, dims, &spec.initial.amplitudes)?;
    if g0 <= 0.0 {
        return Err(Error::Domain("initial state has zero entanglement".into()));
    }
    let total = evolve_total(spec, bath, t, opts)?;
    let proj = project_coherent(&total, a)?;
    let norm = proj.ratio.sqrt();
    let psi: Vec<Complex64> = proj.relative_state.iter().map(|z| z / norm).collect();
    let lhs = entanglement::measure_pure(kind, dims, &psi)? / g0;

    let k = extract_local_propagator(spec, bath, t, a, opts)?;
    let ev = linalg::eigenvalues_2x2(&linalg::to_fixed(&k));
    if ev.iter().any(|e| e.norm() < 1e-14) {
        return Err(Error::Domain(
            "degenerate outcome: extracted propagator is not invertible".into(),
        ));
    }
    let log_det: Complex64 = ev.iter().map(|e| e.ln()).sum();
    // f = exp{(2/d) Re log det K} with d = 2.
    let scaling_value = log_det.re.exp();
    Ok(ScalingCheck {
        lhs,
        rhs: scaling_value / proj.ratio,
        scaling_value,
        ratio: proj.ratio,
        propagator: [k[(0, 0)], k[(0, 1)], k[(1, 0)], k[(1, 1)]],
    })
}
