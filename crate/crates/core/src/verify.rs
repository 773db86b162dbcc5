//! Self-checks run by the `verify` command: the scaling law against the
//! discrete-mode oracle, invariance of the entanglement measures, and
//! agreement of sampled distributions with their closed forms.

use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::entanglement::{self, MeasureKind};
use crate::error::{Error, Result};
use crate::kernels::{self, OuParams};
use crate::model::{ChannelSpec, PureState, QubitMarginal, SpectralDensity, SubsystemLayout, SystemSpec};
use crate::montecarlo::{self, ReducedModel, SamplerConfig, Support};
use crate::oracle::{self, DiscreteBath, OracleOptions};
use crate::random;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Oracle,
    Invariance,
    Distribution,
    Kernels,
    All,
}

impl Suite {
    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub suite: Suite,
    pub seed: u64,
    pub n_samples: usize,
    pub n_workers: usize,
    /// Random instances per oracle check.
    pub oracle_instances: usize,
    /// Multiplier applied to the predicted scaling function; anything other
    /// than 1 should make the oracle checks fail.
    pub f_scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            suite: Suite::All,
            seed: 1,
            n_samples: 100_000,
            n_workers: 1,
            oracle_instances: 5,
            f_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub suite: Suite,
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CheckResult {
    fn new(suite: Suite, name: &str, residual: f64, tolerance: f64, detail: String, started: Instant) -> Self {
        Self {
            suite,
            name: name.into(),
            residual,
            tolerance,
            passed: residual.is_finite() && residual <= tolerance,
            detail,
            seconds: started.elapsed().as_secs_f64(),
        }
    }
}

pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}

fn bipartite(state: PureState, channel: ChannelSpec) -> Result<SystemSpec> {
    let n = match state.len() {
        4 => 2,
        8 => 3,
        other => return Err(Error::Dimension(format!("no qubit layout for {other} amplitudes"))),
    };
    Ok(SystemSpec::new(SubsystemLayout::new(vec![2; n])?, state).with_channel(channel))
}

/// Outcome amplitudes with `|a_λ|² < 2`, well inside every Fock cutoff used here.
fn random_outcome(rng: &mut ChaCha8Rng, n_modes: usize) -> Vec<Complex64> {
    loop {
        let a: Vec<Complex64> = (0..n_modes).map(|_| random::complex_gaussian(rng) * 0.8).collect();
        if a.iter().all(|z| z.norm_sqr() < 2.0) {
            return a;
        }
    }
}

/// Worst relative scaling-law residual of the oracle over random instances.
fn oracle_scaling(
    opts: &VerifyOptions,
    rng: &mut ChaCha8Rng,
    n_qubits: usize,
    make_channel: impl Fn(&mut ChaCha8Rng) -> ChannelSpec,
) -> Result<(f64, String)> {
    // Six levels keep the top-level population below the leakage threshold for Δ ≤ 2, t ≤ 1.2.
    let bath = DiscreteBath::flat(2, 1.0, 6)?;
    let kind = MeasureKind::for_dims(&vec![2; n_qubits])?;
    let oracle_opts = OracleOptions::default();
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < opts.oracle_instances {
        let state = random::random_state(rng, 1 << n_qubits);
        let spec = bipartite(state, make_channel(rng))?;
        let t = rng.random_range(0.2..1.2);
        let a = random_outcome(rng, bath.len());
        let check = match oracle::oracle_scaling_check(&spec, &bath, t, &a, kind, &oracle_opts) {
            Ok(c) => c,
            Err(Error::Domain(_)) => continue,
            Err(e) => return Err(e),
        };
        let predicted = opts.f_scale * check.rhs;
        worst = worst.max((check.lhs - predicted).abs() / predicted);
        done += 1;
    }
    Ok((worst, format!("{} instances, {}", done, bath)))
}

fn run_oracle(opts: &VerifyOptions, rng: &mut ChaCha8Rng, out: &mut Vec<CheckResult>) -> Result<()> {
    let s = Instant::now();
    let (r, d) = oracle_scaling(opts, rng, 2, |_| ChannelSpec::markov_amplitude_damping(0, 1.0))?;
    out.push(CheckResult::new(Suite::Oracle, "scaling_law_amplitude_damping", r, 1e-6, d, s));

    let s = Instant::now();
    let (r, d) = oracle_scaling(opts, rng, 2, |rng| {
        ChannelSpec::dephasing(1, rng.random_range(0.5..2.0), SpectralDensity::PurelyOhmic)
    })?;
    out.push(CheckResult::new(Suite::Oracle, "scaling_law_dephasing", r, 1e-6, d, s));

    let s = Instant::now();
    let (r, d) = oracle_scaling(opts, rng, 3, |_| ChannelSpec::markov_amplitude_damping(2, 1.0))?;
    out.push(CheckResult::new(Suite::Oracle, "scaling_law_three_qubit", r, 1e-6, d, s));

    // Husimi function of the bath equals the Born-rule density.
    let s = Instant::now();
    let bath = DiscreteBath::flat(2, 1.0, oracle::DEFAULT_FOCK_CUTOFF)?;
    let spec = bipartite(random::random_state(rng, 4), ChannelSpec::markov_amplitude_damping(0, 1.0))?;
    let total = oracle::evolve_total(&spec, &bath, 0.8, &OracleOptions::default())?;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let a = random_outcome(rng, bath.len());
        let q = oracle::oracle_husimi(&total, &a)?;
        let p = oracle::born_density(&oracle::project_coherent(&total, &a)?);
        worst = worst.max((q - p).abs());
    }
    out.push(CheckResult::new(Suite::Oracle, "husimi_equals_born_density", worst, 1e-10, "20 outcomes".into(), s));

    // The oracle's dephasing propagator against diag(e^{j y − j² q}) on the same bath.
    let s = Instant::now();
    let delta = 1.3;
    let t = 0.9;
    let spec = bipartite(random::random_state(rng, 4), ChannelSpec::dephasing(0, delta, SpectralDensity::PurelyOhmic))?;
    // Coherent overlaps at large |a| need more Fock levels than the scaling checks.
    let bath = DiscreteBath::flat(2, 1.0, 10)?;
    let w = bath.dephasing_contraction(t);
    let q = bath.q(t);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let a = random_outcome(rng, bath.len());
        let k = oracle::extract_local_propagator(&spec, &bath, t, &a, &OracleOptions::default())?;
        let y = w.apply(&a)?.re;
        for (i, j) in [-0.5 * delta, 0.5 * delta].into_iter().enumerate() {
            let expected = (j * y - j * j * q).exp();
            worst = worst.max((k[(i, i)].norm() - expected).abs() / expected);
        }
    }
    out.push(CheckResult::new(
        Suite::Oracle,
        "dephasing_propagator_closed_form",
        worst,
        1e-8,
        format!("q = {q:.6}"),
        s,
    ));
    Ok(())
}

fn run_invariance(rng: &mut ChaCha8Rng, out: &mut Vec<CheckResult>) -> Result<()> {
    for kind in [MeasureKind::Concurrence2Q, MeasureKind::SqrtThreeTangle] {
        let dims = kind.dims();
        let dim: usize = dims.iter().product();
        let s = Instant::now();
        let mut sl: f64 = 0.0;
        let mut homogeneity: f64 = 0.0;
        for _ in 0..200 {
            let psi = random::random_state(rng, dim);
            let locals: Vec<_> = dims.iter().map(|&d| random::random_sl(rng, d)).collect();
            let g = entanglement::measure_pure(kind, dims, &psi.amplitudes)?;
            sl = sl.max(entanglement::verify_g_invariance(kind, dims, &psi.amplitudes, &locals)? / g.max(1e-3));
            let u = random::complex_gaussian(rng) * 1.5;
            let scaled: Vec<Complex64> = psi.amplitudes.iter().map(|z| z * u).collect();
            let gu = entanglement::measure_pure(kind, dims, &scaled)?;
            homogeneity = homogeneity.max((gu - u.norm_sqr() * g).abs() / (1.0 + u.norm_sqr() * g));
        }
        out.push(CheckResult::new(
            Suite::Invariance,
            &format!("sl_invariance_{}", kind.name()),
            sl,
            1e-9,
            "200 draws".into(),
            s,
        ));
        out.push(CheckResult::new(
            Suite::Invariance,
            &format!("homogeneity_{}", kind.name()),
            homogeneity,
            1e-9,
            "200 draws".into(),
            s,
        ));
    }
    Ok(())
}

fn run_distribution(opts: &VerifyOptions, out: &mut Vec<CheckResult>) -> Result<()> {
    let cfg = SamplerConfig::new(opts.n_samples, opts.seed).with_workers(opts.n_workers);
    let m = QubitMarginal::diagonal(0.5)?;
    let p = 0.5;
    let models = [
        ("amplitude_damping", ReducedModel::amplitude_damping(m, p)?),
        ("dephasing", ReducedModel::qubit_dephasing(m, p)?),
    ];
    for (name, model) in &models {
        let s = Instant::now();
        let set = montecarlo::sample_reduced(model, &cfg)?;
        let mean = set.mean_x();
        let target = (1.0 - p).sqrt();
        out.push(CheckResult::new(
            Suite::Distribution,
            &format!("mean_entanglement_{name}"),
            (mean.value - target).abs() / mean.std_error,
            4.0,
            format!("mean {:.5} ± {:.5}, expected {target:.5} (residual in standard errors)", mean.value, mean.std_error),
            s,
        ));
        let s = Instant::now();
        let ks = montecarlo::ks_against_closed_form(&set, model, 200)?;
        out.push(CheckResult::new(
            Suite::Distribution,
            &format!("ks_closed_form_{name}"),
            ks,
            0.01,
            format!("n_eff = {:.0}", set.n_eff()),
            s,
        ));
        let s = Instant::now();
        if let Some(Support::Bounded(edge)) = model.support() {
            let beyond = set.samples.iter().filter(|x| x.x > edge + 1e-9).count();
            out.push(CheckResult::new(
                Suite::Distribution,
                &format!("support_{name}"),
                beyond as f64,
                0.0,
                format!("x_max = {edge:.6}, largest sample {:.6}", set.max_x()),
                s,
            ));
        }
    }
    Ok(())
}

fn run_kernels(out: &mut Vec<CheckResult>) -> Result<()> {
    let s = Instant::now();
    let tau = kernels::scaled_disentanglement_time(2.0)
        .ok_or_else(|| Error::Numerical("no disentanglement time at mu = 2".into()))?;
    let expected = 1.5 * std::f64::consts::PI;
    out.push(CheckResult::new(
        Suite::Kernels,
        "disentanglement_time_mu_2",
        (tau - expected).abs() / expected,
        1e-12,
        format!("gamma tau = {tau:.12}"),
        s,
    ));

    let s = Instant::now();
    let k = OuParams::new(1.0, 4.0)?;
    let mut worst: f64 = 0.0;
    for t in [0.3, 1.0, 2.5] {
        let closed = k.integrated_damping(t)?;
        let quad = k.integrated_damping_quadrature(t)?;
        worst = worst.max((closed - quad).abs() / closed.abs().max(1e-12));
    }
    out.push(CheckResult::new(
        Suite::Kernels,
        "integrated_damping_quadrature",
        worst,
        1e-8,
        "gamma = 1, omega_d = 4".into(),
        s,
    ));
    Ok(())
}

/// Runs the selected checks. Errors abort the run; failed checks do not.
pub fn run(opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    if !(opts.f_scale > 0.0 && opts.f_scale.is_finite()) {
        return Err(Error::Validation(format!("f_scale must be positive, got {}", opts.f_scale)));
    }
    let mut rng = montecarlo::sample_rng(opts.seed, u64::MAX);
    let mut out = Vec::new();
    if opts.suite.includes(Suite::Oracle) {
        run_oracle(opts, &mut rng, &mut out)?;
    }
    if opts.suite.includes(Suite::Invariance) {
        run_invariance(&mut rng, &mut out)?;
    }
    if opts.suite.includes(Suite::Distribution) {
        run_distribution(opts, &mut out)?;
    }
    if opts.suite.includes(Suite::Kernels) {
        run_kernels(&mut out)?;
    }
    Ok(out)
}
