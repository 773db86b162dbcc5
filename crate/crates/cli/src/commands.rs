use condent::entanglement::{self, MeasureKind};
use condent::kernels;
use condent::linalg;
use condent::model::{self, ChannelKind, ChannelSpec, QubitMarginal, SpectralDensity, SystemSpec};
use condent::montecarlo::{self, Family, ReducedModel, SamplerConfig, Support};
use condent::oracle::{self, DiscreteBath, OracleOptions, TotalState};
use condent::random;
use condent::verify::{self, Suite, VerifyOptions};
use num_complex::Complex64;

use crate::args::{
    BathArgs, BathShape, DistributionArgs, MeanArgs, OracleArgs, SuiteArg, TauArgs, TomographyArgs, VerifyArgs,
};
use crate::error::CliError;
use crate::record::{Cell, RunResult, Table};

fn require_system(system: Option<&SystemSpec>) -> Result<&SystemSpec, CliError> {
    system.ok_or_else(|| CliError::Usage("--config is required for this command".into()))
}

fn sampler(seed: u64, samples: usize, workers: usize) -> SamplerConfig {
    SamplerConfig::new(samples, seed).with_workers(workers)
}

fn channel_marginal(spec: &SystemSpec) -> Result<(ChannelSpec, QubitMarginal), CliError> {
    let channel = spec.single_channel()?.clone();
    let rho = model::reduced_density_matrix(&spec.initial, &spec.layout, channel.target)?;
    Ok((channel, QubitMarginal::from_matrix(&rho)?))
}

pub fn distribution(args: &DistributionArgs, system: Option<&SystemSpec>) -> Result<RunResult, CliError> {
    let spec = require_system(system)?;
    let (channel, m) = channel_marginal(spec)?;
    let family = Family::of(&channel)?;
    if args.p.is_empty() {
        return Err(CliError::Usage("--p needs at least one value".into()));
    }
    let supports = args
        .p
        .iter()
        .map(|&p| montecarlo::x_max(family, &m, p))
        .collect::<condent::Result<Vec<_>>>()?;
    let x_hi = match args.x_max {
        Some(x) => x,
        None => supports.iter().filter_map(Support::value).fold(1.0, f64::max) * 1.05,
    };
    let mut surface = Table::new(
        "distribution",
        &[
            ("p", "1", "decay probability"),
            ("x_lo", "1", "bin lower edge"),
            ("x_hi", "1", "bin upper edge"),
            ("x", "1", "bin center"),
            ("mc_density", "1", "Monte Carlo estimate of P_G(x)"),
            ("mc_density_error", "1", "standard error of mc_density"),
            ("closed_form_density", "1", "closed-form bin average of P_G(x)"),
        ],
    );
    let mut curves = Table::new(
        "boundary",
        &[
            ("p", "1", "decay probability"),
            ("x_max", "1", "upper edge of the support; empty when unbounded"),
            ("x_bar", "1", "mean conditional entanglement √(1−p)"),
            ("mc_x_bar", "1", "Monte Carlo mean of x"),
            ("mc_x_bar_error", "1", "standard error of mc_x_bar"),
            ("out_of_range_weight", "1", "probability beyond the histogram range"),
        ],
    );
    let cfg = sampler(args.sampling.seed, args.sampling.samples, args.sampling.workers);
    for (&p, support) in args.p.iter().zip(&supports) {
        let model = match family {
            Family::AmplitudeDamping => ReducedModel::amplitude_damping(m, p)?,
            Family::Dephasing => ReducedModel::qubit_dephasing(m, p)?,
        };
        let set = montecarlo::sample_reduced(&model, &cfg)?;
        let hist = set.histogram(args.bins, Some((0.0, x_hi)))?;
        let densities = hist.densities();
        let errors = hist.density_errors();
        for k in 0..hist.n_bins() {
            let (lo, hi) = (hist.bin_edges[k], hist.bin_edges[k + 1]);
            let closed = montecarlo::closed_form_probability(family, &m, p, lo, hi)
                .ok()
                .map(|w| w / (hi - lo));
            surface.push(vec![
                p.into(),
                lo.into(),
                hi.into(),
                (0.5 * (lo + hi)).into(),
                densities[k].into(),
                errors[k].into(),
                closed.into(),
            ]);
        }
        let mean = set.mean_x();
        curves.push(vec![
            p.into(),
            support.value().into(),
            (1.0 - p).sqrt().into(),
            mean.value.into(),
            mean.std_error.into(),
            hist.out_of_range.into(),
        ]);
    }
    Ok(RunResult {
        tables: vec![surface, curves],
        passed: None,
    })
}

fn with_cutoff(channel: &ChannelSpec, omega_bar: f64) -> Result<ChannelSpec, CliError> {
    let ChannelKind::Dephasing { delta, density, generator } = &channel.kind else {
        return Err(CliError::Usage("--omega-bar applies to dephasing channels only".into()));
    };
    let omega_d = omega_bar * delta * delta;
    let density = match density {
        SpectralDensity::OhmicCutoff { .. } => SpectralDensity::OhmicCutoff { omega_d },
        SpectralDensity::Superohmic { .. } => SpectralDensity::Superohmic { omega_d },
        other => {
            return Err(CliError::Usage(format!(
                "--omega-bar needs an ohmic_cutoff or superohmic density, got {}",
                other.name()
            )))
        }
    };
    Ok(ChannelSpec {
        kind: ChannelKind::Dephasing {
            delta: *delta,
            density,
            generator: generator.clone(),
        },
        target: channel.target,
    })
}

/// Rate that makes the time axis dimensionless: `Δ²` or `γ`.
fn time_unit(channel: &ChannelSpec) -> f64 {
    match channel.kind {
        ChannelKind::MarkovAmplitudeDamping { gamma } | ChannelKind::OuAmplitudeDamping { gamma, .. } => gamma,
        ChannelKind::Dephasing { delta, .. } => delta * delta,
    }
}

pub fn mean(args: &MeanArgs, system: Option<&SystemSpec>) -> Result<RunResult, CliError> {
    let spec = require_system(system)?;
    let base = spec.single_channel()?.clone();
    if !(args.t_max > 0.0) || args.points < 2 {
        return Err(CliError::Usage("need --t-max > 0 and --points >= 2".into()));
    }
    let channels: Vec<(Option<f64>, ChannelSpec)> = if args.omega_bar.is_empty() {
        vec![(None, base)]
    } else {
        args.omega_bar
            .iter()
            .map(|&w| Ok((Some(w), with_cutoff(&base, w)?)))
            .collect::<Result<_, CliError>>()?
    };
    let mut table = Table::new(
        "mean",
        &[
            ("omega_bar", "1", "ω_d/Δ² when overridden"),
            ("t", "time", "evolution time"),
            ("scaled_time", "1", "Δ²t for dephasing, γt for amplitude damping"),
            ("x_bar", "1", "closed-form mean conditional entanglement"),
            ("log_x_bar", "1", "natural log of x_bar"),
            ("mc_x_bar", "1", "Monte Carlo mean of x; empty when skipped"),
            ("mc_x_bar_error", "1", "standard error of mc_x_bar"),
        ],
    );
    let cfg = sampler(args.sampling.seed, args.sampling.samples, args.sampling.workers);
    for (omega_bar, channel) in &channels {
        let mut probe = spec.clone();
        probe.channels = vec![channel.clone()];
        probe.validate()?;
        for k in 0..args.points {
            let t = args.t_max * k as f64 / (args.points - 1) as f64;
            let x_bar = montecarlo::mean_entanglement(channel, t)?;
            let (mc, err) = if args.sampling.samples > 0 && x_bar > 0.0 {
                let model = ReducedModel::from_spec(&probe, t)?;
                let est = montecarlo::sample_reduced(&model, &cfg)?.mean_x();
                (Some(est.value), Some(est.std_error))
            } else {
                (None, None)
            };
            table.push(vec![
                (*omega_bar).into(),
                t.into(),
                (time_unit(channel) * t).into(),
                x_bar.into(),
                x_bar.ln().into(),
                mc.into(),
                err.into(),
            ]);
        }
    }
    Ok(RunResult {
        tables: vec![table],
        passed: None,
    })
}

pub fn tau(args: &TauArgs) -> Result<RunResult, CliError> {
    let grid: Vec<f64> = if !args.mu.is_empty() {
        args.mu.clone()
    } else {
        if !(args.mu_min > 0.0 && args.mu_max > args.mu_min) || args.points < 2 {
            return Err(CliError::Usage("need 0 < --mu-min < --mu-max and --points >= 2".into()));
        }
        let ratio = (args.mu_max / args.mu_min).ln() / (args.points - 1) as f64;
        (0..args.points).map(|k| args.mu_min * (ratio * k as f64).exp()).collect()
    };
    let mut table = Table::new(
        "tau",
        &[
            ("mu", "1", "coupling ratio 2γ/ω_d"),
            ("gamma_tau", "1", "γτ"),
            ("tau_sqrt_gamma_omega_d", "1", "τ√(γω_d)"),
            ("status", "", "finite, or none when μ <= 1"),
        ],
    );
    for &mu in &grid {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(CliError::Usage(format!("μ must be positive and finite, got {mu}")));
        }
        match kernels::scaled_disentanglement_time(mu) {
            Some(gt) => table.push(vec![mu.into(), gt.into(), (gt * (2.0 / mu).sqrt()).into(), "finite".into()]),
            None => table.push(vec![mu.into(), Cell::Missing, Cell::Missing, "none".into()]),
        }
    }
    Ok(RunResult {
        tables: vec![table],
        passed: None,
    })
}

pub fn verify(args: &VerifyArgs) -> Result<RunResult, CliError> {
    let suite = match args.suite {
        SuiteArg::Oracle => Suite::Oracle,
        SuiteArg::Invariance => Suite::Invariance,
        SuiteArg::Distribution => Suite::Distribution,
        SuiteArg::Kernels => Suite::Kernels,
        SuiteArg::All => Suite::All,
    };
    let opts = VerifyOptions {
        suite,
        seed: args.sampling.seed,
        n_samples: args.sampling.samples,
        n_workers: args.sampling.workers,
        oracle_instances: args.instances,
        f_scale: args.f_scale,
    };
    let results = verify::run(&opts)?;
    let mut table = Table::new(
        "verify",
        &[
            ("suite", "", "check group"),
            ("name", "", "check"),
            ("residual", "", "measured deviation"),
            ("tolerance", "", "largest accepted residual"),
            ("passed", "", "true or false"),
            ("seconds", "s", "wall time"),
            ("detail", "", "what was compared"),
        ],
    );
    for r in &results {
        let suite = serde_json::to_value(r.suite)?;
        table.push(vec![
            suite.as_str().unwrap_or("").into(),
            r.name.as_str().into(),
            r.residual.into(),
            r.tolerance.into(),
            if r.passed { "true" } else { "false" }.into(),
            r.seconds.into(),
            r.detail.as_str().into(),
        ]);
    }
    Ok(RunResult {
        tables: vec![table],
        passed: Some(verify::all_passed(&results)),
    })
}

fn build_bath(args: &BathArgs, channel: &ChannelSpec) -> Result<DiscreteBath, CliError> {
    Ok(match args.bath {
        BathShape::Flat => DiscreteBath::flat(args.modes, args.spacing, args.fock_cutoff)?,
        BathShape::Lorentzian => {
            let omega_d = match (args.omega_d, &channel.kind) {
                (Some(w), _) => w,
                (None, ChannelKind::OuAmplitudeDamping { omega_d, .. }) => *omega_d,
                _ => return Err(CliError::Usage("--omega-d is required for a Lorentzian bath".into())),
            };
            DiscreteBath::lorentzian(args.modes, args.spacing, omega_d, args.fock_cutoff)?
        }
    })
}

/// Random outcome `k` of the run, redrawn until every amplitude fits the Fock cutoff.
fn outcome(args: &BathArgs, k: usize) -> Vec<Complex64> {
    let mut rng = montecarlo::sample_rng(args.seed, k as u64);
    let limit = 0.5 * args.fock_cutoff as f64;
    loop {
        let a: Vec<Complex64> = (0..args.modes).map(|_| random::complex_gaussian(&mut rng) * args.scale).collect();
        if a.iter().all(|z| z.norm_sqr() < limit) {
            return a;
        }
    }
}

fn amplitude_columns(n: usize) -> Vec<(String, String)> {
    (0..n)
        .flat_map(|i| {
            [
                (format!("a{i}_re"), format!("Re a_{i}")),
                (format!("a{i}_im"), format!("Im a_{i}")),
            ]
        })
        .collect()
}

fn table_with_amplitudes(name: &str, head: &[(&str, &str, &str)], n_modes: usize) -> Table {
    let extra = amplitude_columns(n_modes);
    let mut cols: Vec<(&str, &str, &str)> = head.to_vec();
    cols.extend(extra.iter().map(|(n, d)| (n.as_str(), "√photons", d.as_str())));
    Table::new(name, &cols)
}

fn amplitude_cells(a: &[Complex64]) -> Vec<Cell> {
    a.iter().flat_map(|z| [z.re.into(), z.im.into()]).collect()
}

pub fn oracle(args: &OracleArgs, system: Option<&SystemSpec>) -> Result<RunResult, CliError> {
    let spec = require_system(system)?;
    let channel = spec.single_channel()?.clone();
    let kind = MeasureKind::for_dims(spec.layout.dims())?;
    let bath = build_bath(&args.bath, &channel)?;
    let opts = OracleOptions::default();
    let mut table = table_with_amplitudes(
        "oracle",
        &[
            ("index", "", "outcome number"),
            ("photon_number", "photons", "N_a = Σ|a_λ|²"),
            ("g_ratio", "1", "G(ψ(a,t))/G(φ), from the oracle's conditional state"),
            ("predicted", "1", "f/F with F from the oracle's outcome probability"),
            ("scaling_value", "1", "f"),
            ("norm_ratio", "1", "F"),
            ("relative_error", "1", "|g_ratio − predicted|/predicted"),
        ],
        bath.len(),
    );
    let mut passed = true;
    let mut k = 0;
    while table.rows.len() < args.bath.outcomes {
        let a = outcome(&args.bath, k);
        k += 1;
        let check = match oracle::oracle_scaling_check(spec, &bath, args.bath.time, &a, kind, &opts) {
            Ok(c) => c,
            Err(condent::Error::Domain(_)) => continue,
            Err(e) => return Err(e.into()),
        };
        let err = check.relative_error();
        passed &= err <= args.tolerance;
        let mut row = vec![
            (k - 1).into(),
            linalg::norm_sqr(&a).into(),
            check.lhs.into(),
            check.rhs.into(),
            check.scaling_value.into(),
            check.ratio.into(),
            err.into(),
        ];
        row.extend(amplitude_cells(&a));
        table.push(row);
    }
    Ok(RunResult {
        tables: vec![table],
        passed: Some(passed),
    })
}

fn direct_x(total: &TotalState, a: &[Complex64], kind: MeasureKind, spec: &SystemSpec, g0: f64) -> Result<f64, CliError> {
    let proj = oracle::project_coherent(total, a)?;
    let norm = proj.ratio.sqrt();
    let psi: Vec<Complex64> = proj.relative_state.iter().map(|z| z / norm).collect();
    Ok(entanglement::measure_pure(kind, spec.layout.dims(), &psi)? / g0)
}

pub fn tomography(args: &TomographyArgs, system: Option<&SystemSpec>) -> Result<RunResult, CliError> {
    let spec = require_system(system)?;
    let channel = spec.single_channel()?.clone();
    let kind = MeasureKind::for_dims(spec.layout.dims())?;
    let g0 = entanglement::measure_state(kind, spec.layout.dims(), &spec.initial)?;
    if !(g0 > 0.0) {
        return Err(CliError::Usage("the initial state has no entanglement to track".into()));
    }
    let bath = build_bath(&args.bath, &channel)?;
    let opts = OracleOptions::default();
    let total = oracle::evolve_total(spec, &bath, args.bath.time, &opts)?;
    let a_ref = vec![Complex64::new(0.0, 0.0); bath.len()];
    let q_ref = oracle::oracle_husimi(&total, &a_ref)?;
    let x_ref = direct_x(&total, &a_ref, kind, spec, g0)?;
    let mut table = table_with_amplitudes(
        "tomography",
        &[
            ("index", "", "outcome number"),
            ("photon_number", "photons", "N_a = Σ|a_λ|²"),
            ("husimi", "1", "Husimi value Q(a) of the bath"),
            ("x_predicted", "1", "x(a') e^{N_a'−N_a} Q(a')/Q(a) from the vacuum reference a'"),
            ("x_direct", "1", "G(ψ(a,t))/G(φ) on the oracle"),
            ("relative_error", "1", "|x_predicted − x_direct|/x_direct"),
            ("lower_bound", "1", "e^{−N_a} f"),
        ],
        bath.len(),
    );
    let mut passed = true;
    let mut k = 0;
    while table.rows.len() < args.bath.outcomes {
        let a = outcome(&args.bath, k);
        k += 1;
        let check = match oracle::oracle_scaling_check(spec, &bath, args.bath.time, &a, kind, &opts) {
            Ok(c) => c,
            Err(condent::Error::Domain(_)) => continue,
            Err(e) => return Err(e.into()),
        };
        let n_a = linalg::norm_sqr(&a);
        let q = oracle::oracle_husimi(&total, &a)?;
        let predicted = montecarlo::tomography_ratio(x_ref, q_ref, 0.0, q, n_a)?;
        let direct = direct_x(&total, &a, kind, spec, g0)?;
        let err = (predicted - direct).abs() / direct;
        let bound = (-n_a).exp() * check.scaling_value;
        passed &= err <= args.tolerance && direct >= bound * (1.0 - 1e-12);
        let mut row = vec![
            (k - 1).into(),
            n_a.into(),
            q.into(),
            predicted.into(),
            direct.into(),
            err.into(),
            bound.into(),
        ];
        row.extend(amplitude_cells(&a));
        table.push(row);
    }
    Ok(RunResult {
        tables: vec![table],
        passed: Some(passed),
    })
}

