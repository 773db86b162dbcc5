//! Born-rule sampling of coherent-state outcomes and weighted entanglement statistics.
//!
//! Outcomes are proposed from the vacuum distribution `P(a,0)` and carry the
//! importance weight `F = P(a,t)/P(a,0)`. Only the scalar contraction `y`
//! enters `F`, so proposals are drawn directly in `y`: `y ~ CN(0, p)` for
//! amplitude damping and `y ~ N(0, q)` for dephasing.
//!
//! Sample `i` always uses the ChaCha8 stream `i` of the run seed, and
//! reductions run sequentially over the ordered sample vector, so results
//! are bit-identical for any worker count.

pub mod closed_form;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use closed_form::{
    closed_form_pg, closed_form_pg_for_channel, closed_form_probability, entanglement_lower_bound,
    mean_entanglement, tomography_ratio, x_max, x_max_for_channel, Family, Support,
};

use crate::error::{Error, Result};
use crate::kernels::{self, OuParams};
use crate::model::{self, ChannelKind, QubitMarginal, SystemSpec};
use crate::propagator::{self, OutcomePoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub n_workers: usize,
    pub n_bins: usize,
    /// Histogram range; `None` spans `[0, max(1, largest sampled x)]`.
    pub x_range: Option<(f64, f64)>,
}

impl SamplerConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Self {
            n_samples,
            seed,
            n_workers: 1,
            n_bins: 100,
            x_range: None,
        }
    }

    pub fn with_workers(mut self, n_workers: usize) -> Self {
        self.n_workers = n_workers;
        self
    }

    pub fn with_bins(mut self, n_bins: usize, x_range: Option<(f64, f64)>) -> Self {
        self.n_bins = n_bins;
        self.x_range = x_range;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::Validation("n_samples must be >= 1".into()));
        }
        if self.n_workers == 0 {
            return Err(Error::Validation("n_workers must be >= 1".into()));
        }
        if self.n_bins == 0 {
            return Err(Error::Validation("n_bins must be >= 1".into()));
        }
        if let Some((lo, hi)) = self.x_range {
            if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
                return Err(Error::Validation(format!(
                    "degenerate histogram range [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

/// Random stream of sample `index` under `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Born-rule statistics of one open channel, reduced to the outcome statistic `y`.
#[derive(Debug, Clone, PartialEq)]
pub enum ReducedModel {
    /// `F = 1 − ρ11 p + ρ11|y|² + 2 Re(y ρ10)`, `y ~ CN(0, p)`.
    AmplitudeDamping { marginal: QubitMarginal, p: f64, f: f64 },
    /// `F = Σ_i ρ_ii e^{2 j_i y − 2 j_i² q}`, `y ~ N(0, q)`, `Ĵ = diag(j)`.
    Dephasing {
        populations: Vec<f64>,
        generator: Vec<f64>,
        q: f64,
        f: f64,
    },
}

impl ReducedModel {
    /// Amplitude damping at decay probability `p` (Markov or OU).
    pub fn amplitude_damping(marginal: QubitMarginal, p: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::Validation(format!("p must lie in [0, 1), got {p}")));
        }
        Ok(Self::AmplitudeDamping {
            marginal,
            p,
            f: (1.0 - p).sqrt(),
        })
    }

    /// Qubit dephasing at `p = 1 − e^{−Δ²q}`, expressed with `Δ = 1`.
    pub fn qubit_dephasing(marginal: QubitMarginal, p: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::Validation(format!("p must lie in [0, 1), got {p}")));
        }
        Ok(Self::Dephasing {
            populations: vec![marginal.rho00(), marginal.rho11],
            generator: vec![-0.5, 0.5],
            q: -(-p).ln_1p(),
            f: (1.0 - p).sqrt(),
        })
    }

    pub fn from_spec(spec: &SystemSpec, t: f64) -> Result<Self> {
        let channel = spec.single_channel()?;
        let rho = model::reduced_density_matrix(&spec.initial, &spec.layout, channel.target)?;
        match &channel.kind {
            ChannelKind::MarkovAmplitudeDamping { .. } => {
                let p = kernels::p_of_t(channel, t)?;
                Self::amplitude_damping(QubitMarginal::from_matrix(&rho)?, p)
            }
            ChannelKind::OuAmplitudeDamping { .. } => {
                let k = OuParams::from_channel(channel)?;
                if let Some(tau) = k.disentanglement_time() {
                    if t >= tau {
                        return Err(Error::Domain(format!(
                            "OU outcome statistics are singular from τ = {tau} on (t = {t})"
                        )));
                    }
                }
                let c = k.c(t)?;
                Ok(Self::AmplitudeDamping {
                    marginal: QubitMarginal::from_matrix(&rho)?,
                    p: 1.0 - c * c,
                    f: c,
                })
            }
            ChannelKind::Dephasing { density, .. } => {
                let d = rho.nrows();
                let j = channel.lindblad_operator(d)?.matrix;
                let q = kernels::q_of_t(*density, t)?;
                Ok(Self::Dephasing {
                    populations: (0..d).map(|i| rho[(i, i)].re).collect(),
                    generator: (0..d).map(|i| j[(i, i)].re).collect(),
                    q,
                    f: propagator::channel_scaling(channel, d, t)?,
                })
            }
        }
    }

    pub fn f(&self) -> f64 {
        match self {
            Self::AmplitudeDamping { f, .. } | Self::Dephasing { f, .. } => *f,
        }
    }

    /// Decay probability `p = 1 − f²` for qubit channels.
    pub fn p(&self) -> f64 {
        match self {
            Self::AmplitudeDamping { p, .. } => *p,
            Self::Dephasing { .. } => 1.0 - self.f() * self.f(),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, Self::AmplitudeDamping { .. })
    }

    /// Variance of the proposal: `E|y|²`.
    pub fn variance(&self) -> f64 {
        match self {
            Self::AmplitudeDamping { p, .. } => *p,
            Self::Dephasing { q, .. } => *q,
        }
    }

    pub fn norm_sq(&self, y: Complex64) -> f64 {
        match self {
            Self::AmplitudeDamping { marginal, p, .. } => {
                propagator::amplitude_damping_norm_sq(marginal, *p, y)
            }
            Self::Dephasing {
                populations,
                generator,
                q,
                ..
            } => populations
                .iter()
                .zip(generator)
                .map(|(r, j)| r * (2.0 * j * y.re - 2.0 * j * j * q).exp())
                .sum(),
        }
    }

    pub fn x(&self, y: Complex64) -> f64 {
        self.f() / self.norm_sq(y)
    }

    pub fn qubit_marginal(&self) -> Option<QubitMarginal> {
        match self {
            Self::AmplitudeDamping { marginal, .. } => Some(*marginal),
            Self::Dephasing { populations, .. } if populations.len() == 2 => {
                QubitMarginal::diagonal(populations[1]).ok()
            }
            Self::Dephasing { .. } => None,
        }
    }

    pub fn family(&self) -> Family {
        match self {
            Self::AmplitudeDamping { .. } => Family::AmplitudeDamping,
            Self::Dephasing { .. } => Family::Dephasing,
        }
    }

    /// Support edge `x^max` for qubit channels; `None` for qudit dephasing.
    pub fn support(&self) -> Option<Support> {
        let m = self.qubit_marginal()?;
        x_max(self.family(), &m, self.p()).ok()
    }

    pub fn draw<R: Rng>(&self, rng: &mut R) -> Complex64 {
        let v = self.variance();
        match self {
            Self::AmplitudeDamping { .. } => {
                let s = (0.5 * v).sqrt();
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(s * re, s * im)
            }
            Self::Dephasing { .. } => {
                let z: f64 = rng.sample(StandardNormal);
                Complex64::new(v.sqrt() * z, 0.0)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedSample {
    pub y: Complex64,
    pub x: f64,
    /// `F(y,t)`.
    pub weight: f64,
}

/// A value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    /// `|value − target| ≤ k·σ`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error
    }
}

fn run_parallel<T, F>(n: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Numerical(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| (0..n).into_par_iter().map(f).collect()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub samples: Vec<WeightedSample>,
    pub f: f64,
}

/// Draws `cfg.n_samples` weighted outcomes of a reduced model.
pub fn sample_reduced(model: &ReducedModel, cfg: &SamplerConfig) -> Result<SampleSet> {
    cfg.validate()?;
    let samples = run_parallel(cfg.n_samples, cfg.n_workers, |i| {
        let mut rng = sample_rng(cfg.seed, i as u64);
        let y = model.draw(&mut rng);
        let weight = model.norm_sq(y);
        WeightedSample {
            y,
            x: model.f() / weight,
            weight,
        }
    })?;
    Ok(SampleSet {
        samples,
        f: model.f(),
    })
}

/// Weighted outcomes `(y, F)` of the single open channel of `spec` at time `t`.
pub fn sample_outcomes(spec: &SystemSpec, t: f64, cfg: &SamplerConfig) -> Result<Vec<(OutcomePoint, f64)>> {
    let model = ReducedModel::from_spec(spec, t)?;
    let set = sample_reduced(&model, cfg)?;
    Ok(set
        .samples
        .into_iter()
        .map(|s| (OutcomePoint::new(s.y, t), s.weight))
        .collect())
}

/// Born-rule weighted histogram of `x(y,t) = f/F` for the single open channel of `spec`.
pub fn entanglement_histogram(spec: &SystemSpec, t: f64, cfg: &SamplerConfig) -> Result<WeightedHistogram> {
    let model = ReducedModel::from_spec(spec, t)?;
    let set = sample_reduced(&model, cfg)?;
    set.histogram(cfg.n_bins, cfg.x_range)
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.samples.iter().map(|s| s.weight).sum()
    }

    /// `(Σw)²/Σw²`.
    pub fn n_eff(&self) -> f64 {
        let (s1, s2) = self
            .samples
            .iter()
            .fold((0.0, 0.0), |(a, b), s| (a + s.weight, b + s.weight * s.weight));
        s1 * s1 / s2
    }

    pub fn max_x(&self) -> f64 {
        self.samples.iter().map(|s| s.x).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Born-rule mean of `x`, with the delta-method standard error of the
    /// ratio estimator, `√(Σ w²(x − m)²) / Σ w`.
    pub fn mean_x(&self) -> Estimate {
        let w = self.total_weight();
        let mean = self.samples.iter().map(|s| s.weight * s.x).sum::<f64>() / w;
        let var = self
            .samples
            .iter()
            .map(|s| (s.weight * (s.x - mean)).powi(2))
            .sum::<f64>();
        Estimate {
            value: mean,
            std_error: var.sqrt() / w,
        }
    }

    /// Plain mean of the weights; equals one in expectation (Born-rule normalization).
    pub fn mean_weight(&self) -> Estimate {
        let n = self.len() as f64;
        let mean = self.total_weight() / n;
        let var = self
            .samples
            .iter()
            .map(|s| (s.weight - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0).max(1.0);
        Estimate {
            value: mean,
            std_error: (var / n).sqrt(),
        }
    }

    /// Plain mean of `|y|²` over the proposals.
    pub fn mean_y_sqr(&self) -> Estimate {
        let n = self.len() as f64;
        let vals: Vec<f64> = self.samples.iter().map(|s| s.y.norm_sqr()).collect();
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        Estimate {
            value: mean,
            std_error: (var / n).sqrt(),
        }
    }

    /// Weighted density of `x` on `[center − h, center + h)` with its standard error.
    pub fn density_estimate(&self, center: f64, half_width: f64) -> Estimate {
        let w = self.total_weight();
        let inside: f64 = self
            .samples
            .iter()
            .filter(|s| s.x >= center - half_width && s.x < center + half_width)
            .map(|s| s.weight)
            .sum();
        let frac = inside / w;
        let width = 2.0 * half_width;
        Estimate {
            value: frac / width,
            std_error: (frac * (1.0 - frac) / self.n_eff()).sqrt() / width,
        }
    }

    pub fn histogram(&self, n_bins: usize, x_range: Option<(f64, f64)>) -> Result<WeightedHistogram> {
        let (lo, hi) = x_range.unwrap_or((0.0, self.max_x().max(1.0)));
        WeightedHistogram::build(self, n_bins, lo, hi)
    }

    /// `(x, w)` pairs sorted by `x`.
    pub fn sorted_pairs(&self) -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = self.samples.iter().map(|s| (s.x, s.weight)).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedHistogram {
    pub bin_edges: Vec<f64>,
    /// Self-normalized Born-rule weight per bin.
    pub weights: Vec<f64>,
    pub total_weight: f64,
    pub n_eff: f64,
    /// Normalized weight that fell outside the bin range.
    pub out_of_range: f64,
}

impl WeightedHistogram {
    fn build(set: &SampleSet, n_bins: usize, lo: f64, hi: f64) -> Result<Self> {
        if n_bins == 0 || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Validation(format!(
                "degenerate binning: {n_bins} bins on [{lo}, {hi}]"
            )));
        }
        let width = (hi - lo) / n_bins as f64;
        let mut raw = vec![0.0; n_bins];
        let mut outside = 0.0;
        for s in &set.samples {
            if s.x < lo || s.x > hi {
                outside += s.weight;
                continue;
            }
            let k = (((s.x - lo) / width) as usize).min(n_bins - 1);
            raw[k] += s.weight;
        }
        let total = set.total_weight();
        Ok(Self {
            bin_edges: (0..=n_bins).map(|k| lo + k as f64 * width).collect(),
            weights: raw.iter().map(|w| w / total).collect(),
            total_weight: total,
            n_eff: set.n_eff(),
            out_of_range: outside / total,
        })
    }

    pub fn n_bins(&self) -> usize {
        self.weights.len()
    }

    pub fn bin_width(&self, k: usize) -> f64 {
        self.bin_edges[k + 1] - self.bin_edges[k]
    }

    pub fn centers(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect()
    }

    /// Probability densities per bin.
    pub fn densities(&self) -> Vec<f64> {
        (0..self.n_bins()).map(|k| self.weights[k] / self.bin_width(k)).collect()
    }

    /// Binned standard errors of the densities.
    pub fn density_errors(&self) -> Vec<f64> {
        (0..self.n_bins())
            .map(|k| (self.weights[k] * (1.0 - self.weights[k]) / self.n_eff).sqrt() / self.bin_width(k))
            .collect()
    }

    pub fn bin_of(&self, x: f64) -> Option<usize> {
        let lo = self.bin_edges[0];
        let hi = *self.bin_edges.last()?;
        if x < lo || x > hi {
            return None;
        }
        let k = ((x - lo) / self.bin_width(0)) as usize;
        Some(k.min(self.n_bins() - 1))
    }

    /// Largest deviation between cumulative bin weights and reference bin probabilities.
    pub fn ks_distance(&self, reference: &[f64]) -> Result<f64> {
        if reference.len() != self.n_bins() {
            return Err(Error::Dimension(format!(
                "reference has {} bins, histogram {}",
                reference.len(),
                self.n_bins()
            )));
        }
        let mut a = 0.0;
        let mut b = 0.0;
        let mut d: f64 = 0.0;
        for (w, r) in self.weights.iter().zip(reference) {
            a += w;
            b += r;
            d = d.max((a - b).abs());
        }
        Ok(d)
    }
}

/// Closed-form probability of each histogram bin.
pub fn closed_form_bin_probabilities(
    family: Family,
    m: &QubitMarginal,
    p: f64,
    hist: &WeightedHistogram,
) -> Result<Vec<f64>> {
    hist.bin_edges
        .windows(2)
        .map(|e| closed_form_probability(family, m, p, e[0], e[1]))
        .collect()
}

/// Binned weighted Kolmogorov–Smirnov distance between a sample set and the
/// closed-form distribution, with `n_bins` bins across the support.
pub fn ks_against_closed_form(set: &SampleSet, model: &ReducedModel, n_bins: usize) -> Result<f64> {
    let m = model
        .qubit_marginal()
        .ok_or_else(|| Error::Capability("closed-form distribution needs a qubit channel".into()))?;
    let hi = match model.support() {
        Some(Support::Bounded(x)) => x,
        _ => set.max_x(),
    };
    let hist = set.histogram(n_bins, Some((0.0, hi)))?;
    let reference = closed_form_bin_probabilities(model.family(), &m, model.p(), &hist)?;
    let d = hist.ks_distance(&reference)?;
    Ok(d.max(hist.out_of_range))
}

/// Exact two-sample Kolmogorov–Smirnov distance between weighted samples.
pub fn weighted_ks_two_sample(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let sort = |v: &[(f64, f64)]| {
        let mut v = v.to_vec();
        v.sort_by(|p, q| p.0.total_cmp(&q.0));
        let total: f64 = v.iter().map(|p| p.1).sum();
        (v, total)
    };
    let (a, ta) = sort(a);
    let (b, tb) = sort(b);
    let (mut i, mut j) = (0, 0);
    let (mut ca, mut cb) = (0.0, 0.0);
    let mut d: f64 = 0.0;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(p), Some(q)) => p.0.min(q.0),
            (Some(p), None) => p.0,
            (None, Some(q)) => q.0,
            (None, None) => break,
        };
        while i < a.len() && a[i].0 <= x {
            ca += a[i].1;
            i += 1;
        }
        while j < b.len() && b[j].0 <= x {
            cb += b[j].1;
            j += 1;
        }
        d = d.max((ca / ta - cb / tb).abs());
    }
    d
}
