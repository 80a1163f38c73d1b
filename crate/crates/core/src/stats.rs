//! Bootstrap confidence intervals on decay parameters and the coverage
//! study built on them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::estimation::{
    correlations, estimate_from_correlations, fit_decay, fit_points, BlockRep, CompiledProbe, Correlations, DecayFit,
    Estimator, FitModel, ProbeConfig, Weighting,
};
use crate::groups::GateSet;
use crate::measurement::Measurement;
use crate::noise::{assign_noise, NoiseSpec, SpamSpec};
use crate::simulator::{run_experiment, SequencePlan, Simulator, SequenceMode, ShadowDataset};
use crate::util::{mean, quantile_sorted, variance};

pub const MIN_REPLICATES: usize = 200;
/// Replicate fit-failure fraction above which an interval is flagged.
pub const MAX_FAILURE_FRACTION: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    Percentile,
    Bca,
    Normal,
    #[serde(rename = "fit_cov_2sigma")]
    FitCov2Sigma,
}

pub const CI_METHODS: [CiMethod; 4] = [CiMethod::Percentile, CiMethod::Bca, CiMethod::Normal, CiMethod::FitCov2Sigma];

impl CiMethod {
    pub fn parse(s: &str) -> Result<CiMethod> {
        match s {
            "percentile" => Ok(CiMethod::Percentile),
            "bca" => Ok(CiMethod::Bca),
            "normal" => Ok(CiMethod::Normal),
            "fit_cov_2sigma" => Ok(CiMethod::FitCov2Sigma),
            other => Err(Error::config(format!(
                "unknown CI method '{other}'; valid: percentile, bca, normal, fit_cov_2sigma"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CiMethod::Percentile => "percentile",
            CiMethod::Bca => "bca",
            CiMethod::Normal => "normal",
            CiMethod::FitCov2Sigma => "fit_cov_2sigma",
        }
    }

    fn resamples(self) -> bool {
        self != CiMethod::FitCov2Sigma
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConfidenceInterval {
    pub method: CiMethod,
    pub level: f64,
    pub lo: f64,
    pub hi: f64,
    pub point: f64,
    pub replicates: usize,
    pub failures: usize,
    pub unreliable: bool,
    /// `lo ≤ point ≤ hi` does not hold; reported, not repaired.
    pub point_outside: bool,
}

impl ConfidenceInterval {
    /// Containment up to floating-point rounding of the bounds.
    pub fn contains(&self, x: f64) -> bool {
        let slack = 1e-12 * x.abs().max(1.0);
        self.lo - slack <= x && x <= self.hi + slack
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BootstrapOptions {
    pub replicates: usize,
    pub level: f64,
    pub seed: u64,
    pub model: FitModel,
    /// Fit parameter the interval is for.
    pub parameter: String,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        BootstrapOptions { replicates: 1000, level: 0.9, seed: 0, model: FitModel::Single, parameter: "lambda".into() }
    }
}

fn param_of(fit: &DecayFit, name: &str) -> Result<f64> {
    fit.param(name)
        .ok_or_else(|| Error::config(format!("fit model {:?} has no parameter '{name}'", fit.model)))
}

fn sigma_of(fit: &DecayFit, name: &str) -> Result<f64> {
    fit.sigma(name)
        .ok_or_else(|| Error::config(format!("fit model {:?} has no parameter '{name}'", fit.model)))
}

fn fit_values(c: &Correlations, values: &[Vec<f64>], est: Estimator, model: FitModel, init: &[f64]) -> Result<DecayFit> {
    let ys = values.iter().map(|v| est.apply(v)).collect::<Result<Vec<f64>>>()?;
    fit_points(model, &c.lengths, &ys, None, Some(init))
}

/// Bootstrap distribution of one fit parameter plus what BCa needs.
#[derive(Clone, Debug)]
pub struct BootstrapSample {
    pub fit: DecayFit,
    pub point: f64,
    pub sigma: f64,
    /// Successful replicate values, sorted.
    pub replicates: Vec<f64>,
    pub failures: usize,
    pub requested: usize,
    /// Delete-one-record jackknife values; empty unless requested.
    pub jackknife: Vec<f64>,
}

/// Resample records with replacement at every length, re-estimate, refit
/// from the original parameters.
pub fn bootstrap_sample(c: &Correlations, est: Estimator, opts: &BootstrapOptions, jackknife: bool) -> Result<BootstrapSample> {
    if c.values.iter().any(|v| v.is_empty()) {
        return Err(Error::config("bootstrap needs at least one record at every sequence length"));
    }
    if opts.replicates < MIN_REPLICATES {
        return Err(Error::config(format!(
            "bootstrap needs B ≥ {MIN_REPLICATES}, got {}",
            opts.replicates
        )));
    }
    if !(opts.level > 0.0 && opts.level < 1.0) {
        return Err(Error::config(format!("confidence level must lie in (0, 1), got {}", opts.level)));
    }
    let base = estimate_from_correlations("bootstrap", c, est)?;
    let fit = fit_decay(&base, opts.model, Weighting::Uniform)?;
    let point = param_of(&fit, &opts.parameter)?;
    let sigma = sigma_of(&fit, &opts.parameter)?;

    let mut reps = Vec::with_capacity(opts.replicates);
    let mut failures = 0;
    let mut buf: Vec<Vec<f64>> = c.values.iter().map(|v| Vec::with_capacity(v.len())).collect();
    for b in 0..opts.replicates {
        let mut rng = ChaCha12Rng::seed_from_u64(opts.seed);
        rng.set_stream(b as u64);
        for (dst, src) in buf.iter_mut().zip(&c.values) {
            dst.clear();
            dst.extend((0..src.len()).map(|_| src[rng.gen_range(0..src.len())]));
        }
        match fit_values(c, &buf, est, opts.model, &fit.params).and_then(|f| param_of(&f, &opts.parameter)) {
            Ok(v) if v.is_finite() => reps.push(v),
            _ => failures += 1,
        }
    }
    reps.sort_by(|a, b| a.total_cmp(b));

    let mut jack = Vec::new();
    if jackknife {
        let mut vals = c.values.clone();
        for (slot, src) in c.values.iter().enumerate() {
            for i in 0..src.len() {
                vals[slot] = src.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, x)| *x).collect();
                if vals[slot].is_empty() {
                    continue;
                }
                if let Ok(v) = fit_values(c, &vals, est, opts.model, &fit.params).and_then(|f| param_of(&f, &opts.parameter)) {
                    if v.is_finite() {
                        jack.push(v);
                    }
                }
            }
            vals[slot] = src.clone();
        }
    }
    Ok(BootstrapSample { fit, point, sigma, replicates: reps, failures, requested: opts.replicates, jackknife: jack })
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// `Φ⁻¹(p)` polished by one Newton step, so `Φ(probit(p))` returns `p` to
/// rounding.
pub fn probit(p: f64) -> f64 {
    let nd = std_normal();
    let z = nd.inverse_cdf(p);
    if !z.is_finite() {
        return z;
    }
    z - (nd.cdf(z) - p) / nd.pdf(z)
}

/// Jackknife acceleration `Σ(θ̄−θᵢ)³ / (6 [Σ(θ̄−θᵢ)²]^{3/2})`.
pub fn acceleration(jack: &[f64]) -> f64 {
    if jack.len() < 2 {
        return 0.0;
    }
    let m = mean(jack);
    let (mut s2, mut s3) = (0.0, 0.0);
    for x in jack {
        let d = m - x;
        s2 += d * d;
        s3 += d * d * d;
    }
    if s2 <= 0.0 {
        0.0
    } else {
        s3 / (6.0 * s2.powf(1.5))
    }
}

/// Bias correction `Φ⁻¹(#{θ* < θ̂}/B)`, half-counting ties.
pub fn bias_correction(sorted: &[f64], point: f64) -> f64 {
    let below = sorted.iter().filter(|x| **x < point).count() as f64;
    let ties = sorted.iter().filter(|x| **x == point).count() as f64;
    let n = sorted.len() as f64;
    let p = ((below + 0.5 * ties) / n).clamp(0.5 / n, 1.0 - 0.5 / n);
    probit(p)
}

/// BCa bounds from sorted replicates, `z₀` and `a`.
pub fn bca_bounds(sorted: &[f64], z0: f64, a: f64, level: f64) -> (f64, f64) {
    let nd = std_normal();
    let alpha = 1.0 - level;
    let adj = |q: f64| {
        let z = probit(q);
        nd.cdf(z0 + (z0 + z) / (1.0 - a * (z0 + z)))
    };
    (quantile_sorted(sorted, adj(alpha / 2.0)), quantile_sorted(sorted, adj(1.0 - alpha / 2.0)))
}

pub fn percentile_bounds(sorted: &[f64], level: f64) -> (f64, f64) {
    let alpha = 1.0 - level;
    (quantile_sorted(sorted, alpha / 2.0), quantile_sorted(sorted, 1.0 - alpha / 2.0))
}

/// Interval of the given method from an already drawn bootstrap sample.
pub fn interval_from_sample(s: &BootstrapSample, method: CiMethod, level: f64) -> Result<ConfidenceInterval> {
    let (lo, hi) = match method {
        CiMethod::FitCov2Sigma => (s.point - 2.0 * s.sigma, s.point + 2.0 * s.sigma),
        _ if s.replicates.is_empty() => {
            return Err(Error::numerical("every bootstrap replicate fit failed"));
        }
        CiMethod::Percentile => percentile_bounds(&s.replicates, level),
        CiMethod::Normal => {
            let z = probit(1.0 - (1.0 - level) / 2.0);
            let sd = variance(&s.replicates).sqrt();
            (s.point - z * sd, s.point + z * sd)
        }
        CiMethod::Bca => {
            if s.jackknife.is_empty() {
                return Err(Error::config("BCa needs the jackknife values; draw the sample with jackknife enabled"));
            }
            let z0 = bias_correction(&s.replicates, s.point);
            bca_bounds(&s.replicates, z0, acceleration(&s.jackknife), level)
        }
    };
    let (replicates, failures) = if method.resamples() { (s.requested, s.failures) } else { (0, 0) };
    Ok(ConfidenceInterval {
        method,
        level,
        lo,
        hi,
        point: s.point,
        replicates,
        failures,
        unreliable: replicates > 0 && failures as f64 > MAX_FAILURE_FRACTION * replicates as f64,
        point_outside: !(lo <= s.point && s.point <= hi),
    })
}

/// All requested intervals from one set of replicates.
pub fn bootstrap_intervals(
    c: &Correlations,
    est: Estimator,
    methods: &[CiMethod],
    opts: &BootstrapOptions,
) -> Result<Vec<ConfidenceInterval>> {
    let s = bootstrap_sample(c, est, opts, methods.contains(&CiMethod::Bca))?;
    methods.iter().map(|m| interval_from_sample(&s, *m, opts.level)).collect()
}

/// One interval for a probe on a dataset.
pub fn bootstrap_ci(
    ds: &ShadowDataset,
    gs: &GateSet,
    probe: &ProbeConfig,
    est: Estimator,
    method: CiMethod,
    opts: &BootstrapOptions,
) -> Result<ConfidenceInterval> {
    ds.validate(gs)?;
    let rep = BlockRep::new(gs, &probe.block);
    let cp = CompiledProbe::new(probe, &rep)?;
    let c = correlations(ds, &cp)?;
    Ok(bootstrap_intervals(&c, est, &[method], opts)?.remove(0))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoverageConfig {
    pub gate_set: String,
    pub noise: NoiseSpec,
    #[serde(default)]
    pub spam: SpamSpec,
    pub basis: String,
    /// Block label whose sector projector is the probe.
    pub probe: String,
    pub lengths: Vec<usize>,
    pub ks: Vec<usize>,
    pub estimators: Vec<Estimator>,
    pub methods: Vec<CiMethod>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub bootstrap: BootstrapOptions,
    pub seed: u64,
}

fn default_trials() -> usize {
    100
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverageCell {
    pub k: usize,
    pub estimator: String,
    pub method: String,
    pub coverage: f64,
    pub contained: usize,
    pub trials: usize,
    pub unreliable: usize,
    pub seed: u64,
}

impl CoverageCell {
    /// `√(p(1−p)/trials)` at nominal `p`.
    pub fn binomial_sigma(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverageReport {
    pub truth: f64,
    pub level: f64,
    pub cells: Vec<CoverageCell>,
}

impl CoverageReport {
    pub fn cell(&self, k: usize, estimator: &str, method: CiMethod) -> Option<&CoverageCell> {
        self.cells.iter().find(|c| c.k == k && c.estimator == estimator && c.method == method.name())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("K,estimator,method,coverage,trials,seed\n");
        for c in &self.cells {
            out.push_str(&format!("{},{},{},{},{},{}\n", c.k, c.estimator, c.method, c.coverage, c.trials, c.seed));
        }
        out
    }
}

/// Fraction of simulated experiments whose interval contains the twirl
/// decay of the configured noise. Each (K, trial) dataset is shared by all
/// estimators and methods.
pub fn coverage_study(cfg: &CoverageConfig) -> Result<CoverageReport> {
    if cfg.trials == 0 || cfg.ks.is_empty() || cfg.estimators.is_empty() || cfg.methods.is_empty() {
        return Err(Error::config("coverage study needs trials ≥ 1 and nonempty K, estimator and method lists"));
    }
    let gs = GateSet::by_name(&cfg.gate_set)?;
    let meas = Measurement::by_name(&cfg.basis)?;
    let probe = ProbeConfig::sector(&gs, &cfg.probe, &meas)?;
    let noisy = assign_noise(&gs, &cfg.noise, &cfg.spam)?;
    let truth = probe.twirl_decay(&noisy.average_noise());
    let sim = Simulator::new(&noisy, &meas, &SequenceMode::Random, None)?;
    let rep = BlockRep::new(&gs, &probe.block);
    let cp = CompiledProbe::new(&probe, &rep)?;

    let mut cells = Vec::new();
    for &k in &cfg.ks {
        let mut seeds = ChaCha12Rng::seed_from_u64(cfg.seed);
        seeds.set_stream(k as u64);
        let mut contained = vec![vec![0usize; cfg.methods.len()]; cfg.estimators.len()];
        let mut unreliable = contained.clone();
        for _ in 0..cfg.trials {
            let trial_seed: u64 = seeds.gen();
            let plan = SequencePlan::random(cfg.lengths.clone(), k, trial_seed);
            let ds = run_experiment(&plan, &sim, "coverage")?;
            let c = correlations(&ds, &cp)?;
            for (ei, est) in cfg.estimators.iter().enumerate() {
                let opts = BootstrapOptions { seed: trial_seed ^ 0x5eed, ..cfg.bootstrap.clone() };
                // a trial whose original fit fails counts as not covering
                let Ok(cis) = bootstrap_intervals(&c, *est, &cfg.methods, &opts) else {
                    continue;
                };
                for (mi, ci) in cis.iter().enumerate() {
                    if ci.contains(truth) {
                        contained[ei][mi] += 1;
                    }
                    if ci.unreliable {
                        unreliable[ei][mi] += 1;
                    }
                }
            }
        }
        for (ei, est) in cfg.estimators.iter().enumerate() {
            for (mi, m) in cfg.methods.iter().enumerate() {
                cells.push(CoverageCell {
                    k,
                    estimator: est.name().to_string(),
                    method: m.name().to_string(),
                    coverage: contained[ei][mi] as f64 / cfg.trials as f64,
                    contained: contained[ei][mi],
                    trials: cfg.trials,
                    unreliable: unreliable[ei][mi],
                    seed: cfg.seed,
                });
            }
        }
    }
    Ok(CoverageReport { truth, level: cfg.bootstrap.level, cells })
}
