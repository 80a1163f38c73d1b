//! Desk-scale reproductions of the headline tables and figures, reported
//! as side-by-side rows against ground truth computed from the configured
//! noise model.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{
    average_fidelity, correlations, estimate_from_correlations, exact_leakage, fidelity_from_decays, fit_decay,
    interleaved_estimate, leakage_rates, BlockRep, CompiledProbe, DecayFit, Estimator, FitModel, InterleavedEstimate,
    LeakageModel, ProbeConfig, Weighting,
};
use crate::gates;
use crate::groups::GateSet;
use crate::marginals::{
    crosstalk_matrices, epsilon_amplitudes, epsilon_with_interval, exact_decay_map, matrix_csv, mc_decay_map,
    MarginalSet,
};
use crate::measurement::Measurement;
use crate::noise::{assign_noise, build_channel, ChannelSpec, NoiseSpec, SpamSpec};
use crate::simulator::{run_experiment, SequenceMode, SequencePlan, ShadowDataset, Simulator};
use crate::stats::{coverage_study, BootstrapOptions, CoverageConfig, CI_METHODS};
use crate::util::canonical_hash;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Table1,
    Table2,
    Coverage,
    Leakage,
    Marginals,
}

pub const TARGETS: [Target; 5] = [Target::Table1, Target::Table2, Target::Coverage, Target::Leakage, Target::Marginals];

impl Target {
    pub fn parse(s: &str) -> Result<Target> {
        TARGETS.into_iter().find(|t| t.name() == s).ok_or_else(|| {
            Error::config(format!(
                "unknown reproduce target '{s}'; valid: {}",
                TARGETS.map(|t| t.name()).join(", ")
            ))
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Target::Table1 => "table1",
            Target::Table2 => "table2",
            Target::Coverage => "coverage",
            Target::Leakage => "leakage",
            Target::Marginals => "marginals",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub quantity: String,
    pub artifact: f64,
    pub reference: f64,
    pub tolerance: String,
    pub pass: bool,
}

impl Row {
    pub fn within(quantity: impl Into<String>, artifact: f64, reference: f64, tol: f64) -> Row {
        Row {
            quantity: quantity.into(),
            artifact,
            reference,
            tolerance: format!("±{tol:.3e}"),
            pass: (artifact - reference).abs() <= tol,
        }
    }

    /// `reference − minus ≤ artifact ≤ reference + plus`.
    pub fn band(quantity: impl Into<String>, artifact: f64, reference: f64, minus: f64, plus: f64) -> Row {
        Row {
            quantity: quantity.into(),
            artifact,
            reference,
            tolerance: format!("+{plus}/-{minus}"),
            pass: artifact >= reference - minus && artifact <= reference + plus,
        }
    }

    pub fn below(quantity: impl Into<String>, artifact: f64, limit: f64) -> Row {
        Row { quantity: quantity.into(), artifact, reference: limit, tolerance: "≤ reference".into(), pass: artifact <= limit }
    }

    pub fn at_least(quantity: impl Into<String>, artifact: f64, floor: f64) -> Row {
        Row { quantity: quantity.into(), artifact, reference: floor, tolerance: "≥ reference".into(), pass: artifact >= floor }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Bundle {
    pub target: Target,
    pub params: serde_json::Value,
    pub params_hash: String,
    pub version: String,
    pub rows: Vec<Row>,
    /// Some step failed; its rows are missing and the error is listed.
    pub partial: bool,
    pub errors: Vec<String>,
    /// Extra artifacts as (file name, CSV text).
    #[serde(skip)]
    pub files: Vec<(String, String)>,
}

impl Bundle {
    fn new<P: Serialize>(target: Target, params: &P) -> Result<Bundle> {
        Ok(Bundle {
            target,
            params: serde_json::to_value(params)?,
            params_hash: canonical_hash(params)?,
            version: env!("CARGO_PKG_VERSION").to_string(),
            rows: Vec::new(),
            partial: false,
            errors: Vec::new(),
            files: Vec::new(),
        })
    }

    fn absorb(&mut self, step: &str, r: Result<Vec<Row>>) {
        match r {
            Ok(rows) => self.rows.extend(rows),
            Err(e) => {
                self.partial = true;
                self.errors.push(format!("{step}: {e}"));
            }
        }
    }

    pub fn passed(&self) -> bool {
        !self.partial && self.rows.iter().all(|r| r.pass)
    }

    pub fn rows_csv(&self) -> String {
        let mut s = String::from("quantity,artifact,reference,tolerance,pass\n");
        for r in &self.rows {
            s.push_str(&format!("\"{}\",{},{},\"{}\",{}\n", r.quantity, r.artifact, r.reference, r.tolerance, r.pass));
        }
        s
    }

    /// Fixed-width side-by-side table.
    pub fn table(&self) -> String {
        let w = self.rows.iter().map(|r| r.quantity.chars().count()).max().unwrap_or(8).max(8);
        let mut s = format!("{:<w$}  {:>14}  {:>14}  {:>18}  pass\n", "quantity", "artifact", "reference", "tolerance");
        for r in &self.rows {
            s.push_str(&format!(
                "{:<w$}  {:>14.6}  {:>14.6}  {:>18}  {}\n",
                r.quantity,
                r.artifact,
                r.reference,
                r.tolerance,
                if r.pass { "yes" } else { "NO" }
            ));
        }
        for e in &self.errors {
            s.push_str(&format!("error: {e}\n"));
        }
        s
    }
}

fn fit_probe(ds: &ShadowDataset, gs: &GateSet, probe: &ProbeConfig, est: Estimator, model: FitModel) -> Result<DecayFit> {
    let rep = BlockRep::new(gs, &probe.block);
    let cp = CompiledProbe::new(probe, &rep)?;
    let c = correlations(ds, &cp)?;
    let e = estimate_from_correlations(&probe.label, &c, est)?;
    fit_decay(&e, model, Weighting::Uniform).map_err(|err| Error::numerical(format!("probe {}: {err}", probe.label)))
}

// ---------------------------------------------------------------- table 1

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Table1Params {
    pub lengths: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub gate_noise: ChannelSpec,
    pub cnot_error: ChannelSpec,
    pub estimator: Estimator,
    pub tolerance: f64,
}

impl Default for Table1Params {
    fn default() -> Self {
        Table1Params {
            lengths: vec![1, 2, 3, 4, 6, 8, 12, 16, 24, 32],
            reps: 300,
            seed: 101,
            gate_noise: ChannelSpec::default_pauli(),
            cnot_error: ChannelSpec::Rzz { theta: 0.1 },
            estimator: Estimator::Mean,
            tolerance: 0.03,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InterleavedResult {
    pub gate_set: String,
    pub f_sta: f64,
    pub f_int: f64,
    pub estimate: InterleavedEstimate,
    pub exact: f64,
}

/// Standard plus interleaved experiment on one gate set and its basis.
pub fn interleaved_cnot(gs_name: &str, basis: &str, p: &Table1Params) -> Result<InterleavedResult> {
    let gs = GateSet::by_name(gs_name)?;
    let meas = Measurement::by_name(basis)?;
    let noisy = assign_noise(&gs, &NoiseSpec::uniform(p.gate_noise.clone()), &SpamSpec::default())?;
    let target = gs
        .find_unitary(&gates::cnot01())
        .ok_or_else(|| Error::config(format!("{gs_name} does not contain the CNOT")))?;
    let labels: Vec<String> = gs
        .fidelity
        .as_ref()
        .ok_or_else(|| Error::config(format!("{gs_name} has no fidelity decomposition")))?
        .traces
        .iter()
        .map(|(l, _)| l.clone())
        .collect();

    let sim = Simulator::new(&noisy, &meas, &SequenceMode::Random, None)?;
    let ds = run_experiment(&SequencePlan::random(p.lengths.clone(), p.reps, p.seed), &sim, "table1")?;
    let mode = SequenceMode::Interleaved { target };
    let sim_int = Simulator::new(&noisy, &meas, &mode, Some(&p.cnot_error))?;
    let plan_int = SequencePlan::interleaved(p.lengths.clone(), p.reps, target, p.seed.wrapping_add(1));
    let ds_int = run_experiment(&plan_int, &sim_int, "table1-int")?;

    let mut sta = Vec::new();
    let mut int = Vec::new();
    for l in &labels {
        let probe = ProbeConfig::sector(&gs, l, &meas)?;
        sta.push((l.clone(), fit_probe(&ds, &gs, &probe, p.estimator, FitModel::Single)?.lambda()));
        let probe = ProbeConfig::element(&gs, l, target, &meas)?;
        int.push((l.clone(), fit_probe(&ds_int, &gs, &probe, p.estimator, FitModel::Single)?.lambda()));
    }
    let f_sta = fidelity_from_decays(&gs, &sta)?;
    let f_int = fidelity_from_decays(&gs, &int)?;
    let estimate = interleaved_estimate(f_sta, f_int, 4)?;
    let exact = average_fidelity(&build_channel(&p.cnot_error)?.into_matrix());
    Ok(InterleavedResult { gate_set: gs_name.to_string(), f_sta, f_int, estimate, exact })
}

pub fn table1(p: &Table1Params) -> Result<Bundle> {
    let mut b = Bundle::new(Target::Table1, p)?;
    for (gs, basis) in [("c2", "z"), ("g1", "mixed_zx")] {
        let r = interleaved_cnot(gs, basis, p).map(|r| {
            vec![
                Row::within(format!("{gs} F_est(CNOT)"), r.estimate.point, r.exact, p.tolerance),
                Row::below(format!("{gs} lower bound"), r.estimate.lower, r.exact),
                Row::at_least(format!("{gs} upper bound"), r.estimate.upper, r.exact),
            ]
        });
        b.absorb(gs, r);
    }
    Ok(b)
}

// ---------------------------------------------------------------- table 2

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Table2Params {
    pub lengths: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub estimator: Estimator,
    pub theta: f64,
    /// Standard errors per side of the ε interval.
    pub sigma_multiplier: f64,
}

impl Default for Table2Params {
    fn default() -> Self {
        Table2Params {
            lengths: vec![1, 2, 3, 4, 5, 6],
            reps: 15000,
            seed: 202,
            estimator: Estimator::Mom { groups: None },
            theta: 0.5,
            sigma_multiplier: 2.0,
        }
    }
}

/// Table rows: channel, basis, reference ε, and quoted (minus, plus) bars per component.
pub fn table2_rows(theta: f64) -> Vec<(&'static str, ChannelSpec, &'static str, [f64; 3], [(f64, f64); 3])> {
    vec![
        ("Rxx", ChannelSpec::Rxx { theta }, "z", [0.0, 0.0, 0.068], [(0.002, 0.005), (0.0, 1e-4), (0.002, 0.002)]),
        ("Ryy", ChannelSpec::Ryy { theta }, "z", [0.0, 0.0, 0.068], [(0.0, 0.002), (0.0, 0.003), (0.003, 0.002)]),
        ("Rzz", ChannelSpec::Rzz { theta }, "z", [0.0, 0.0, 0.068], [(0.0, 0.002), (0.002, 0.003), (0.003, 0.003)]),
        (
            "CNOT",
            ChannelSpec::CnotError,
            "mixed_zx",
            [2.0 / 3.0, 2.0 / 3.0, 0.0],
            [(0.069, 0.068), (0.075, 0.074), (0.281, 0.149)],
        ),
    ]
}

/// Sector decays (λ₁|₂, λ₂|₁, λ₁₂) of a channel on C₁×C₁.
pub fn exact_sector_decays(gs: &GateSet, channel: &DMatrix<f64>) -> Result<[f64; 3]> {
    let map = exact_decay_map(gs, channel)?;
    let id = gs.identity_index();
    let get = |s: &str| map.get(s, id).ok_or_else(|| Error::numerical(format!("missing sector {s}")));
    Ok([get("P1")?, get("P2")?, get("P3")?])
}

pub fn table2(p: &Table2Params) -> Result<Bundle> {
    let mut b = Bundle::new(Target::Table2, p)?;
    let gs = GateSet::c1xc1()?;
    for (name, spec, basis, reference, bars) in table2_rows(p.theta) {
        let exact = build_channel(&spec).and_then(|c| {
            let lam = exact_sector_decays(&gs, &c.into_matrix())?;
            epsilon_amplitudes(lam[0], lam[1], lam[2])
        });
        let truth = match exact {
            Ok(e) => e.eps,
            Err(e) => {
                b.absorb(name, Err(e));
                continue;
            }
        };
        b.rows.extend((0..3).map(|i| Row::within(format!("{name} exact ε{}", i + 1), truth[i], reference[i], 1e-3)));

        let mc = (|| -> Result<Vec<Row>> {
            let meas = Measurement::by_name(basis)?;
            let noisy = assign_noise(&gs, &NoiseSpec::uniform(spec.clone()), &SpamSpec::default())?;
            let sim = Simulator::new(&noisy, &meas, &SequenceMode::Random, None)?;
            let ds = run_experiment(&SequencePlan::random(p.lengths.clone(), p.reps, p.seed), &sim, name)?;
            let mut lams = [0.0; 3];
            let mut sig = [0.0; 3];
            for (i, s) in ["P1", "P2", "P3"].iter().enumerate() {
                let f = fit_probe(&ds, &gs, &ProbeConfig::sector(&gs, s, &meas)?, p.estimator, FitModel::Single)?;
                lams[i] = f.lambda();
                sig[i] = f.lambda_sigma();
            }
            let e = epsilon_with_interval(lams, sig, p.sigma_multiplier)?;
            Ok((0..3)
                .map(|i| Row::band(format!("{name} MC ε{}", i + 1), e.estimate.eps[i], truth[i], bars[i].0, bars[i].1))
                .collect())
        })();
        b.absorb(name, mc);
    }
    Ok(b)
}

// ---------------------------------------------------------------- leakage

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeakageParams {
    pub gammas: Vec<f64>,
    pub lengths: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub pauli: ChannelSpec,
    pub estimator: Estimator,
    /// Allowed deviation in combined fit standard errors.
    pub sigmas: f64,
}

impl Default for LeakageParams {
    fn default() -> Self {
        LeakageParams {
            gammas: vec![0.002, 0.005, 0.01, 0.02, 0.03, 0.05],
            lengths: (1..=200).step_by(10).collect(),
            reps: 1000,
            seed: 303,
            pauli: ChannelSpec::default_pauli(),
            estimator: Estimator::Mean,
            sigmas: 3.0,
        }
    }
}

pub fn leakage(p: &LeakageParams) -> Result<Bundle> {
    let mut b = Bundle::new(Target::Leakage, p)?;
    let gs = GateSet::leakage()?;
    let meas = Measurement::by_name("leakage")?;
    for (gi, &gamma) in p.gammas.iter().enumerate() {
        let r = (|| -> Result<Vec<Row>> {
            let spec = ChannelSpec::Composite {
                channels: vec![p.pauli.clone(), ChannelSpec::AmplitudeDamping { gamma: [gamma, gamma] }],
            };
            let (l_true, s_true) = exact_leakage(&build_channel(&spec)?.into_matrix());
            let noisy = assign_noise(&gs, &NoiseSpec::uniform(spec), &SpamSpec::default())?;
            let sim = Simulator::new(&noisy, &meas, &SequenceMode::Random, None)?;
            let plan = SequencePlan::random(p.lengths.clone(), p.reps, p.seed.wrapping_add(gi as u64));
            let ds = run_experiment(&plan, &sim, "leakage")?;
            let mut rows = Vec::new();
            for (block, model, tag) in [("P0", LeakageModel::Projector, "model 1"), ("P0_2", LeakageModel::Signed, "model 2")] {
                let f = fit_probe(&ds, &gs, &ProbeConfig::sector(&gs, block, &meas)?, p.estimator, FitModel::Offset)?;
                let r = leakage_rates(&f, model)?;
                rows.push(Row::within(
                    format!("γ={gamma} L ({tag})"),
                    r.leakage,
                    l_true,
                    p.sigmas * r.leakage_sigma,
                ));
                rows.push(Row::within(
                    format!("γ={gamma} S ({tag})"),
                    r.seepage,
                    s_true,
                    p.sigmas * r.seepage_sigma,
                ));
            }
            Ok(rows)
        })();
        b.absorb(&format!("γ={gamma}"), r);
    }
    Ok(b)
}

// ---------------------------------------------------------------- marginals

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarginalsParams {
    pub lengths: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub estimator: Estimator,
    /// Correlated channel whose marginals are reconstructed.
    pub channel: ChannelSpec,
    /// Tensor-product channel for the crosstalk identity.
    pub product_channel: ChannelSpec,
    pub tolerance: f64,
}

impl Default for MarginalsParams {
    fn default() -> Self {
        MarginalsParams {
            lengths: vec![1, 2, 3, 4, 6],
            reps: 3000,
            seed: 404,
            estimator: Estimator::Mean,
            channel: ChannelSpec::Rzz { theta: 0.5 },
            product_channel: ChannelSpec::Composite {
                channels: vec![ChannelSpec::Rz { theta: [0.2, 0.0] }, ChannelSpec::AmplitudeDamping { gamma: [0.0, 0.02] }],
            },
            tolerance: 0.05,
        }
    }
}

fn mc_marginals(gs: &GateSet, spec: &ChannelSpec, p: &MarginalsParams) -> Result<MarginalSet> {
    let meas = Measurement::by_name("z")?;
    let noisy = assign_noise(gs, &NoiseSpec::uniform(spec.clone()), &SpamSpec::default())?;
    let sim = Simulator::new(&noisy, &meas, &SequenceMode::Random, None)?;
    let ds = run_experiment(&SequencePlan::random(p.lengths.clone(), p.reps, p.seed), &sim, "marginals")?;
    MarginalSet::reconstruct(gs, &mc_decay_map(&ds, gs, &meas, p.estimator)?)
}

fn off_identity(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    (m - DMatrix::identity(n, n)).amax()
}

pub fn marginals(p: &MarginalsParams) -> Result<Bundle> {
    let mut b = Bundle::new(Target::Marginals, p)?;
    let gs = GateSet::c1xc1()?;

    let exact = (|| -> Result<Vec<Row>> {
        let lam = build_channel(&p.product_channel)?.into_matrix();
        let ms = MarginalSet::reconstruct(&gs, &exact_decay_map(&gs, &lam)?)?;
        let d2 = crosstalk_matrices(&ms).delta_r2.ok_or_else(|| Error::numerical("Λ₁⊗Λ₂ is singular"))?;
        let l = exact_sector_decays(&gs, &lam)?;
        Ok(vec![
            Row::within("product noise exact max|δR₂ − 𝟙|", off_identity(&d2), 0.0, 1e-9),
            Row::within("product noise exact δλ", l[2] - l[0] * l[1], 0.0, 1e-9),
        ])
    })();
    b.absorb("exact", exact);

    let mut files = Vec::new();
    let corr = (|| -> Result<Vec<Row>> {
        let truth = MarginalSet::from_channel(&build_channel(&p.channel)?.into_matrix());
        let ms = mc_marginals(&gs, &p.channel, p)?;
        let x = crosstalk_matrices(&ms);
        files.push(("L1.csv".to_string(), matrix_csv(&ms.l1)));
        files.push(("L2.csv".to_string(), matrix_csv(&ms.l2)));
        files.push(("L3.csv".to_string(), matrix_csv(&ms.l3)));
        files.push(("deltaR1.csv".to_string(), matrix_csv(&x.delta_r1)));
        if let Some(d2) = &x.delta_r2 {
            files.push(("deltaR2.csv".to_string(), matrix_csv(d2)));
        }
        // one m=2 record informs one block entry: SE ≈ |P|/√K
        let se = |dim: f64| dim / (p.reps as f64).sqrt();
        let rms = |d: DMatrix<f64>| d.norm() / (d.len() as f64).sqrt();
        Ok(vec![
            Row::within("MC max|Λ₁ − exact|", (&ms.l1 - &truth.l1).amax(), 0.0, p.tolerance),
            Row::within("MC max|Λ₂ − exact|", (&ms.l2 - &truth.l2).amax(), 0.0, p.tolerance),
            Row::within("MC max|Λ₃ − exact|", (&ms.l3 - &truth.l3).amax(), 0.0, p.tolerance),
            Row::below("MC rms|Λ₁ − exact| vs 1.5 SE", rms(&ms.l1 - &truth.l1), 1.5 * se(3.0)),
            Row::below("MC rms|Λ₂ − exact| vs 1.5 SE", rms(&ms.l2 - &truth.l2), 1.5 * se(3.0)),
            Row::below("MC rms|Λ₃ − exact| vs 1.5 SE", rms(&ms.l3 - &truth.l3), 1.5 * se(9.0)),
        ])
    })();
    b.absorb("correlated channel", corr);

    let prod = (|| -> Result<Vec<Row>> {
        let ms = mc_marginals(&gs, &p.product_channel, p)?;
        let d2 = crosstalk_matrices(&ms).delta_r2.ok_or_else(|| Error::numerical("Λ̂₁⊗Λ̂₂ is singular"))?;
        Ok(vec![Row::within("product noise MC max|δR₂ − 𝟙|", off_identity(&d2), 0.0, p.tolerance)])
    })();
    b.absorb("product channel", prod);
    b.files = files;
    Ok(b)
}

// ---------------------------------------------------------------- coverage

pub fn default_coverage_config() -> CoverageConfig {
    CoverageConfig {
        gate_set: "c2".into(),
        noise: NoiseSpec::uniform(ChannelSpec::default_pauli()),
        spam: SpamSpec::default(),
        basis: "z".into(),
        probe: "P1".into(),
        lengths: vec![1, 2, 4, 8, 16, 32],
        ks: vec![5, 10, 20, 50, 100],
        estimators: vec![Estimator::Mean, Estimator::Mom { groups: None }],
        methods: CI_METHODS.to_vec(),
        trials: 100,
        bootstrap: BootstrapOptions { replicates: 1000, ..Default::default() },
        seed: 505,
    }
}

/// One row per cell: coverage against nominal minus three binomial σ.
pub fn coverage(cfg: &CoverageConfig) -> Result<Bundle> {
    let mut b = Bundle::new(Target::Coverage, cfg)?;
    match coverage_study(cfg) {
        Ok(rep) => {
            let nominal = rep.level;
            for c in &rep.cells {
                let floor = nominal - 3.0 * c.binomial_sigma(nominal);
                b.rows.push(Row::at_least(format!("K={} {} {}", c.k, c.estimator, c.method), c.coverage, floor));
            }
            b.files.push(("coverage.csv".into(), rep.to_csv()));
        }
        Err(e) => b.absorb("coverage", Err(e)),
    }
    Ok(b)
}

/// Run a target with parameters given as JSON (missing fields take defaults).
pub fn run(target: Target, params: Option<&serde_json::Value>, seed: Option<u64>) -> Result<Bundle> {
    fn parse<T: for<'de> Deserialize<'de> + Default>(v: Option<&serde_json::Value>) -> Result<T> {
        match v {
            Some(v) => crate::config::from_json_str(&v.to_string(), "reproduce parameters"),
            None => Ok(T::default()),
        }
    }
    match target {
        Target::Table1 => {
            let mut p: Table1Params = parse(params)?;
            if let Some(s) = seed {
                p.seed = s;
            }
            table1(&p)
        }
        Target::Table2 => {
            let mut p: Table2Params = parse(params)?;
            if let Some(s) = seed {
                p.seed = s;
            }
            table2(&p)
        }
        Target::Leakage => {
            let mut p: LeakageParams = parse(params)?;
            if let Some(s) = seed {
                p.seed = s;
            }
            leakage(&p)
        }
        Target::Marginals => {
            let mut p: MarginalsParams = parse(params)?;
            if let Some(s) = seed {
                p.seed = s;
            }
            marginals(&p)
        }
        Target::Coverage => {
            let mut cfg = match params {
                Some(v) => crate::config::from_json_str(&v.to_string(), "coverage parameters")?,
                None => default_coverage_config(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            coverage(&cfg)
        }
    }
}
