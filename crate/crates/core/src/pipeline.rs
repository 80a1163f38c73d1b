//! End-to-end steps: simulate from a config, post-process a dataset,
//! fit stored sequence functions.

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::estimation::{
    correlations, estimate_from_correlations, fidelity_from_decays, fit_decay, fit_points, leakage_rates, BlockRep,
    CompiledProbe, DecayFit, Estimator, FitModel, LeakageModel, LeakageRates, PerM, ProbeConfig, Weighting,
};
use crate::groups::GateSet;
use crate::marginals::{marginal_report, mc_decay_map, MarginalReport};
use crate::measurement::Measurement;
use crate::noise::assign_noise;
use crate::simulator::{run_experiment, SequenceMode, ShadowDataset, Simulator};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Simulate the configured experiment; the header carries the config hash.
pub fn simulate(cfg: &ExperimentConfig, gs: &GateSet) -> Result<ShadowDataset> {
    cfg.check()?;
    if gs.name != cfg.gate_set {
        return Err(Error::config(format!("config names gate set {} but {} was supplied", cfg.gate_set, gs.name)));
    }
    let meas = Measurement::by_name(&cfg.basis)?;
    let noisy = assign_noise(gs, &cfg.noise, &cfg.spam)?;
    let plan = cfg.sequence_plan(gs)?;
    let target_noise = cfg.plan.interleave.as_ref().and_then(|i| i.noise.as_ref());
    let sim = Simulator::new(&noisy, &meas, &plan.mode, target_noise)?;
    let mut ds = run_experiment(&plan, &sim, &cfg.noise_hash()?)?;
    ds.header.config_hash = Some(cfg.hash()?);
    Ok(ds)
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProbeSelection {
    Block(String),
    Element { block: String, element: usize },
    AllBlocks,
    AllLocalCliffords,
}

pub fn parse_probe(gs: &GateSet, s: &str) -> Result<ProbeSelection> {
    match s {
        "all" => return Ok(ProbeSelection::AllBlocks),
        "all-local-cliffords" => return Ok(ProbeSelection::AllLocalCliffords),
        _ => {}
    }
    let valid = || gs.blocks.iter().map(|b| b.label.as_str()).collect::<Vec<_>>().join(", ");
    if let Some((block, el)) = s.split_once(":g") {
        gs.block(block).map_err(|_| Error::config(format!("probe {s}: unknown block '{block}'; valid: {}", valid())))?;
        let element: usize = el.parse().map_err(|_| Error::config(format!("probe {s}: element must be an index")))?;
        if element >= gs.order() {
            return Err(Error::config(format!("probe {s}: element {element} out of range ({})", gs.order())));
        }
        return Ok(ProbeSelection::Element { block: block.into(), element });
    }
    gs.block(s)
        .map_err(|_| Error::config(format!("unknown probe '{s}' for {}; valid: {}, all, all-local-cliffords", gs.name, valid())))?;
    Ok(ProbeSelection::Block(s.into()))
}

/// Probe for a single block or element selection on this dataset.
pub fn probe_config(ds: &ShadowDataset, gs: &GateSet, meas: &Measurement, sel: &ProbeSelection) -> Result<ProbeConfig> {
    match sel {
        ProbeSelection::Block(b) => match ds.header.plan.mode {
            // interleaved data pairs the block with P R(U) P
            SequenceMode::Interleaved { target } => {
                let mut p = ProbeConfig::element(gs, b, target, meas)?;
                p.label = b.clone();
                Ok(p)
            }
            SequenceMode::Random => ProbeConfig::sector(gs, b, meas),
        },
        ProbeSelection::Element { block, element } => ProbeConfig::element(gs, block, *element, meas),
        _ => Err(Error::config("expected a single block or element probe")),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Derived {
    pub lambda: Option<f64>,
    pub lambda_sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leakage: Option<LeakageRates>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub probe: String,
    pub block: String,
    pub c0: f64,
    pub estimator: String,
    pub per_m: Vec<PerM>,
    pub fit: Option<DecayFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_error: Option<String>,
    pub derived: Derived,
}

#[derive(Clone, Debug, Serialize)]
pub struct DatasetSummary {
    pub gate_set: String,
    pub gate_set_hash: String,
    pub basis: String,
    pub mode: SequenceMode,
    pub records: usize,
    pub noise_hash: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportDerived {
    /// Average gate-set fidelity from the sector decays (interleaved data:
    /// fidelity of the interleaved composite).
    pub fidelity: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PostprocessReport {
    pub version: String,
    pub config_hash: Option<String>,
    pub dataset: DatasetSummary,
    pub estimator: Estimator,
    pub probes: Vec<ProbeReport>,
    pub derived: ReportDerived,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marginals: Option<MarginalReport>,
}

fn leakage_model(block: &str) -> Option<LeakageModel> {
    match block {
        "P0" => Some(LeakageModel::Projector),
        "P0_2" => Some(LeakageModel::Signed),
        _ => None,
    }
}

/// Post-process one dataset. Refuses datasets whose gate-set hash differs
/// from the locally generated group.
pub fn postprocess(
    ds: &ShadowDataset,
    gs: &GateSet,
    probes: &[String],
    estimator: Estimator,
    model: FitModel,
    weighting: Weighting,
) -> Result<PostprocessReport> {
    ds.validate(gs)?;
    let meas = Measurement::by_name(&ds.header.basis)?;
    let mut selections = Vec::new();
    for p in probes {
        match parse_probe(gs, p)? {
            ProbeSelection::AllBlocks => {
                selections.extend(gs.blocks.iter().map(|b| ProbeSelection::Block(b.label.clone())))
            }
            s => selections.push(s),
        }
    }
    let mut reports = Vec::new();
    let mut marginals = None;
    for sel in &selections {
        let probe = match sel {
            ProbeSelection::AllLocalCliffords => {
                let map = mc_decay_map(ds, gs, &meas, estimator)?;
                marginals = Some(marginal_report(gs, &map)?);
                continue;
            }
            s => probe_config(ds, gs, &meas, s)?,
        };
        let rep = BlockRep::new(gs, &probe.block);
        let cp = CompiledProbe::new(&probe, &rep)?;
        let c = correlations(ds, &cp)?;
        let est = estimate_from_correlations(&probe.label, &c, estimator)?;
        let (fit, fit_error) = match fit_decay(&est, model, weighting) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let leakage = match (&fit, leakage_model(&probe.block_label)) {
            (Some(f), Some(m)) if f.model == FitModel::Offset && gs.name == "leakage" => leakage_rates(f, m).ok(),
            _ => None,
        };
        reports.push(ProbeReport {
            probe: probe.label.clone(),
            block: probe.block_label.clone(),
            c0: probe.c0,
            estimator: estimator.name().to_string(),
            per_m: est.per_m,
            derived: Derived {
                lambda: fit.as_ref().map(|f| f.lambda()),
                lambda_sigma: fit.as_ref().map(|f| f.lambda_sigma()),
                leakage,
            },
            fit,
            fit_error,
        });
    }

    let lambdas: Vec<(String, f64)> = reports
        .iter()
        .filter(|r| r.probe == r.block)
        .filter_map(|r| r.derived.lambda.map(|l| (r.block.clone(), l)))
        .collect();
    let fidelity = fidelity_from_decays(gs, &lambdas).ok();
    let h = &ds.header;
    Ok(PostprocessReport {
        version: ARTIFACT_VERSION.to_string(),
        config_hash: h.config_hash.clone(),
        dataset: DatasetSummary {
            gate_set: h.gate_set.clone(),
            gate_set_hash: h.gate_set_hash.clone(),
            basis: h.basis.clone(),
            mode: h.plan.mode.clone(),
            records: ds.records.len(),
            noise_hash: h.noise_hash.clone(),
        },
        estimator,
        probes: reports,
        derived: ReportDerived { fidelity },
        marginals,
    })
}

#[derive(Clone, Debug, Deserialize)]
pub struct PointInput {
    pub m: usize,
    pub k: f64,
    #[serde(default)]
    pub stderr: Option<f64>,
}

/// Sequence-function points to fit, e.g. one probe entry of a report.
#[derive(Clone, Debug, Deserialize)]
pub struct FitInput {
    pub per_m: Vec<PointInput>,
}

pub fn fit_input(input: &FitInput, model: FitModel, weighting: Weighting) -> Result<DecayFit> {
    let ms: Vec<usize> = input.per_m.iter().map(|p| p.m).collect();
    let ys: Vec<f64> = input.per_m.iter().map(|p| p.k).collect();
    let w = match weighting {
        Weighting::Uniform => None,
        Weighting::InverseVariance => Some(
            input
                .per_m
                .iter()
                .map(|p| match p.stderr {
                    Some(s) if s > 0.0 => Ok(1.0 / (s * s)),
                    _ => Err(Error::config(format!("inverse-variance weighting needs a positive stderr at m={}", p.m))),
                })
                .collect::<Result<Vec<f64>>>()?,
        ),
    };
    fit_points(model, &ms, &ys, w.as_deref(), None)
}

#[derive(Clone, Debug, Serialize)]
pub struct ElementFile {
    /// Row-major.
    pub ptm: Vec<Vec<f64>>,
    pub cnot_cost: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SectorFile {
    pub label: String,
    pub indices: Vec<usize>,
    pub dim: usize,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct GateSetFile {
    pub version: String,
    pub name: String,
    pub order: usize,
    pub content_hash: String,
    pub cnot_histogram: std::collections::BTreeMap<usize, usize>,
    pub sectors: Vec<SectorFile>,
    pub blocks: Vec<crate::groups::Block>,
    pub elements: Vec<ElementFile>,
}

pub fn gate_set_file(gs: &GateSet) -> GateSetFile {
    let rows = |m: &nalgebra::DMatrix<f64>| (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
    GateSetFile {
        version: ARTIFACT_VERSION.to_string(),
        name: gs.name.clone(),
        order: gs.order(),
        content_hash: gs.content_hash().to_string(),
        cnot_histogram: gs.cnot_cost_histogram(),
        sectors: gs
            .sectors
            .iter()
            .map(|s| SectorFile { label: s.label.clone(), indices: s.indices.clone(), dim: s.dim, multiplicity: s.multiplicity })
            .collect(),
        blocks: gs.blocks.clone(),
        elements: gs.elements.iter().map(|e| ElementFile { ptm: rows(&e.ptm), cnot_cost: e.cnot_cost }).collect(),
    }
}
