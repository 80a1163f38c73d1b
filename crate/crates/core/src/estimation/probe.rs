//! Probe operators, their normalization and compiled per-record evaluation.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::GateSet;
use crate::measurement::Measurement;
use crate::ptm::{coordinate_projector, max_abs_diff};
use crate::simulator::ShadowDataset;
use crate::sparse::SparseMatrix;

const SPARSE_TOL: f64 = 1e-14;

/// A probe `A` acting on one block of the gate-set representation.
#[derive(Clone, Debug)]
pub struct ProbeConfig {
    pub label: String,
    pub block_label: String,
    pub block: Vec<usize>,
    /// Full 16×16 probe, supported on the block.
    pub probe: DMatrix<f64>,
    pub c0: f64,
    pub measurement: Measurement,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeSummary {
    pub label: String,
    pub block: String,
    pub c0: f64,
    pub basis: String,
}

impl ProbeConfig {
    pub fn new(gs: &GateSet, label: &str, block_label: &str, probe: DMatrix<f64>, meas: &Measurement) -> Result<ProbeConfig> {
        let block = gs.block(block_label)?.indices.clone();
        let d2 = gs.ptm_dim();
        if probe.nrows() != d2 || probe.ncols() != d2 {
            return Err(Error::config(format!(
                "probe {label} is {}x{}, gate set {} needs {d2}x{d2}",
                probe.nrows(),
                probe.ncols(),
                gs.name
            )));
        }
        let p = coordinate_projector(d2, &block);
        if max_abs_diff(&(&p * &probe * &p), &probe) > 1e-12 {
            return Err(Error::config(format!("probe {label} is not supported on block {block_label}")));
        }
        let c0 = normalization_constant(gs, &block, meas)?;
        Ok(ProbeConfig {
            label: label.to_string(),
            block_label: block_label.to_string(),
            block,
            probe,
            c0,
            measurement: meas.clone(),
        })
    }

    /// `A = P_i`.
    pub fn sector(gs: &GateSet, block_label: &str, meas: &Measurement) -> Result<ProbeConfig> {
        let p = coordinate_projector(gs.ptm_dim(), &gs.block(block_label)?.indices);
        Self::new(gs, block_label, block_label, p, meas)
    }

    /// `A = P_i R(g) P_i` for a gate-set element; its decay is `λ(g†, Λ)` and,
    /// with `g` interleaved, the decay of `Λ_g Λ`.
    pub fn element(gs: &GateSet, block_label: &str, element: usize, meas: &Measurement) -> Result<ProbeConfig> {
        if element >= gs.order() {
            return Err(Error::config(format!("element {element} out of range for {}", gs.name)));
        }
        let p = coordinate_projector(gs.ptm_dim(), &gs.block(block_label)?.indices);
        let a = &p * &gs.elements[element].ptm * &p;
        Self::new(gs, &format!("{block_label}:g{element}"), block_label, a, meas)
    }

    /// Probe restricted to block coordinates.
    pub fn block_matrix(&self) -> DMatrix<f64> {
        let n = self.block.len();
        DMatrix::from_fn(n, n, |i, j| self.probe[(self.block[i], self.block[j])])
    }

    /// `Tr(P Aᵀ P Λ)/|P|`, the decay this probe sees for a multiplicity-free
    /// irreducible block under effective noise `Λ`.
    pub fn twirl_decay(&self, channel: &DMatrix<f64>) -> f64 {
        let mut t = 0.0;
        for &k in &self.block {
            for &l in &self.block {
                t += self.probe[(k, l)] * channel[(k, l)];
            }
        }
        t / self.block.len() as f64
    }

    pub fn summary(&self) -> ProbeSummary {
        ProbeSummary {
            label: self.label.clone(),
            block: self.block_label.clone(),
            c0: self.c0,
            basis: self.measurement.basis.name().to_string(),
        }
    }
}

/// `1 / k_A(1)` of the noiseless configuration; `A` never enters at `m = 1`.
pub fn normalization_constant(gs: &GateSet, block: &[usize], meas: &Measurement) -> Result<f64> {
    if meas.rho.len() != gs.ptm_dim() {
        return Err(Error::config(format!(
            "the {} measurement is {}-dimensional but gate set {} acts on {}",
            meas.basis.name(),
            meas.rho.len(),
            gs.name,
            gs.ptm_dim()
        )));
    }
    let mut k1 = 0.0;
    for e in &gs.elements {
        let full = &e.ptm * &meas.rho;
        for ex in &meas.povm {
            let mut b = 0.0;
            for &i in block {
                for &j in block {
                    b += ex[i] * e.ptm[(i, j)] * meas.rho[j];
                }
            }
            k1 += b * ex.dot(&full);
        }
    }
    k1 /= gs.order() as f64;
    if k1.abs() < 1e-12 {
        return Err(Error::config(format!(
            "block {:?} has no overlap with the {} measurement; the probe cannot be normalized",
            block,
            meas.basis.name()
        )));
    }
    Ok(1.0 / k1)
}

/// Block restrictions `P R(g) P` of every element, in sparse form.
#[derive(Clone, Debug)]
pub struct BlockRep {
    pub indices: Vec<usize>,
    elements: Vec<SparseMatrix>,
}

impl BlockRep {
    pub fn new(gs: &GateSet, indices: &[usize]) -> BlockRep {
        let n = indices.len();
        let elements = gs
            .elements
            .iter()
            .map(|e| {
                let b = DMatrix::from_fn(n, n, |i, j| e.ptm[(indices[i], indices[j])]);
                SparseMatrix::from_dense(&b, SPARSE_TOL)
            })
            .collect();
        BlockRep { indices: indices.to_vec(), elements }
    }
}

/// A probe ready for fast evaluation of `f_A` on many records.
#[derive(Clone, Debug)]
pub struct CompiledProbe<'a> {
    pub label: String,
    rep: &'a BlockRep,
    a: SparseMatrix,
    povm: Vec<Vec<f64>>,
    rho: Vec<f64>,
    c0: f64,
    labels: Vec<String>,
}

impl<'a> CompiledProbe<'a> {
    pub fn new(probe: &ProbeConfig, rep: &'a BlockRep) -> Result<CompiledProbe<'a>> {
        if rep.indices != probe.block {
            return Err(Error::config(format!("probe {} and block representation disagree", probe.label)));
        }
        let pick = |v: &nalgebra::DVector<f64>| probe.block.iter().map(|&i| v[i]).collect::<Vec<f64>>();
        Ok(CompiledProbe {
            label: probe.label.clone(),
            rep,
            a: SparseMatrix::from_dense(&probe.block_matrix(), SPARSE_TOL),
            povm: probe.measurement.povm.iter().map(pick).collect(),
            rho: pick(&probe.measurement.rho),
            c0: probe.c0,
            labels: probe.measurement.labels.clone(),
        })
    }

    /// `c⁰ ⟨E_x| R_i(g_m) A R_i(g_{m-1}) ⋯ A R_i(g_1) |ρ⟩`, ideal gates only.
    pub fn evaluate(&self, seq: &[usize], outcome: usize, scratch: &mut (Vec<f64>, Vec<f64>)) -> f64 {
        let (v, w) = scratch;
        v.clear();
        v.extend_from_slice(&self.rho);
        w.resize(v.len(), 0.0);
        for (j, &g) in seq.iter().enumerate() {
            if j > 0 {
                self.a.apply(v, w);
                std::mem::swap(v, w);
            }
            self.rep.elements[g].apply(v, w);
            std::mem::swap(v, w);
        }
        let e = &self.povm[outcome];
        self.c0 * e.iter().zip(v.iter()).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn outcome_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Correlation values grouped by sequence length (dataset order within each m).
#[derive(Clone, Debug, PartialEq)]
pub struct Correlations {
    pub lengths: Vec<usize>,
    pub values: Vec<Vec<f64>>,
}

/// Outcome index of every record in the dataset.
pub fn outcome_indices(ds: &ShadowDataset, labels: &[String]) -> Result<Vec<usize>> {
    let map: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    ds.records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            map.get(r.x.as_str()).copied().ok_or_else(|| {
                Error::config(format!(
                    "record {i}: outcome '{}' does not belong to the probe measurement ({})",
                    r.x,
                    labels.join(", ")
                ))
            })
        })
        .collect()
}

/// `f_A` for every record of the dataset.
pub fn correlations(ds: &ShadowDataset, probe: &CompiledProbe) -> Result<Correlations> {
    let outcomes = outcome_indices(ds, &probe.labels)?;
    Ok(correlations_with(ds, probe, &outcomes))
}

pub fn correlations_with(ds: &ShadowDataset, probe: &CompiledProbe, outcomes: &[usize]) -> Correlations {
    let lengths = ds.lengths();
    let slot: HashMap<usize, usize> = lengths.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let mut values = vec![Vec::new(); lengths.len()];
    let mut scratch = (Vec::new(), Vec::new());
    for (r, &x) in ds.records.iter().zip(outcomes) {
        values[slot[&r.m]].push(probe.evaluate(&r.seq, x, &mut scratch));
    }
    Correlations { lengths, values }
}

/// Single-record `f_A`.
pub fn sequence_correlation(gs: &GateSet, seq: &[usize], outcome: &str, probe: &ProbeConfig) -> Result<f64> {
    if let Some(g) = seq.iter().find(|&&g| g >= gs.order()) {
        return Err(Error::config(format!("gate index {g} out of range")));
    }
    let rep = BlockRep::new(gs, &probe.block);
    let c = CompiledProbe::new(probe, &rep)?;
    let x = c
        .outcome_index(outcome)
        .ok_or_else(|| Error::config(format!("outcome '{outcome}' is not a label of the probe measurement")))?;
    Ok(c.evaluate(seq, x, &mut (Vec::new(), Vec::new())))
}
