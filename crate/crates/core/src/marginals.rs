//! Unital noise marginals from per-local-Clifford decays, crosstalk
//! matrices, Pauli error rates and correlated ε-amplitudes.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::probe::{correlations_with, outcome_indices};
use crate::estimation::{
    estimate_from_correlations, fit_decay, BlockRep, CompiledProbe, Estimator, FitModel, ProbeConfig, Weighting,
};
use crate::groups::GateSet;
use crate::measurement::Measurement;
use crate::ptm::{matrix_rows, paulis_commute};
use crate::simulator::ShadowDataset;

pub const SECTORS: [&str; 3] = ["P1", "P2", "P3"];
const C1: f64 = 6.0 / 5.0;
const C2: f64 = 4.0 / 5.0;
/// Negative ε smaller than this in magnitude is treated as zero.
pub const EPS_THRESHOLD: f64 = 0.1;

fn require_c1xc1(gs: &GateSet) -> Result<()> {
    if gs.name != "c1xc1" {
        return Err(Error::config(format!("marginal reconstruction needs the c1xc1 gate set, got {}", gs.name)));
    }
    Ok(())
}

fn acts_trivially_on(gs: &GateSet, e: usize, idx: &[usize]) -> bool {
    idx.iter().all(|&i| (gs.elements[e].ptm[(i, i)] - 1.0).abs() < 1e-12)
}

/// Element indices of ℂ₁ = {C⊗𝟙}, ℂ₂ = {𝟙⊗C} and ℂ₃ = all of C₁×C₁.
///
/// ℂ₃ keeps 𝟙⊗𝟙: the reconstruction sum is a frame identity over the whole
/// group and is not exact without it.
pub fn local_clifford_sets(gs: &GateSet) -> Result<[Vec<usize>; 3]> {
    require_c1xc1(gs)?;
    let n = gs.order();
    let c1 = (0..n).filter(|&e| acts_trivially_on(gs, e, &[1, 2, 3])).collect();
    let c2 = (0..n).filter(|&e| acts_trivially_on(gs, e, &[4, 5, 6])).collect();
    Ok([c1, c2, (0..n).collect()])
}

/// Decay per (sector, element), with optional fit standard errors.
#[derive(Clone, Debug, Default, Serialize)]
pub struct DecayMap {
    pub decays: BTreeMap<String, BTreeMap<usize, f64>>,
    pub sigmas: BTreeMap<String, BTreeMap<usize, f64>>,
}

impl DecayMap {
    pub fn get(&self, sector: &str, element: usize) -> Option<f64> {
        self.decays.get(sector).and_then(|m| m.get(&element)).copied()
    }

    pub fn len(&self) -> usize {
        self.decays.values().map(|m| m.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn insert(&mut self, sector: &str, element: usize, lam: f64, sigma: Option<f64>) {
        self.decays.entry(sector.to_string()).or_default().insert(element, lam);
        if let Some(s) = sigma {
            self.sigmas.entry(sector.to_string()).or_default().insert(element, s);
        }
    }
}

fn block_of(gs: &GateSet, e: usize, idx: &[usize]) -> DMatrix<f64> {
    let n = idx.len();
    DMatrix::from_fn(n, n, |i, j| gs.elements[e].ptm[(idx[i], idx[j])])
}

/// `λ(C†,Λ) = Tr(P R(C)ᵀ P Λ)/|P|` for every element of every ℂᵢ.
pub fn exact_decay_map(gs: &GateSet, channel: &DMatrix<f64>) -> Result<DecayMap> {
    let sets = local_clifford_sets(gs)?;
    let mut map = DecayMap::default();
    for (s, set) in SECTORS.iter().zip(&sets) {
        let idx = &gs.block(s)?.indices;
        for &e in set {
            let mut t = 0.0;
            for &k in idx {
                for &l in idx {
                    t += gs.elements[e].ptm[(k, l)] * channel[(k, l)];
                }
            }
            map.insert(s, e, t / idx.len() as f64, None);
        }
    }
    Ok(map)
}

/// Fit one decay per (sector, element) probe from a single dataset.
pub fn mc_decay_map(ds: &ShadowDataset, gs: &GateSet, meas: &Measurement, estimator: Estimator) -> Result<DecayMap> {
    let sets = local_clifford_sets(gs)?;
    ds.validate(gs)?;
    if ds.header.basis != meas.basis.name() {
        return Err(Error::config(format!(
            "dataset basis {} differs from requested {}",
            ds.header.basis,
            meas.basis.name()
        )));
    }
    let outcomes = outcome_indices(ds, &meas.labels)?;
    let mut map = DecayMap::default();
    for (s, set) in SECTORS.iter().zip(&sets) {
        let block = gs.block(s)?;
        let rep = BlockRep::new(gs, &block.indices);
        for &e in set {
            let probe = ProbeConfig::element(gs, s, e, meas)?;
            let cp = CompiledProbe::new(&probe, &rep)?;
            let c = correlations_with(ds, &cp, &outcomes);
            let est = estimate_from_correlations(&probe.label, &c, estimator)?;
            let fit = fit_decay(&est, FitModel::Single, Weighting::Uniform)
                .map_err(|err| Error::numerical(format!("probe {}: {err}", probe.label)))?;
            map.insert(s, e, fit.lambda(), Some(fit.lambda_sigma()));
        }
    }
    Ok(map)
}

/// `Λᵢ = (|Pᵢ|²/|ℂᵢ|) Σ_C λ_C · Pᵢ C Pᵢ`.
pub fn reconstruct_marginal(gs: &GateSet, sector: &str, set: &[usize], decays: &DecayMap) -> Result<DMatrix<f64>> {
    let idx = &gs.block(sector)?.indices;
    let n = idx.len();
    let mut acc = DMatrix::zeros(n, n);
    for &e in set {
        let lam = decays
            .get(sector, e)
            .ok_or_else(|| Error::config(format!("decay map lacks element {e} for sector {sector}")))?;
        acc += block_of(gs, e, idx) * lam;
    }
    Ok(acc * ((n * n) as f64 / set.len() as f64))
}

#[derive(Clone, Debug)]
pub struct MarginalSet {
    pub l1: DMatrix<f64>,
    pub l2: DMatrix<f64>,
    pub l3: DMatrix<f64>,
}

impl MarginalSet {
    pub fn reconstruct(gs: &GateSet, decays: &DecayMap) -> Result<MarginalSet> {
        let sets = local_clifford_sets(gs)?;
        Ok(MarginalSet {
            l1: reconstruct_marginal(gs, "P1", &sets[0], decays)?,
            l2: reconstruct_marginal(gs, "P2", &sets[1], decays)?,
            l3: reconstruct_marginal(gs, "P3", &sets[2], decays)?,
        })
    }

    /// Exact blocks `Pᵢ Λ Pᵢ`.
    pub fn from_channel(channel: &DMatrix<f64>) -> MarginalSet {
        let pick = |idx: &[usize]| DMatrix::from_fn(idx.len(), idx.len(), |i, j| channel[(idx[i], idx[j])]);
        MarginalSet { l1: pick(&[4, 5, 6]), l2: pick(&[1, 2, 3]), l3: pick(&(7..16).collect::<Vec<_>>()) }
    }

    /// Blocks on their native τ positions, 1 in the τ₀ slot, zero elsewhere.
    pub fn full(&self) -> DMatrix<f64> {
        let mut f = DMatrix::zeros(16, 16);
        f[(0, 0)] = 1.0;
        let mut put = |b: &DMatrix<f64>, idx: &[usize]| {
            for (i, &a) in idx.iter().enumerate() {
                for (j, &c) in idx.iter().enumerate() {
                    f[(a, c)] = b[(i, j)];
                }
            }
        };
        put(&self.l1, &[4, 5, 6]);
        put(&self.l2, &[1, 2, 3]);
        put(&self.l3, &(7..16).collect::<Vec<_>>());
        f
    }

    /// Largest entry magnitude; CPTP noise keeps it ≤ 1.
    pub fn max_entry(&self) -> f64 {
        [&self.l1, &self.l2, &self.l3].iter().map(|m| m.amax()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct CrosstalkMatrices {
    pub delta_r1: DMatrix<f64>,
    /// `None` when `Λ₁⊗Λ₂` is numerically singular.
    pub delta_r2: Option<DMatrix<f64>>,
    pub condition_number: f64,
}

/// `δR₁ = |Λ₃ − Λ₁⊗Λ₂|` and `δR₂ = |(Λ₁⊗Λ₂)⁻¹ Λ₃|`, entrywise.
pub fn crosstalk_matrices(ms: &MarginalSet) -> CrosstalkMatrices {
    let prod = ms.l1.kronecker(&ms.l2);
    let delta_r1 = (&ms.l3 - &prod).abs();
    let sv = prod.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let condition_number = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let delta_r2 = if condition_number < 1e12 { prod.try_inverse().map(|inv| (inv * &ms.l3).abs()) } else { None };
    CrosstalkMatrices { delta_r1, delta_r2, condition_number }
}

#[derive(Clone, Debug, Serialize)]
pub struct PauliRates {
    /// Projected onto the probability simplex.
    pub rates: Vec<f64>,
    pub raw: Vec<f64>,
    /// Sum of negative parts before projection.
    pub negativity: f64,
}

/// Pauli error probabilities of the Pauli-twirled full marginal.
pub fn pauli_error_rates(full: &DMatrix<f64>) -> Result<PauliRates> {
    if full.nrows() != 16 || full.ncols() != 16 {
        return Err(Error::config("Pauli rates need a 16×16 PTM"));
    }
    let twirled = pauli_twirl(full);
    let raw: Vec<f64> = (0..16)
        .map(|a| {
            (0..16)
                .map(|b| if paulis_commute(2, a, b) { twirled[(b, b)] } else { -twirled[(b, b)] })
                .sum::<f64>()
                / 16.0
        })
        .collect();
    let negativity = raw.iter().filter(|p| **p < 0.0).map(|p| -p).sum();
    Ok(PauliRates { rates: project_simplex(&raw), raw, negativity })
}

/// Average of `R(P) Λ R(P)` over the 16 two-qubit Paulis: keeps the diagonal.
pub fn pauli_twirl(ptm: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(ptm.nrows(), ptm.ncols());
    let n = ptm.nrows();
    for a in 0..16 {
        // R(P_a) is diagonal with ±1 by commutation
        let s: Vec<f64> = (0..n).map(|i| if paulis_commute(2, a, i) { 1.0 } else { -1.0 }).collect();
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += s[i] * ptm[(i, j)] * s[j];
            }
        }
    }
    out / 16.0
}

/// Euclidean projection onto {p ≥ 0, Σp = 1} by sorting and thresholding.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (i, x) in u.iter().enumerate() {
        css += x;
        let t = (css - 1.0) / (i + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Epsilon {
    pub eps: [f64; 3],
    /// Which components were set to zero by the threshold rule.
    pub thresholded: [bool; 3],
    /// Forward-map residuals of the (unthresholded) solution.
    pub residual: f64,
}

fn threshold(e: f64) -> (f64, bool) {
    if e < 0.0 && e.abs() < EPS_THRESHOLD {
        (0.0, true)
    } else {
        (e, false)
    }
}

/// Forward map `(ε₁, ε₂, ε₃) ↦ (λ_{1|2}, λ_{2|1}, λ₁₂)`.
pub fn epsilon_forward(eps: [f64; 3]) -> [f64; 3] {
    let [e1, e2, e3] = eps;
    [(1.0 - e1) * (1.0 - C1 * e3), (1.0 - e2) * (1.0 - C1 * e3), (1.0 - e1) * (1.0 - e2) * (1.0 - C2 * e3)]
}

/// Invert the correlated-decay reparametrization, ε₂ first.
pub fn epsilon_amplitudes(l1_given2: f64, l2_given1: f64, l12: f64) -> Result<Epsilon> {
    let (a, b, c) = (l1_given2, l2_given1, l12);
    if a <= 0.0 || b <= 0.0 {
        return Err(Error::numerical(format!("ε inversion needs positive decays, got ({a}, {b}, {c})")));
    }
    // c = (a/(3b)) v² + (2a/3) v with v = 1 − ε₂ (c₂/c₁ = 2/3)
    let qa = a / (3.0 * b);
    let qb = 2.0 * a / 3.0;
    let disc = qb * qb + 4.0 * qa * c;
    if disc < 0.0 {
        return Err(Error::numerical(format!("no real ε solution for decays ({a}, {b}, {c}); discriminant {disc:.3e}")));
    }
    let v = (-qb + disc.sqrt()) / (2.0 * qa);
    let raw2 = 1.0 - v;
    let (e2, t2) = threshold(raw2);
    let v = 1.0 - e2;
    let w1 = b / v;
    let raw3 = (1.0 - w1) / C1;
    let raw1 = 1.0 - a / w1;
    let (e3, t3) = threshold(raw3);
    let (e1, t1) = threshold(raw1);
    let f = epsilon_forward([raw1, raw2, raw3]);
    let residual = ((f[0] - a).powi(2) + (f[1] - b).powi(2) + (f[2] - c).powi(2)).sqrt();
    Ok(Epsilon { eps: [e1, e2, e3], thresholded: [t1, t2, t3], residual })
}

#[derive(Clone, Debug, Serialize)]
pub struct EpsilonInterval {
    pub estimate: Epsilon,
    pub lower: [f64; 3],
    pub upper: [f64; 3],
}

/// ε with error bars from mapping the corners of the `λ ± k·σ` box.
pub fn epsilon_with_interval(lams: [f64; 3], sigmas: [f64; 3], k: f64) -> Result<EpsilonInterval> {
    let estimate = epsilon_amplitudes(lams[0], lams[1], lams[2])?;
    let mut lower = estimate.eps;
    let mut upper = estimate.eps;
    for corner in 0..8 {
        let l: Vec<f64> = (0..3)
            .map(|i| {
                let sgn = if corner >> i & 1 == 1 { 1.0 } else { -1.0 };
                lams[i] + sgn * k * sigmas[i]
            })
            .collect();
        if let Ok(e) = epsilon_amplitudes(l[0], l[1], l[2]) {
            for i in 0..3 {
                lower[i] = lower[i].min(e.eps[i]);
                upper[i] = upper[i].max(e.eps[i]);
            }
        }
    }
    Ok(EpsilonInterval { estimate, lower, upper })
}

#[derive(Clone, Debug, Serialize)]
pub struct MarginalReport {
    pub blocks: BTreeMap<String, Vec<Vec<f64>>>,
    #[serde(rename = "deltaR1")]
    pub delta_r1: Vec<Vec<f64>>,
    #[serde(rename = "deltaR2")]
    pub delta_r2: Option<Vec<Vec<f64>>>,
    pub pauli_rates: PauliRates,
    pub epsilon: Option<EpsilonInterval>,
    pub diagnostics: MarginalDiagnostics,
}

#[derive(Clone, Debug, Serialize)]
pub struct MarginalDiagnostics {
    pub negativity: f64,
    pub condition_number: f64,
    pub max_entry: f64,
    pub decay_count: usize,
}

/// Everything derived from a decay map. ε uses the sector decays
/// (identity element) and their fit σ when present.
pub fn marginal_report(gs: &GateSet, decays: &DecayMap) -> Result<MarginalReport> {
    let ms = MarginalSet::reconstruct(gs, decays)?;
    let x = crosstalk_matrices(&ms);
    let rates = pauli_error_rates(&ms.full())?;
    let id = gs.identity_index();
    let lam = |s: &str| decays.get(s, id).unwrap_or(f64::NAN);
    let sig = |s: &str| decays.sigmas.get(s).and_then(|m| m.get(&id)).copied().unwrap_or(0.0);
    let epsilon = epsilon_with_interval([lam("P1"), lam("P2"), lam("P3")], [sig("P1"), sig("P2"), sig("P3")], 2.0).ok();
    let mut blocks = BTreeMap::new();
    blocks.insert("P1".to_string(), matrix_rows(&ms.l1));
    blocks.insert("P2".to_string(), matrix_rows(&ms.l2));
    blocks.insert("P3".to_string(), matrix_rows(&ms.l3));
    Ok(MarginalReport {
        blocks,
        delta_r1: matrix_rows(&x.delta_r1),
        delta_r2: x.delta_r2.as_ref().map(matrix_rows),
        diagnostics: MarginalDiagnostics {
            negativity: rates.negativity,
            condition_number: x.condition_number,
            max_entry: ms.max_entry(),
            decay_count: decays.len(),
        },
        pauli_rates: rates,
        epsilon,
    })
}

/// Rows of a matrix as CSV text.
pub fn matrix_csv(m: &DMatrix<f64>) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.10}", m[(i, j)])).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_anchor_rows() {
        let e = epsilon_amplitudes(1.0 / 3.0, 1.0 / 3.0, 1.0 / 9.0).unwrap();
        assert!((e.eps[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((e.eps[1] - 2.0 / 3.0).abs() < 1e-12);
        assert!(e.eps[2].abs() < 1e-12);
        let e = epsilon_amplitudes(1.0, 1.0, 1.0).unwrap();
        assert_eq!(e.eps, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn simplex_projection_basics() {
        let p = project_simplex(&[0.5, 0.5]);
        assert_eq!(p, vec![0.5, 0.5]);
        let p = project_simplex(&[2.0, 0.0, -1.0]);
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
    }
}
