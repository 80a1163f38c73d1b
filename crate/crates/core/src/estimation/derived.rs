//! Fidelities, interleaved bounds, crosstalk scalars and leakage rates.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::fit::{DecayFit, FitModel};
use crate::groups::GateSet;

/// `Tr(E) = 1 + Σ_i Tr(P_i) λ_i`, then `F̄ = (Tr + d)/(d(d+1))`.
pub fn fidelity_from_decays(gs: &GateSet, lambdas: &[(String, f64)]) -> Result<f64> {
    let spec = gs
        .fidelity
        .as_ref()
        .ok_or_else(|| Error::config(format!("gate set {} has no average-fidelity decomposition", gs.name)))?;
    let mut tr = 1.0;
    for (label, weight) in &spec.traces {
        let lam = lambdas
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::config(format!("missing decay for sector {label} of {}", gs.name)))?;
        tr += weight * lam;
    }
    let d = spec.dim as f64;
    Ok((tr + d) / (d * (d + 1.0)))
}

/// Exact average gate fidelity of a channel to the identity from its PTM.
pub fn average_fidelity(ptm: &DMatrix<f64>) -> f64 {
    let d = (ptm.nrows() as f64).sqrt();
    (ptm.trace() + d) / (d * (d + 1.0))
}

/// `χ₀₀ = ((d+1)F̄ − 1)/d`.
pub fn chi00(f: f64, d: f64) -> f64 {
    ((d + 1.0) * f - 1.0) / d
}

fn fid_from_chi(x: f64, d: f64) -> f64 {
    (d * x + 1.0) / (d + 1.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct InterleavedEstimate {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    /// The bound quadratic had no real root; bounds fall back to [0, 1].
    pub degenerate: bool,
}

/// Interleaved fidelity estimate of the target gate error from the
/// reference (`f_sta`) and interleaved (`f_int`) average fidelities, plus
/// bounds from the χ₀₀ composition inequality.
pub fn interleaved_estimate(f_sta: f64, f_int: f64, d: usize) -> Result<InterleavedEstimate> {
    let df = d as f64;
    let den = df * f_sta - 1.0;
    if den <= 0.0 || df * f_int - 1.0 <= 0.0 {
        return Err(Error::numerical(format!(
            "interleaved estimate undefined for F_sta={f_sta}, F_int={f_int} (need F > 1/d)"
        )));
    }
    let point = 1.0 - (df - 1.0) / df * (1.0 - (df * f_int - 1.0) / den);

    // |c − xb − (1−x)(1−b)| ≤ 2√(x b (1−x)(1−b)) rearranged to
    // x² + [2u(1−2b) − 4b(1−b)] x + u² ≤ 0 with u = c − 1 + b.
    let b = chi00(f_sta, df);
    let c = chi00(f_int, df);
    let u = c - 1.0 + b;
    let p = 2.0 * u * (1.0 - 2.0 * b) - 4.0 * b * (1.0 - b);
    let disc = p * p - 4.0 * u * u;
    let (lo, hi, degenerate) = if disc < 0.0 {
        (0.0, 1.0, true)
    } else {
        let s = disc.sqrt();
        let x1 = (-p - s) / 2.0;
        let x2 = (-p + s) / 2.0;
        (fid_from_chi(x1, df), fid_from_chi(x2, df), false)
    };
    Ok(InterleavedEstimate { point, lower: lo.clamp(0.0, 1.0), upper: hi.clamp(0.0, 1.0), degenerate })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CrosstalkScalars {
    pub delta_r: f64,
    pub delta_lambda: f64,
}

/// `δr_{1|2} = |λ₁ − λ_{1|2}|(d₁−1)/d₁` and `δλ = λ₁₂ − λ_{1|2}λ_{2|1}`.
pub fn crosstalk_scalars(l1: f64, l1_given2: f64, l2_given1: f64, l12: f64, d1: usize) -> CrosstalkScalars {
    let d = d1 as f64;
    CrosstalkScalars { delta_r: (l1 - l1_given2).abs() * (d - 1.0) / d, delta_lambda: l12 - l1_given2 * l2_given1 }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum LeakageModel {
    /// Probe `P₀`; `b₀ = S/(S+L)`.
    Projector,
    /// Probe `P₀⁽²⁾`; `b₀ = (S−L)/(S+L)`.
    Signed,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LeakageRates {
    pub leakage: f64,
    pub seepage: f64,
    /// Standard errors propagated from the fit covariance of (b₀, λ).
    pub leakage_sigma: f64,
    pub seepage_sigma: f64,
    /// Distance moved by clipping to [0, 1].
    pub clip_distance: f64,
}

/// Leakage and seepage from an offset decay fit.
pub fn leakage_rates(fit: &DecayFit, model: LeakageModel) -> Result<LeakageRates> {
    if fit.model != FitModel::Offset {
        return Err(Error::config("leakage rates need an offset (b₀ + a₀λ^{m−1}) fit"));
    }
    let b0 = fit.params[0];
    let lam = fit.lambda();
    if fit.params[1].abs() < 1e-9 {
        return Err(Error::numerical("decay amplitude a₀ vanishes; λ and the rates are not identifiable"));
    }
    if lam > 1.0 + 1e-12 {
        return Err(Error::numerical(format!("fitted λ = {lam} exceeds 1; leakage rates undefined")));
    }
    let gap = (1.0 - lam).max(0.0);
    let (l, s) = match model {
        LeakageModel::Projector => ((1.0 - b0) * gap, b0 * gap),
        LeakageModel::Signed => ((1.0 - b0) / 2.0 * gap, (1.0 + b0) / 2.0 * gap),
    };
    // gradients with respect to (b₀, λ)
    let (dl, ds) = match model {
        LeakageModel::Projector => ([-gap, -(1.0 - b0)], [gap, -b0]),
        LeakageModel::Signed => ([-gap / 2.0, -(1.0 - b0) / 2.0], [gap / 2.0, -(1.0 + b0) / 2.0]),
    };
    let c = &fit.cov;
    let cov = [[c[0][0], c[0][2]], [c[2][0], c[2][2]]];
    let prop = |g: [f64; 2]| {
        let mut v = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                v += g[i] * cov[i][j] * g[j];
            }
        }
        v.max(0.0).sqrt()
    };
    let (lc, sc) = (l.clamp(0.0, 1.0), s.clamp(0.0, 1.0));
    Ok(LeakageRates {
        leakage: lc,
        seepage: sc,
        leakage_sigma: prop(dl),
        seepage_sigma: prop(ds),
        clip_distance: (l - lc).abs() + (s - sc).abs(),
    })
}

/// Exact `(L, S)` of a noise PTM on the leakage embedding, whose first
/// tensor factor labels the subspace (τ₆ = Z⊗𝟙).
pub fn exact_leakage(ptm: &DMatrix<f64>) -> (f64, f64) {
    let r60 = ptm[(6, 0)];
    let r66 = ptm[(6, 6)];
    (0.5 * (1.0 - r60 - r66), 0.5 * (1.0 + r60 - r66))
}
