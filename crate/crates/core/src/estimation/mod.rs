//! Post-processing: sequence correlation functions, sequence-function
//! estimates, decay fits and the quantities derived from decays.

pub mod analytic;
pub mod derived;
pub mod fit;
pub mod probe;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::GateSet;
use crate::simulator::ShadowDataset;
use crate::util::{mean, median, variance};

pub use analytic::{analytic_sequence_function, transfer_sequence_function};
pub use derived::*;
pub use fit::{fit_decay, fit_decay_from, fit_points, DecayFit, FitModel, Weighting};
pub use probe::{
    correlations, normalization_constant, sequence_correlation, BlockRep, CompiledProbe, Correlations, ProbeConfig,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Estimator {
    Mean,
    /// Median of group means; `groups` defaults to ⌈√K⌉.
    Mom { groups: Option<usize> },
}

impl Estimator {
    pub fn parse(s: &str) -> Result<Estimator> {
        match s {
            "mean" => Ok(Estimator::Mean),
            "mom" => Ok(Estimator::Mom { groups: None }),
            other => Err(Error::config(format!("unknown estimator '{other}'; valid: mean, mom"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Mean => "mean",
            Estimator::Mom { .. } => "mom",
        }
    }

    /// Point estimate from the values at one length.
    pub fn apply(&self, values: &[f64]) -> Result<f64> {
        if values.is_empty() {
            return Err(Error::config("no samples at this sequence length"));
        }
        match self {
            Estimator::Mean => Ok(mean(values)),
            Estimator::Mom { groups } => {
                let g = groups.unwrap_or_else(|| (values.len() as f64).sqrt().ceil() as usize);
                median_of_means(values, g)
            }
        }
    }
}

/// Contiguous split into `groups` near-equal parts, median of their means.
pub fn median_of_means(values: &[f64], groups: usize) -> Result<f64> {
    let k = values.len();
    if groups == 0 || k < groups {
        return Err(Error::config(format!("median-of-means needs K ≥ G ≥ 1, got K={k}, G={groups}")));
    }
    let means: Vec<f64> = (0..groups)
        .map(|i| {
            let lo = i * k / groups;
            let hi = (i + 1) * k / groups;
            mean(&values[lo..hi])
        })
        .collect();
    Ok(median(&means))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerM {
    pub m: usize,
    pub k: f64,
    pub stderr: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequenceFunctionEstimate {
    pub probe: String,
    pub estimator: Estimator,
    pub per_m: Vec<PerM>,
}

impl SequenceFunctionEstimate {
    pub fn lengths(&self) -> Vec<usize> {
        self.per_m.iter().map(|p| p.m).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.per_m.iter().map(|p| p.k).collect()
    }
}

/// Per-length estimate from already evaluated correlation values.
pub fn estimate_from_correlations(label: &str, c: &Correlations, estimator: Estimator) -> Result<SequenceFunctionEstimate> {
    let mut per_m = Vec::with_capacity(c.lengths.len());
    for (m, vals) in c.lengths.iter().zip(&c.values) {
        let k = estimator.apply(vals)?;
        let n = vals.len();
        let mut stderr = (variance(vals) / n as f64).sqrt();
        if let Estimator::Mom { .. } = estimator {
            // asymptotic efficiency loss of the median
            stderr *= (std::f64::consts::PI / 2.0).sqrt();
        }
        per_m.push(PerM { m: *m, k, stderr, n });
    }
    Ok(SequenceFunctionEstimate { probe: label.to_string(), estimator, per_m })
}

/// `k̂_A(m)` for every length in the dataset.
pub fn estimate_sequence_function(
    ds: &ShadowDataset,
    gs: &GateSet,
    probe: &ProbeConfig,
    estimator: Estimator,
) -> Result<SequenceFunctionEstimate> {
    ds.validate(gs)?;
    if ds.header.basis != probe.measurement.basis.name() {
        return Err(Error::config(format!(
            "dataset measured in basis {} but probe {} expects {}",
            ds.header.basis,
            probe.label,
            probe.measurement.basis.name()
        )));
    }
    let rep = BlockRep::new(gs, &probe.block);
    let cp = CompiledProbe::new(probe, &rep)?;
    let c = correlations(ds, &cp)?;
    estimate_from_correlations(&probe.label, &c, estimator)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mom_is_robust_to_an_outlier() {
        let v = [0.0, 0.0, 0.0, 0.0, 100.0];
        assert_eq!(Estimator::Mean.apply(&v).unwrap(), 20.0);
        assert_eq!(Estimator::Mom { groups: Some(5) }.apply(&v).unwrap(), 0.0);
        assert!(Estimator::Mom { groups: Some(6) }.apply(&v).is_err());
    }

    #[test]
    fn constant_values() {
        let v = [0.3; 17];
        assert!((Estimator::Mean.apply(&v).unwrap() - 0.3).abs() < 1e-15);
        assert!((Estimator::Mom { groups: None }.apply(&v).unwrap() - 0.3).abs() < 1e-15);
    }
}
