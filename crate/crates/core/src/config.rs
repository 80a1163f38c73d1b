//! JSON experiment configuration.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{Estimator, FitModel, Weighting};
use crate::gates;
use crate::groups::GateSet;
use crate::measurement::Measurement;
use crate::noise::{build_channel, ChannelSpec, NoiseSpec, SpamSpec};
use crate::simulator::{SequenceMode, SequencePlan};
use crate::util::canonical_hash;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub gate_set: String,
    #[serde(default = "NoiseSpec::none")]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub spam: SpamSpec,
    pub plan: PlanConfig,
    /// `z`, `mixed_zx`, `qubit1_z` or `leakage`.
    pub basis: String,
    /// Block labels (`P1`), element probes (`P1:g12`), `all` or
    /// `all-local-cliffords`.
    #[serde(default = "default_probes")]
    pub probes: Vec<String>,
    #[serde(default = "default_estimator")]
    pub estimator: Estimator,
    #[serde(default = "default_model")]
    pub fit_model: FitModel,
    #[serde(default = "default_weighting")]
    pub weighting: Weighting,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    pub lengths: Vec<usize>,
    pub reps_per_length: usize,
    #[serde(default)]
    pub interleave: Option<InterleaveConfig>,
    #[serde(default = "one")]
    pub shots: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterleaveConfig {
    pub target: TargetGate,
    /// Error of the interleaved gate; defaults to the gate-set noise of the target.
    #[serde(default)]
    pub noise: Option<ChannelSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetGate {
    Index(usize),
    /// `cnot` (control on the first qubit) or `cnot10`.
    Name(String),
}

impl TargetGate {
    pub fn resolve(&self, gs: &GateSet) -> Result<usize> {
        match self {
            TargetGate::Index(i) if *i < gs.order() => Ok(*i),
            TargetGate::Index(i) => Err(Error::config(format!("target index {i} out of range for {}", gs.name))),
            TargetGate::Name(n) => {
                let u = match n.as_str() {
                    "cnot" | "cnot01" => gates::cnot01(),
                    "cnot10" => gates::cnot10(),
                    other => {
                        return Err(Error::config(format!("unknown target gate '{other}'; valid: cnot, cnot10, or an index")))
                    }
                };
                gs.find_unitary(&u)
                    .ok_or_else(|| Error::config(format!("target gate {n} is not an element of {}", gs.name)))
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default)]
    pub dataset: Option<String>,
    #[serde(default)]
    pub report: Option<String>,
}

fn default_probes() -> Vec<String> {
    vec!["all".into()]
}

fn default_estimator() -> Estimator {
    Estimator::Mean
}

fn default_model() -> FitModel {
    FitModel::Single
}

fn default_weighting() -> Weighting {
    Weighting::Uniform
}

fn one() -> usize {
    1
}

/// Parse JSON, reporting the field path of the first schema violation.
pub fn from_json_str<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(format!("{origin}: at '{path}': {}", e.into_inner()))
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
    from_json_str(&text, &path.display().to_string())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = read_json(path)?;
        cfg.check()?;
        Ok(cfg)
    }

    /// Hash of everything that determines results; output paths excluded.
    pub fn hash(&self) -> Result<String> {
        let mut c = self.clone();
        c.output = OutputPaths::default();
        canonical_hash(&c)
    }

    /// Catalog-level checks that need no group construction.
    pub fn check(&self) -> Result<()> {
        if !crate::groups::CATALOG.contains(&self.gate_set.as_str()) {
            return Err(Error::config(format!(
                "gate_set: unknown gate set '{}'; valid names: {}",
                self.gate_set,
                crate::groups::CATALOG.join(", ")
            )));
        }
        Measurement::by_name(&self.basis).map_err(|e| Error::config(format!("basis: {e}")))?;
        if self.plan.lengths.is_empty() {
            return Err(Error::config("plan.lengths: at least one sequence length is required"));
        }
        if self.probes.is_empty() {
            return Err(Error::config("probes: at least one probe is required"));
        }
        if let Some(il) = &self.plan.interleave {
            if let Some(n) = &il.noise {
                build_channel(n).map_err(|e| Error::config(format!("plan.interleave.noise: {e}")))?;
            }
        }
        Ok(())
    }

    pub fn sequence_plan(&self, gs: &GateSet) -> Result<SequencePlan> {
        let mode = match &self.plan.interleave {
            None => SequenceMode::Random,
            Some(il) => SequenceMode::Interleaved { target: il.target.resolve(gs)? },
        };
        let plan = SequencePlan {
            lengths: self.plan.lengths.clone(),
            reps_per_length: self.plan.reps_per_length,
            mode,
            seed: self.seed,
            shots: self.plan.shots,
        };
        plan.validate(gs)?;
        Ok(plan)
    }

    /// Hash of the physical model (noise, SPAM, interleaved-gate error).
    pub fn noise_hash(&self) -> Result<String> {
        canonical_hash(&(&self.noise, &self.spam, self.plan.interleave.as_ref().map(|i| &i.noise)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"gate_set":"c2","basis":"z","plan":{"lengths":[1,2,4],"reps_per_length":10}}"#;

    #[test]
    fn defaults_fill_in() {
        let c: ExperimentConfig = from_json_str(MINIMAL, "test").unwrap();
        assert_eq!(c.probes, vec!["all"]);
        assert_eq!(c.plan.shots, 1);
        assert_eq!(c.estimator, Estimator::Mean);
        c.check().unwrap();
    }

    #[test]
    fn hash_ignores_key_order_and_outputs() {
        let a: ExperimentConfig = from_json_str(MINIMAL, "a").unwrap();
        let b: ExperimentConfig = from_json_str(
            r#"{"plan":{"reps_per_length":10,"lengths":[1,2,4]},"basis":"z","gate_set":"c2","output":{"report":"r.json"}}"#,
            "b",
        )
        .unwrap();
        assert_eq!(a.hash().unwrap(), b.hash().unwrap());
        let c = ExperimentConfig { seed: 1, ..a.clone() };
        assert_ne!(a.hash().unwrap(), c.hash().unwrap());
    }

    #[test]
    fn schema_errors_name_the_field() {
        let bad = r#"{"gate_set":"c2","basis":"z","plan":{"lengths":[1,"x"],"reps_per_length":10}}"#;
        let e = from_json_str::<ExperimentConfig>(bad, "cfg").unwrap_err().to_string();
        assert!(e.contains("plan.lengths"), "{e}");
        let unknown = r#"{"gate_set":"c3","basis":"z","plan":{"lengths":[1],"reps_per_length":1}}"#;
        let c: ExperimentConfig = from_json_str(unknown, "cfg").unwrap();
        let e = c.check().unwrap_err().to_string();
        assert!(e.contains("c2") && e.contains("leakage"), "{e}");
    }
}
