//! Random and interleaved sequence generation, exact outcome probabilities
//! and sampled datasets.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::GateSet;
use crate::measurement::Measurement;
use crate::noise::{build_channel, ChannelSpec, NoisyGateSet};

pub const DATASET_VERSION: u32 = 1;
const PROB_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceMode {
    Random,
    /// The target gate is applied between consecutive random gates.
    Interleaved { target: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequencePlan {
    pub lengths: Vec<usize>,
    pub reps_per_length: usize,
    pub mode: SequenceMode,
    pub seed: u64,
    /// Outcomes drawn per sequence; each becomes its own record.
    #[serde(default = "one")]
    pub shots: usize,
}

fn one() -> usize {
    1
}

impl SequencePlan {
    pub fn random(lengths: Vec<usize>, reps: usize, seed: u64) -> SequencePlan {
        SequencePlan { lengths, reps_per_length: reps, mode: SequenceMode::Random, seed, shots: 1 }
    }

    pub fn interleaved(lengths: Vec<usize>, reps: usize, target: usize, seed: u64) -> SequencePlan {
        SequencePlan { lengths, reps_per_length: reps, mode: SequenceMode::Interleaved { target }, seed, shots: 1 }
    }

    pub fn validate(&self, gs: &GateSet) -> Result<()> {
        if self.lengths.iter().any(|&m| m == 0) {
            return Err(Error::config("sequence lengths must be at least 1"));
        }
        if self.reps_per_length == 0 {
            return Err(Error::config("reps_per_length must be at least 1"));
        }
        if self.shots == 0 {
            return Err(Error::config("shots must be at least 1"));
        }
        if let SequenceMode::Interleaved { target } = self.mode {
            if target >= gs.order() {
                return Err(Error::config(format!(
                    "interleaved target {target} is not an element of {} (order {})",
                    gs.name,
                    gs.order()
                )));
            }
        }
        Ok(())
    }

    fn record_rng(&self, record: usize) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(record as u64);
        rng
    }
}

fn draw_sequence(rng: &mut ChaCha12Rng, m: usize, order: usize) -> Vec<usize> {
    (0..m).map(|_| rng.gen_range(0..order)).collect()
}

/// Uniform i.i.d. gate indices; one reproducible stream per (length, rep).
pub fn sample_sequences(plan: &SequencePlan, gs: &GateSet) -> Result<Vec<Vec<usize>>> {
    plan.validate(gs)?;
    let mut out = Vec::with_capacity(plan.lengths.len() * plan.reps_per_length);
    for (li, &m) in plan.lengths.iter().enumerate() {
        for rep in 0..plan.reps_per_length {
            let mut rng = plan.record_rng(li * plan.reps_per_length + rep);
            out.push(draw_sequence(&mut rng, m, gs.order()));
        }
    }
    Ok(out)
}

/// Everything needed to evaluate outcome probabilities of a sequence.
#[derive(Clone, Debug)]
pub struct Simulator<'a> {
    pub noisy: &'a NoisyGateSet<'a>,
    pub measurement: &'a Measurement,
    /// Physical interleaved gate `R(U)·Λ_U`, when interleaving.
    pub interleaved: Option<DMatrix<f64>>,
    prep_rho: DVector<f64>,
    meas_povm: Vec<DVector<f64>>,
}

impl<'a> Simulator<'a> {
    /// `target_noise` overrides the noise the gate set assigns to the target.
    pub fn new(
        noisy: &'a NoisyGateSet<'a>,
        measurement: &'a Measurement,
        mode: &SequenceMode,
        target_noise: Option<&ChannelSpec>,
    ) -> Result<Simulator<'a>> {
        if noisy.base.ptm_dim() != 16 {
            return Err(Error::config("simulation needs a two-qubit gate set"));
        }
        let interleaved = match mode {
            SequenceMode::Random => None,
            SequenceMode::Interleaved { target } => {
                let target = *target;
                if target >= noisy.base.order() {
                    return Err(Error::config(format!("interleaved target {target} out of range")));
                }
                let lam = match target_noise {
                    Some(spec) => build_channel(spec)?.into_matrix(),
                    None => noisy.noise(target).clone(),
                };
                Some(&noisy.base.elements[target].ptm * lam)
            }
        };
        let prep_rho = &noisy.spam.prep * &measurement.rho;
        let meas_t = noisy.spam.meas.transpose();
        let meas_povm = measurement.povm.iter().map(|e| &meas_t * e).collect();
        Ok(Simulator { noisy, measurement, interleaved, prep_rho, meas_povm })
    }

    /// `p(x) = ⟨Ẽ_x| Λ(g_m)R(g_m) ⋯ Λ(g_1)R(g_1) |ρ̃⟩`.
    pub fn outcome_distribution(&self, seq: &[usize]) -> Result<Vec<f64>> {
        let mut v = self.prep_rho.clone();
        for (j, &g) in seq.iter().enumerate() {
            if g >= self.noisy.noisy.len() {
                return Err(Error::config(format!("gate index {g} out of range")));
            }
            if j > 0 {
                if let Some(u) = &self.interleaved {
                    v = u * v;
                }
            }
            v = &self.noisy.noisy[g] * v;
        }
        let mut p: Vec<f64> = self.meas_povm.iter().map(|e| e.dot(&v)).collect();
        for (x, px) in p.iter_mut().enumerate() {
            if *px < -PROB_TOL || *px > 1.0 + PROB_TOL {
                return Err(Error::numerical(format!(
                    "outcome {} has probability {px:.3e}; the noise model is inconsistent",
                    self.measurement.labels[x]
                )));
            }
            *px = px.clamp(0.0, 1.0);
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::numerical(format!("outcome probabilities sum to {total}")));
        }
        Ok(p)
    }
}

/// Inverse-CDF draw on integer weights `round(p·1e15)`.
pub fn sample_outcome<R: Rng>(rng: &mut R, p: &[f64]) -> usize {
    let weights: Vec<u64> = p.iter().map(|x| (x * 1e15).round() as u64).collect();
    let total: u64 = weights.iter().sum();
    let u = rng.gen_range(0..total);
    let mut acc = 0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub m: usize,
    pub seq: Vec<usize>,
    pub x: String,
    pub rep: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub version: u32,
    pub gate_set: String,
    pub gate_set_hash: String,
    pub gate_set_order: usize,
    pub basis: String,
    pub labels: Vec<String>,
    pub plan: SequencePlan,
    /// Hash of noise, SPAM and target-noise settings.
    pub noise_hash: String,
    #[serde(default)]
    pub config_hash: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShadowDataset {
    pub header: DatasetHeader,
    pub records: Vec<Record>,
}

/// Simulate every (length, rep) of the plan with one draw per shot.
pub fn run_experiment(plan: &SequencePlan, sim: &Simulator, noise_hash: &str) -> Result<ShadowDataset> {
    let gs = sim.noisy.base;
    plan.validate(gs)?;
    match (&plan.mode, &sim.interleaved) {
        (SequenceMode::Random, Some(_)) | (SequenceMode::Interleaved { .. }, None) => {
            return Err(Error::config("plan mode and simulator interleaving disagree"))
        }
        _ => {}
    }
    let mut records = Vec::with_capacity(plan.lengths.len() * plan.reps_per_length * plan.shots);
    for (li, &m) in plan.lengths.iter().enumerate() {
        for rep in 0..plan.reps_per_length {
            let mut rng = plan.record_rng(li * plan.reps_per_length + rep);
            let seq = draw_sequence(&mut rng, m, gs.order());
            let p = sim.outcome_distribution(&seq)?;
            for _ in 0..plan.shots {
                let x = sample_outcome(&mut rng, &p);
                records.push(Record { m, seq: seq.clone(), x: sim.measurement.labels[x].clone(), rep });
            }
        }
    }
    let header = DatasetHeader {
        version: DATASET_VERSION,
        gate_set: gs.name.clone(),
        gate_set_hash: gs.content_hash().to_string(),
        gate_set_order: gs.order(),
        basis: sim.measurement.basis.name().to_string(),
        labels: sim.measurement.labels.clone(),
        plan: plan.clone(),
        noise_hash: noise_hash.to_string(),
        config_hash: None,
    };
    Ok(ShadowDataset { header, records })
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    header: DatasetHeader,
}

impl ShadowDataset {
    /// Distinct lengths in plan order.
    pub fn lengths(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for r in &self.records {
            if !out.contains(&r.m) {
                out.push(r.m);
            }
        }
        out
    }

    pub fn validate(&self, gs: &GateSet) -> Result<()> {
        let h = &self.header;
        if h.gate_set_hash != gs.content_hash() {
            return Err(Error::config(format!(
                "dataset was generated with gate set {} (hash {}), not {} (hash {})",
                h.gate_set,
                h.gate_set_hash,
                gs.name,
                gs.content_hash()
            )));
        }
        let expected = h.plan.lengths.len() * h.plan.reps_per_length * h.plan.shots;
        if self.records.len() != expected {
            return Err(Error::config(format!("dataset has {} records, plan implies {expected}", self.records.len())));
        }
        for (i, r) in self.records.iter().enumerate() {
            if r.seq.len() != r.m {
                return Err(Error::config(format!("record {i}: sequence length {} != m {}", r.seq.len(), r.m)));
            }
            if let Some(g) = r.seq.iter().find(|&&g| g >= gs.order()) {
                return Err(Error::config(format!("record {i}: gate index {g} out of range")));
            }
            if !h.labels.contains(&r.x) {
                return Err(Error::config(format!("record {i}: outcome '{}' is not a valid label", r.x)));
            }
        }
        Ok(())
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer(&mut w, &HeaderLine { header: self.header.clone() })?;
        w.write_all(b"\n")?;
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<ShadowDataset> {
        let mut lines = r.lines();
        let first = lines.next().ok_or_else(|| Error::config("dataset file is empty"))??;
        let header: HeaderLine = serde_json::from_str(&first)
            .map_err(|e| Error::config(format!("dataset header: {e}")))?;
        let mut records = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: Record =
                serde_json::from_str(&line).map_err(|e| Error::config(format!("dataset line {}: {e}", i + 2)))?;
            records.push(rec);
        }
        Ok(ShadowDataset { header: header.header, records })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{assign_noise, NoiseSpec, SpamSpec};

    #[test]
    fn sequences_are_reproducible() {
        let gs = GateSet::c1xi().unwrap();
        let plan = SequencePlan::random(vec![2], 3, 7);
        let a = sample_sequences(&plan, &gs).unwrap();
        assert_eq!(a.len(), 3);
        assert!(a.iter().all(|s| s.len() == 2));
        assert_eq!(a, sample_sequences(&plan, &gs).unwrap());
        let empty = SequencePlan::random(vec![], 3, 7);
        assert!(sample_sequences(&empty, &gs).unwrap().is_empty());
    }

    #[test]
    fn pauli_x_flip_probability() {
        let gs = GateSet::c1xc1().unwrap();
        let mut probs = vec![0.0; 16];
        probs[0] = 0.9;
        probs[4] = 0.1;
        let ng = assign_noise(&gs, &NoiseSpec::uniform(ChannelSpec::Pauli { probs }), &SpamSpec::default()).unwrap();
        let meas = Measurement::by_name("z").unwrap();
        let sim = Simulator::new(&ng, &meas, &SequenceMode::Random, None).unwrap();
        let p = sim.outcome_distribution(&[gs.identity_index()]).unwrap();
        assert!((p[2] - 0.1).abs() < 1e-12);
        assert!((p[0] - 0.9).abs() < 1e-12);
    }
}
