//! Gate-error channels and their assignment to gate-set elements.
//!
//! Noisy gates follow `Λ(g)·R(g)`: the ideal gate first, then its noise.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates;
use crate::groups::GateSet;
use crate::ptm::{paulis_commute, ptm_from_kraus, ptm_from_unitary, tensor, CMat, Ptm};

/// A single channel description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelSpec {
    None,
    /// Sixteen Pauli probabilities indexed in τ order.
    Pauli { probs: Vec<f64> },
    /// Damping probability per qubit (0 leaves a qubit untouched).
    AmplitudeDamping { gamma: [f64; 2] },
    /// Z rotation angle per qubit.
    Rz { theta: [f64; 2] },
    Rzz { theta: f64 },
    Rxx { theta: f64 },
    Ryy { theta: f64 },
    /// A full CNOT (control on the first qubit) acting as the error.
    CnotError,
    /// Applied in list order: the first entry acts first.
    Composite { channels: Vec<ChannelSpec> },
}

impl ChannelSpec {
    /// `p(I)=1-total` with `total` split evenly over the six weight-1 Paulis.
    pub fn weight_one_pauli(total: f64) -> ChannelSpec {
        let mut probs = vec![0.0; 16];
        probs[0] = 1.0 - total;
        for p in probs.iter_mut().take(7).skip(1) {
            *p = total / 6.0;
        }
        ChannelSpec::Pauli { probs }
    }

    /// Default weak Pauli noise: 0.99 identity, 0.01 over weight-1 Paulis.
    pub fn default_pauli() -> ChannelSpec {
        Self::weight_one_pauli(0.01)
    }
}

/// Build the two-qubit PTM of a channel.
pub fn build_channel(spec: &ChannelSpec) -> Result<Ptm> {
    match spec {
        ChannelSpec::None => Ok(Ptm::identity(2)),
        ChannelSpec::Pauli { probs } => pauli_channel(probs),
        ChannelSpec::AmplitudeDamping { gamma } => {
            let a = amplitude_damping(gamma[0])?;
            let b = amplitude_damping(gamma[1])?;
            tensor(&a, &b)
        }
        ChannelSpec::Rz { theta } => {
            let a = ptm_from_unitary(&gates::rz(theta[0]))?;
            let b = ptm_from_unitary(&gates::rz(theta[1]))?;
            tensor(&a, &b)
        }
        ChannelSpec::Rzz { theta } => ptm_from_unitary(&gates::rzz(*theta)),
        ChannelSpec::Rxx { theta } => ptm_from_unitary(&gates::rxx(*theta)),
        ChannelSpec::Ryy { theta } => ptm_from_unitary(&gates::ryy(*theta)),
        ChannelSpec::CnotError => ptm_from_unitary(&gates::cnot01()),
        ChannelSpec::Composite { channels } => {
            let mut acc = Ptm::identity(2);
            for c in channels {
                acc = build_channel(c)?.compose(&acc);
            }
            Ok(acc)
        }
    }
}

/// Single-qubit amplitude damping PTM.
pub fn amplitude_damping(gamma: f64) -> Result<Ptm> {
    if !(0.0..=1.0).contains(&gamma) || !gamma.is_finite() {
        return Err(Error::config(format!("damping probability {gamma} outside [0,1]")));
    }
    ptm_from_kraus(&gates::amplitude_damping_kraus(gamma))
}

/// Diagonal PTM of a two-qubit Pauli channel.
pub fn pauli_channel(probs: &[f64]) -> Result<Ptm> {
    if probs.len() != 16 {
        return Err(Error::config(format!("Pauli channel needs 16 probabilities, got {}", probs.len())));
    }
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::config("Pauli probabilities must be nonnegative"));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::config(format!("Pauli probabilities sum to {total}, expected 1")));
    }
    let mut m = DMatrix::zeros(16, 16);
    for i in 0..16 {
        m[(i, i)] = probs
            .iter()
            .enumerate()
            .map(|(j, p)| if paulis_commute(2, i, j) { *p } else { -*p })
            .sum();
    }
    Ptm::from_matrix(m)
}

/// How channels are attached to gate-set elements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum NoiseSpec {
    /// Same channel after every gate.
    Uniform { channel: ChannelSpec },
    /// `Λ1 = entangling ∘ base`; a k-CNOT element gets `Λ1^k`, a 0-CNOT element gets `base`.
    PerCnotCount { base: ChannelSpec, entangling: ChannelSpec },
    /// Every operation on qubit q adds `Rz(θ_q)` on q and damping `γ_other` on the other qubit.
    PerQubitLocal { theta: [f64; 2], gamma: [f64; 2] },
}

impl NoiseSpec {
    pub fn none() -> NoiseSpec {
        NoiseSpec::Uniform { channel: ChannelSpec::None }
    }

    pub fn uniform(channel: ChannelSpec) -> NoiseSpec {
        NoiseSpec::Uniform { channel }
    }
}

/// Optional state-preparation and measurement channels.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpamSpec {
    #[serde(default)]
    pub prep: Option<ChannelSpec>,
    #[serde(default)]
    pub meas: Option<ChannelSpec>,
}

#[derive(Clone, Debug)]
pub struct Spam {
    pub prep: DMatrix<f64>,
    pub meas: DMatrix<f64>,
}

impl Spam {
    pub fn ideal() -> Spam {
        Spam { prep: DMatrix::identity(16, 16), meas: DMatrix::identity(16, 16) }
    }

    pub fn build(spec: &SpamSpec) -> Result<Spam> {
        let prep = match &spec.prep {
            Some(c) => build_channel(c)?.into_matrix(),
            None => DMatrix::identity(16, 16),
        };
        let meas = match &spec.meas {
            Some(c) => build_channel(c)?.into_matrix(),
            None => DMatrix::identity(16, 16),
        };
        Ok(Spam { prep, meas })
    }
}

/// A gate set with a noise channel attached to every element.
#[derive(Clone, Debug)]
pub struct NoisyGateSet<'a> {
    pub base: &'a GateSet,
    /// Distinct noise channels.
    pub channels: Vec<DMatrix<f64>>,
    /// Per element, index into `channels`.
    pub channel_of: Vec<usize>,
    /// Per element, `Λ(g)·R(g)`.
    pub noisy: Vec<DMatrix<f64>>,
    pub spam: Spam,
}

impl<'a> NoisyGateSet<'a> {
    pub fn noise(&self, element: usize) -> &DMatrix<f64> {
        &self.channels[self.channel_of[element]]
    }

    /// The common channel when every element carries the same noise.
    pub fn uniform_noise(&self) -> Option<&DMatrix<f64>> {
        if self.channels.len() == 1 {
            Some(&self.channels[0])
        } else {
            None
        }
    }

    /// `(1/|G|) Σ Λ(g)`.
    pub fn average_noise(&self) -> DMatrix<f64> {
        let mut acc = DMatrix::zeros(16, 16);
        for &c in &self.channel_of {
            acc += &self.channels[c];
        }
        acc / self.channel_of.len() as f64
    }
}

/// Attach noise to every element of `gs`.
pub fn assign_noise<'a>(gs: &'a GateSet, spec: &NoiseSpec, spam: &SpamSpec) -> Result<NoisyGateSet<'a>> {
    if gs.ptm_dim() != 16 {
        return Err(Error::config(format!("noise models need a two-qubit gate set, {} is single-qubit", gs.name)));
    }
    let (channels, channel_of) = match spec {
        NoiseSpec::Uniform { channel } => (vec![build_channel(channel)?.into_matrix()], vec![0; gs.order()]),
        NoiseSpec::PerCnotCount { base, entangling } => {
            let base = build_channel(base)?;
            let lambda1 = build_channel(entangling)?.compose(&base);
            let max_k = gs.elements.iter().map(|e| e.cnot_cost).max().unwrap_or(0);
            let mut channels = vec![base.into_matrix()];
            for k in 1..=max_k {
                channels.push(lambda1.powi(k).into_matrix());
            }
            let of = gs.elements.iter().map(|e| e.cnot_cost).collect();
            (channels, of)
        }
        NoiseSpec::PerQubitLocal { theta, gamma } => {
            if gs.active_qubits.len() != 2 {
                return Err(Error::config(format!("gate set {} lacks per-qubit activity metadata", gs.name)));
            }
            let mut locals = [amplitude_damping(0.0)?, amplitude_damping(0.0)?];
            for q in 0..2 {
                if gs.active_qubits[q] {
                    let other = 1 - q;
                    let rot = ptm_from_unitary(&gates::rz(theta[q]))?;
                    locals[q] = rot.compose(&locals[q]);
                    locals[other] = amplitude_damping(gamma[other])?.compose(&locals[other]);
                }
            }
            (vec![tensor(&locals[0], &locals[1])?.into_matrix()], vec![0; gs.order()])
        }
    };
    for (i, c) in channels.iter().enumerate() {
        let p = Ptm::from_matrix(c.clone())?;
        if !p.is_trace_preserving() {
            return Err(Error::numerical(format!("noise channel {i} is not trace preserving")));
        }
    }
    let noisy = gs
        .elements
        .iter()
        .zip(&channel_of)
        .map(|(e, &c)| &channels[c] * &e.ptm)
        .collect();
    Ok(NoisyGateSet { base: gs, channels, channel_of, noisy, spam: Spam::build(spam)? })
}

/// The unitary behind a channel spec, when it is one.
pub fn unitary_of(spec: &ChannelSpec) -> Option<CMat> {
    match spec {
        ChannelSpec::None => Some(gates::identity(4)),
        ChannelSpec::Rzz { theta } => Some(gates::rzz(*theta)),
        ChannelSpec::Rxx { theta } => Some(gates::rxx(*theta)),
        ChannelSpec::Ryy { theta } => Some(gates::ryy(*theta)),
        ChannelSpec::CnotError => Some(gates::cnot01()),
        ChannelSpec::Rz { theta } => Some(gates::rz(theta[0]).kronecker(&gates::rz(theta[1]))),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_pauli_is_normalized() {
        if let ChannelSpec::Pauli { probs } = ChannelSpec::default_pauli() {
            assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        } else {
            unreachable!()
        }
    }

    #[test]
    fn invalid_pauli_rejected() {
        let mut probs = vec![0.0; 16];
        probs[0] = 0.9;
        assert!(pauli_channel(&probs).is_err());
        assert!(amplitude_damping(1.5).is_err());
    }
}
