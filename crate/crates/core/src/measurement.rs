//! Input states and POVMs for the supported measurement settings.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates;
use crate::ptm::{kron, vectorize, VectorizedOperator, INPUT_TOL};

/// Names accepted by [`Measurement::by_name`].
pub const BASES: [&str; 4] = ["z", "mixed_zx", "qubit1_z", "leakage"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    /// `|00⟩` measured in the computational basis.
    #[serde(rename = "z")]
    Z,
    /// `|0+⟩` measured in z on the first qubit and x on the second.
    #[serde(rename = "mixed_zx")]
    MixedZx,
    /// `|00⟩` with only the first qubit read out.
    #[serde(rename = "qubit1_z")]
    Qubit1Z,
    /// Maximally mixed computational state, two-outcome subspace readout.
    #[serde(rename = "leakage")]
    Leakage,
}

impl Basis {
    pub fn name(&self) -> &'static str {
        match self {
            Basis::Z => "z",
            Basis::MixedZx => "mixed_zx",
            Basis::Qubit1Z => "qubit1_z",
            Basis::Leakage => "leakage",
        }
    }

    pub fn parse(name: &str) -> Result<Basis> {
        match name {
            "z" => Ok(Basis::Z),
            "mixed_zx" => Ok(Basis::MixedZx),
            "qubit1_z" => Ok(Basis::Qubit1Z),
            "leakage" => Ok(Basis::Leakage),
            other => Err(Error::config(format!(
                "unknown measurement basis '{other}'; valid names: {}",
                BASES.join(", ")
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Measurement {
    pub basis: Basis,
    pub rho: VectorizedOperator,
    pub labels: Vec<String>,
    pub povm: Vec<VectorizedOperator>,
}

fn r(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

impl Measurement {
    pub fn by_name(name: &str) -> Result<Measurement> {
        Self::new(Basis::parse(name)?)
    }

    pub fn new(basis: Basis) -> Result<Measurement> {
        let p0 = gates::basis_projector(2, 0);
        let p1 = gates::basis_projector(2, 1);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = gates::pure_state(&[r(s), r(s)]);
        let minus = gates::pure_state(&[r(s), r(-s)]);
        let id2 = gates::identity(2);
        let (rho, labels, ops) = match basis {
            Basis::Z => {
                let labels = ["00", "01", "10", "11"];
                let ops = (0..4).map(|k| gates::basis_projector(4, k)).collect::<Vec<_>>();
                (gates::basis_projector(4, 0), labels.to_vec(), ops)
            }
            Basis::MixedZx => {
                let labels = ["0+", "0-", "1+", "1-"];
                let ops = vec![kron(&p0, &plus), kron(&p0, &minus), kron(&p1, &plus), kron(&p1, &minus)];
                (kron(&p0, &plus), labels.to_vec(), ops)
            }
            Basis::Qubit1Z => {
                let ops = vec![kron(&p0, &id2), kron(&p1, &id2)];
                (gates::basis_projector(4, 0), vec!["0", "1"], ops)
            }
            Basis::Leakage => {
                // first tensor factor labels computational (0) or leaked (1)
                let ops = vec![kron(&p0, &id2), kron(&p1, &id2)];
                (kron(&p0, &id2) * r(0.5), vec!["comp", "leak"], ops)
            }
        };
        let m = Measurement {
            basis,
            rho: vectorize(&rho)?,
            labels: labels.iter().map(|l| l.to_string()).collect(),
            povm: ops.iter().map(vectorize).collect::<Result<Vec<_>>>()?,
        };
        m.validate()?;
        Ok(m)
    }

    /// Completeness of the POVM and unit trace of the state.
    pub fn validate(&self) -> Result<()> {
        let mut sum = VectorizedOperator::zeros(16);
        for e in &self.povm {
            sum += e;
        }
        let mut id = VectorizedOperator::zeros(16);
        id[0] = 2.0;
        if (sum - id).amax() > INPUT_TOL {
            return Err(Error::config(format!("POVM of basis {} does not sum to identity", self.basis.name())));
        }
        if (self.rho[0] - 0.5).abs() > INPUT_TOL {
            return Err(Error::config(format!("input state of basis {} is not unit trace", self.basis.name())));
        }
        Ok(())
    }

    pub fn outcome_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}
