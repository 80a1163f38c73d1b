//! Pauli-basis linear algebra: vectorization, Pauli transfer matrices from
//! unitaries and Kraus sets, composition and tensoring.
//!
//! The two-qubit basis uses the fixed ordering
//! `τ0=σ0σ0, τ1=σ0σ1, τ2=σ0σ2, τ3=σ0σ3, τ4=σ1σ0, τ5=σ2σ0, τ6=σ3σ0,
//! τ7=σ1σ1, τ8=σ1σ2, τ9=σ1σ3, τ10=σ2σ1, τ11=σ2σ2, τ12=σ2σ3, τ13=σ3σ1,
//! τ14=σ3σ2, τ15=σ3σ3` with `σ = P/√2`.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type VectorizedOperator = DVector<f64>;

/// Absolute tolerance for matrix equality checks.
pub const EQ_TOL: f64 = 1e-9;
/// Imaginary residue allowed when building real PTMs.
pub const IMAG_TOL: f64 = 1e-10;
/// Tolerance for unitarity / completeness checks on inputs.
pub const INPUT_TOL: f64 = 1e-10;

/// Two-qubit τ-ordering as (first-qubit Pauli, second-qubit Pauli).
pub const TAU_LABELS: [(u8, u8); 16] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 0),
    (2, 0),
    (3, 0),
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 1),
    (2, 2),
    (2, 3),
    (3, 1),
    (3, 2),
    (3, 3),
];

/// Position of `σa⊗σb` in the τ-ordering.
pub fn tau_index(a: u8, b: u8) -> usize {
    match (a, b) {
        (0, b) => b as usize,
        (a, 0) => 3 + a as usize,
        (a, b) => 7 + 3 * (a as usize - 1) + (b as usize - 1),
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Unnormalized single-qubit Pauli matrix `P_k`, k ∈ {0,1,2,3}.
pub fn pauli(k: u8) -> CMat {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    match k {
        0 => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        1 => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        2 => DMatrix::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
        3 => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => panic!("pauli index {k} out of range"),
    }
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Ordered orthonormal Pauli basis for one or two qubits.
#[derive(Clone, Debug)]
pub struct PauliBasis {
    pub n_qubits: usize,
    /// Per-element Pauli labels, one entry per qubit.
    pub labels: Vec<Vec<u8>>,
    pub elements: Vec<CMat>,
}

impl PauliBasis {
    pub fn new(n_qubits: usize) -> Result<Self> {
        let labels: Vec<Vec<u8>> = match n_qubits {
            1 => (0..4).map(|k| vec![k]).collect(),
            2 => TAU_LABELS.iter().map(|&(a, b)| vec![a, b]).collect(),
            n => return Err(Error::config(format!("Pauli basis supports 1 or 2 qubits, got {n}"))),
        };
        let norm = (2f64).powi(n_qubits as i32).sqrt().recip();
        let elements = labels
            .iter()
            .map(|l| {
                let m = l.iter().skip(1).fold(pauli(l[0]), |acc, &k| kron(&acc, &pauli(k)));
                m * c(norm, 0.0)
            })
            .collect();
        Ok(PauliBasis { n_qubits, labels, elements })
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn hilbert_dim(&self) -> usize {
        1 << self.n_qubits
    }
}

fn basis(n_qubits: usize) -> &'static PauliBasis {
    static ONE: OnceLock<PauliBasis> = OnceLock::new();
    static TWO: OnceLock<PauliBasis> = OnceLock::new();
    match n_qubits {
        1 => ONE.get_or_init(|| PauliBasis::new(1).unwrap()),
        _ => TWO.get_or_init(|| PauliBasis::new(2).unwrap()),
    }
}

/// Whether the Pauli strings at basis positions `i` and `j` commute.
pub fn paulis_commute(n_qubits: usize, i: usize, j: usize) -> bool {
    let b = basis(n_qubits);
    let anti = b.labels[i]
        .iter()
        .zip(&b.labels[j])
        .filter(|(&x, &y)| x != 0 && y != 0 && x != y)
        .count();
    anti % 2 == 0
}

fn qubits_for_dim(d: usize) -> Result<usize> {
    match d {
        2 => Ok(1),
        4 => Ok(2),
        _ => Err(Error::config(format!("unsupported Hilbert dimension {d}"))),
    }
}

/// Real Pauli transfer matrix of a channel.
#[derive(Clone, Debug, PartialEq)]
pub struct Ptm {
    matrix: DMatrix<f64>,
}

impl Ptm {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n != matrix.ncols() || !(n == 4 || n == 16) {
            return Err(Error::config(format!(
                "PTM must be 4x4 or 16x16, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Ptm { matrix })
    }

    pub fn identity(n_qubits: usize) -> Self {
        let d2 = 1 << (2 * n_qubits);
        Ptm { matrix: DMatrix::identity(d2, d2) }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        if self.dim() == 4 {
            1
        } else {
            2
        }
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Ptm) -> Ptm {
        Ptm { matrix: &self.matrix * &other.matrix }
    }

    pub fn transpose(&self) -> Ptm {
        Ptm { matrix: self.matrix.transpose() }
    }

    pub fn powi(&self, k: usize) -> Ptm {
        let mut out = Ptm::identity(self.n_qubits());
        for _ in 0..k {
            out = self.compose(&out);
        }
        out
    }

    /// First row equals `e0`.
    pub fn is_trace_preserving(&self) -> bool {
        let r = self.matrix.row(0);
        r.iter().enumerate().all(|(j, &v)| (v - if j == 0 { 1.0 } else { 0.0 }).abs() <= EQ_TOL)
    }

    /// First column equals `e0`.
    pub fn is_unital(&self) -> bool {
        let col = self.matrix.column(0);
        col.iter().enumerate().all(|(i, &v)| (v - if i == 0 { 1.0 } else { 0.0 }).abs() <= EQ_TOL)
    }

    /// Entries in {−1,0,1} with exactly one nonzero per row and column.
    pub fn is_signed_permutation(&self) -> bool {
        is_signed_permutation(&self.matrix)
    }

    pub fn approx_eq(&self, other: &Ptm, tol: f64) -> bool {
        self.dim() == other.dim() && max_abs_diff(&self.matrix, &other.matrix) <= tol
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }
}

pub fn is_signed_permutation(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    let mut col_hits = vec![0usize; n];
    for i in 0..n {
        let mut hits = 0;
        for j in 0..n {
            let v = m[(i, j)];
            if (v.abs() - 1.0).abs() <= EQ_TOL {
                hits += 1;
                col_hits[j] += 1;
            } else if v.abs() > EQ_TOL {
                return false;
            }
        }
        if hits != 1 {
            return false;
        }
    }
    col_hits.iter().all(|&h| h == 1)
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

impl Serialize for Ptm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_rows(&self.matrix).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Ptm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
        let m = matrix_from_rows(&rows).map_err(serde::de::Error::custom)?;
        Ptm::from_matrix(m).map_err(serde::de::Error::custom)
    }
}

/// Row-major nested vectors, used for JSON output.
pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    let k = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != k) {
        return Err(Error::config("ragged matrix rows"));
    }
    Ok(DMatrix::from_fn(n, k, |i, j| rows[i][j]))
}

fn real_part(z: Complex64, what: &str) -> Result<f64> {
    if z.im.abs() > IMAG_TOL {
        return Err(Error::numerical(format!("{what}: imaginary residue {:.3e}", z.im)));
    }
    Ok(z.re)
}

/// `Tr(a·b)` without forming the product.
fn trace_prod(a: &CMat, b: &CMat) -> Complex64 {
    let n = a.nrows();
    let mut t = c(0.0, 0.0);
    for k in 0..n {
        for l in 0..n {
            t += a[(k, l)] * b[(l, k)];
        }
    }
    t
}

fn identity_deviation(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((m[(i, j)] - c(target, 0.0)).norm());
        }
    }
    worst
}

/// PTM of `ρ ↦ UρU†`.
pub fn ptm_from_unitary(u: &CMat) -> Result<Ptm> {
    if !u.is_square() {
        return Err(Error::config("unitary must be square"));
    }
    let n_qubits = qubits_for_dim(u.nrows())?;
    let dev = identity_deviation(&(u.adjoint() * u));
    if dev > INPUT_TOL {
        return Err(Error::config(format!("matrix is not unitary: max |U†U - 1| = {dev:.3e}")));
    }
    let b = basis(n_qubits);
    let d2 = b.size();
    let ud = u.adjoint();
    let mut m = DMatrix::zeros(d2, d2);
    for j in 0..d2 {
        let conj = u * &b.elements[j] * &ud;
        for i in 0..d2 {
            m[(i, j)] = real_part(trace_prod(&b.elements[i], &conj), "ptm_from_unitary")?;
        }
    }
    Ok(Ptm { matrix: m })
}

/// PTM of `ρ ↦ Σ_k K_k ρ K_k†`.
pub fn ptm_from_kraus(kraus: &[CMat]) -> Result<Ptm> {
    let first = kraus.first().ok_or_else(|| Error::config("empty Kraus set"))?;
    let n_qubits = qubits_for_dim(first.nrows())?;
    let d = first.nrows();
    if kraus.iter().any(|k| k.nrows() != d || k.ncols() != d) {
        return Err(Error::config("Kraus operators have mismatched shapes"));
    }
    let mut completeness = CMat::zeros(d, d);
    for k in kraus {
        completeness += k.adjoint() * k;
    }
    let dev = identity_deviation(&completeness);
    if dev > INPUT_TOL {
        return Err(Error::config(format!(
            "Kraus set is not trace preserving: max |ΣK†K - 1| = {dev:.3e}"
        )));
    }
    let b = basis(n_qubits);
    let d2 = b.size();
    let mut m = DMatrix::zeros(d2, d2);
    for j in 0..d2 {
        let mut image = CMat::zeros(d, d);
        for k in kraus {
            image += k * &b.elements[j] * k.adjoint();
        }
        for i in 0..d2 {
            m[(i, j)] = real_part(trace_prod(&b.elements[i], &image), "ptm_from_kraus")?;
        }
    }
    Ok(Ptm { matrix: m })
}

/// Two single-qubit PTMs combined into a two-qubit PTM in τ-ordering.
pub fn tensor(a: &Ptm, b: &Ptm) -> Result<Ptm> {
    if a.dim() != 4 || b.dim() != 4 {
        return Err(Error::config(format!(
            "tensor expects two single-qubit PTMs, got dims {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let mut m = DMatrix::zeros(16, 16);
    for (r, &(i, j)) in TAU_LABELS.iter().enumerate() {
        for (s, &(k, l)) in TAU_LABELS.iter().enumerate() {
            m[(r, s)] = a.matrix[(i as usize, k as usize)] * b.matrix[(j as usize, l as usize)];
        }
    }
    Ok(Ptm { matrix: m })
}

/// Components `Tr(τ_i op)` of a Hermitian operator.
pub fn vectorize(op: &CMat) -> Result<VectorizedOperator> {
    if !op.is_square() {
        return Err(Error::config("operator must be square"));
    }
    let n_qubits = qubits_for_dim(op.nrows())?;
    let herm = (op - op.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if herm > INPUT_TOL {
        return Err(Error::config(format!("operator is not Hermitian: max |A - A†| = {herm:.3e}")));
    }
    let b = basis(n_qubits);
    let mut v = DVector::zeros(b.size());
    for (i, t) in b.elements.iter().enumerate() {
        v[i] = real_part(trace_prod(t, op), "vectorize")?;
    }
    Ok(v)
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &VectorizedOperator) -> Result<CMat> {
    let n_qubits = match v.len() {
        4 => 1,
        16 => 2,
        n => return Err(Error::config(format!("vector length {n} is not 4 or 16"))),
    };
    let b = basis(n_qubits);
    let d = b.hilbert_dim();
    let mut op = CMat::zeros(d, d);
    for (i, t) in b.elements.iter().enumerate() {
        op += t * c(v[i], 0.0);
    }
    Ok(op)
}

/// Apply the channel to a density matrix through its PTM.
pub fn apply_ptm(ptm: &Ptm, rho: &CMat) -> Result<CMat> {
    let v = vectorize(rho)?;
    unvectorize(&(ptm.matrix() * v))
}

/// Column-stacking vectorization in the computational basis.
pub fn vec_columns(m: &CMat) -> DVector<Complex64> {
    DVector::from_iterator(m.len(), m.iter().copied())
}

/// Coordinate projector onto the listed τ indices.
pub fn coordinate_projector(dim: usize, indices: &[usize]) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(dim, dim);
    for &i in indices {
        p[(i, i)] = 1.0;
    }
    p
}
