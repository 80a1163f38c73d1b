//! Standard one- and two-qubit unitaries and Kraus sets.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::ptm::{kron, pauli, CMat};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn x() -> CMat {
    pauli(1)
}

pub fn y() -> CMat {
    pauli(2)
}

pub fn z() -> CMat {
    pauli(3)
}

pub fn h() -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)])
}

pub fn s() -> CMat {
    DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)])
}

/// `op` on the first qubit, identity on the second.
pub fn on_first(op: &CMat) -> CMat {
    kron(op, &identity(2))
}

/// `op` on the second qubit, identity on the first.
pub fn on_second(op: &CMat) -> CMat {
    kron(&identity(2), op)
}

/// CNOT with control on the first qubit.
pub fn cnot01() -> CMat {
    let mut u = CMat::zeros(4, 4);
    u[(0, 0)] = c(1.0, 0.0);
    u[(1, 1)] = c(1.0, 0.0);
    u[(2, 3)] = c(1.0, 0.0);
    u[(3, 2)] = c(1.0, 0.0);
    u
}

/// CNOT with control on the second qubit.
pub fn cnot10() -> CMat {
    let mut u = CMat::zeros(4, 4);
    u[(0, 0)] = c(1.0, 0.0);
    u[(1, 3)] = c(1.0, 0.0);
    u[(2, 2)] = c(1.0, 0.0);
    u[(3, 1)] = c(1.0, 0.0);
    u
}

/// Block-diagonal `a ⊕ b`.
pub fn direct_sum(a: &CMat, b: &CMat) -> CMat {
    let (n, m) = (a.nrows(), b.nrows());
    let mut u = CMat::zeros(n + m, n + m);
    u.view_mut((0, 0), (n, n)).copy_from(a);
    u.view_mut((n, n), (m, m)).copy_from(b);
    u
}

pub fn rz(theta: f64) -> CMat {
    let a = c(0.0, -theta / 2.0).exp();
    let b = c(0.0, theta / 2.0).exp();
    DMatrix::from_row_slice(2, 2, &[a, c(0.0, 0.0), c(0.0, 0.0), b])
}

/// `exp(-iθ/2 · P⊗P)` for a Pauli string `P⊗P`.
fn two_body_rotation(p: &CMat, theta: f64) -> CMat {
    let pp = kron(p, p);
    identity(4) * c((theta / 2.0).cos(), 0.0) - pp * c(0.0, (theta / 2.0).sin())
}

pub fn rxx(theta: f64) -> CMat {
    two_body_rotation(&x(), theta)
}

pub fn ryy(theta: f64) -> CMat {
    two_body_rotation(&y(), theta)
}

pub fn rzz(theta: f64) -> CMat {
    two_body_rotation(&z(), theta)
}

/// Single-qubit amplitude damping Kraus pair.
pub fn amplitude_damping_kraus(gamma: f64) -> [CMat; 2] {
    let k0 = DMatrix::from_row_slice(
        2,
        2,
        &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c((1.0 - gamma).sqrt(), 0.0)],
    );
    let k1 = DMatrix::from_row_slice(
        2,
        2,
        &[c(0.0, 0.0), c(gamma.sqrt(), 0.0), c(0.0, 0.0), c(0.0, 0.0)],
    );
    [k0, k1]
}

/// Computational basis projector `|k⟩⟨k|` of dimension `d`.
pub fn basis_projector(d: usize, k: usize) -> CMat {
    let mut p = CMat::zeros(d, d);
    p[(k, k)] = c(1.0, 0.0);
    p
}

/// Pure-state density matrix `|ψ⟩⟨ψ|`.
pub fn pure_state(psi: &[Complex64]) -> CMat {
    let v = nalgebra::DVector::from_column_slice(psi);
    &v * v.adjoint()
}
