//! Exact expectations of sequence functions in the 256-dimensional product
//! space (ideal block side ⊗ physical side).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::estimation::probe::ProbeConfig;
use crate::groups::block_transfer;
use crate::ptm::coordinate_projector;
use crate::simulator::Simulator;

fn check(probe: &ProbeConfig, sim: &Simulator) -> Result<()> {
    if probe.measurement.basis != sim.measurement.basis {
        return Err(Error::config(format!(
            "probe {} uses the {} measurement but the simulation uses {}",
            probe.label,
            probe.measurement.basis.name(),
            sim.measurement.basis.name()
        )));
    }
    Ok(())
}

fn product(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    a.kronecker(b)
}

fn evaluate_chain<F>(lengths: &[usize], start: DVector<f64>, left: &DVector<f64>, c0: f64, mut step: F) -> Vec<f64>
where
    F: FnMut(&DVector<f64>) -> DVector<f64>,
{
    let max_m = lengths.iter().copied().max().unwrap_or(0);
    let mut at = vec![0.0; max_m + 1];
    let mut v = start;
    for m in 1..=max_m {
        if m > 1 {
            v = step(&v);
        }
        at[m] = c0 * left.dot(&v);
    }
    lengths.iter().map(|&m| at[m]).collect()
}

/// `k_A(m) = c⁰ Σ_x ⟨E_x ⊗ ΛᵀẼ_x| P_triv [(A ⊗ Λ̃) P_triv]^{m-1} |ρ ⊗ ρ̃⟩`
/// for gate-independent noise `Λ`; `Λ̃ = R(U)Λ_U Λ` when interleaving.
pub fn analytic_sequence_function(probe: &ProbeConfig, sim: &Simulator, lengths: &[usize]) -> Result<Vec<f64>> {
    check(probe, sim)?;
    if lengths.contains(&0) {
        return Err(Error::config("sequence lengths must be at least 1"));
    }
    let ng = sim.noisy;
    let lambda = ng.uniform_noise().ok_or_else(|| {
        Error::config("noise differs between gates; use transfer_sequence_function or Monte-Carlo estimation")
    })?;
    let eff = match &sim.interleaved {
        Some(u) => u * lambda,
        None => lambda.clone(),
    };
    let gs = ng.base;
    let p = coordinate_projector(16, &probe.block);
    let ptriv = gs.product_trivial_projector(&probe.block);
    let step_op = &ptriv * probe.probe.kronecker(&eff);
    let meas_t = ng.spam.meas.transpose();
    let lam_t = lambda.transpose();
    let mut left = DVector::zeros(256);
    for e in &sim.measurement.povm {
        left += product(&(&p * e), &(&lam_t * (&meas_t * e)));
    }
    let start = &ptriv * product(&(&p * &sim.measurement.rho), &(&ng.spam.prep * &sim.measurement.rho));
    Ok(evaluate_chain(lengths, start, &left, probe.c0, |v| &step_op * v))
}

/// Exact expectation for arbitrary gate-dependent noise through the transfer
/// matrix `T = (1/|G|) Σ_g (P R(g) P) ⊗ Λ(g)R(g)`:
/// `k_A(m) = c⁰ Σ_x ⟨E_x ⊗ Ẽ_x| T [(A ⊗ Ũ) T]^{m-1} |ρ ⊗ ρ̃⟩`.
pub fn transfer_sequence_function(probe: &ProbeConfig, sim: &Simulator, lengths: &[usize]) -> Result<Vec<f64>> {
    check(probe, sim)?;
    if lengths.contains(&0) {
        return Err(Error::config("sequence lengths must be at least 1"));
    }
    let ng = sim.noisy;
    let noisy: Vec<&DMatrix<f64>> = ng.noisy.iter().collect();
    let t = block_transfer(ng.base, &probe.block, &noisy);
    let u = sim.interleaved.clone().unwrap_or_else(|| DMatrix::identity(16, 16));
    let step_op = &t * probe.probe.kronecker(&u);
    let p = coordinate_projector(16, &probe.block);
    let meas_t = ng.spam.meas.transpose();
    let mut left = DVector::zeros(256);
    for e in &sim.measurement.povm {
        left += product(&(&p * e), &(&meas_t * e));
    }
    let start = &t * product(&(&p * &sim.measurement.rho), &(&ng.spam.prep * &sim.measurement.rho));
    Ok(evaluate_chain(lengths, start, &left, probe.c0, |v| &step_op * v))
}
