//! Turning a generated input into per-batch problems.

use qama_core::hamiltonian::{
    assemble_qubo, compute_coupling, compute_field, dynamic_coefficients,
};
use qama_core::synth::generate_instance;
use qama_core::{AttentionInput, CoefficientConfig, QuboProblem, Shape};

use crate::error::Result;

/// The assembled problem of batch element `b` of `input`.
pub fn input_qubo(
    input: &AttentionInput,
    cfg: &CoefficientConfig,
    b: usize,
) -> Result<QuboProblem> {
    let shape = input.shape();
    let j = compute_coupling(input.q.batch(b), input.k.batch(b))?;
    let h = compute_field(input.v.batch(b), &input.w_eps)?;
    let coeff = dynamic_coefficients(&shape, cfg);
    Ok(assemble_qubo(&j, &h, &coeff, &shape)?)
}

pub fn input_qubos(input: &AttentionInput, cfg: &CoefficientConfig) -> Result<Vec<QuboProblem>> {
    (0..input.shape().batch)
        .map(|b| input_qubo(input, cfg, b))
        .collect()
}

/// Generates the instance for `seed` and assembles batch element `b`.
pub fn batch_qubo(
    shape: &Shape,
    cfg: &CoefficientConfig,
    seed: u64,
    b: usize,
) -> Result<QuboProblem> {
    input_qubo(&generate_instance(shape, seed)?, cfg, b)
}
