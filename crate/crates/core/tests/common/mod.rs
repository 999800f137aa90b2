#![allow(dead_code)]

use qama_core::hamiltonian::{
    assemble_qubo, compute_coupling, compute_field, dynamic_coefficients, CouplingTensor,
    DynamicCoefficients, FieldVector,
};
use qama_core::synth::generate_instance;
use qama_core::{
    AttentionInput, CoefficientConfig, IsingProblem, QuboProblem, SelectionMask, Shape,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub shape: Shape,
    pub input: AttentionInput,
    pub j: CouplingTensor,
    pub h: FieldVector,
    pub coeff: DynamicCoefficients,
    pub qubo: QuboProblem,
}

impl Instance {
    pub fn ising(&self) -> IsingProblem {
        qama_core::to_ising(&self.qubo)
    }
}

/// Single-batch instance with default coefficients.
pub fn instance(heads: usize, seq_len: usize, dim: usize, seed: u64) -> Instance {
    let shape = Shape::new(1, heads, seq_len, dim).unwrap();
    let input = generate_instance(&shape, seed).unwrap();
    let j = compute_coupling(input.q.batch(0), input.k.batch(0)).unwrap();
    let h = compute_field(input.v.batch(0), &input.w_eps).unwrap();
    let coeff = dynamic_coefficients(&shape, &CoefficientConfig::default());
    let qubo = assemble_qubo(&j, &h, &coeff, &shape).unwrap();
    Instance {
        shape,
        input,
        j,
        h,
        coeff,
        qubo,
    }
}

pub fn random_qubo(n: usize, seed: u64) -> QuboProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut qubo = QuboProblem::new(n);
    for p in 0..n {
        qubo.add_linear(p, rng.random_range(-2.0..2.0)).unwrap();
        for q in (p + 1)..n {
            if rng.random_bool(0.7) {
                qubo.add_quadratic(p, q, rng.random_range(-2.0..2.0))
                    .unwrap();
            }
        }
    }
    qubo.add_offset(rng.random_range(-1.0..1.0));
    qubo
}

pub fn mask_of(code: usize, n: usize) -> SelectionMask {
    SelectionMask::new((0..n).map(|p| code >> p & 1 == 1).collect())
}
