//! Multi-head attention recast as a binary energy minimization.
//!
//! Q/K/V inputs define, per head, pairwise couplings between tokens and a
//! self-importance field. Together with a cross-head overlap penalty these
//! form a QUBO over the selection mask `s in {0,1}^{H x N}`. A solver backend
//! finds a low-energy mask, whose penalty-free energy is mapped back to a
//! `B x H x N x D` output. The backward pass treats the mask as a constant.
//!
//! Modules:
//! - [`types`]: shapes, tensors, masks and spins
//! - [`hamiltonian`]: couplings, fields, coefficients and QUBO assembly
//! - [`qubo`] / [`ising`]: the two problem forms and the change of basis
//! - [`anneal`]: exact, simulated-annealing and soft-spin backends, TTS and barrier analysis
//! - [`operator`]: forward / backward
//! - [`synth`]: seeded synthetic inputs

pub mod anneal;
pub mod error;
pub mod hamiltonian;
pub mod ising;
pub mod operator;
pub mod qubo;
pub mod synth;
pub mod types;

pub use error::{QamaError, Result};
pub use ising::{to_ising, IsingProblem};
pub use qubo::{Objective, QuboProblem};
pub use types::{
    mask_to_spins, spins_to_mask, AttentionInput, CoefficientConfig, SelectionMask, Shape,
    SpinState, Tensor4,
};
