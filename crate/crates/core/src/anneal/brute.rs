//! Exhaustive minimization, used as the ground-truth oracle at small sizes.

use crate::error::{QamaError, Result};
use crate::ising::{to_ising, IsingProblem};
use crate::qubo::QuboProblem;
use crate::types::{spins_to_mask, SpinState};

use super::{BackendKind, SolveResult};

pub const DEFAULT_BRUTE_CAP: usize = 24;

// full recomputation interval for the Gray-code walk
const RESYNC_EVERY: u64 = 1 << 10;

/// Exact minimum of a QUBO. Ties resolve to the lexicographically smallest
/// bit string `s[0] s[1] ... s[n-1]`.
pub fn brute_force(problem: &QuboProblem) -> Result<SolveResult> {
    brute_force_ising(&to_ising(problem), DEFAULT_BRUTE_CAP)
}

/// Exact minimum of a spin problem with an explicit variable cap.
///
/// States are visited in Gray-code order so each step costs one flip delta.
/// Variable `p` maps to bit `n - 1 - p` of the code, which makes numeric
/// order of codes coincide with lexicographic order of masks.
pub fn brute_force_ising(problem: &IsingProblem, cap: usize) -> Result<SolveResult> {
    let n = problem.n();
    if n > cap || n >= 64 {
        return Err(QamaError::Capacity {
            n,
            cap: cap.min(63),
        });
    }
    let mut spins = vec![-1i8; n];
    let mut energy = problem.energy_raw(&spins);
    let mut best_code = 0u64;
    let mut best_energy = energy;

    let total = 1u64 << n;
    let mut code = 0u64;
    for step in 1..total {
        let bit = step.trailing_zeros() as usize;
        let var = n - 1 - bit;
        energy += problem.delta_raw(&spins, var);
        spins[var] = -spins[var];
        code ^= 1 << bit;
        if step % RESYNC_EVERY == 0 {
            energy = problem.energy_raw(&spins);
        }
        let tol = 1e-11 * best_energy.abs().max(1.0);
        if energy < best_energy - tol || (energy <= best_energy + tol && code < best_code) {
            best_energy = energy;
            best_code = code;
        }
    }

    let best: Vec<i8> = (0..n)
        .map(|p| {
            if best_code >> (n - 1 - p) & 1 == 1 {
                1
            } else {
                -1
            }
        })
        .collect();
    let best_energy = problem.energy_raw(&best);
    Ok(SolveResult {
        best_state: spins_to_mask(&SpinState::from_spins_unchecked(best)),
        best_energy,
        energy_trace: None,
        sweeps_used: 0,
        seed: 0,
        backend: BackendKind::BruteForce,
    })
}
