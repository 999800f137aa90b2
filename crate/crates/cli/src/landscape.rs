//! Single-bit mutation landscape around a solved mask.

use qama_core::{Objective, QamaError, QuboProblem, SelectionMask};
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeRow {
    pub flat_index: usize,
    pub head: usize,
    pub token: usize,
    pub mutated_energy: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationLandscape {
    pub base_energy: f64,
    pub rows: Vec<LandscapeRow>,
}

impl MutationLandscape {
    pub fn mean_mutated_energy(&self) -> Option<f64> {
        (!self.rows.is_empty()).then(|| {
            self.rows.iter().map(|r| r.mutated_energy).sum::<f64>() / self.rows.len() as f64
        })
    }

    pub fn min_delta(&self) -> Option<f64> {
        self.rows.iter().map(|r| r.delta).min_by(f64::total_cmp)
    }
}

/// Flips each bit of `mask` in turn. Variables are laid out head-major with
/// `seq_len` tokens per head.
pub fn mutation_landscape(
    problem: &QuboProblem,
    mask: &SelectionMask,
    seq_len: usize,
) -> Result<MutationLandscape> {
    let n = problem.num_vars();
    if seq_len == 0 || !n.is_multiple_of(seq_len) {
        return Err(
            QamaError::Shape(format!("{n} variables do not split into rows of {seq_len}")).into(),
        );
    }
    let base_energy = problem.energy_of_mask(mask)?;
    let rows = (0..n)
        .map(|k| {
            let mutated_energy = problem.energy_of_mask(&mask.flipped(k))?;
            Ok(LandscapeRow {
                flat_index: k,
                head: k / seq_len,
                token: k % seq_len,
                mutated_energy,
                delta: mutated_energy - base_energy,
            })
        })
        .collect::<Result<_>>()?;
    Ok(MutationLandscape { base_energy, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use qama_core::anneal::brute_force;

    #[test]
    fn zero_problem_is_flat() {
        let q = QuboProblem::new(4);
        let l = mutation_landscape(&q, &SelectionMask::zeros(4), 2).unwrap();
        assert_eq!(l.rows.len(), 4);
        assert!(l.rows.iter().all(|r| r.delta == 0.0));
        assert_eq!(l.rows[3].head, 1);
        assert_eq!(l.rows[3].token, 1);
    }

    #[test]
    fn ground_state_is_single_flip_stable() {
        let mut q = QuboProblem::new(4);
        q.add_quadratic(0, 1, -2.0).unwrap();
        q.add_quadratic(1, 3, 1.5).unwrap();
        q.add_linear(2, -0.5).unwrap();
        q.add_linear(3, -1.0).unwrap();
        let best = brute_force(&q).unwrap();
        let l = mutation_landscape(&q, &best.best_state, 2).unwrap();
        assert!(l.min_delta().unwrap() >= -1e-9);
        assert!(l.mean_mutated_energy().unwrap() >= l.base_energy);
        for r in &l.rows {
            assert!((r.delta - (r.mutated_energy - l.base_energy)).abs() < 1e-9);
        }
    }

    #[test]
    fn layout_mismatch_rejected() {
        assert!(mutation_landscape(&QuboProblem::new(3), &SelectionMask::zeros(3), 2).is_err());
    }
}
