//! Success-probability estimation and time to solution.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QamaError, Result};
use crate::ising::IsingProblem;

use super::SolverBackend;

/// Target confidence of reaching the ground state at least once.
const TARGET_CONFIDENCE: f64 = 0.99;

/// Slack below which a run-count ratio is treated as the integer it rounds to.
const CEIL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TtsReport {
    pub p_success: f64,
    pub t_ann: f64,
    /// Required repetitions; `None` when `p_success == 0`.
    pub runs: Option<u64>,
    /// `t_ann * runs`; `None` (unbounded) when `p_success == 0`.
    pub t_sol: Option<f64>,
}

impl TtsReport {
    pub fn is_unbounded(&self) -> bool {
        self.t_sol.is_none()
    }
}

/// `T_sol = T_ann * ceil(ln(0.01) / ln(1 - P))`.
///
/// The ratio is snapped to an integer when it lies within `1e-9` above it,
/// so `P = 0.99` yields one run despite `1 - 0.99` not being exact in binary.
pub fn time_to_solution(p_success: f64, t_ann: f64) -> Result<TtsReport> {
    if !(0.0..=1.0).contains(&p_success) {
        return Err(QamaError::Argument(format!(
            "p_success must lie in [0, 1], got {p_success}"
        )));
    }
    if !(t_ann.is_finite() && t_ann > 0.0) {
        return Err(QamaError::Argument(format!(
            "t_ann must be finite and > 0, got {t_ann}"
        )));
    }
    let runs = if p_success == 0.0 {
        None
    } else if p_success == 1.0 {
        Some(1)
    } else {
        let ratio = (1.0 - TARGET_CONFIDENCE).ln() / (-p_success).ln_1p();
        Some(((ratio - CEIL_SLACK).ceil() as u64).max(1))
    };
    Ok(TtsReport {
        p_success,
        t_ann,
        runs,
        t_sol: runs.map(|r| t_ann * r as f64),
    })
}

/// `1e-6 * max(1, |ground|)`.
pub fn default_tolerance(ground_energy: f64) -> f64 {
    1e-6 * ground_energy.abs().max(1.0)
}

/// Outcome of one seeded solver run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub seed: u64,
    pub best_energy: f64,
    pub hit: bool,
    pub wall_secs: f64,
}

/// Runs `runs` independent solves with seeds `base_seed..base_seed + runs`.
pub fn run_trials(
    problem: &IsingProblem,
    backend: &dyn SolverBackend,
    runs: usize,
    base_seed: u64,
    ground_energy: f64,
    tol: Option<f64>,
) -> Result<Vec<Trial>> {
    if runs == 0 {
        return Err(QamaError::Argument("runs must be positive".into()));
    }
    let tol = tol.unwrap_or_else(|| default_tolerance(ground_energy));
    (0..runs as u64)
        .into_par_iter()
        .map(|r| {
            let seed = base_seed.wrapping_add(r);
            let start = Instant::now();
            let result = backend.solve(problem, seed)?;
            let wall_secs = start.elapsed().as_secs_f64();
            Ok(Trial {
                seed,
                best_energy: result.best_energy,
                hit: result.best_energy <= ground_energy + tol,
                wall_secs,
            })
        })
        .collect()
}

/// Fraction of seeded runs reaching `ground_energy + tol`.
pub fn estimate_success_probability(
    problem: &IsingProblem,
    backend: &dyn SolverBackend,
    runs: usize,
    base_seed: u64,
    ground_energy: f64,
    tol: Option<f64>,
) -> Result<f64> {
    let trials = run_trials(problem, backend, runs, base_seed, ground_energy, tol)?;
    Ok(trials.iter().filter(|t| t.hit).count() as f64 / runs as f64)
}
