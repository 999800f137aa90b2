//! Solver backends and run analysis.
//!
//! Every backend consumes an [`IsingProblem`] and a seed and returns a
//! [`SolveResult`] whose `best_state` is a binary selection. Energies are
//! comparable across backends because the QUBO -> Ising conversion carries
//! its offset.

mod barrier;
mod brute;
mod sa;
mod schedule;
mod softspin;
mod tts;

pub use barrier::{min_barrier, BarrierReport, MAX_BARRIER_VARS};
pub use brute::{brute_force, brute_force_ising, DEFAULT_BRUTE_CAP};
pub use sa::{acceptance_probability, simulated_anneal, Acceptance, SaConfig, SweepOrder};
pub use schedule::{AnnealSchedule, Interpolation};
pub use softspin::{soft_spin_anneal, SoftSpinConfig};
pub use tts::{
    default_tolerance, estimate_success_probability, run_trials, time_to_solution, Trial, TtsReport,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ising::IsingProblem;
use crate::types::SelectionMask;

/// Identifies which backend produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    BruteForce,
    Metropolis,
    Glauber,
    SoftSpin,
}

impl BackendKind {
    pub fn name(&self) -> &'static str {
        match self {
            BackendKind::BruteForce => "brute",
            BackendKind::Metropolis => "sa",
            BackendKind::Glauber => "glauber",
            BackendKind::SoftSpin => "softspin",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub best_state: SelectionMask,
    pub best_energy: f64,
    pub energy_trace: Option<Vec<f64>>,
    pub sweeps_used: usize,
    pub seed: u64,
    pub backend: BackendKind,
}

/// The seam where any annealer (software or hardware) plugs in.
pub trait SolverBackend: Send + Sync {
    fn kind(&self) -> BackendKind;

    fn solve(&self, problem: &IsingProblem, seed: u64) -> Result<SolveResult>;
}

/// Serializable backend selection plus its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "snake_case")]
pub enum BackendConfig {
    Brute { cap: usize },
    Anneal(SaConfig),
    SoftSpin(SoftSpinConfig),
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig::Anneal(SaConfig::default())
    }
}

impl SolverBackend for BackendConfig {
    fn kind(&self) -> BackendKind {
        match self {
            BackendConfig::Brute { .. } => BackendKind::BruteForce,
            BackendConfig::Anneal(cfg) => match cfg.acceptance {
                Acceptance::Metropolis => BackendKind::Metropolis,
                Acceptance::Glauber => BackendKind::Glauber,
            },
            BackendConfig::SoftSpin(_) => BackendKind::SoftSpin,
        }
    }

    fn solve(&self, problem: &IsingProblem, seed: u64) -> Result<SolveResult> {
        match self {
            BackendConfig::Brute { cap } => {
                let mut result = brute_force_ising(problem, *cap)?;
                result.seed = seed;
                Ok(result)
            }
            BackendConfig::Anneal(cfg) => Ok(simulated_anneal(problem, cfg, seed)),
            BackendConfig::SoftSpin(cfg) => Ok(soft_spin_anneal(problem, cfg, seed)),
        }
    }
}
