//! Single-spin-flip simulated annealing with Metropolis or Glauber acceptance.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ising::IsingProblem;
use crate::types::{spins_to_mask, SpinState};

use super::{AnnealSchedule, BackendKind, SolveResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Acceptance {
    /// `min(1, exp(-beta * delta))`
    Metropolis,
    /// `1 / (1 + exp(beta * delta))`
    Glauber,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOrder {
    Sequential,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaConfig {
    pub schedule: AnnealSchedule,
    pub acceptance: Acceptance,
    pub order: SweepOrder,
    pub record_trace: bool,
}

impl Default for SaConfig {
    fn default() -> Self {
        SaConfig {
            schedule: AnnealSchedule::default(),
            acceptance: Acceptance::Metropolis,
            order: SweepOrder::Sequential,
            record_trace: false,
        }
    }
}

/// Probability of accepting a move with energy change `delta` at inverse temperature `beta`.
pub fn acceptance_probability(rule: Acceptance, beta: f64, delta: f64) -> f64 {
    match rule {
        Acceptance::Metropolis => {
            if delta <= 0.0 {
                1.0
            } else {
                (-beta * delta).exp()
            }
        }
        Acceptance::Glauber => 1.0 / (1.0 + (beta * delta).exp()),
    }
}

fn accept(rule: Acceptance, beta: f64, delta: f64, rng: &mut ChaCha8Rng) -> bool {
    match rule {
        Acceptance::Metropolis if delta <= 0.0 => true,
        _ => rng.random::<f64>() < acceptance_probability(rule, beta, delta),
    }
}

/// Anneals from a random spin state and returns the best state visited.
pub fn simulated_anneal(problem: &IsingProblem, cfg: &SaConfig, seed: u64) -> SolveResult {
    let n = problem.n();
    let schedule = &cfg.schedule;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spins: Vec<i8> = (0..n)
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect();
    let mut energy = problem.energy_raw(&spins);
    let mut best = spins.clone();
    let mut best_energy = energy;
    let mut order: Vec<usize> = (0..n).collect();
    let mut trace = cfg
        .record_trace
        .then(|| Vec::with_capacity(schedule.sweeps));

    for sweep in 0..schedule.sweeps {
        let beta = schedule.beta_at(sweep);
        if cfg.order == SweepOrder::Random {
            order.shuffle(&mut rng);
        }
        for &k in &order {
            let delta = problem.delta_raw(&spins, k);
            if accept(cfg.acceptance, beta, delta, &mut rng) {
                spins[k] = -spins[k];
                energy += delta;
                if energy < best_energy {
                    best_energy = energy;
                    best.copy_from_slice(&spins);
                }
            }
        }
        // drop accumulated rounding once per sweep
        energy = problem.energy_raw(&spins);
        if energy < best_energy {
            best_energy = energy;
            best.copy_from_slice(&spins);
        }
        if let Some(trace) = trace.as_mut() {
            trace.push(energy);
        }
    }

    let best_energy = problem.energy_raw(&best);
    SolveResult {
        best_state: spins_to_mask(&SpinState::from_spins_unchecked(best)),
        best_energy,
        energy_trace: trace,
        sweeps_used: schedule.sweeps,
        seed,
        backend: match cfg.acceptance {
            Acceptance::Metropolis => BackendKind::Metropolis,
            Acceptance::Glauber => BackendKind::Glauber,
        },
    }
}
