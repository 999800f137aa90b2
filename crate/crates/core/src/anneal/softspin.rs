//! Soft-spin relaxation in the style of a coherent Ising machine.
//!
//! Each spin carries a continuous amplitude `x` evolving as
//! `dx/dt = (p - 1) x - x^3 + xi (h + J x) + noise` with the pump `p`
//! ramped linearly. The sign pattern is read out periodically and the best
//! binarized state is kept. This backend is best effort.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::ising::IsingProblem;
use crate::types::{spins_to_mask, SpinState};

use super::{BackendKind, SolveResult};

const AMPLITUDE_CLAMP: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoftSpinConfig {
    pub steps: usize,
    pub dt: f64,
    pub gain_start: f64,
    pub gain_end: f64,
    pub noise: f64,
    /// Drive strength relative to the largest row norm of the problem.
    pub coupling_strength: f64,
    pub eval_every: usize,
}

impl Default for SoftSpinConfig {
    fn default() -> Self {
        SoftSpinConfig {
            steps: 2000,
            dt: 0.05,
            gain_start: 0.0,
            gain_end: 1.5,
            noise: 0.5,
            coupling_strength: 3.0,
            eval_every: 10,
        }
    }
}

pub fn soft_spin_anneal(problem: &IsingProblem, cfg: &SoftSpinConfig, seed: u64) -> SolveResult {
    let n = problem.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let norm = problem.max_row_norm();
    let xi = if norm > 0.0 {
        cfg.coupling_strength / norm
    } else {
        0.0
    };
    let mut x: Vec<f64> = (0..n)
        .map(|_| 0.01 * Distribution::<f64>::sample(&StandardNormal, &mut rng))
        .collect();
    let mut drive = vec![0.0; n];
    let mut spins = vec![-1i8; n];
    let mut best = spins.clone();
    let mut best_energy = f64::INFINITY;
    let noise_scale = cfg.noise * cfg.dt.sqrt();
    let eval_every = cfg.eval_every.max(1);

    let mut readout = |x: &[f64], best: &mut Vec<i8>, best_energy: &mut f64| {
        for (s, &a) in spins.iter_mut().zip(x) {
            *s = if a >= 0.0 { 1 } else { -1 };
        }
        let e = problem.energy_raw(&spins);
        if e < *best_energy {
            *best_energy = e;
            best.copy_from_slice(&spins);
        }
    };

    for step in 0..cfg.steps {
        let frac = if cfg.steps > 1 {
            step as f64 / (cfg.steps - 1) as f64
        } else {
            1.0
        };
        let gain = cfg.gain_start + (cfg.gain_end - cfg.gain_start) * frac;
        for (k, d) in drive.iter_mut().enumerate() {
            let mut f = problem.fields()[k];
            for &(j, w) in problem.neighbours(k) {
                f += w * x[j];
            }
            *d = xi * f;
        }
        for k in 0..n {
            let a = x[k];
            let dx = (gain - 1.0) * a - a * a * a + drive[k];
            let kick: f64 = StandardNormal.sample(&mut rng);
            x[k] = (a + cfg.dt * dx + noise_scale * kick).clamp(-AMPLITUDE_CLAMP, AMPLITUDE_CLAMP);
        }
        if (step + 1) % eval_every == 0 {
            readout(&x, &mut best, &mut best_energy);
        }
    }
    readout(&x, &mut best, &mut best_energy);

    SolveResult {
        best_state: spins_to_mask(&SpinState::from_spins_unchecked(best.clone())),
        best_energy: problem.energy_raw(&best),
        energy_trace: None,
        sweeps_used: cfg.steps,
        seed,
        backend: BackendKind::SoftSpin,
    }
}
