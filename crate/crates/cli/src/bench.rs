//! Solver benchmark against brute-force ground truth.

use std::time::Instant;

use qama_core::anneal::{
    brute_force_ising, default_tolerance, time_to_solution, SolverBackend, TtsReport,
    DEFAULT_BRUTE_CAP,
};
use qama_core::IsingProblem;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::instance::batch_qubo;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub backend: String,
    pub instance_seed: u64,
    pub best_energy: f64,
    pub ground_energy: f64,
    pub hit: bool,
    pub wall_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendSummary {
    pub backend: String,
    pub runs: usize,
    pub hits: usize,
    pub mean_wall_secs: f64,
    pub median_wall_secs: f64,
    pub tts: TtsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub summaries: Vec<BackendSummary>,
}

/// Smallest annealing time handed to the TTS formula, for backends that
/// finish below the clock resolution.
const MIN_T_ANN: f64 = 1e-9;

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    match n {
        0 => 0.0,
        _ if n % 2 == 1 => values[n / 2],
        _ => 0.5 * (values[n / 2 - 1] + values[n / 2]),
    }
}

pub fn summarize(backend: &str, rows: &[BenchRow]) -> Result<BackendSummary> {
    let mine: Vec<&BenchRow> = rows.iter().filter(|r| r.backend == backend).collect();
    let runs = mine.len();
    let hits = mine.iter().filter(|r| r.hit).count();
    let mut walls: Vec<f64> = mine.iter().map(|r| r.wall_secs).collect();
    let mean_wall_secs = if runs > 0 {
        walls.iter().sum::<f64>() / runs as f64
    } else {
        0.0
    };
    let median_wall_secs = median(&mut walls);
    let p = if runs > 0 {
        hits as f64 / runs as f64
    } else {
        0.0
    };
    Ok(BackendSummary {
        backend: backend.to_string(),
        runs,
        hits,
        mean_wall_secs,
        median_wall_secs,
        tts: time_to_solution(p, mean_wall_secs.max(MIN_T_ANN))?,
    })
}

/// One instance per seed in `seed..seed + runs`, each solved once by every
/// backend in `bench_backends` using the instance seed as solver seed.
pub fn benchmark_solvers(cfg: &ExperimentConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let mut shape = cfg.shape;
    shape.batch = 1;
    let coeff = cfg.coefficients()?;
    let mut names = cfg.bench_backends.clone();
    names.sort();
    names.dedup();
    let backends = names
        .iter()
        .map(|&n| Ok((n, cfg.backend_config(n)?)))
        .collect::<Result<Vec<_>>>()?;

    let per_instance: Vec<Vec<BenchRow>> = (0..cfg.runs as u64)
        .into_par_iter()
        .map(|r| {
            let instance_seed = cfg.seed.wrapping_add(r);
            let problem: IsingProblem =
                qama_core::to_ising(&batch_qubo(&shape, &coeff, instance_seed, 0)?);
            let ground = brute_force_ising(&problem, DEFAULT_BRUTE_CAP)?.best_energy;
            let tol = default_tolerance(ground);
            backends
                .iter()
                .map(|(name, backend)| {
                    let start = Instant::now();
                    let result = backend.solve(&problem, instance_seed)?;
                    let wall_secs = start.elapsed().as_secs_f64();
                    let hit = result.best_energy <= ground + tol;
                    Ok(BenchRow {
                        backend: name.as_str().to_string(),
                        instance_seed,
                        best_energy: result.best_energy,
                        ground_energy: ground,
                        hit,
                        wall_secs,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let rows: Vec<BenchRow> = per_instance.into_iter().flatten().collect();
    let summaries = names
        .iter()
        .map(|n| summarize(n.as_str(), &rows))
        .collect::<Result<_>>()?;
    Ok(BenchReport { rows, summaries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(backend: &str, hit: bool, wall: f64) -> BenchRow {
        BenchRow {
            backend: backend.into(),
            instance_seed: 0,
            best_energy: 0.0,
            ground_energy: 0.0,
            hit,
            wall_secs: wall,
        }
    }

    #[test]
    fn summary_recomputes_tts() {
        let rows = vec![
            row("sa", true, 1.0),
            row("sa", false, 3.0),
            row("brute", true, 2.0),
        ];
        let s = summarize("sa", &rows).unwrap();
        assert_eq!(s.runs, 2);
        assert_eq!(s.hits, 1);
        assert_eq!(s.mean_wall_secs, 2.0);
        assert_eq!(s.median_wall_secs, 2.0);
        assert_eq!(s.tts, time_to_solution(0.5, 2.0).unwrap());
        assert_eq!(s.tts.runs, Some(7));
    }

    #[test]
    fn median_odd_and_even() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&mut []), 0.0);
    }
}
