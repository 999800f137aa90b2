//! One function per subcommand. Each writes its files under `out_dir` and
//! returns a JSON summary for stdout.

use std::path::{Path, PathBuf};

use qama_core::anneal::{
    brute_force, min_barrier, SolverBackend, DEFAULT_BRUTE_CAP, MAX_BARRIER_VARS,
};
use qama_core::synth::{generate_instance, raw_draws};
use qama_core::{mask_to_spins, AttentionInput, Objective, SelectionMask};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bench::benchmark_solvers;
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::export::{export_problem, import_problem, Problem};
use crate::instance::input_qubos;
use crate::landscape::mutation_landscape;
use crate::output::{ensure_dir, read_json, write_csv, write_json};
use crate::report::run_forward_report;

pub const INSTANCE_FILE: &str = "instance.json";
pub const SOLVE_FILE: &str = "solve.json";
pub const LANDSCAPE_FILE: &str = "landscape.csv";
pub const LANDSCAPE_SUMMARY_FILE: &str = "landscape_summary.json";
pub const BENCH_FILE: &str = "bench.csv";
pub const BENCH_SUMMARY_FILE: &str = "bench_summary.json";

pub fn problem_file(batch: usize, kind: &str) -> String {
    format!("problem_b{batch}_{kind}.json")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub batch: usize,
    pub backend: String,
    pub seed: u64,
    pub best_energy: f64,
    pub mask: Vec<u8>,
    pub sweeps_used: usize,
}

/// A saved instance when `input` is given, otherwise the seeded synthetic one.
pub fn load_or_generate(cfg: &ExperimentConfig, input: Option<&Path>) -> Result<AttentionInput> {
    match input {
        Some(path) => {
            let inp: AttentionInput = read_json(path)?;
            inp.validate()?;
            Ok(inp)
        }
        None => Ok(generate_instance(&cfg.shape, cfg.seed)?),
    }
}

pub fn generate(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Value> {
    cfg.validate()?;
    let input = generate_instance(&cfg.shape, cfg.seed)?;
    let raw = raw_draws(&cfg.shape, cfg.seed)?;
    let count = raw.iter().count();
    let positive_mean = raw.iter().map(|x| x.max(0.0)).sum::<f64>() / count as f64;
    ensure_dir(out_dir)?;
    let path = out_dir.join(INSTANCE_FILE);
    write_json(&path, &input)?;
    Ok(json!({
        "command": "generate",
        "file": path,
        "shape": cfg.shape,
        "raw_draws": count,
        "raw_positive_part_mean": positive_mean,
    }))
}

pub fn solve(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    input: Option<&Path>,
    problem: Option<&Path>,
) -> Result<Value> {
    cfg.validate()?;
    let backend = cfg.backend_config(cfg.backend)?;
    let problems = match problem {
        Some(path) => vec![import_problem(path)?.to_ising()],
        None => {
            let inp = load_or_generate(cfg, input)?;
            input_qubos(&inp, &cfg.coefficients()?)?
                .iter()
                .map(qama_core::to_ising)
                .collect()
        }
    };
    let records = problems
        .iter()
        .enumerate()
        .map(|(b, p)| {
            let r = backend.solve(p, cfg.seed)?;
            Ok(SolveRecord {
                batch: b,
                backend: cfg.backend.as_str().into(),
                seed: cfg.seed,
                best_energy: r.best_energy,
                mask: r.best_state.to_u8(),
                sweeps_used: r.sweeps_used,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ensure_dir(out_dir)?;
    let path = out_dir.join(SOLVE_FILE);
    write_json(&path, &records)?;
    Ok(json!({
        "command": "solve",
        "file": path,
        "best_energy": records.iter().map(|r| r.best_energy).collect::<Vec<_>>(),
    }))
}

pub fn forward(cfg: &ExperimentConfig, out_dir: &Path, input: Option<&Path>) -> Result<Value> {
    cfg.validate()?;
    let inp = load_or_generate(cfg, input)?;
    let backend = cfg.backend_config(cfg.backend)?;
    let report = run_forward_report(&inp, &cfg.coefficients()?, &backend, cfg.seed, out_dir)?;
    Ok(json!({
        "command": "forward",
        "out_dir": out_dir,
        "e_out": report.breakdown.iter().map(|b| b.e_out).collect::<Vec<_>>(),
        "e_dist": report.e_dist,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierSummary {
    pub b_min: f64,
    pub b_u: f64,
    pub flips: usize,
    pub witness_path: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeSummary {
    pub backend: String,
    pub mask: Vec<u8>,
    pub base_energy: f64,
    pub mean_mutated_energy: Option<f64>,
    pub min_delta: Option<f64>,
    /// Exact optimum, when the problem fits the brute-force cap.
    pub ground_energy: Option<f64>,
    /// Barrier from the empty selection to the exact optimum, for small problems.
    pub barrier_from_empty: Option<BarrierSummary>,
}

/// Landscape of batch element 0 around the configured backend's solution.
pub fn landscape(cfg: &ExperimentConfig, out_dir: &Path, input: Option<&Path>) -> Result<Value> {
    cfg.validate()?;
    let inp = load_or_generate(cfg, input)?;
    let qubo = input_qubos(&inp, &cfg.coefficients()?)?.swap_remove(0);
    let ising = qama_core::to_ising(&qubo);
    let solved = cfg.backend_config(cfg.backend)?.solve(&ising, cfg.seed)?;
    let land = mutation_landscape(&qubo, &solved.best_state, inp.shape().seq_len)?;

    let n = qubo.num_vars();
    let exact = (n <= DEFAULT_BRUTE_CAP)
        .then(|| brute_force(&qubo))
        .transpose()?;
    let barrier_from_empty = match &exact {
        Some(best) if n <= MAX_BARRIER_VARS => {
            let r = min_barrier(
                &ising,
                &mask_to_spins(&SelectionMask::zeros(n)),
                &mask_to_spins(&best.best_state),
                None,
            )?;
            Some(BarrierSummary {
                b_min: r.b_min,
                b_u: r.b_u,
                flips: r.flips,
                witness_path: r.witness_path,
            })
        }
        _ => None,
    };
    let summary = LandscapeSummary {
        backend: cfg.backend.as_str().into(),
        mask: solved.best_state.to_u8(),
        base_energy: land.base_energy,
        mean_mutated_energy: land.mean_mutated_energy(),
        min_delta: land.min_delta(),
        ground_energy: exact.map(|b| b.best_energy),
        barrier_from_empty,
    };
    ensure_dir(out_dir)?;
    write_csv(&out_dir.join(LANDSCAPE_FILE), &land.rows)?;
    write_json(&out_dir.join(LANDSCAPE_SUMMARY_FILE), &summary)?;
    Ok(json!({
        "command": "landscape",
        "out_dir": out_dir,
        "base_energy": summary.base_energy,
        "min_delta": summary.min_delta,
    }))
}

pub fn bench(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Value> {
    let report = benchmark_solvers(cfg)?;
    ensure_dir(out_dir)?;
    write_csv(&out_dir.join(BENCH_FILE), &report.rows)?;
    write_json(&out_dir.join(BENCH_SUMMARY_FILE), &report.summaries)?;
    Ok(json!({
        "command": "bench",
        "out_dir": out_dir,
        "success": report
            .summaries
            .iter()
            .map(|s| (s.backend.clone(), Value::from(s.tts.p_success)))
            .collect::<serde_json::Map<_, _>>(),
    }))
}

/// Writes the QUBO and Ising forms of every batch element.
pub fn export(cfg: &ExperimentConfig, out_dir: &Path, input: Option<&Path>) -> Result<Value> {
    cfg.validate()?;
    let inp = load_or_generate(cfg, input)?;
    ensure_dir(out_dir)?;
    let mut files: Vec<PathBuf> = Vec::new();
    for (b, qubo) in input_qubos(&inp, &cfg.coefficients()?)?
        .into_iter()
        .enumerate()
    {
        let ising = qama_core::to_ising(&qubo);
        for (kind, problem) in [
            ("qubo", Problem::Qubo(qubo.clone())),
            ("ising", Problem::Ising(ising)),
        ] {
            let path = out_dir.join(problem_file(b, kind));
            export_problem(&problem, &path)?;
            files.push(path);
        }
    }
    Ok(json!({ "command": "export", "files": files }))
}
