//! Forward pass report: head masks, energy breakdown, e_dist summary.

use std::path::Path;

use qama_core::anneal::SolverBackend;
use qama_core::hamiltonian::energy_breakdown;
use qama_core::operator::{extract_head_masks, forward, EnergyOutput};
use qama_core::{AttentionInput, CoefficientConfig};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::output::{ensure_dir, write_json, write_matrix_csv};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchBreakdown {
    pub batch: usize,
    pub h_alpha: f64,
    pub h_beta: f64,
    pub h_gamma: f64,
    pub rho: f64,
    pub lambda: f64,
    pub e_out: f64,
    /// Solver objective at the mask, penalty included.
    pub solver_energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    /// Population mean and standard deviation; zeros for an empty slice.
    pub fn of(values: &[f64]) -> Summary {
        if values.is_empty() {
            return Summary {
                mean: 0.0,
                std: 0.0,
            };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        Summary {
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardReport {
    pub breakdown: Vec<BatchBreakdown>,
    pub e_dist: Summary,
    pub head_masks: Vec<Vec<Vec<u8>>>,
    #[serde(skip)]
    pub output: Option<EnergyOutput>,
}

pub fn head_mask_file(batch: usize) -> String {
    format!("head_mask_b{batch}.csv")
}

pub const BREAKDOWN_FILE: &str = "breakdown.json";
pub const E_DIST_FILE: &str = "e_dist_summary.json";

/// Runs the operator and writes `head_mask_b<b>.csv`, `breakdown.json` and
/// `e_dist_summary.json` under `out_dir`.
pub fn run_forward_report(
    input: &AttentionInput,
    cfg: &CoefficientConfig,
    backend: &dyn SolverBackend,
    seed: u64,
    out_dir: &Path,
) -> Result<ForwardReport> {
    let (output, cache) = forward(input, cfg, backend, seed)?;
    let coeff = cache.coefficients;
    let breakdown = (0..cache.masks.len())
        .map(|b| {
            let br = energy_breakdown(
                &cache.masks[b],
                &cache.couplings[b],
                &cache.fields[b],
                &coeff,
            )?;
            Ok(BatchBreakdown {
                batch: b,
                h_alpha: br.h_alpha,
                h_beta: br.h_beta,
                h_gamma: br.h_gamma,
                rho: coeff.rho,
                lambda: coeff.lambda,
                e_out: output.e_out[b],
                solver_energy: br.total,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let head_masks: Vec<Vec<Vec<u8>>> = extract_head_masks(&cache)
        .into_iter()
        .map(|m| m.rows)
        .collect();
    let e_dist = Summary::of(output.e_dist.data());

    ensure_dir(out_dir)?;
    for (b, rows) in head_masks.iter().enumerate() {
        write_matrix_csv(&out_dir.join(head_mask_file(b)), rows)?;
    }
    write_json(&out_dir.join(BREAKDOWN_FILE), &breakdown)?;
    write_json(&out_dir.join(E_DIST_FILE), &e_dist)?;
    Ok(ForwardReport {
        breakdown,
        e_dist,
        head_masks,
        output: Some(output),
    })
}
