//! The end-to-end operator: build the Hamiltonian per batch element, solve
//! it for a selection mask, and map the penalty-free energy of that mask
//! back to feature space. Backward differentiates the energy expression
//! with the mask held constant.
//!
//! Per-token energy, with `s` the solved mask:
//!
//! ```text
//! e_token[t,i] = -s[t,i] * (1/2 * sum_{j != i} J[t,i,j] s[t,j] + rho * h[t,i])
//! e_out        = sum_{t,i} e_token[t,i] = -H_alpha - rho * H_beta
//! e_dist[t,i,:] = e_token[t,i] * W_eps^T
//! ```
//!
//! Each selected pair's interaction energy is split evenly between its two tokens.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anneal::{SolveResult, SolverBackend};
use crate::error::{QamaError, Result};
use crate::hamiltonian::{
    assemble_qubo, compute_coupling, compute_field, dot, dynamic_coefficients, CouplingTensor,
    DynamicCoefficients, FieldVector,
};
use crate::ising::to_ising;
use crate::types::{AttentionInput, CoefficientConfig, SelectionMask, Shape, Tensor4};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyOutput {
    pub shape: Shape,
    /// `B x H x N` per-token energies.
    pub e_token: Vec<f64>,
    /// `B` total penalty-free energies.
    pub e_out: Vec<f64>,
    /// `B x H x N x D`, same shape as `V`.
    pub e_dist: Tensor4,
}

impl EnergyOutput {
    pub fn token(&self, b: usize, t: usize, i: usize) -> f64 {
        self.e_token[(b * self.shape.heads + t) * self.shape.seq_len + i]
    }
}

/// Everything backward needs. Masks are constants here; no gradient flows
/// through the solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardCache {
    pub input: AttentionInput,
    pub coefficients: DynamicCoefficients,
    pub masks: Vec<SelectionMask>,
    pub couplings: Vec<CouplingTensor>,
    pub fields: Vec<FieldVector>,
    pub e_token: Vec<f64>,
    pub solves: Vec<SolveResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBundle {
    pub dq: Tensor4,
    pub dk: Tensor4,
    pub dv: Tensor4,
    pub dw_eps: Vec<f64>,
}

/// Per-head token selection of one batch element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadMasks {
    pub rows: Vec<Vec<u8>>,
}

impl HeadMasks {
    pub fn flatten(&self) -> SelectionMask {
        SelectionMask::new(self.rows.iter().flatten().map(|&b| b == 1).collect())
    }
}

struct BatchTerms {
    coupling: CouplingTensor,
    field: FieldVector,
}

fn batch_terms(input: &AttentionInput, b: usize) -> Result<BatchTerms> {
    Ok(BatchTerms {
        coupling: compute_coupling(input.q.batch(b), input.k.batch(b))?,
        field: compute_field(input.v.batch(b), &input.w_eps)?,
    })
}

fn token_energies(mask: &SelectionMask, j: &CouplingTensor, h: &FieldVector, rho: f64) -> Vec<f64> {
    let (heads, n) = (j.heads(), j.seq_len());
    let mut out = vec![0.0; heads * n];
    for t in 0..heads {
        for i in 0..n {
            if !mask.get(t * n + i) {
                continue;
            }
            let pair: f64 = (0..n)
                .filter(|&jj| jj != i && mask.get(t * n + jj))
                .map(|jj| j.get(t, i, jj))
                .sum();
            out[t * n + i] = -(0.5 * pair + rho * h.get(t, i));
        }
    }
    out
}

fn assemble_output(shape: Shape, w_eps: &[f64], per_batch: Vec<Vec<f64>>) -> Result<EnergyOutput> {
    let e_out = per_batch.iter().map(|e| e.iter().sum()).collect();
    let e_token: Vec<f64> = per_batch.into_iter().flatten().collect();
    let e_dist = e_token
        .iter()
        .flat_map(|&e| w_eps.iter().map(move |&w| e * w))
        .collect();
    Ok(EnergyOutput {
        shape,
        e_token,
        e_out,
        e_dist: Tensor4::from_vec(shape, e_dist)?,
    })
}

/// Solves every batch element and maps its energy to feature space.
///
/// Every batch element is solved with the same `seed`, so the result for an
/// element depends only on its own inputs.
pub fn forward(
    input: &AttentionInput,
    cfg: &CoefficientConfig,
    backend: &dyn SolverBackend,
    seed: u64,
) -> Result<(EnergyOutput, ForwardCache)> {
    input.validate()?;
    cfg.validate()?;
    let shape = input.shape();
    let coeff = dynamic_coefficients(&shape, cfg);

    let solved: Vec<(BatchTerms, SolveResult)> = (0..shape.batch)
        .into_par_iter()
        .map(|b| {
            let terms = batch_terms(input, b)?;
            let qubo = assemble_qubo(&terms.coupling, &terms.field, &coeff, &shape)?;
            let result = backend.solve(&to_ising(&qubo), seed)?;
            Ok((terms, result))
        })
        .collect::<Result<_>>()?;

    let mut masks = Vec::with_capacity(shape.batch);
    let mut couplings = Vec::with_capacity(shape.batch);
    let mut fields = Vec::with_capacity(shape.batch);
    let mut solves = Vec::with_capacity(shape.batch);
    let mut per_batch = Vec::with_capacity(shape.batch);
    for (terms, result) in solved {
        per_batch.push(token_energies(
            &result.best_state,
            &terms.coupling,
            &terms.field,
            coeff.rho,
        ));
        masks.push(result.best_state.clone());
        couplings.push(terms.coupling);
        fields.push(terms.field);
        solves.push(result);
    }
    let output = assemble_output(shape, &input.w_eps, per_batch)?;
    let cache = ForwardCache {
        input: input.clone(),
        coefficients: coeff,
        masks,
        couplings,
        fields,
        e_token: output.e_token.clone(),
        solves,
    };
    Ok((output, cache))
}

/// The forward map with masks supplied instead of solved. This is the
/// function whose derivative [`backward`] computes.
pub fn energy_output_with_masks(
    input: &AttentionInput,
    cfg: &CoefficientConfig,
    masks: &[SelectionMask],
) -> Result<EnergyOutput> {
    input.validate()?;
    let shape = input.shape();
    if masks.len() != shape.batch || masks.iter().any(|m| m.len() != shape.qubits()) {
        return Err(QamaError::Shape(format!(
            "need {} masks of {} bits",
            shape.batch,
            shape.qubits()
        )));
    }
    let coeff = dynamic_coefficients(&shape, cfg);
    let per_batch = (0..shape.batch)
        .map(|b| {
            let terms = batch_terms(input, b)?;
            Ok(token_energies(
                &masks[b],
                &terms.coupling,
                &terms.field,
                coeff.rho,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    assemble_output(shape, &input.w_eps, per_batch)
}

/// Per-batch `(dQ, dK, dV, dW_eps)` blocks before concatenation.
type BatchGrads = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>);

/// Gradients of `sum(grad_e_dist * e_dist)` with respect to Q, K, V and W_eps,
/// with the cached masks frozen.
pub fn backward(grad_e_dist: &Tensor4, cache: &ForwardCache) -> Result<GradientBundle> {
    let input = &cache.input;
    let shape = input.shape();
    if grad_e_dist.shape() != shape {
        return Err(QamaError::Shape(format!(
            "gradient has shape {:?}, e_dist has {:?}",
            grad_e_dist.shape(),
            shape
        )));
    }
    let (heads, n, dim) = (shape.heads, shape.seq_len, shape.dim);
    let rho = cache.coefficients.rho;
    let w = &input.w_eps;
    let block = heads * n * dim;
    let scale = 1.0 / (2.0 * dim as f64);

    let per_batch: Vec<BatchGrads> = (0..shape.batch)
        .into_par_iter()
        .map(|b| {
            let mask = &cache.masks[b];
            let g = grad_e_dist.batch(b);
            let (q, k, v) = (input.q.batch(b), input.k.batch(b), input.v.batch(b));
            let mut dq = vec![0.0; block];
            let mut dk = vec![0.0; block];
            let mut dv = vec![0.0; block];
            let mut dw = vec![0.0; dim];
            let s = |t: usize, i: usize| if mask.get(t * n + i) { 1.0 } else { 0.0 };

            for t in 0..heads {
                // upstream gradient on each token energy, and the mapping path into W_eps
                let ge: Vec<f64> = (0..n)
                    .map(|i| {
                        let gi = g.row(t, i);
                        let e = cache.e_token[(b * heads + t) * n + i];
                        for (dwd, gd) in dw.iter_mut().zip(gi) {
                            *dwd += gd * e;
                        }
                        dot(gi, w)
                    })
                    .collect();

                // field path: h = V W_eps
                for i in 0..n {
                    let gh = -rho * s(t, i) * ge[i];
                    if gh == 0.0 {
                        continue;
                    }
                    let vi = v.row(t, i);
                    for d in 0..dim {
                        dv[(t * n + i) * dim + d] += gh * w[d];
                        dw[d] += gh * vi[d];
                    }
                }

                // interaction path: J = M M^T / (2D), M = Q K^T
                // dL/dJ_ij = -1/2 s_i s_j ge_i, symmetrized since J_ij and J_ji are one entry
                let mut sym = vec![0.0; n * n];
                let mut any = false;
                for i in 0..n {
                    for jj in 0..n {
                        if i != jj {
                            let val = -0.5 * s(t, i) * s(t, jj) * (ge[i] + ge[jj]);
                            sym[i * n + jj] = val;
                            any |= val != 0.0;
                        }
                    }
                }
                if !any {
                    continue;
                }
                let mut m = vec![0.0; n * n];
                for i in 0..n {
                    for c in 0..n {
                        m[i * n + c] = dot(q.row(t, i), k.row(t, c));
                    }
                }
                let mut dm = vec![0.0; n * n];
                for i in 0..n {
                    for c in 0..n {
                        let mut acc = 0.0;
                        for jj in 0..n {
                            acc += sym[i * n + jj] * m[jj * n + c];
                        }
                        dm[i * n + c] = acc * scale;
                    }
                }
                for i in 0..n {
                    for c in 0..n {
                        let d_ic = dm[i * n + c];
                        if d_ic == 0.0 {
                            continue;
                        }
                        let (qi, kc) = (q.row(t, i), k.row(t, c));
                        for e in 0..dim {
                            dq[(t * n + i) * dim + e] += d_ic * kc[e];
                            dk[(t * n + c) * dim + e] += d_ic * qi[e];
                        }
                    }
                }
            }
            (dq, dk, dv, dw)
        })
        .collect();

    let mut dq = Vec::with_capacity(shape.numel());
    let mut dk = Vec::with_capacity(shape.numel());
    let mut dv = Vec::with_capacity(shape.numel());
    let mut dw_eps = vec![0.0; dim];
    for (q, k, v, w) in per_batch {
        dq.extend(q);
        dk.extend(k);
        dv.extend(v);
        for (acc, x) in dw_eps.iter_mut().zip(w) {
            *acc += x;
        }
    }
    Ok(GradientBundle {
        dq: Tensor4::from_vec(shape, dq)?,
        dk: Tensor4::from_vec(shape, dk)?,
        dv: Tensor4::from_vec(shape, dv)?,
        dw_eps,
    })
}

/// Reshapes each cached mask into `H` rows of `N` token bits.
pub fn extract_head_masks(cache: &ForwardCache) -> Vec<HeadMasks> {
    let shape = cache.input.shape();
    cache
        .masks
        .iter()
        .map(|mask| head_masks(mask, shape.heads, shape.seq_len))
        .collect()
}

pub fn head_masks(mask: &SelectionMask, heads: usize, seq_len: usize) -> HeadMasks {
    let bits = mask.to_u8();
    HeadMasks {
        rows: (0..heads)
            .map(|t| bits[t * seq_len..(t + 1) * seq_len].to_vec())
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anneal::{BackendConfig, DEFAULT_BRUTE_CAP};

    fn brute() -> BackendConfig {
        BackendConfig::Brute {
            cap: DEFAULT_BRUTE_CAP,
        }
    }

    fn input(shape: Shape, q: Vec<f64>, k: Vec<f64>, v: Vec<f64>, w: Vec<f64>) -> AttentionInput {
        AttentionInput::new(
            Tensor4::from_vec(shape, q).unwrap(),
            Tensor4::from_vec(shape, k).unwrap(),
            Tensor4::from_vec(shape, v).unwrap(),
            w,
        )
        .unwrap()
    }

    #[test]
    fn pair_example_splits_energy() {
        // Q=[[1],[2]], K=[[1],[1]] gives J01 = 2; V = 0 so h = 0
        let shape = Shape::new(1, 1, 2, 1).unwrap();
        let inp = input(
            shape,
            vec![1.0, 2.0],
            vec![1.0, 1.0],
            vec![0.0, 0.0],
            vec![1.0],
        );
        let (out, cache) = forward(&inp, &CoefficientConfig::default(), &brute(), 0).unwrap();
        assert_eq!(cache.masks[0].to_u8(), vec![1, 1]);
        assert_eq!(out.e_token, vec![-1.0, -1.0]);
        assert_eq!(out.e_out, vec![-2.0]);
        assert_eq!(out.e_dist.data(), &[-1.0, -1.0]);
    }

    #[test]
    fn zero_mask_gives_zero_output_and_gradients() {
        // strongly negative fields and no couplings force s = 0
        let shape = Shape::new(1, 2, 2, 2).unwrap();
        let v = vec![-5.0; 8];
        let inp = input(shape, vec![0.0; 8], vec![0.0; 8], v, vec![1.0, 1.0]);
        let (out, cache) = forward(&inp, &CoefficientConfig::default(), &brute(), 0).unwrap();
        assert_eq!(cache.masks[0].count_ones(), 0);
        assert!(out.e_token.iter().all(|&e| e == 0.0));
        assert!(out.e_dist.data().iter().all(|&e| e == 0.0));
        let grad = Tensor4::from_vec(shape, (0..8).map(|x| x as f64).collect()).unwrap();
        let g = backward(&grad, &cache).unwrap();
        assert!(g.dq.data().iter().all(|&x| x == 0.0));
        assert!(g.dk.data().iter().all(|&x| x == 0.0));
        assert!(g.dv.data().iter().all(|&x| x == 0.0));
        assert!(g.dw_eps.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn zero_upstream_gradient() {
        let shape = Shape::new(1, 1, 2, 1).unwrap();
        let inp = input(
            shape,
            vec![1.0, 2.0],
            vec![1.0, 1.0],
            vec![0.5, 0.1],
            vec![1.0],
        );
        let (_, cache) = forward(&inp, &CoefficientConfig::default(), &brute(), 0).unwrap();
        let g = backward(&Tensor4::zeros(shape), &cache).unwrap();
        assert!(g
            .dq
            .data()
            .iter()
            .chain(g.dk.data())
            .chain(g.dv.data())
            .all(|&x| x == 0.0));
        assert!(g.dw_eps.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn backward_rejects_wrong_shape() {
        let shape = Shape::new(1, 1, 2, 1).unwrap();
        let inp = input(
            shape,
            vec![1.0, 2.0],
            vec![1.0, 1.0],
            vec![0.0, 0.0],
            vec![1.0],
        );
        let (_, cache) = forward(&inp, &CoefficientConfig::default(), &brute(), 0).unwrap();
        let wrong = Tensor4::zeros(Shape::new(1, 1, 2, 2).unwrap());
        assert!(matches!(backward(&wrong, &cache), Err(QamaError::Shape(_))));
    }

    #[test]
    fn capacity_error_propagates() {
        let shape = Shape::new(1, 2, 3, 1).unwrap();
        let inp = input(shape, vec![0.0; 6], vec![0.0; 6], vec![0.0; 6], vec![1.0]);
        let small = BackendConfig::Brute { cap: 4 };
        assert!(matches!(
            forward(&inp, &CoefficientConfig::default(), &small, 0),
            Err(QamaError::Capacity { n: 6, cap: 4 })
        ));
    }

    #[test]
    fn head_mask_reshape() {
        let mask = SelectionMask::from_bits(&[1, 0, 0, 1]).unwrap();
        let hm = head_masks(&mask, 2, 2);
        assert_eq!(hm.rows, vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(hm.flatten(), mask);
        let ones = SelectionMask::from_bits(&[1; 6]).unwrap();
        assert!(head_masks(&ones, 3, 2)
            .rows
            .iter()
            .flatten()
            .all(|&b| b == 1));
    }
}
