//! Construction of the three-term selection Hamiltonian
//!
//! ```text
//! H(s) = -H_alpha - rho * H_beta + lambda * H_gamma
//! H_alpha = sum_t sum_{i<j} J[t,i,j] s[t,i] s[t,j]
//! H_beta  = sum_t sum_i h[t,i] s[t,i]
//! H_gamma = sum_i sum_{t1<t2} s[t1,i] s[t2,i]
//! ```
//!
//! with `J_t = (Q_t K_t^T)(Q_t K_t^T)^T / (2D)` (diagonal removed) and
//! `h[t,i] = V[t,i,:] . W_eps`. Everything here works on one batch element.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{QamaError, Result};
use crate::qubo::QuboProblem;
use crate::types::{CoefficientConfig, HeadsView, SelectionMask, Shape};

/// Per-head symmetric couplings `J[t,i,j]` with zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingTensor {
    heads: usize,
    seq_len: usize,
    data: Vec<f64>,
}

impl CouplingTensor {
    pub fn from_vec(heads: usize, seq_len: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != heads * seq_len * seq_len {
            return Err(QamaError::Shape(format!(
                "coupling tensor {heads}x{seq_len}x{seq_len} needs {} entries, got {}",
                heads * seq_len * seq_len,
                data.len()
            )));
        }
        Ok(CouplingTensor {
            heads,
            seq_len,
            data,
        })
    }

    pub fn zeros(heads: usize, seq_len: usize) -> Self {
        CouplingTensor {
            heads,
            seq_len,
            data: vec![0.0; heads * seq_len * seq_len],
        }
    }

    pub fn heads(&self) -> usize {
        self.heads
    }

    pub fn seq_len(&self) -> usize {
        self.seq_len
    }

    #[inline]
    pub fn get(&self, t: usize, i: usize, j: usize) -> f64 {
        self.data[(t * self.seq_len + i) * self.seq_len + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Per-token fields `h[t,i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldVector {
    heads: usize,
    seq_len: usize,
    data: Vec<f64>,
}

impl FieldVector {
    pub fn from_vec(heads: usize, seq_len: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != heads * seq_len {
            return Err(QamaError::Shape(format!(
                "field vector {heads}x{seq_len} needs {} entries, got {}",
                heads * seq_len,
                data.len()
            )));
        }
        Ok(FieldVector {
            heads,
            seq_len,
            data,
        })
    }

    pub fn heads(&self) -> usize {
        self.heads
    }

    pub fn seq_len(&self) -> usize {
        self.seq_len
    }

    #[inline]
    pub fn get(&self, t: usize, i: usize) -> f64 {
        self.data[t * self.seq_len + i]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Size-rescaled weights of the linear and penalty terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicCoefficients {
    pub rho: f64,
    pub lambda: f64,
    /// Set when `H == 1`: no cross-head pairs exist, so the penalty is dropped.
    pub penalty_disabled: bool,
}

/// Value of each subterm at a given selection, plus the assembled total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub h_alpha: f64,
    pub h_beta: f64,
    pub h_gamma: f64,
    pub total: f64,
}

/// Expected maximum of each subterm for standardized inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubtermMaxima {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl SubtermMaxima {
    /// `alpha / (rho * beta)`, or `None` when the weighted linear term vanishes.
    pub fn interaction_to_linear(&self, coeff: &DynamicCoefficients) -> Option<f64> {
        let denom = coeff.rho * self.beta;
        (denom != 0.0).then(|| self.alpha / denom)
    }

    /// `alpha / (lambda * gamma)`, or `None` when the weighted penalty vanishes.
    pub fn interaction_to_penalty(&self, coeff: &DynamicCoefficients) -> Option<f64> {
        let denom = coeff.lambda * self.gamma;
        (denom != 0.0).then(|| self.alpha / denom)
    }
}

/// `J_t = M_t M_t^T / (2D)` with `M_t = Q_t K_t^T`, diagonal zeroed.
pub fn compute_coupling(q: HeadsView<'_>, k: HeadsView<'_>) -> Result<CouplingTensor> {
    if !q.same_dims(&k) {
        return Err(QamaError::Shape(format!(
            "Q is {}x{}x{} but K is {}x{}x{}",
            q.heads, q.seq_len, q.dim, k.heads, k.seq_len, k.dim
        )));
    }
    let (heads, n, dim) = (q.heads, q.seq_len, q.dim);
    let scale = 1.0 / (2.0 * dim as f64);
    let mut out = CouplingTensor::zeros(heads, n);
    let mut m = vec![0.0; n * n];
    for t in 0..heads {
        for i in 0..n {
            let qi = q.row(t, i);
            for j in 0..n {
                m[i * n + j] = dot(qi, k.row(t, j));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let v = dot(&m[i * n..(i + 1) * n], &m[j * n..(j + 1) * n]) * scale;
                out.data[(t * n + i) * n + j] = v;
                out.data[(t * n + j) * n + i] = v;
            }
        }
    }
    Ok(out)
}

/// `h[t,i] = V[t,i,:] . W_eps`.
pub fn compute_field(v: HeadsView<'_>, w_eps: &[f64]) -> Result<FieldVector> {
    if w_eps.len() != v.dim {
        return Err(QamaError::Shape(format!(
            "W_eps has {} entries but V has feature dim {}",
            w_eps.len(),
            v.dim
        )));
    }
    let data = (0..v.heads)
        .flat_map(|t| (0..v.seq_len).map(move |i| (t, i)))
        .map(|(t, i)| dot(v.row(t, i), w_eps))
        .collect();
    FieldVector::from_vec(v.heads, v.seq_len, data)
}

/// `rho = N rho0`, `lambda = N sqrt(2/pi) / (H - 1) * lambda0`.
pub fn dynamic_coefficients(shape: &Shape, cfg: &CoefficientConfig) -> DynamicCoefficients {
    let n = shape.seq_len as f64;
    let rho = n * cfg.rho0;
    if shape.heads < 2 {
        return DynamicCoefficients {
            rho,
            lambda: 0.0,
            penalty_disabled: true,
        };
    }
    let lambda = n * (2.0 / PI).sqrt() / (shape.heads as f64 - 1.0) * cfg.lambda0;
    DynamicCoefficients {
        rho,
        lambda,
        penalty_disabled: false,
    }
}

/// Expected maxima `(H N^2 / sqrt(2 pi), H N / sqrt(2 pi), H (H-1) N / 2)`.
///
/// The interaction count uses `N^2` although `H_alpha` only sums `i < j`;
/// these values are diagnostics only.
pub fn expected_max_subterms(shape: &Shape) -> SubtermMaxima {
    let h = shape.heads as f64;
    let n = shape.seq_len as f64;
    let g = (1.0 / (2.0 * PI)).sqrt();
    SubtermMaxima {
        alpha: h * n * n * g,
        beta: h * n * g,
        gamma: h * (h - 1.0) * n / 2.0,
    }
}

/// Monte-Carlo estimate of `E[max(0, X)]` for `X ~ N(0, 1)`; converges to `1/sqrt(2 pi)`.
pub fn positive_part_mean(samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = 0.0;
    for _ in 0..samples {
        let x: f64 = StandardNormal.sample(&mut rng);
        acc += x.max(0.0);
    }
    acc / samples.max(1) as f64
}

fn check_layout(j: &CouplingTensor, h: &FieldVector, heads: usize, n: usize) -> Result<()> {
    if j.heads != heads || j.seq_len != n || h.heads != heads || h.seq_len != n {
        return Err(QamaError::Shape(format!(
            "expected H={heads} N={n}, got J {}x{} and h {}x{}",
            j.heads, j.seq_len, h.heads, h.seq_len
        )));
    }
    Ok(())
}

/// Assembles the minimization problem for one batch element.
pub fn assemble_qubo(
    j: &CouplingTensor,
    h: &FieldVector,
    coeff: &DynamicCoefficients,
    shape: &Shape,
) -> Result<QuboProblem> {
    let (heads, n) = (shape.heads, shape.seq_len);
    check_layout(j, h, heads, n)?;
    let mut qubo = QuboProblem::new(heads * n).with_shape(*shape);
    for t in 0..heads {
        for i in 0..n {
            let p = t * n + i;
            qubo.add_linear(p, -coeff.rho * h.get(t, i))?;
            for jj in (i + 1)..n {
                qubo.add_quadratic(p, t * n + jj, -j.get(t, i, jj))?;
            }
        }
    }
    if !coeff.penalty_disabled {
        for i in 0..n {
            for t1 in 0..heads {
                for t2 in (t1 + 1)..heads {
                    qubo.add_quadratic(t1 * n + i, t2 * n + i, coeff.lambda)?;
                }
            }
        }
    }
    Ok(qubo)
}

/// Evaluates `H_alpha`, `H_beta`, `H_gamma` directly at `mask`.
pub fn energy_breakdown(
    mask: &SelectionMask,
    j: &CouplingTensor,
    h: &FieldVector,
    coeff: &DynamicCoefficients,
) -> Result<EnergyBreakdown> {
    let (heads, n) = (j.heads, j.seq_len);
    check_layout(j, h, heads, n)?;
    if mask.len() != heads * n {
        return Err(QamaError::Shape(format!(
            "mask has {} bits for H*N = {}",
            mask.len(),
            heads * n
        )));
    }
    let s = |t: usize, i: usize| mask.get(t * n + i);
    let mut h_alpha = 0.0;
    let mut h_beta = 0.0;
    let mut h_gamma = 0.0;
    for t in 0..heads {
        for i in 0..n {
            if !s(t, i) {
                continue;
            }
            h_beta += h.get(t, i);
            for jj in (i + 1)..n {
                if s(t, jj) {
                    h_alpha += j.get(t, i, jj);
                }
            }
            for t2 in (t + 1)..heads {
                if s(t2, i) {
                    h_gamma += 1.0;
                }
            }
        }
    }
    let penalty = if coeff.penalty_disabled {
        0.0
    } else {
        coeff.lambda * h_gamma
    };
    Ok(EnergyBreakdown {
        h_alpha,
        h_beta,
        h_gamma,
        total: -h_alpha - coeff.rho * h_beta + penalty,
    })
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
