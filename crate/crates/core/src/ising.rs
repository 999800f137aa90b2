//! Spin-form problems and the QUBO -> Ising change of basis.
//!
//! Sign convention: `E(sigma) = -sum_{p<q} J_pq s_p s_q - sum_p h_p s_p + offset`.
//! Substituting `x = (1 + sigma) / 2` into a QUBO gives, per pair weight `w`
//! and linear weight `c`:
//!
//! ```text
//! w x_p x_q = w/4 (1 + s_p + s_q + s_p s_q)  =>  J_pq -= w/4, h_p -= w/4, h_q -= w/4, offset += w/4
//! c x_p     = c/2 (1 + s_p)                  =>  h_p -= c/2, offset += c/2
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{QamaError, Result};
use crate::qubo::{Objective, QuboProblem};
use crate::types::{mask_to_spins, SelectionMask, SpinState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "IsingParts", into = "IsingParts")]
pub struct IsingProblem {
    n: usize,
    couplings: BTreeMap<(usize, usize), f64>,
    fields: Vec<f64>,
    offset: f64,
    // neighbours of each spin with the shared coupling, rebuilt on construction
    adjacency: Vec<Vec<(usize, f64)>>,
}

#[derive(Serialize, Deserialize)]
struct IsingParts {
    n: usize,
    couplings: Vec<(usize, usize, f64)>,
    fields: Vec<f64>,
    offset: f64,
}

impl From<IsingParts> for IsingProblem {
    fn from(parts: IsingParts) -> Self {
        let couplings = parts
            .couplings
            .into_iter()
            .map(|(p, q, w)| ((p, q), w))
            .collect();
        IsingProblem::build(parts.n, couplings, parts.fields, parts.offset)
    }
}

impl From<IsingProblem> for IsingParts {
    fn from(problem: IsingProblem) -> Self {
        IsingParts {
            n: problem.n,
            couplings: problem
                .couplings
                .into_iter()
                .map(|((p, q), w)| (p, q, w))
                .collect(),
            fields: problem.fields,
            offset: problem.offset,
        }
    }
}

/// Which way a spin moved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlipDirection {
    /// `-1 -> +1`
    Up,
    /// `+1 -> -1`
    Down,
}

/// Energy change caused by flipping one spin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlipDelta {
    pub index: usize,
    pub delta: f64,
    pub direction: FlipDirection,
}

impl IsingProblem {
    fn build(
        n: usize,
        couplings: BTreeMap<(usize, usize), f64>,
        fields: Vec<f64>,
        offset: f64,
    ) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for (&(p, q), &w) in &couplings {
            if w != 0.0 {
                adjacency[p].push((q, w));
                adjacency[q].push((p, w));
            }
        }
        IsingProblem {
            n,
            couplings,
            fields,
            offset,
            adjacency,
        }
    }

    /// Builds a problem from raw coefficients. Keys must satisfy `p < q < n`.
    pub fn new(
        n: usize,
        couplings: impl IntoIterator<Item = ((usize, usize), f64)>,
        fields: Vec<f64>,
        offset: f64,
    ) -> Result<Self> {
        if fields.len() != n {
            return Err(QamaError::Shape(format!(
                "{} fields for {} spins",
                fields.len(),
                n
            )));
        }
        let mut map = BTreeMap::new();
        for ((p, q), w) in couplings {
            if p >= q {
                return Err(QamaError::Validation(format!(
                    "coupling key ({p}, {q}) must satisfy p < q"
                )));
            }
            if q >= n {
                return Err(QamaError::Index { index: q, limit: n });
            }
            *map.entry((p, q)).or_insert(0.0) += w;
        }
        Ok(Self::build(n, map, fields, offset))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn couplings(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.couplings
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn neighbours(&self, k: usize) -> &[(usize, f64)] {
        &self.adjacency[k]
    }

    /// Full-sum energy of a spin state.
    pub fn energy(&self, state: &SpinState) -> Result<f64> {
        self.check_len(state.len())?;
        Ok(self.energy_raw(state.spins()))
    }

    pub(crate) fn energy_raw(&self, spins: &[i8]) -> f64 {
        let mut e = self.offset;
        for (p, &h) in self.fields.iter().enumerate() {
            e -= h * spins[p] as f64;
        }
        for (&(p, q), &w) in &self.couplings {
            e -= w * (spins[p] * spins[q]) as f64;
        }
        e
    }

    /// `h_k + sum_j J_kj s_j`: the effective field seen by spin `k`.
    #[inline]
    pub(crate) fn local_field(&self, spins: &[i8], k: usize) -> f64 {
        let mut f = self.fields[k];
        for &(j, w) in &self.adjacency[k] {
            f += w * spins[j] as f64;
        }
        f
    }

    /// `E(flip_k(s)) - E(s) = 2 s_k (h_k + sum_j J_kj s_j)`.
    #[inline]
    pub(crate) fn delta_raw(&self, spins: &[i8], k: usize) -> f64 {
        2.0 * spins[k] as f64 * self.local_field(spins, k)
    }

    /// Energy change of flipping spin `k`, in O(degree of k).
    pub fn flip_delta(&self, state: &SpinState, k: usize) -> Result<FlipDelta> {
        self.check_len(state.len())?;
        if k >= self.n {
            return Err(QamaError::Index {
                index: k,
                limit: self.n,
            });
        }
        let spins = state.spins();
        Ok(FlipDelta {
            index: k,
            delta: self.delta_raw(spins, k),
            direction: if spins[k] < 0 {
                FlipDirection::Up
            } else {
                FlipDirection::Down
            },
        })
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(QamaError::Shape(format!(
                "state has {} spins for {} variables",
                len, self.n
            )));
        }
        Ok(())
    }

    /// Largest `|h_k| + sum_j |J_kj|` over all spins.
    pub fn max_row_norm(&self) -> f64 {
        (0..self.n)
            .map(|k| {
                self.fields[k].abs() + self.adjacency[k].iter().map(|(_, w)| w.abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

impl Objective for IsingProblem {
    fn num_vars(&self) -> usize {
        self.n
    }

    fn energy_of_mask(&self, mask: &SelectionMask) -> Result<f64> {
        self.energy(&mask_to_spins(mask))
    }
}

/// Change of basis `x = (1 + sigma) / 2`; energies agree state by state.
pub fn to_ising(qubo: &QuboProblem) -> IsingProblem {
    let n = qubo.n();
    let mut fields = vec![0.0; n];
    let mut offset = qubo.offset();
    let mut couplings = BTreeMap::new();
    for (p, &c) in qubo.linear().iter().enumerate() {
        fields[p] -= c / 2.0;
        offset += c / 2.0;
    }
    for (&(p, q), &w) in qubo.quad() {
        let quarter = w / 4.0;
        couplings.insert((p, q), -quarter);
        fields[p] -= quarter;
        fields[q] -= quarter;
        offset += quarter;
    }
    IsingProblem::build(n, couplings, fields, offset)
}
