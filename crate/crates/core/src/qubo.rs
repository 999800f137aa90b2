//! Binary quadratic problems: `E(x) = sum_{p<q} Q_pq x_p x_q + sum_p c_p x_p + offset`
//! over `x in {0,1}^n`, minimized.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{QamaError, Result};
use crate::types::{SelectionMask, Shape};

/// Anything that assigns an energy to a binary selection.
pub trait Objective {
    fn num_vars(&self) -> usize;

    /// Energy of a binary state, offset included.
    fn energy_of_mask(&self, mask: &SelectionMask) -> Result<f64>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuboProblem {
    n: usize,
    quad: BTreeMap<(usize, usize), f64>,
    linear: Vec<f64>,
    offset: f64,
    shape: Option<Shape>,
}

impl QuboProblem {
    pub fn new(n: usize) -> Self {
        QuboProblem {
            n,
            quad: BTreeMap::new(),
            linear: vec![0.0; n],
            offset: 0.0,
            shape: None,
        }
    }

    /// Rebuilds a problem from its raw coefficients. Keys must satisfy `p < q < n`.
    pub fn from_parts(
        n: usize,
        quad: impl IntoIterator<Item = ((usize, usize), f64)>,
        linear: Vec<f64>,
        offset: f64,
    ) -> Result<Self> {
        if linear.len() != n {
            return Err(QamaError::Shape(format!(
                "linear term has {} entries for {} variables",
                linear.len(),
                n
            )));
        }
        let mut problem = QuboProblem {
            n,
            quad: BTreeMap::new(),
            linear,
            offset,
            shape: None,
        };
        for ((p, q), value) in quad {
            if p >= q {
                return Err(QamaError::Validation(format!(
                    "quadratic key ({p}, {q}) must satisfy p < q"
                )));
            }
            if q >= n {
                return Err(QamaError::Index { index: q, limit: n });
            }
            problem.quad.insert((p, q), value);
        }
        Ok(problem)
    }

    /// Attaches the (head, token) layout the variables came from.
    pub fn with_shape(mut self, shape: Shape) -> Self {
        self.shape = Some(shape);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn quad(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quad
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn shape(&self) -> Option<Shape> {
        self.shape
    }

    /// Adds `value` to the coefficient of `x_p x_q`. A diagonal pair folds
    /// into the linear term since `x^2 = x` on binaries.
    pub fn add_quadratic(&mut self, p: usize, q: usize, value: f64) -> Result<()> {
        let limit = self.n;
        if p >= limit || q >= limit {
            return Err(QamaError::Index {
                index: p.max(q),
                limit,
            });
        }
        if p == q {
            self.linear[p] += value;
            return Ok(());
        }
        let key = (p.min(q), p.max(q));
        *self.quad.entry(key).or_insert(0.0) += value;
        Ok(())
    }

    pub fn add_linear(&mut self, p: usize, value: f64) -> Result<()> {
        if p >= self.n {
            return Err(QamaError::Index {
                index: p,
                limit: self.n,
            });
        }
        self.linear[p] += value;
        Ok(())
    }

    pub fn add_offset(&mut self, value: f64) {
        self.offset += value;
    }

    /// Full-sum energy of a binary state.
    pub fn energy(&self, x: &[bool]) -> Result<f64> {
        if x.len() != self.n {
            return Err(QamaError::Shape(format!(
                "state has {} entries for {} variables",
                x.len(),
                self.n
            )));
        }
        let mut e = self.offset;
        for (p, &c) in self.linear.iter().enumerate() {
            if x[p] {
                e += c;
            }
        }
        for (&(p, q), &w) in &self.quad {
            if x[p] && x[q] {
                e += w;
            }
        }
        Ok(e)
    }
}

impl Objective for QuboProblem {
    fn num_vars(&self) -> usize {
        self.n
    }

    fn energy_of_mask(&self, mask: &SelectionMask) -> Result<f64> {
        self.energy(mask.bits())
    }
}
