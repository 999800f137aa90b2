//! Shared data model: problem shapes, dense tensors, coefficient
//! configuration and the binary/spin state representations.
//!
//! Variables of one batch element are laid out head-major: the variable for
//! head `t` and token `i` lives at `t * N + i`.

use serde::{Deserialize, Serialize};

use crate::error::{QamaError, Result};

/// Problem dimensions: batch `B`, heads `H`, sequence length `N`, feature dim `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub batch: usize,
    pub heads: usize,
    pub seq_len: usize,
    pub dim: usize,
}

impl Shape {
    pub fn new(batch: usize, heads: usize, seq_len: usize, dim: usize) -> Result<Self> {
        let shape = Shape {
            batch,
            heads,
            seq_len,
            dim,
        };
        shape.validate()?;
        Ok(shape)
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch == 0 || self.heads == 0 || self.seq_len == 0 || self.dim == 0 {
            return Err(QamaError::Validation(format!(
                "every dimension must be >= 1, got B={} H={} N={} D={}",
                self.batch, self.heads, self.seq_len, self.dim
            )));
        }
        Ok(())
    }

    /// Number of binary variables per batch element (`H * N`).
    pub fn qubits(&self) -> usize {
        self.heads * self.seq_len
    }

    /// Number of scalar entries in a `B x H x N x D` tensor.
    pub fn numel(&self) -> usize {
        self.batch * self.heads * self.seq_len * self.dim
    }

    pub fn flat_index(&self, head: usize, token: usize) -> Result<usize> {
        flat_index(head, token, self.heads, self.seq_len)
    }

    pub fn unflat_index(&self, flat: usize) -> Result<(usize, usize)> {
        unflat_index(flat, self.heads, self.seq_len)
    }
}

/// Head-major flat index `head * seq_len + token`.
pub fn flat_index(head: usize, token: usize, heads: usize, seq_len: usize) -> Result<usize> {
    if head >= heads {
        return Err(QamaError::Index {
            index: head,
            limit: heads,
        });
    }
    if token >= seq_len {
        return Err(QamaError::Index {
            index: token,
            limit: seq_len,
        });
    }
    Ok(head * seq_len + token)
}

/// Inverse of [`flat_index`].
pub fn unflat_index(flat: usize, heads: usize, seq_len: usize) -> Result<(usize, usize)> {
    if flat >= heads * seq_len {
        return Err(QamaError::Index {
            index: flat,
            limit: heads * seq_len,
        });
    }
    Ok((flat / seq_len, flat % seq_len))
}

/// Dense row-major `B x H x N x D` tensor of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor4 {
    shape: Shape,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn from_vec(shape: Shape, data: Vec<f64>) -> Result<Self> {
        shape.validate()?;
        if data.len() != shape.numel() {
            return Err(QamaError::Shape(format!(
                "tensor of shape {}x{}x{}x{} needs {} entries, got {}",
                shape.batch,
                shape.heads,
                shape.seq_len,
                shape.dim,
                shape.numel(),
                data.len()
            )));
        }
        Ok(Tensor4 { shape, data })
    }

    pub fn zeros(shape: Shape) -> Self {
        Tensor4 {
            shape,
            data: vec![0.0; shape.numel()],
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn offset(&self, b: usize, t: usize, i: usize, d: usize) -> usize {
        let s = &self.shape;
        ((b * s.heads + t) * s.seq_len + i) * s.dim + d
    }

    #[inline]
    pub fn get(&self, b: usize, t: usize, i: usize, d: usize) -> f64 {
        self.data[self.offset(b, t, i, d)]
    }

    /// View of one batch element as an `H x N x D` block.
    pub fn batch(&self, b: usize) -> HeadsView<'_> {
        let s = &self.shape;
        let len = s.heads * s.seq_len * s.dim;
        HeadsView {
            heads: s.heads,
            seq_len: s.seq_len,
            dim: s.dim,
            data: &self.data[b * len..(b + 1) * len],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Returns a copy with one entry replaced. Used by perturbation studies.
    pub fn with_entry(&self, flat: usize, value: f64) -> Tensor4 {
        let mut out = self.clone();
        out.data[flat] = value;
        out
    }
}

/// Borrowed `H x N x D` block: the slice of a tensor for one batch element.
#[derive(Debug, Clone, Copy)]
pub struct HeadsView<'a> {
    pub heads: usize,
    pub seq_len: usize,
    pub dim: usize,
    data: &'a [f64],
}

impl<'a> HeadsView<'a> {
    pub fn new(heads: usize, seq_len: usize, dim: usize, data: &'a [f64]) -> Result<Self> {
        if data.len() != heads * seq_len * dim {
            return Err(QamaError::Shape(format!(
                "{}x{}x{} block needs {} entries, got {}",
                heads,
                seq_len,
                dim,
                heads * seq_len * dim,
                data.len()
            )));
        }
        Ok(HeadsView {
            heads,
            seq_len,
            dim,
            data,
        })
    }

    /// Feature vector of token `i` in head `t`.
    #[inline]
    pub fn row(&self, t: usize, i: usize) -> &'a [f64] {
        let start = (t * self.seq_len + i) * self.dim;
        &self.data[start..start + self.dim]
    }

    pub fn data(&self) -> &'a [f64] {
        self.data
    }

    fn dims(&self) -> (usize, usize, usize) {
        (self.heads, self.seq_len, self.dim)
    }

    pub(crate) fn same_dims(&self, other: &HeadsView<'_>) -> bool {
        self.dims() == other.dims()
    }
}

/// Q, K, V tensors plus the learnable field weights `W_eps` (a `D x 1` column,
/// stored as a length-`D` vector).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionInput {
    pub q: Tensor4,
    pub k: Tensor4,
    pub v: Tensor4,
    pub w_eps: Vec<f64>,
}

impl AttentionInput {
    pub fn new(q: Tensor4, k: Tensor4, v: Tensor4, w_eps: Vec<f64>) -> Result<Self> {
        let input = AttentionInput { q, k, v, w_eps };
        input.validate()?;
        Ok(input)
    }

    pub fn validate(&self) -> Result<()> {
        let shape = self.q.shape();
        if self.k.shape() != shape || self.v.shape() != shape {
            return Err(QamaError::Shape(format!(
                "Q, K and V must share one shape: Q={:?} K={:?} V={:?}",
                shape,
                self.k.shape(),
                self.v.shape()
            )));
        }
        if self.w_eps.len() != shape.dim {
            return Err(QamaError::Shape(format!(
                "W_eps must have D={} entries, got {}",
                shape.dim,
                self.w_eps.len()
            )));
        }
        let finite = self.q.is_finite()
            && self.k.is_finite()
            && self.v.is_finite()
            && self.w_eps.iter().all(|x| x.is_finite());
        if !finite {
            return Err(QamaError::Validation(
                "attention input contains NaN or infinite entries".into(),
            ));
        }
        Ok(())
    }

    pub fn shape(&self) -> Shape {
        self.q.shape()
    }
}

/// Static coefficients that scale the linear (`rho0`) and penalty
/// (`lambda0`) terms before the size-dependent rescaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientConfig {
    pub rho0: f64,
    pub lambda0: f64,
}

impl CoefficientConfig {
    pub fn new(rho0: f64, lambda0: f64) -> Result<Self> {
        let cfg = CoefficientConfig { rho0, lambda0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("rho0", self.rho0), ("lambda0", self.lambda0)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(QamaError::Validation(format!(
                    "{name} must lie in [0, 1], got {value}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for CoefficientConfig {
    fn default() -> Self {
        CoefficientConfig {
            rho0: 0.16,
            lambda0: 0.8,
        }
    }
}

/// Binary selection `s` over (head, token) pairs, head-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SelectionMask {
    bits: Vec<bool>,
}

impl SelectionMask {
    pub fn new(bits: Vec<bool>) -> Self {
        SelectionMask { bits }
    }

    pub fn zeros(n: usize) -> Self {
        SelectionMask {
            bits: vec![false; n],
        }
    }

    /// Builds a mask from 0/1 integers, rejecting anything else.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        bits.iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(QamaError::Validation(format!(
                    "mask entries must be 0 or 1, got {other}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(SelectionMask::new)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, k: usize) -> bool {
        self.bits[k]
    }

    pub fn to_u8(&self) -> Vec<u8> {
        self.bits.iter().map(|&b| b as u8).collect()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Copy with bit `k` inverted.
    pub fn flipped(&self, k: usize) -> SelectionMask {
        let mut bits = self.bits.clone();
        bits[k] = !bits[k];
        SelectionMask { bits }
    }
}

/// Spin configuration over `{-1, +1}`, same indexing as [`SelectionMask`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinState {
    spins: Vec<i8>,
}

impl SpinState {
    pub fn from_spins(spins: Vec<i8>) -> Result<Self> {
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(QamaError::Validation(format!(
                "spins must be -1 or +1, got {bad}"
            )));
        }
        Ok(SpinState { spins })
    }

    pub(crate) fn from_spins_unchecked(spins: Vec<i8>) -> Self {
        SpinState { spins }
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn flipped(&self, k: usize) -> SpinState {
        let mut spins = self.spins.clone();
        spins[k] = -spins[k];
        SpinState { spins }
    }
}

/// `sigma = 2 s - 1`.
pub fn mask_to_spins(mask: &SelectionMask) -> SpinState {
    SpinState::from_spins_unchecked(
        mask.bits()
            .iter()
            .map(|&b| if b { 1 } else { -1 })
            .collect(),
    )
}

/// `s = (1 + sigma) / 2`.
pub fn spins_to_mask(spins: &SpinState) -> SelectionMask {
    SelectionMask::new(spins.spins().iter().map(|&s| s > 0).collect())
}
