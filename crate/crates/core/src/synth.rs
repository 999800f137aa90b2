//! Seeded synthetic attention inputs.
//!
//! Q, K and V are drawn i.i.d. standard normal, then each feature `d` is
//! standardized to mean 0 and variance 1 over all `B * H * N` positions of
//! its tensor. W_eps is standard normal scaled by `1 / sqrt(D)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::types::{AttentionInput, Shape, Tensor4};

/// Raw draws before standardization, in the order Q, K, V, W_eps.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDraws {
    pub q: Vec<f64>,
    pub k: Vec<f64>,
    pub v: Vec<f64>,
    pub w_eps: Vec<f64>,
}

impl RawDraws {
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.q
            .iter()
            .chain(&self.k)
            .chain(&self.v)
            .chain(&self.w_eps)
            .copied()
    }
}

pub fn raw_draws(shape: &Shape, seed: u64) -> Result<RawDraws> {
    shape.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normals = |count: usize| -> Vec<f64> {
        (0..count)
            .map(|_| Distribution::<f64>::sample(&StandardNormal, &mut rng))
            .collect()
    };
    let numel = shape.numel();
    let q = normals(numel);
    let k = normals(numel);
    let v = normals(numel);
    let w_eps = normals(shape.dim);
    Ok(RawDraws { q, k, v, w_eps })
}

/// Centers and scales each feature column to unit population variance.
/// A column with zero spread is only centered.
pub fn standardize_features(data: &mut [f64], dim: usize) {
    let rows = data.len() / dim;
    if rows == 0 {
        return;
    }
    for d in 0..dim {
        let mean = (0..rows).map(|r| data[r * dim + d]).sum::<f64>() / rows as f64;
        let var = (0..rows)
            .map(|r| (data[r * dim + d] - mean).powi(2))
            .sum::<f64>()
            / rows as f64;
        let scale = if var > 0.0 { 1.0 / var.sqrt() } else { 1.0 };
        for r in 0..rows {
            let x = &mut data[r * dim + d];
            *x = (*x - mean) * scale;
        }
    }
}

pub fn generate_instance(shape: &Shape, seed: u64) -> Result<AttentionInput> {
    let raw = raw_draws(shape, seed)?;
    let scale = 1.0 / (shape.dim as f64).sqrt();
    let tensor = |mut data: Vec<f64>| {
        standardize_features(&mut data, shape.dim);
        Tensor4::from_vec(*shape, data)
    };
    AttentionInput::new(
        tensor(raw.q)?,
        tensor(raw.k)?,
        tensor(raw.v)?,
        raw.w_eps.into_iter().map(|w| w * scale).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let shape = Shape::new(2, 2, 3, 4).unwrap();
        assert_eq!(
            generate_instance(&shape, 9).unwrap(),
            generate_instance(&shape, 9).unwrap()
        );
        assert_ne!(
            generate_instance(&shape, 9).unwrap(),
            generate_instance(&shape, 10).unwrap()
        );
    }

    #[test]
    fn features_are_standardized() {
        let shape = Shape::new(3, 2, 5, 4).unwrap();
        let input = generate_instance(&shape, 1).unwrap();
        let rows = shape.numel() / shape.dim;
        for t in [&input.q, &input.k, &input.v] {
            for d in 0..shape.dim {
                let col: Vec<f64> = (0..rows).map(|r| t.data()[r * shape.dim + d]).collect();
                let mean = col.iter().sum::<f64>() / rows as f64;
                let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / rows as f64;
                assert!(mean.abs() < 1e-9);
                assert!((var - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn raw_positive_part_mean() {
        let shape = Shape::new(32, 4, 32, 16).unwrap();
        let raw = raw_draws(&shape, 3).unwrap();
        let count = raw.iter().count();
        assert!(count >= 100_000);
        let mean = raw.iter().map(|x| x.max(0.0)).sum::<f64>() / count as f64;
        let target = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((mean - target).abs() / target < 0.02, "{mean}");
    }

    #[test]
    fn single_row_is_centered() {
        let mut data = vec![3.0, -1.0];
        standardize_features(&mut data, 2);
        assert_eq!(data, vec![0.0, 0.0]);
    }
}
