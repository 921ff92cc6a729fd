//! Deterministic inputs for the pipeline benchmarks.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Dense row-stochastic matrix with strictly positive entries.
pub fn stochastic(dim: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DMatrix::from_fn(dim, dim, |_, _| 0.05 + rng.gen::<f64>());
    for i in 0..dim {
        let s: f64 = (0..dim).map(|j| m[(i, j)]).sum();
        for j in 0..dim {
            m[(i, j)] /= s;
        }
    }
    m
}

/// Metzler generator with zero row sums.
pub fn metzler(dim: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            0.0
        } else {
            0.1 + rng.gen::<f64>()
        }
    });
    for i in 0..dim {
        let off: f64 = (0..dim).filter(|&j| j != i).map(|j| g[(i, j)]).sum();
        g[(i, i)] = -off;
    }
    g
}

pub fn cone_seed(dim: usize) -> DVector<f64> {
    DVector::from_fn(dim, |i, _| if i % 3 == 0 { 0.0 } else { 1.0 + i as f64 })
}
