//! Shared corpus generators for the integration suites.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use perron::{find_uniform_index, PositiveOperator};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Row-stochastic matrix with strictly positive entries.
pub fn random_dense_stochastic(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let mut m = DMatrix::from_fn(d, d, |_, _| 0.05 + rng.gen::<f64>());
    normalize_rows(&mut m);
    m
}

/// Row-stochastic matrix with a sparsity mask, kept primitive by forcing
/// the full cycle and a positive diagonal.
pub fn random_primitive_stochastic(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    loop {
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            m[(i, i)] = 0.2 + rng.gen::<f64>();
            m[(i, (i + 1) % d)] = 0.2 + rng.gen::<f64>();
            for j in 0..d {
                if rng.gen::<f64>() < 0.4 {
                    m[(i, j)] += rng.gen::<f64>();
                }
            }
        }
        normalize_rows(&mut m);
        let op = PositiveOperator::new(m.clone()).unwrap();
        if find_uniform_index(&op).unwrap().is_some() {
            return m;
        }
    }
}

/// Conjugated chain `D P D^{-1}` with interior fixed point `D 1`; power
/// bounded with spectral radius 1 but not row-stochastic.
pub fn random_scaled_perron(rng: &mut ChaCha8Rng, d: usize) -> (DMatrix<f64>, DVector<f64>) {
    let p = random_dense_stochastic(rng, d);
    let u = DVector::from_fn(d, |_, _| 0.5 + 1.5 * rng.gen::<f64>());
    let a = DMatrix::from_fn(d, d, |i, j| u[i] * p[(i, j)] / u[j]);
    (a, u)
}

/// Metzler generator with zero row sums and an irreducible graph.
pub fn random_metzler_zero_rowsum(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let mut g = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            0.0
        } else {
            0.1 + rng.gen::<f64>()
        }
    });
    for i in 0..d {
        let off: f64 = (0..d).filter(|&j| j != i).map(|j| g[(i, j)]).sum();
        g[(i, i)] = -off;
    }
    g
}

/// Nonnegative seed with a sprinkle of exact zeros.
pub fn random_cone_vector(rng: &mut ChaCha8Rng, d: usize) -> DVector<f64> {
    let mut v = DVector::from_fn(d, |_, _| {
        if rng.gen::<f64>() < 0.3 {
            0.0
        } else {
            rng.gen::<f64>() * 2.0
        }
    });
    if v.iter().all(|&x| x == 0.0) {
        v[0] = 1.0;
    }
    v
}

pub fn normalize_rows(m: &mut DMatrix<f64>) {
    for i in 0..m.nrows() {
        let s: f64 = (0..m.ncols()).map(|j| m[(i, j)]).sum();
        for j in 0..m.ncols() {
            m[(i, j)] /= s;
        }
    }
}
