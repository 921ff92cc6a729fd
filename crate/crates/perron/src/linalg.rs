//! Small dense-matrix helpers shared across the crate.

use nalgebra::{DMatrix, DVector};

/// Induced infinity norm (max absolute row sum), consistent with the max
/// norm on vectors.
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Entrywise max-abs norm.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

/// `m^k` by binary exponentiation. `k = 0` gives the identity.
pub fn mat_pow(m: &DMatrix<f64>, k: u64) -> DMatrix<f64> {
    let n = m.nrows();
    let mut result = DMatrix::identity(n, n);
    let mut base = m.clone();
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Rank-one product `u f0^T`.
pub fn outer(u: &DVector<f64>, f0: &DVector<f64>) -> DMatrix<f64> {
    let (n, m) = (u.len(), f0.len());
    DMatrix::from_fn(n, m, |i, j| u[i] * f0[j])
}

pub fn basis_vector(dim: usize, j: usize) -> DVector<f64> {
    let mut e = DVector::zeros(dim);
    e[j] = 1.0;
    e
}

/// Row-reduces `m` with full (complete) pivoting and returns
/// `(rank, nullspace basis)`. Pivots with absolute value at most
/// `rel_tol * max(1, ||m||_inf)` count as zero. Full pivoting keeps the
/// element growth near 1, so a single tiny singular value surfaces as a
/// single tiny pivot instead of being smeared across the elimination.
pub fn nullspace(m: &DMatrix<f64>, rel_tol: f64) -> (usize, Vec<DVector<f64>>) {
    let (nr, nc) = (m.nrows(), m.ncols());
    let mut a = m.clone();
    let tol = rel_tol * f64::max(1.0, inf_norm(m));
    // perm[k] = original index of the column currently at position k
    let mut perm: Vec<usize> = (0..nc).collect();
    let mut rank = 0;
    for step in 0..nr.min(nc) {
        let mut best = (step, step, 0.0f64);
        for r in step..nr {
            for c in step..nc {
                let v = a[(r, c)].abs();
                if v > best.2 {
                    best = (r, c, v);
                }
            }
        }
        if best.2 <= tol {
            break;
        }
        a.swap_rows(step, best.0);
        a.swap_columns(step, best.1);
        perm.swap(step, best.1);
        let pivot = a[(step, step)];
        for c in step..nc {
            a[(step, c)] /= pivot;
        }
        for r in 0..nr {
            if r != step {
                let factor = a[(r, step)];
                if factor != 0.0 {
                    for c in step..nc {
                        a[(r, c)] -= factor * a[(step, c)];
                    }
                }
            }
        }
        rank += 1;
    }
    let mut basis = Vec::new();
    for free in rank..nc {
        let mut v = DVector::zeros(nc);
        v[perm[free]] = 1.0;
        for r in 0..rank {
            v[perm[r]] = -a[(r, free)];
        }
        basis.push(v);
    }
    (rank, basis)
}
