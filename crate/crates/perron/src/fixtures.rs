//! Reference operators with known closed-form behavior, used as regression
//! fixtures and reachable from the CLI by name.
//!
//! - [`SqrtKernelOperator`] (`example1`): quadrature discretization of the
//!   integral Markov operator `(Ax)(s) = (theta + sqrt(s))^{-1}
//!   (int_0^theta x + int_0^sqrt(s) x)` on `C([0,1])`. Regular, but no
//!   fixed power is strongly positive: the first strictly positive power
//!   of a function vanishing on `[0, p)` grows as `p` approaches 1.
//! - [`DyadicChain`] (`example2`): truncation of the infinite stochastic
//!   matrix with rows `(1/2, 1/4, ..., 2^-k, 2^-k, 0, ...)`. Its limit
//!   distribution is available in closed form, and basis vector `e_{n+2}`
//!   first reaches the interior at power `n + 1`.
//! - [`KernelWalk`]: a random walk driven by a row-stochastic kernel on a
//!   finite state set, with total-variation convergence to the limit
//!   measure.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::asymptotics::{
    find_positivity_index_capped, limit_decomposition, PositiveOperator, Tolerances,
};
use crate::error::{Error, Result};
use crate::linalg::{basis_vector, inf_norm};

/// Discretized integral operator with the square-root kernel.
#[derive(Debug, Clone)]
pub struct SqrtKernelOperator {
    pub theta: f64,
    pub grid_size: usize,
    /// Midpoint nodes `s_i = (i + 1/2) / grid_size`.
    pub nodes: Vec<f64>,
    pub op: PositiveOperator,
}

/// Builds the quadrature matrix on a uniform midpoint grid. Integrals
/// `int_0^b` take weight `h` per cell fully inside `[0, b]` and `h/2` for
/// the cell containing `b`. The sparsity pattern matches the continuum
/// kernel exactly (a cell contributes iff it touches the window, so zero
/// entries are exact zeros), the quadrature is first order, and the
/// row-sum defect shrinks like `1/grid_size`.
pub fn sqrt_kernel_operator(theta: f64, grid_size: usize) -> Result<SqrtKernelOperator> {
    if theta.is_nan() || theta <= 0.0 || theta >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "theta must be in (0, 1), got {theta}"
        )));
    }
    if grid_size < 8 {
        return Err(Error::InvalidParameter(format!(
            "grid_size must be at least 8, got {grid_size}"
        )));
    }
    let g = grid_size;
    let h = 1.0 / g as f64;
    let nodes: Vec<f64> = (0..g).map(|i| (i as f64 + 0.5) * h).collect();
    let cell_weight = |j: usize, b: f64| -> f64 {
        let lo = j as f64 * h;
        if lo + h <= b {
            h
        } else if lo < b {
            0.5 * h
        } else {
            0.0
        }
    };
    let mut m = DMatrix::zeros(g, g);
    for i in 0..g {
        let reach = nodes[i].sqrt();
        let phi = 1.0 / (theta + reach);
        for j in 0..g {
            m[(i, j)] = phi * (cell_weight(j, theta) + cell_weight(j, reach));
        }
    }
    Ok(SqrtKernelOperator {
        theta,
        grid_size,
        nodes,
        op: PositiveOperator::new(m)?,
    })
}

impl SqrtKernelOperator {
    /// `||A 1 - 1||_inf`, the quadrature defect of the Markov identity.
    pub fn markov_defect(&self) -> f64 {
        let ones = DVector::from_element(self.grid_size, 1.0);
        let image = self.op.matrix() * ones;
        image.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// First power `m` with `A^m x > 0` at every grid node, for the indicator
/// of `[p, 1]` sampled on the grid. Counts applications of `A` (`A^0 = I`,
/// so a function positive after one application has index 1).
///
/// Errors when `p` lies within two grid cells of one of the thresholds
/// `theta^{1/2^k}`, where the discrete and continuum indices can differ.
pub fn sqrt_kernel_positivity_index(op: &SqrtKernelOperator, p: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "p must be in [0, 1), got {p}"
        )));
    }
    let h = 1.0 / op.grid_size as f64;
    let mut threshold = op.theta;
    while threshold < 1.0 - 2.0 * h {
        if (p - threshold).abs() < 2.0 * h {
            return Err(Error::IndeterminateAtResolution(format!(
                "p = {p} is within two cells of the threshold {threshold}"
            )));
        }
        threshold = threshold.sqrt();
    }
    let x = DVector::from_iterator(
        op.grid_size,
        op.nodes.iter().map(|&s| if s >= p { 1.0 } else { 0.0 }),
    );
    let mut y = x;
    for m in 1..=64 {
        y = op.op.apply(&y)?;
        if y.iter().all(|&v| v > 0.0) {
            return Ok(m);
        }
    }
    Err(Error::NotConverged {
        steps: 64,
        delta: f64::NAN,
    })
}

/// The continuum positivity index: `1` when `p < theta`, otherwise the
/// smallest `m` with `p^(2^(m-1)) < theta`. The support of a function
/// vanishing on `[0, p)` grows to `[p^2, 1]` under one application, and
/// the constant window `int_0^theta` lights up the whole interval one
/// step after the support reaches below `theta`.
pub fn analytic_positivity_index(theta: f64, p: f64) -> usize {
    if p < theta {
        return 1;
    }
    let mut support = p;
    let mut m = 1;
    while support >= theta {
        support *= support;
        m += 1;
    }
    m
}

/// Truncation of the dyadic stochastic matrix.
#[derive(Debug, Clone)]
pub struct DyadicChain {
    pub n: usize,
    pub op: PositiveOperator,
}

/// Row `k` (1-based, `k < N`) holds `2^-1, ..., 2^-k` in columns `1..k`
/// and `2^-k` in column `k+1`; the last row folds its tail mass into
/// column `N`, so every row sums to 1 exactly in binary floating point.
pub fn dyadic_chain(n: usize) -> Result<DyadicChain> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "truncation size must be at least 3, got {n}"
        )));
    }
    let mut m = DMatrix::zeros(n, n);
    for k in 1..=n {
        for j in 1..=k.min(n) {
            m[(k - 1, j - 1)] = 0.5f64.powi(j as i32);
        }
        if k < n {
            m[(k - 1, k)] = 0.5f64.powi(k as i32);
        } else {
            // fold the tail 2^-N into the last retained column
            m[(n - 1, n - 1)] += 0.5f64.powi(n as i32);
        }
    }
    Ok(DyadicChain {
        n,
        op: PositiveOperator::new(m)?,
    })
}

/// Closed-form limit distribution: `f0(n) = c_n - c_{n+1}` with
/// `c_n = 2^{-(n-1)n/2}`.
pub fn dyadic_closed_form(terms: usize) -> DVector<f64> {
    let c = |n: u32| 0.5f64.powi(((n - 1) * n / 2) as i32);
    DVector::from_iterator(terms, (1..=terms as u32).map(|n| c(n) - c(n + 1)))
}

#[derive(Debug, Clone)]
pub struct DyadicLimitComparison {
    pub computed: DVector<f64>,
    pub closed_form: DVector<f64>,
    /// Max deviation over the leading `min(10, N)` coordinates.
    pub leading_deviation: f64,
}

/// Computes the limit distribution of the truncated chain and compares it
/// against the closed form on the leading coordinates, where truncation
/// has no visible effect.
pub fn dyadic_chain_limit_distribution(
    chain: &DyadicChain,
    opts: &Tolerances,
) -> Result<DyadicLimitComparison> {
    let decomp = limit_decomposition(&chain.op, opts)?;
    let computed = decomp.f0.expect("stochastic chain has a nonzero limit");
    let closed_form = dyadic_closed_form(chain.n);
    let leading = chain.n.min(10);
    let leading_deviation = (0..leading)
        .map(|i| (computed[i] - closed_form[i]).abs())
        .fold(0.0, f64::max);
    if leading_deviation > 1e-6 {
        return Err(Error::FixtureRegression(format!(
            "limit distribution deviates from the closed form by {leading_deviation:e}"
        )));
    }
    Ok(DyadicLimitComparison {
        computed,
        closed_form,
        leading_deviation,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityPattern {
    pub n: usize,
    /// First coordinate of `A^n e_{n+2}` (zero by the sparsity pattern).
    pub first_coordinate_at_n: f64,
    /// Smallest coordinate of `A^{n+1} e_{n+2}` (strictly positive).
    pub min_coordinate_after: f64,
    /// Positivity index of each basis vector `e_j`, `j <= N-1`.
    pub per_basis_index: Vec<usize>,
}

/// Verifies the eventual-positivity pattern of the chain: `A^n e_{n+2}`
/// still touches the boundary while `A^{n+1} e_{n+2}` is interior, and the
/// per-basis positivity indices grow with the coordinate, so no fixed
/// power is strongly positive uniformly.
pub fn dyadic_chain_positivity_pattern(
    chain: &DyadicChain,
    n: usize,
) -> Result<PositivityPattern> {
    let size = chain.n;
    if n + 2 > size - 1 {
        return Err(Error::InvalidParameter(format!(
            "need n + 2 <= N - 1 away from the truncation boundary, got n = {n}, N = {size}"
        )));
    }
    let seed = basis_vector(size, n + 2 - 1);
    let mut y = seed.clone();
    for _ in 0..n {
        y = chain.op.apply(&y)?;
    }
    let first_coordinate_at_n = y[0];
    if first_coordinate_at_n != 0.0 {
        return Err(Error::FixtureRegression(format!(
            "(A^{n} e_{})_1 = {first_coordinate_at_n:e}, expected exact zero",
            n + 2
        )));
    }
    y = chain.op.apply(&y)?;
    let min_coordinate_after = y.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_coordinate_after <= 0.0 || min_coordinate_after.is_nan() {
        return Err(Error::FixtureRegression(format!(
            "A^{} e_{} is not strictly positive",
            n + 1,
            n + 2
        )));
    }
    let cap = chain.op.default_cap();
    let per_basis_index: Vec<usize> = (0..size - 1)
        .map(|j| {
            find_positivity_index_capped(&chain.op, &basis_vector(size, j), cap)
                .map(|opt| opt.unwrap_or(usize::MAX))
        })
        .collect::<Result<_>>()?;
    Ok(PositivityPattern {
        n,
        first_coordinate_at_n,
        min_coordinate_after,
        per_basis_index,
    })
}

/// Random walk on a finite state set driven by a row-stochastic kernel.
#[derive(Debug, Clone)]
pub struct KernelWalk {
    /// Number of states in the discretized space.
    pub states: usize,
    pub p: PositiveOperator,
    /// The limit measure (stationary distribution).
    pub p0: DVector<f64>,
}

impl KernelWalk {
    /// Validates stochasticity, checks the regularity of the transpose
    /// dynamics on basis measures, and computes the limit measure.
    pub fn new(kernel: DMatrix<f64>, opts: &Tolerances) -> Result<Self> {
        let states = kernel.nrows();
        let p = PositiveOperator::new(kernel)?;
        for i in 0..states {
            let s: f64 = (0..states).map(|j| p.matrix()[(i, j)]).sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "row {i} of the kernel sums to {s}, not 1"
                )));
            }
        }
        let transpose = PositiveOperator::new(p.matrix().transpose())?;
        let cap = transpose.default_cap();
        for s in 0..states {
            if find_positivity_index_capped(&transpose, &basis_vector(states, s), cap)?
                .is_none()
            {
                return Err(Error::RegularityFailure { index: s, cap });
            }
        }
        let decomp = limit_decomposition(&p, opts)?;
        let p0 = decomp.f0.expect("stochastic kernel has a nonzero limit");
        Ok(KernelWalk { states, p, p0 })
    }
}

/// Iterates the kernel and records `sup_s ||P^(n)_s - P0||` in the
/// total-variation norm (the l1 distance between rows of `P^n` and the
/// limit measure). Returns the first `n` at or below `eps` and the trace.
pub fn kernel_walk_convergence(
    kw: &KernelWalk,
    eps: f64,
    max_steps: usize,
) -> Result<(usize, Vec<(usize, f64)>)> {
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::InvalidParameter(format!("eps must be nonnegative, got {eps}")));
    }
    let mut power = kw.p.matrix().clone();
    let mut trace = Vec::new();
    for n in 1..=max_steps {
        let sup = (0..kw.states)
            .map(|s| {
                (0..kw.states)
                    .map(|j| (power[(s, j)] - kw.p0[j]).abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        trace.push((n, sup));
        if sup <= eps {
            return Ok((n, trace));
        }
        power = &power * kw.p.matrix();
    }
    let last = trace.last().map(|&(_, d)| d).unwrap_or(f64::NAN);
    Err(Error::NotConverged {
        steps: max_steps,
        delta: last,
    })
}

/// `||(A^T)^n - A0^T||` in the norm dual to the max norm; equals the
/// sup over states of the total-variation distance at step `n`.
pub fn adjoint_power_distance(kw: &KernelWalk, n: u64) -> f64 {
    let a0 = DMatrix::from_fn(kw.states, kw.states, |_, j| kw.p0[j]);
    inf_norm(&(crate::linalg::mat_pow(kw.p.matrix(), n) - a0))
}
