//! Asymptotics of the iterates `A^n` of a positive operator.
//!
//! For a regular, power-bounded positive matrix the powers converge to a
//! rank-one limit `A0 = u f0^T` built from the interior fixed point `u`
//! (Perron vector, normalized to max-norm 1) and the limit functional `f0`
//! (the unique adjoint fixed point with `f0(u) = 1`; the stationary
//! distribution in the Markov case). The alternative is the zero limit,
//! detected from decaying power norms.
//!
//! Also here: the eventual-positivity indices (per-vector and uniform),
//! the simple-eigenvalue check for the fixed spaces of `A` and its
//! adjoint, the algebraic identities of the limit projection, and the
//! fundamental-matrix series `(I - A + A0)^{-1} = I + sum (A^n - A0)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{basis_vector, inf_norm, mat_pow, nullspace, outer};
use crate::ordered_space::{in_cone, in_interior, ConeSpace, OrderUnit};
use crate::oscillation::{
    certify_rate, limit_functional, trace_with, OscillationTrace, RateCertificate,
};

/// A dense, entrywise-nonnegative square matrix acting on a `ConeSpace`.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveOperator {
    pub space: ConeSpace,
    matrix: DMatrix<f64>,
    /// `sup_n ||A^n||`, when certified externally.
    pub norm_bound: Option<f64>,
}

impl PositiveOperator {
    /// Validates squareness and exact entrywise nonnegativity.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        let space = ConeSpace::new(matrix.nrows())?;
        Self::with_space(space, matrix)
    }

    pub fn with_space(space: ConeSpace, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if matrix.nrows() != space.dim {
            return Err(Error::DimensionMismatch {
                expected: space.dim,
                got: matrix.nrows(),
            });
        }
        for j in 0..matrix.ncols() {
            for i in 0..matrix.nrows() {
                let v = matrix[(i, j)];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::NegativeEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
        }
        Ok(PositiveOperator {
            space,
            matrix,
            norm_bound: None,
        })
    }

    pub fn with_norm_bound(mut self, bound: f64) -> Self {
        self.norm_bound = Some(bound);
        self
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    /// Default search cap for eventual-positivity indices. Exceeds the
    /// Wielandt bound `(d-1)^2 + 1` on the index of primitivity.
    pub fn default_cap(&self) -> usize {
        self.dim() * self.dim() + 1
    }

    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.space.check_dim(x)?;
        Ok(&self.matrix * x)
    }
}

/// Tolerances and budgets for the limit pipeline.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Relative oscillation convergence threshold for traces.
    pub trace_eps: f64,
    /// Absolute floor under the relative threshold.
    pub trace_floor: f64,
    pub max_trace_steps: usize,
    /// `||Au - u||_u` tolerance for the fixed-point hypothesis.
    pub fixed_point_tol: f64,
    /// Power norms below this (and decreasing) mean the zero limit.
    pub zero_limit_tol: f64,
    /// Relative stationarity threshold between sampled powers.
    pub stationarity_tol: f64,
    /// Budget of repeated squarings (samples powers up to `2^max_squarings`).
    pub max_squarings: usize,
    /// Override for the index-search cap (default `dim^2 + 1`).
    pub index_cap: Option<usize>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            trace_eps: 1e-12,
            trace_floor: 1e-14,
            max_trace_steps: 100_000,
            fixed_point_tol: 1e-9,
            zero_limit_tol: 1e-12,
            stationarity_tol: 1e-13,
            max_squarings: 60,
            index_cap: None,
        }
    }
}

/// The rank-one limit of the powers, or the zero-limit flag.
#[derive(Debug, Clone)]
pub struct LimitDecomposition {
    pub is_zero_limit: bool,
    /// Interior fixed point, max-norm normalized; absent for the zero limit.
    pub u: Option<DVector<f64>>,
    /// Limit functional with `f0(u) = 1`; absent for the zero limit.
    pub f0: Option<DVector<f64>>,
    pub a0: DMatrix<f64>,
    pub certificate: Option<RateCertificate>,
    /// `||A^N - A0||_inf` at the largest sampled power `N`.
    pub limit_residual: f64,
    /// The largest sampled power `N` (a power of two).
    pub final_power: u64,
    /// Positivity index of each basis vector (the regularity precheck).
    pub per_basis_index: Vec<usize>,
}

impl LimitDecomposition {
    /// Rebuilds the order unit carried by `u`.
    pub fn unit(&self, space: ConeSpace) -> Result<OrderUnit> {
        match &self.u {
            Some(u) => OrderUnit::new(space, u.clone()),
            None => Err(Error::VanishingLimit),
        }
    }
}

/// Smallest `n <= cap` with `A^n x` strictly interior, or `None`.
pub fn find_positivity_index(
    a: &PositiveOperator,
    x: &DVector<f64>,
) -> Result<Option<usize>> {
    find_positivity_index_capped(a, x, a.default_cap())
}

pub fn find_positivity_index_capped(
    a: &PositiveOperator,
    x: &DVector<f64>,
    cap: usize,
) -> Result<Option<usize>> {
    if !in_cone(&a.space, x)? {
        let (index, value) = x
            .iter()
            .enumerate()
            .find(|(_, &v)| v < 0.0 || v.is_nan())
            .map(|(i, &v)| (i, v))
            .unwrap();
        return Err(Error::NotInCone { index, value });
    }
    if x.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroVector);
    }
    let mut y = x.clone();
    for n in 1..=cap {
        y = a.apply(&y)?;
        if in_interior(&a.space, &y)? {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// Smallest `p <= cap` with `A^p` entrywise strictly positive (every
/// column interior), or `None`. Realizes the uniform positivity index on
/// the basis of the cone.
pub fn find_uniform_index(a: &PositiveOperator) -> Result<Option<usize>> {
    find_uniform_index_capped(a, a.default_cap())
}

pub fn find_uniform_index_capped(
    a: &PositiveOperator,
    cap: usize,
) -> Result<Option<usize>> {
    let d = a.dim();
    let mut power = a.matrix().clone();
    for p in 1..=cap {
        let all_interior = (0..d).try_fold(true, |acc, j| -> Result<bool> {
            Ok(acc && in_interior(&a.space, &power.column(j).clone_owned())?)
        })?;
        if all_interior {
            return Ok(Some(p));
        }
        if p < cap {
            power = &power * a.matrix();
        }
    }
    Ok(None)
}

enum PowerClass {
    Zero { final_norm: f64, final_power: u64 },
    Stationary { limit: DMatrix<f64>, final_power: u64 },
}

/// Samples `A^{2^k}` by repeated squaring and classifies the powers as
/// decaying to zero, stationary, or diverging.
fn classify_powers(a: &PositiveOperator, opts: &Tolerances) -> Result<PowerClass> {
    let mut prev = a.matrix().clone();
    let mut prev_norm = inf_norm(&prev);
    for k in 1..=opts.max_squarings {
        let current = &prev * &prev;
        let norm = inf_norm(&current);
        let power = 1u64 << k;
        if !norm.is_finite() || (norm > 1e16 && norm > 4.0 * prev_norm) {
            return Err(Error::PowerNormsDiverge { n: power, norm });
        }
        if norm < opts.zero_limit_tol && norm < prev_norm {
            return Ok(PowerClass::Zero {
                final_norm: norm,
                final_power: power,
            });
        }
        let diff = inf_norm(&(&current - &prev));
        // an ulp-level spectral-radius offset drifts the sampled powers by
        // a factor exp(2^k ulp); widen the stationarity window accordingly
        let drift = (power as f64) * 5e-16;
        if diff <= (opts.stationarity_tol + drift) * f64::max(1.0, norm) {
            // one more squaring squares the distance to the limit, which
            // pushes the sampled power to machine accuracy
            let polished = &current * &current;
            return Ok(PowerClass::Stationary {
                limit: polished,
                final_power: power << 1,
            });
        }
        prev = current;
        prev_norm = norm;
    }
    Err(Error::NotConverged {
        steps: opts.max_squarings,
        delta: prev_norm,
    })
}

/// Computes the limit of the powers of `a`: either the zero limit or the
/// triple `(u, f0, A0)` with a decay certificate.
///
/// Preconditions checked here: regularity (every basis vector reaches the
/// interior within the cap) and sampled power boundedness. Errors report
/// which hypothesis broke; operators with spectral radius away from 1 are
/// rejected rather than silently rescaled.
pub fn limit_decomposition(
    a: &PositiveOperator,
    opts: &Tolerances,
) -> Result<LimitDecomposition> {
    let d = a.dim();
    let cap = opts.index_cap.unwrap_or_else(|| a.default_cap());

    let mut per_basis_index = Vec::with_capacity(d);
    for j in 0..d {
        match find_positivity_index_capped(a, &basis_vector(d, j), cap)? {
            Some(n) => per_basis_index.push(n),
            None => return Err(Error::RegularityFailure { index: j, cap }),
        }
    }

    match classify_powers(a, opts)? {
        PowerClass::Zero {
            final_norm,
            final_power,
        } => Ok(LimitDecomposition {
            is_zero_limit: true,
            u: None,
            f0: None,
            a0: DMatrix::zeros(d, d),
            certificate: None,
            limit_residual: final_norm,
            final_power,
            per_basis_index,
        }),
        PowerClass::Stationary { limit, final_power } => {
            // u = normalized limit of the powers applied to an interior seed
            let seed = DVector::from_element(d, 1.0);
            let u_raw = &limit * seed;
            let scale = u_raw.amax();
            if scale <= 0.0 || scale.is_nan() {
                return Err(Error::VanishingLimit);
            }
            let u = u_raw / scale;
            if !in_interior(&a.space, &u)? {
                let (index, &value) = u
                    .iter()
                    .enumerate()
                    .min_by(|x, y| x.1.total_cmp(y.1))
                    .unwrap();
                return Err(Error::NotInterior { index, value });
            }
            let unit = OrderUnit::new(a.space, u.clone())?;

            let traces: Result<Vec<OscillationTrace>> = (0..d)
                .map(|j| {
                    trace_with(
                        a,
                        &unit,
                        &basis_vector(d, j),
                        opts.trace_eps,
                        opts.trace_floor,
                        opts.max_trace_steps,
                        opts.fixed_point_tol,
                    )
                })
                .collect();
            let mut f0 = limit_functional(a, &unit, &traces?)?;
            // the adjoint of the sampled limit power projects onto the fixed
            // functional, sharpening the trace estimate to the accuracy of
            // the power itself
            let projected = limit.transpose() * &f0;
            let scale = projected.dot(&u);
            if scale > 0.0 {
                f0 = projected / scale;
            }
            for (j, &v) in f0.iter().enumerate() {
                if v <= 0.0 || v.is_nan() {
                    return Err(Error::NotInterior { index: j, value: v });
                }
            }

            let a0 = outer(&u, &f0);
            let limit_residual = inf_norm(&(&limit - &a0));
            if limit_residual > 1e-6 * f64::max(1.0, inf_norm(&a0)) {
                return Err(Error::NotConverged {
                    steps: opts.max_squarings,
                    delta: limit_residual,
                });
            }

            let certificate = match find_uniform_index_capped(a, cap)? {
                Some(p) => Some(certify_rate(a, &unit, p)?),
                None => None,
            };

            Ok(LimitDecomposition {
                is_zero_limit: false,
                u: Some(u),
                f0: Some(f0),
                a0,
                certificate,
                limit_residual,
                final_power,
                per_basis_index,
            })
        }
    }
}

/// Report of the simple-eigenvalue check for the fixed spaces of `A`
/// and its adjoint at eigenvalue 1.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SimpleEigenvalueReport {
    pub nullity: usize,
    /// `||u' - f0(u') u||_inf / ||u'||_inf` for the eliminated fixed vector.
    pub fixed_vector_residual: f64,
    /// Same for the adjoint: `||f' - f'(u) f0||_inf / ||f'||_inf`.
    pub adjoint_residual: f64,
}

/// Verifies that 1 is a simple eigenvalue: `(A - I)` has nullity 1, the
/// eliminated fixed vector is a multiple of `u`, and the adjoint fixed
/// functional is a multiple of `f0`.
pub fn check_simple_eigenvalue(
    a: &PositiveOperator,
    decomp: &LimitDecomposition,
) -> Result<SimpleEigenvalueReport> {
    let (u, f0) = match (&decomp.u, &decomp.f0) {
        (Some(u), Some(f0)) => (u, f0),
        _ => return Err(Error::VanishingLimit),
    };
    let d = a.dim();
    let shifted = a.matrix() - DMatrix::<f64>::identity(d, d);
    let rank_tol = 1e-9;

    let (rank, basis) = nullspace(&shifted, rank_tol);
    let nullity = d - rank;
    if nullity != 1 {
        return Err(Error::EigenvalueNotSimple { nullity });
    }
    let u_prime = &basis[0];
    let scale = f0.dot(u_prime);
    let fixed_vector_residual =
        (u_prime - u * scale).abs().max() / u_prime.abs().max();

    let (rank_t, basis_t) = nullspace(&shifted.transpose(), rank_tol);
    let nullity_t = d - rank_t;
    if nullity_t != 1 {
        return Err(Error::EigenvalueNotSimple { nullity: nullity_t });
    }
    let f_prime = &basis_t[0];
    let scale_t = f_prime.dot(u);
    let adjoint_residual = (f_prime - f0 * scale_t).abs().max() / f_prime.abs().max();

    Ok(SimpleEigenvalueReport {
        nullity,
        fixed_vector_residual,
        adjoint_residual,
    })
}

/// Residual norms of the algebraic identities satisfied by the limit
/// projection: `A0^n = A0`, `A A0 = A0 A = A0`, `(A - A0)^n = A^n - A0`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LimitIdentities {
    pub n: u64,
    pub idempotent: f64,
    pub commute_left: f64,
    pub commute_right: f64,
    pub power_identity: f64,
}

pub fn limit_identities_check(
    a: &PositiveOperator,
    decomp: &LimitDecomposition,
    n: u64,
) -> Result<LimitIdentities> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let a0 = &decomp.a0;
    let idempotent = inf_norm(&(mat_pow(a0, n) - a0));
    let commute_left = inf_norm(&(a.matrix() * a0 - a0));
    let commute_right = inf_norm(&(a0 * a.matrix() - a0));
    let power_identity = inf_norm(&(mat_pow(&(a.matrix() - a0), n) - (mat_pow(a.matrix(), n) - a0)));
    Ok(LimitIdentities {
        n,
        idempotent,
        commute_left,
        commute_right,
        power_identity,
    })
}

/// The fundamental inverse `(I - A + A0)^{-1}` computed as the series
/// `I + sum_{n>=1} (A^n - A0)`, truncated when the term norm drops
/// below `eps`.
#[derive(Debug, Clone)]
pub struct FundamentalInverse {
    pub t_inv: DMatrix<f64>,
    pub terms_used: usize,
    /// `max(||T T^{-1} - I||, ||T^{-1} T - I||)` in the induced max norm.
    pub residual: f64,
}

pub fn fundamental_inverse(
    a: &PositiveOperator,
    decomp: &LimitDecomposition,
    eps: f64,
) -> Result<FundamentalInverse> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let d = a.dim();
    let a0 = &decomp.a0;
    let max_terms = 200_000usize;

    // certified decay envelope: past the window p the term norms must stay
    // under 2 C_u^2 (1 - 2 beta)^(n/p) (times a safety factor), otherwise
    // the contraction hypothesis is broken
    let envelope = match (&decomp.certificate, &decomp.u) {
        (Some(cert), Some(u)) => {
            let unit = OrderUnit::new(a.space, u.clone())?;
            let rate = f64::max(cert.rate(), 1e-8);
            Some((cert.p, rate, 2.0 * unit.c_u * unit.c_u))
        }
        _ => None,
    };

    let mut sum = DMatrix::<f64>::identity(d, d);
    let mut power = DMatrix::<f64>::identity(d, d);
    let mut terms_used = 0;
    for n in 1..=max_terms {
        power = &power * a.matrix();
        let term = &power - a0;
        let norm = inf_norm(&term);
        sum += &term;
        terms_used = n;
        if norm < eps {
            break;
        }
        if let Some((p, rate, scale)) = envelope {
            if n >= 2 * p {
                let allowed = 100.0 * scale * rate.powi((n / p) as i32);
                if norm > allowed {
                    return Err(Error::SeriesNotDecreasing { n, window: p, norm });
                }
            }
        }
        if n == max_terms {
            return Err(Error::NotConverged {
                steps: max_terms,
                delta: norm,
            });
        }
    }

    let t = DMatrix::<f64>::identity(d, d) - a.matrix() + a0;
    let eye = DMatrix::<f64>::identity(d, d);
    let residual = f64::max(
        inf_norm(&(&t * &sum - &eye)),
        inf_norm(&(&sum * &t - &eye)),
    );
    Ok(FundamentalInverse {
        t_inv: sum,
        terms_used,
        residual,
    })
}

/// Spectral radius via norm-scaled repeated squaring:
/// `log rho = lim 2^{-k} log ||A^{2^k}||`.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    let n0 = inf_norm(m);
    if n0 == 0.0 {
        return 0.0;
    }
    let mut b = m / n0;
    let mut log_rho = n0.ln();
    let mut weight = 0.5;
    for _ in 0..48 {
        b = &b * &b;
        let s = inf_norm(&b);
        if s == 0.0 {
            return 0.0;
        }
        log_rho += weight * s.ln();
        b /= s;
        weight *= 0.5;
    }
    log_rho.exp()
}
