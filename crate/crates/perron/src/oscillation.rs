//! Oscillation of operator trajectories and the constructive limit
//! functional.
//!
//! For an operator `A` with interior fixed point `u` and the dual base
//! `F_u`, each trajectory `A^n x` is tracked through
//!
//! ```text
//! M_x(n) = max_i (A^n x)_i / u_i ,   m_x(n) = min_i (A^n x)_i / u_i ,
//! delta_x(n) = M_x(n) - m_x(n).
//! ```
//!
//! `M` is nonincreasing, `m` nondecreasing, and for `x` in the cone the
//! sandwich `m(n) u <= A^n x <= M(n) u` holds componentwise. When the
//! oscillation `delta` vanishes the common limit `f0(x) = lim m_x(n)`
//! defines the limit functional, and `delta_x(n)` bounds the distance
//! `||A^n x - f0(x) u||_u` at every step.
//!
//! The decay is certified geometrically: if every unit-oscillation slice
//! vector is mapped by `A^p` at least `beta` above zero (in `u`-ratio),
//! then `delta` contracts by `(1 - 2 beta)` every `p` steps.

use nalgebra::DVector;
use serde::Serialize;

use crate::asymptotics::PositiveOperator;
use crate::error::{Error, Result};
use crate::io::format_f64;
use crate::linalg::{basis_vector, mat_pow};
use crate::ordered_space::{u_norm, OrderUnit};

/// Default tolerance for the fixed-point hypothesis `A(u) = u`,
/// measured as `||Au - u||_u <= tol * ||u||_u`.
pub const DEFAULT_FIXED_POINT_TOL: f64 = 1e-9;

/// Absolute floor under the relative convergence threshold, so traces
/// with `delta(0) = 0` still terminate.
pub const DELTA_FLOOR: f64 = 1e-14;

/// Relative slack allowed before monotonicity of `M`/`m` counts as broken.
const MONOTONICITY_SLACK: f64 = 1e-12;

/// One recorded step of a trajectory: `upper = M_x(n)`, `lower = m_x(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceStep {
    pub n: usize,
    pub upper: f64,
    pub lower: f64,
}

impl TraceStep {
    pub fn delta(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TraceStatus {
    /// The oscillation fell below the threshold at the recorded step.
    Converged { at: usize },
    /// The step budget ran out first.
    MaxSteps,
}

/// The sequence `(n, M_x(n), m_x(n))` for one trajectory seed.
#[derive(Debug, Clone)]
pub struct OscillationTrace {
    pub x: DVector<f64>,
    pub steps: Vec<TraceStep>,
    pub status: TraceStatus,
    /// The absolute threshold the oscillation was compared against.
    pub threshold: f64,
}

impl OscillationTrace {
    pub fn converged(&self) -> bool {
        matches!(self.status, TraceStatus::Converged { .. })
    }

    pub fn last(&self) -> &TraceStep {
        self.steps.last().expect("trace records at least step 0")
    }

    /// CSV export with header `n,M,m,delta`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,M,m,delta\n");
        for s in &self.steps {
            out.push_str(&format!(
                "{},{},{},{}\n",
                s.n,
                format_f64(s.upper),
                format_f64(s.lower),
                format_f64(s.delta())
            ));
        }
        out
    }
}

/// A geometric decay certificate: `delta_x(k p) <= (1 - 2 beta)^k delta_x(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateCertificate {
    pub p: usize,
    pub beta: f64,
    /// Largest initial oscillation over the certified slice sample.
    pub delta0: f64,
}

impl RateCertificate {
    pub fn rate(&self) -> f64 {
        1.0 - 2.0 * self.beta
    }
}

fn envelope(unit: &OrderUnit, y: &DVector<f64>) -> (f64, f64) {
    let mut upper = f64::NEG_INFINITY;
    let mut lower = f64::INFINITY;
    for (yi, ui) in y.iter().zip(unit.u.iter()) {
        let r = yi / ui;
        upper = upper.max(r);
        lower = lower.min(r);
    }
    (upper, lower)
}

/// Checks `||Au - u||_u <= tol` (the u-norm of `u` itself is 1).
pub fn verify_fixed_point(a: &PositiveOperator, unit: &OrderUnit, tol: f64) -> Result<()> {
    let residual = u_norm(unit, &(a.apply(&unit.u)? - &unit.u))?;
    if residual > tol {
        return Err(Error::NotFixedPoint { residual, tol });
    }
    Ok(())
}

/// `(M_x(n), m_x(n))` computed by `n` repeated applications of `A`;
/// the power `A^n` is never formed.
pub fn oscillation_step(
    a: &PositiveOperator,
    unit: &OrderUnit,
    x: &DVector<f64>,
    n: usize,
) -> Result<(f64, f64)> {
    verify_fixed_point(a, unit, DEFAULT_FIXED_POINT_TOL)?;
    unit.space.check_dim(x)?;
    let mut y = x.clone();
    for _ in 0..n {
        y = a.apply(&y)?;
    }
    Ok(envelope(unit, &y))
}

/// Records the trajectory of `x` until the oscillation falls below
/// `max(eps * delta_x(0), DELTA_FLOOR)` or `max_steps` is reached.
pub fn trace_until(
    a: &PositiveOperator,
    unit: &OrderUnit,
    x: &DVector<f64>,
    eps: f64,
    max_steps: usize,
) -> Result<OscillationTrace> {
    trace_with(
        a,
        unit,
        x,
        eps,
        DELTA_FLOOR,
        max_steps,
        DEFAULT_FIXED_POINT_TOL,
    )
}

pub(crate) fn trace_with(
    a: &PositiveOperator,
    unit: &OrderUnit,
    x: &DVector<f64>,
    eps: f64,
    floor: f64,
    max_steps: usize,
    fixed_point_tol: f64,
) -> Result<OscillationTrace> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    if max_steps == 0 {
        return Err(Error::InvalidParameter("max_steps must be positive".into()));
    }
    verify_fixed_point(a, unit, fixed_point_tol)?;
    unit.space.check_dim(x)?;

    let (m0_up, m0_lo) = envelope(unit, x);
    let threshold = f64::max(eps * (m0_up - m0_lo), floor);
    let mut steps = vec![TraceStep {
        n: 0,
        upper: m0_up,
        lower: m0_lo,
    }];
    let mut status = TraceStatus::MaxSteps;
    if m0_up - m0_lo <= threshold {
        status = TraceStatus::Converged { at: 0 };
        return Ok(OscillationTrace {
            x: x.clone(),
            steps,
            status,
            threshold,
        });
    }

    let mut y = x.clone();
    let mut prev = (m0_up, m0_lo);
    for n in 1..=max_steps {
        y = a.apply(&y)?;
        let (upper, lower) = envelope(unit, &y);
        let slack_up = MONOTONICITY_SLACK * f64::max(1.0, prev.0.abs());
        let slack_lo = MONOTONICITY_SLACK * f64::max(1.0, prev.1.abs());
        if upper > prev.0 + slack_up || lower < prev.1 - slack_lo {
            let drift = f64::max(upper - prev.0, prev.1 - lower);
            return Err(Error::MonotonicityViolation { step: n, drift });
        }
        steps.push(TraceStep { n, upper, lower });
        if upper - lower <= threshold {
            status = TraceStatus::Converged { at: n };
            break;
        }
        prev = (upper, lower);
    }
    Ok(OscillationTrace {
        x: x.clone(),
        steps,
        status,
        threshold,
    })
}

/// Assembles the limit functional from converged traces of the coordinate
/// basis vectors: `f0(e_j)` is the common limit of `m_{e_j}` and `M_{e_j}`,
/// renormalized so that `f0(u) = 1`.
pub fn limit_functional(
    _a: &PositiveOperator,
    unit: &OrderUnit,
    basis_traces: &[OscillationTrace],
) -> Result<DVector<f64>> {
    let d = unit.dim();
    if basis_traces.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: basis_traces.len(),
        });
    }
    let mut f0 = DVector::zeros(d);
    for (j, trace) in basis_traces.iter().enumerate() {
        if !trace.converged() {
            return Err(Error::NotConverged {
                steps: trace.last().n,
                delta: trace.last().delta(),
            });
        }
        let last = trace.last();
        f0[j] = 0.5 * (last.upper + last.lower);
    }
    let scale = f0.dot(&unit.u);
    if scale <= DELTA_FLOOR {
        return Err(Error::VanishingLimit);
    }
    f0 /= scale;
    Ok(f0)
}

/// Certifies the geometric oscillation decay of `A` at index `p`.
///
/// The certified constant is
///
/// ```text
/// beta = min over y in Y of  min_i (A^p y)_i / u_i ,
/// ```
///
/// where `Y` holds the `2 dim` extreme elements of the unit-oscillation
/// slice `S+ = {z >= 0 : ||z||_u = 1}` generated by basis vectors:
/// `u_j e_j` and `u - u_j e_j`. Any `z` in `S+` attains `z_j = u_j` at its
/// maximal coordinate, hence `z >= u_j e_j` and positivity of `A^p` gives
/// `min_i (A^p z)_i / u_i >= beta` for the whole slice. The sandwich then
/// contracts the oscillation of every trajectory by `(1 - 2 beta)` each
/// `p` steps. For a row-stochastic matrix with `u = 1` this reduces to the
/// classical bound `beta = min entry of A^p`.
///
/// The guarantee is meaningful when `A(u) = u`; the caller is expected to
/// have established that (as `limit_decomposition` does).
pub fn certify_rate(
    a: &PositiveOperator,
    unit: &OrderUnit,
    p: usize,
) -> Result<RateCertificate> {
    if p == 0 {
        return Err(Error::InvalidParameter("p must be positive".into()));
    }
    let d = unit.dim();
    if a.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: a.dim(),
        });
    }
    let ap = mat_pow(a.matrix(), p as u64);
    let u = &unit.u;
    let ap_u = &ap * u;

    let mut beta = f64::INFINITY;
    let mut delta0: f64 = 0.0;
    for j in 0..d {
        // first family: y = u_j e_j, image is u_j times column j of A^p
        let y = u[j] * basis_vector(d, j);
        let image = ap.column(j) * u[j];
        let (y_up, y_lo) = envelope(unit, &y);
        delta0 = delta0.max(y_up - y_lo);
        let (_, lower) = envelope(unit, &image.clone_owned());
        if lower <= 0.0 {
            return Err(Error::ZeroColumnRatio { p, column: j });
        }
        beta = beta.min(lower);

        // second family: y = u - u_j e_j (empty slice element when d = 1)
        let y2 = u - &y;
        if u_norm(unit, &y2)? > 0.0 {
            let image2 = &ap_u - &image;
            let (y_up, y_lo) = envelope(unit, &y2);
            delta0 = delta0.max(y_up - y_lo);
            let (_, lower2) = envelope(unit, &image2);
            if lower2 <= 0.0 {
                return Err(Error::ZeroColumnRatio { p, column: j });
            }
            beta = beta.min(lower2);
        }
    }
    if beta >= 0.5 {
        beta = 0.5 * (1.0 - f64::EPSILON);
    }
    Ok(RateCertificate { p, beta, delta0 })
}
