//! Order structure of the nonnegative orthant in dimension `d`.
//!
//! The ambient space is `R^d` with the max norm, ordered by the cone
//! `K = {x : x_i >= 0}`. An interior point `u` (all components strictly
//! positive) induces the u-norm `||x||_u = inf{l >= 0 : -l u <= x <= l u}
//! = max_i |x_i| / u_i`, which is equivalent to the max norm with constant
//! `C_u = max(max_i u_i, 1 / min_i u_i)`:
//!
//! ```text
//! C_u^{-1} ||x||  <=  ||x||_u  <=  C_u ||x||
//! ```
//!
//! The dual cone has the base `F_u = {f >= 0 : f(u) = 1}`, whose extreme
//! points are the scaled coordinate functionals `e_i / u_i`. Every sup/inf
//! over `F_u` reduces to a max/min over those `d` extreme points, which is
//! what makes the oscillation machinery in the rest of the crate a finite
//! computation.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};

/// The nonnegative orthant in a fixed dimension, together with the
/// tolerance used for the (relative) strict-positivity test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeSpace {
    pub dim: usize,
    /// Relative threshold for interior membership; `0` means the exact
    /// strict inequality `x_i > 0`.
    pub interior_tol: f64,
}

impl ConeSpace {
    pub fn new(dim: usize) -> Result<Self> {
        Self::with_tolerance(dim, 0.0)
    }

    pub fn with_tolerance(dim: usize, interior_tol: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dim must be at least 1".into()));
        }
        if !interior_tol.is_finite() || interior_tol < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "interior_tol must be nonnegative, got {interior_tol}"
            )));
        }
        Ok(ConeSpace { dim, interior_tol })
    }

    pub(crate) fn check_dim(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// An interior vector `u` with its norm-equivalence constant `C_u` and the
/// nonflatness constant `gamma` of the cone (`gamma = 1` for the orthant
/// in the max norm).
#[derive(Debug, Clone, PartialEq)]
pub struct OrderUnit {
    pub space: ConeSpace,
    pub u: DVector<f64>,
    pub c_u: f64,
    pub gamma: f64,
}

impl OrderUnit {
    /// Builds the unit and derives `C_u` in closed form. Rejects vectors
    /// that are not strictly interior relative to the space tolerance.
    pub fn new(space: ConeSpace, u: DVector<f64>) -> Result<Self> {
        space.check_dim(&u)?;
        let max = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for (i, &v) in u.iter().enumerate() {
            if !v.is_finite() || v <= space.interior_tol * max || v <= 0.0 {
                return Err(Error::NotInterior { index: i, value: v });
            }
        }
        let min = u.iter().cloned().fold(f64::INFINITY, f64::min);
        let c_u = f64::max(max, 1.0 / min);
        Ok(OrderUnit {
            space,
            u,
            c_u,
            gamma: 1.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }
}

/// The base `F_u` of the dual cone, stored through its `dim` extreme
/// points: the i-th is the coordinate functional scaled by `1/u_i`.
#[derive(Debug, Clone)]
pub struct DualBase {
    pub unit: OrderUnit,
    pub extreme_points: Vec<DVector<f64>>,
}

impl DualBase {
    pub fn new(unit: OrderUnit) -> Self {
        let d = unit.dim();
        let extreme_points = (0..d)
            .map(|i| {
                let mut f = DVector::zeros(d);
                f[i] = 1.0 / unit.u[i];
                f
            })
            .collect();
        DualBase {
            unit,
            extreme_points,
        }
    }

    /// Applies the i-th extreme functional to `x`.
    pub fn apply(&self, i: usize, x: &DVector<f64>) -> f64 {
        self.extreme_points[i].dot(x)
    }
}

/// Membership in the cone `K`: every component `>= 0`, exactly.
pub fn in_cone(space: &ConeSpace, x: &DVector<f64>) -> Result<bool> {
    space.check_dim(x)?;
    Ok(x.iter().all(|&v| v >= 0.0))
}

/// Strict interior membership, with a relative threshold:
/// `min_i x_i > interior_tol * max(1, max_i |x_i|)`.
pub fn in_interior(space: &ConeSpace, x: &DVector<f64>) -> Result<bool> {
    space.check_dim(x)?;
    let min = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let amax = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(min > space.interior_tol * f64::max(1.0, amax))
}

/// The u-norm `max_i |x_i| / u_i`, equal to the sup of `|f(x)|` over the
/// extreme points of the dual base.
pub fn u_norm(unit: &OrderUnit, x: &DVector<f64>) -> Result<f64> {
    unit.space.check_dim(x)?;
    Ok(x.iter()
        .zip(unit.u.iter())
        .map(|(xi, ui)| (xi / ui).abs())
        .fold(0.0, f64::max))
}

/// Splits `x = x1 - x2` into positive and negative parts, both in `K`,
/// with `||x_i|| <= gamma ||x||` (`gamma = 1` here).
pub fn nonflat_decompose(
    unit: &OrderUnit,
    x: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    unit.space.check_dim(x)?;
    let x1 = x.map(|v| v.max(0.0));
    let x2 = x.map(|v| (-v).max(0.0));
    Ok((x1, x2))
}
