//! Asymptotics of positive operators and positive one-parameter semigroups
//! on cone-ordered finite-dimensional spaces.
//!
//! The cone is the nonnegative orthant; positive operators are entrywise
//! nonnegative dense matrices, positive semigroups are matrix exponentials
//! of Metzler generators. For a regular, power-bounded operator the crate
//! computes and certifies the rank-one limit `A0 = u f0^T` of the powers:
//! `u` the interior fixed point, `f0` the limit distribution (the unique
//! adjoint fixed point with `f0(u) = 1`). Convergence certificates come
//! from the oscillation of trajectories over the dual base of the order
//! unit, which contracts geometrically once some power of the operator is
//! strongly positive.
//!
//! Modules:
//! - [`ordered_space`]: cone membership, interior test, u-norm, dual base.
//! - [`oscillation`]: trajectory envelopes `M_x`, `m_x`, decay certificates,
//!   the constructive limit functional.
//! - [`asymptotics`]: eventual-positivity indices, the limit decomposition,
//!   algebraic identities of the limit projection, fundamental inverse.
//! - [`semigroup`]: matrix exponentials of Metzler generators, their limit,
//!   and the oscillation-based operator-norm error bound.
//! - [`fixtures`]: two reference Markov operators with closed-form behavior
//!   and a stochastic-kernel random walk.
//! - [`io`]: CSV/JSON reading and writing with reproducible formatting.
//!
//! ```
//! use nalgebra::dmatrix;
//! use perron::{limit_decomposition, PositiveOperator, Tolerances};
//!
//! let a = PositiveOperator::new(dmatrix![0.9, 0.1; 0.2, 0.8])?;
//! let limit = limit_decomposition(&a, &Tolerances::default())?;
//! let f0 = limit.f0.expect("regular chain has a nonzero limit");
//! assert!((f0[0] - 2.0 / 3.0).abs() < 1e-10);
//! assert!((f0[1] - 1.0 / 3.0).abs() < 1e-10);
//! assert!(limit.certificate.unwrap().beta > 0.0);
//! # Ok::<(), perron::Error>(())
//! ```

pub mod asymptotics;
pub mod error;
pub mod fixtures;
pub mod io;
mod linalg;
pub mod ordered_space;
pub mod oscillation;
pub mod semigroup;

pub use asymptotics::{
    check_simple_eigenvalue, find_positivity_index, find_positivity_index_capped,
    find_uniform_index, find_uniform_index_capped, fundamental_inverse,
    limit_decomposition, limit_identities_check, spectral_radius, FundamentalInverse,
    LimitDecomposition, LimitIdentities, PositiveOperator, SimpleEigenvalueReport,
    Tolerances,
};
pub use error::{Error, Result};
pub use ordered_space::{
    in_cone, in_interior, nonflat_decompose, u_norm, ConeSpace, DualBase, OrderUnit,
};
pub use oscillation::{
    certify_rate, limit_functional, oscillation_step, trace_until, verify_fixed_point,
    OscillationTrace, RateCertificate, TraceStatus, TraceStep,
};
pub use semigroup::{
    evaluate, oscillation_decay_bound, semigroup_limit, Generator, SemigroupLimit,
    SemigroupOptions,
};

/// Helpers used by both the unit tests and the integration suites.
#[doc(hidden)]
pub mod testutil {
    pub use crate::linalg::{basis_vector, inf_norm, mat_pow, max_abs, outer};
}
