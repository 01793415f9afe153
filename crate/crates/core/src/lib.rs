//! Fundamental solution matrices of linear Caputo fractional differential
//! equations with variable coefficients, and the solution formulas built on
//! them for Cauchy problems whose initial data is a history on `[t₀, t★]`.
//!
//! The pieces:
//!
//! * [`special_fn`]: gamma and Mittag-Leffler functions (scalar and matrix).
//! * [`frac_ops`]: grid functions, fractional integrals, the L1 Caputo
//!   derivative and the auxiliary operators `R` and `J`.
//! * [`fundamental`]: the matrix field `F(t, s)` on the triangle `t ≥ s`,
//!   its dual `G`, and a-priori bounds.
//! * [`cauchy`]: a direct Volterra solver and the representation formulas.
//! * [`oracle`]: independent reference computations used for cross-checks.
//! * [`verify`]: the invariant suite behind the `verify` command.

// `!(x > 0.0)` also rejects NaN, which is the point
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// reference values and tables keep every digit they were generated with
#![allow(clippy::excessive_precision)]

pub mod cauchy;
pub mod error;
pub mod frac_ops;
pub mod fundamental;
pub mod linalg;
pub mod oracle;
pub mod special_fn;
pub mod verify;

pub use error::{Error, Result};
