//! Cauchy problems `ᶜD^α x = A(t) x + b(t)` with `x = w★` on `[t₀, t★]`.
//!
//! [`solve_direct`] marches the equivalent Volterra equation. The three
//! representation formulas rebuild the same solution from a precomputed
//! [`FundamentalField`](crate::fundamental::FundamentalField): [`represent_pc`]
//! for an initial value at `t₀`, [`represent_gc`] through the modified forcing
//! `b★`, and [`represent_gc_compact`] directly from the history samples.
//!
//! All methods share one uniform grid and require `t★` to be a grid node.

mod history;
mod problem;
mod represent;
mod solve;

pub use history::{b_star, psi_star, weighted_history_integral};
pub use problem::{CauchyProblem, CoeffSpec, ForcingSpec, HistorySpec, ResolvedHistory};
pub use represent::{compact_identity_defect, represent_gc, represent_gc_compact, represent_pc};
pub use solve::{integral_equation_residual, solve_direct, Method, Solution, SolveMetadata};
