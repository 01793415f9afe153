//! The fundamental solution matrix `F(t, s)` on the triangle `t₀ ≤ s ≤ t ≤ ϑ`.
//!
//! `F` solves the weakly singular Volterra equation
//!
//! ```text
//! F(t, s) = Id/Γ(α) + (t-s)^{1-α}/Γ(α) ∫_s^t A(τ) F(τ, s) (t-τ)^{α-1} (τ-s)^{α-1} dτ
//! ```
//!
//! and coincides with the solution `G` of the dual equation in which `A`
//! multiplies from the right. Both are discretised by product integration with
//! `A F` piecewise linear in `τ`; see [`solve_f`] and [`solve_g_dual`].

mod bounds;
mod field;
mod march;

pub use bounds::{bounds, AprioriBounds};
pub use field::{FundamentalField, TriangleGrid};
pub use march::{solve_f, solve_f_column, solve_f_picard, solve_g_dual, PicardStats};
