use crate::cauchy::CauchyProblem;
use crate::error::{Error, Result};
use crate::frac_ops::{op_constants, UniformGrid};
use crate::linalg::flat_norm_inf;
use crate::special_fn::{gamma, mittag_leffler_scalar, MlParams};

/// A-priori bounds on `F`: `‖F‖ ≤ M_F` and
/// `‖F(t₁,s₁) - F(t₂,s₂)‖ ≤ H_F (|t₁-t₂|^α + |s₁-s₂|^α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AprioriBounds {
    /// Exponent of the weighted norm `max ‖φ(t)‖ e^{-(t-s)κ}`.
    pub kappa: f64,
    pub m_a: f64,
    pub m_f: f64,
    pub h_f: f64,
}

impl AprioriBounds {
    /// `κ^{-α} M_A M_J`, the contraction factor of the fixed-point map in the weighted norm.
    pub fn contraction(&self, alpha: f64) -> Result<f64> {
        Ok(self.kappa.powf(-alpha) * self.m_a * op_constants(alpha)?.m_j)
    }
}

/// `M_A` is the largest `‖A(tᵢ)‖` over the nodes of `grid`. `κ` is chosen so the
/// contraction factor is exactly 1/2 (or `κ = 1` when `A ≡ 0`).
pub fn bounds(problem: &CauchyProblem, grid: &UniformGrid) -> Result<AprioriBounds> {
    let alpha = problem.alpha;
    let c = op_constants(alpha)?;
    let n = problem.dim();
    let mut m_a: f64 = 0.0;
    for i in 0..=grid.n {
        m_a = m_a.max(flat_norm_inf(&problem.a_at(grid.t(i))?, n));
    }
    let span = problem.theta - problem.t0;
    let kappa = if m_a > 0.0 {
        (2.0 * m_a * c.m_j).powf(1.0 / alpha)
    } else {
        1.0
    };
    let q = kappa.powf(-alpha) * m_a * c.m_j;
    let m_f = (span * kappa).exp() / (gamma(alpha)? * (1.0 - q));
    // a bound past the f64 range (stiff A) is still a valid, if vacuous, bound
    let e = match mittag_leffler_scalar(
        &MlParams::new(alpha, 1.0).with_max_terms(20_000),
        span.powf(alpha) * m_a * c.m_j,
    ) {
        Err(Error::Overflow(_) | Error::NonConvergence { .. }) => f64::INFINITY,
        other => other?,
    };
    Ok(AprioriBounds {
        kappa,
        m_a,
        m_f,
        h_f: c.h_j * m_a * m_f * e,
    })
}
