//! The kernel
//!
//! ```text
//! K(ξ, τ) = τ^{α-1} ∫_0^1 η^α (1-η)^{-α} (τ + η(ξ - τ))^{-α} dη,   0 < τ < ξ,
//! ```
//!
//! behind the `R` operators, and the product-integration weights built on it.
//!
//! The η-integrand has a near-singularity at `η = -τ/(ξ - τ)`, which approaches
//! the interval as `τ/ξ → 0`. When it is at least one interval length away a
//! single Jacobi rule with weight `η^α (1-η)^{-α}` is used. Otherwise the
//! interval is split geometrically towards `η = 0` so every panel stays well
//! separated from the near-singularity.

use rayon::prelude::*;

use super::weights::PanelRule;
use crate::error::{Error, Result};

const SEPARATED_NODES: usize = 20;
const PANEL_NODES: usize = 12;
const TAIL_NODES: usize = 20;

/// Geometric refinement levels towards the singular end of the first R panel.
pub(crate) const R_GRADING_LEVELS: usize = 20;
const R_PANEL_NODES: usize = 8;

#[derive(Debug, Clone)]
pub(crate) struct KernelQuad {
    alpha: f64,
    separated: PanelRule,
    head: PanelRule,
    geometric: PanelRule,
    tail: PanelRule,
    r_panel: PanelRule,
    r_singular: PanelRule,
}

impl KernelQuad {
    pub(crate) fn new(alpha: f64) -> Self {
        Self {
            alpha,
            separated: PanelRule::jacobi(SEPARATED_NODES, alpha, -alpha),
            head: PanelRule::jacobi(PANEL_NODES, alpha, 0.0),
            geometric: PanelRule::legendre(PANEL_NODES),
            tail: PanelRule::jacobi(TAIL_NODES, 0.0, -alpha),
            r_panel: PanelRule::legendre(R_PANEL_NODES),
            r_singular: PanelRule::jacobi(R_PANEL_NODES, alpha - 1.0, 0.0),
        }
    }

    /// `K(ξ, τ)·τ^{1-α}`, the bounded η-integral.
    pub(crate) fn eta_integral(&self, xi: f64, tau: f64) -> f64 {
        let a = self.alpha;
        let gap = xi - tau;
        // singularity of the integrand sits at η = -eps
        let eps = tau / gap;
        let scale = gap.powf(-a);
        if eps >= 1.0 {
            return scale * self.separated.integrate(0.0, 1.0, |eta| (eps + eta).powf(-a));
        }
        let mut lo = eps.min(0.5);
        let mut total = self
            .head
            .integrate(0.0, lo, |eta| (eps + eta).powf(-a) * (1.0 - eta).powf(-a));
        while 2.0 * lo < 0.5 {
            let hi = 2.0 * lo;
            total += self
                .geometric
                .integrate(lo, hi, |eta| eta.powf(a) * (1.0 - eta).powf(-a) * (eps + eta).powf(-a));
            lo = hi;
        }
        total += self.tail.integrate(lo, 1.0, |eta| eta.powf(a) * (eps + eta).powf(-a));
        scale * total
    }

    pub(crate) fn eval(&self, xi: f64, tau: f64) -> f64 {
        tau.powf(self.alpha - 1.0) * self.eta_integral(xi, tau)
    }

    /// Hat moments of `K(m, ·)` over the unit panel `[k, k+1] ⊂ [0, m]`.
    fn r_panel_moments(&self, m: usize, k: usize) -> (f64, f64) {
        let mf = m as f64;
        if k > 0 {
            return self.r_panel.hat_moments(k as f64, k as f64 + 1.0, |v| self.eval(mf, v));
        }
        // panel touching v = 0 where K(m, v) ~ v^{α-1}: geometric grading, ratio 1/2
        let (mut m_lo, mut m_hi) = (0.0, 0.0);
        let mut hi = 1.0;
        for _ in 0..R_GRADING_LEVELS {
            let lo = 0.5 * hi;
            let (a, b) = self.r_panel.hat_moments(lo, hi, |v| self.eval(mf, v));
            // rescale hats of [lo, hi] to hats of [0, 1]: v = lo·(1-s) + hi·s
            m_lo += a * (1.0 - lo) + b * (1.0 - hi);
            m_hi += a * lo + b * hi;
            hi = lo;
        }
        let (a, b) = self.r_singular.hat_moments(0.0, hi, |v| self.eta_integral(mf, v));
        m_lo += a + b * (1.0 - hi);
        m_hi += b * hi;
        (m_lo, m_hi)
    }

    /// Rows `m = 0..=max_m` of `∫_0^m K(m, v) hat_k(v) dv`, unit step.
    pub(crate) fn r_weight_rows(&self, max_m: usize) -> Vec<Vec<f64>> {
        (0..=max_m)
            .into_par_iter()
            .map(|m| {
                let mut row = vec![0.0; m + 1];
                for k in 0..m {
                    let (a, b) = self.r_panel_moments(m, k);
                    row[k] += a;
                    row[k + 1] += b;
                }
                row
            })
            .collect()
    }
}

/// Evaluates `K(ξ, τ)` for `0 < τ < ξ` and `α ∈ (0, 1)`.
pub fn kernel_k(xi: f64, tau: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(tau > 0.0) || !(tau < xi) || !xi.is_finite() {
        return Err(Error::domain(format!(
            "kernel needs 0 < tau < xi, got xi = {xi}, tau = {tau}"
        )));
    }
    Ok(KernelQuad::new(alpha).eval(xi, tau))
}
