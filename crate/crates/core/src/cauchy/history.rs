//! Functionals of the history `w★` that carry its memory past `t★`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frac_ops::weights::{AbelTable, PanelRule};
use crate::frac_ops::{check_order, GridFn, Shape, UniformGrid};

use super::problem::CauchyProblem;

const PANEL_NODES: usize = 12;
const END_PANEL_NODES: usize = 16;

/// `ψ(t) = sin(απ)/π ∫_{t₀}^{t★} (t★-τ)^α φ(τ)/(t-τ) dτ` on the nodes of `target`,
/// which must start at `t★ = phi.b()`. `φ` is interpolated piecewise linearly.
pub fn psi_star(phi: &GridFn, alpha: f64, target: &UniformGrid) -> Result<GridFn> {
    check_order(alpha)?;
    if phi.shape().is_matrix() {
        return Err(Error::domain("psi_star acts on vector-valued functions"));
    }
    let t_star = phi.b();
    let tol = 1e-9 * target.step().max(f64::EPSILON) + 1e-12 * t_star.abs().max(1.0);
    if (target.a - t_star).abs() > tol {
        return Err(Error::domain(format!(
            "target grid starts at {} but the history ends at {t_star}",
            target.a
        )));
    }
    let width = phi.width();
    if phi.n_sub() == 0 {
        return GridFn::zeros(target.a, target.b, target.n, phi.shape());
    }
    let hn = phi.n_sub();
    let h = phi.step();
    let c = (alpha * PI).sin() / PI;
    let interior = PanelRule::legendre(PANEL_NODES);
    let last = PanelRule::jacobi(END_PANEL_NODES, 0.0, alpha);
    let abel = AbelTable::new(hn, alpha);

    let nodes: Vec<Vec<f64>> = (0..=target.n)
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![0.0; width];
            if i == 0 {
                // (t★-τ)^α/(t★-τ) is the Abel kernel
                let s = c * h.powf(alpha);
                for k in 0..=hn {
                    let wk = abel.weight(hn, 0, k) * s;
                    for (a, v) in acc.iter_mut().zip(phi.node(k)) {
                        *a += wk * v;
                    }
                }
                return acc;
            }
            let t = target.t(i);
            for p in 0..hn {
                let (lo, hi) = (phi.t(p), phi.t(p + 1));
                let (m_lo, m_hi) = if p + 1 == hn {
                    last.hat_moments(lo, hi, |tau| 1.0 / (t - tau))
                } else {
                    interior.hat_moments(lo, hi, |tau| (t_star - tau).powf(alpha) / (t - tau))
                };
                for ((a, l), r) in acc.iter_mut().zip(phi.node(p)).zip(phi.node(p + 1)) {
                    *a += c * (m_lo * l + m_hi * r);
                }
            }
            acc
        })
        .collect();
    GridFn::new(target.a, target.b, phi.shape(), nodes.concat())
}

/// `b★(t) = (ψ★(t) - ψ★(t★))/(t - t★)^α + b(t)` on the nodes of `psi`.
///
/// At `t = t★` the quotient is taken over the first subinterval.
pub fn b_star(problem: &CauchyProblem, psi: &GridFn) -> Result<GridFn> {
    if psi.n_sub() == 0 {
        return Err(Error::domain("b_star needs t_star < theta"));
    }
    let alpha = problem.alpha;
    let width = psi.width();
    let base = psi.node(0).to_vec();
    let mut data = Vec::with_capacity(psi.data().len());
    for i in 0..=psi.n_sub() {
        let t = psi.t(i);
        let b = problem.b_at(t)?;
        let (k, dt) = if i == 0 { (1, psi.step()) } else { (i, t - psi.a()) };
        let scale = dt.powf(-alpha);
        for c in 0..width {
            data.push((psi.node(k)[c] - base[c]) * scale + b[c]);
        }
    }
    GridFn::new(psi.a(), psi.b(), psi.shape(), data)
}

/// `(τ - t★)^α ∫_{t₀}^{t★} (w(ξ) - w(t₀)) (τ - ξ)^{-1-α} dξ` on the nodes of `target`,
/// with `w` piecewise linear and the panel moments in closed form.
/// At `τ = t★` the value is the limit `(w(t★) - w(t₀))/α`.
pub fn weighted_history_integral(w: &GridFn, alpha: f64, target: &UniformGrid) -> Result<GridFn> {
    check_order(alpha)?;
    let width = w.width();
    let hn = w.n_sub();
    let t_star = w.b();
    let w0 = w.node(0).to_vec();
    if hn == 0 {
        return GridFn::zeros(target.a, target.b, target.n, Shape::Vector(width));
    }
    let h = w.step();
    let nodes: Vec<Vec<f64>> = (0..=target.n)
        .into_par_iter()
        .map(|i| {
            if i == 0 {
                return w.node(hn).iter().zip(&w0).map(|(a, b)| (a - b) / alpha).collect();
            }
            let tau = target.t(i);
            let mut acc = vec![0.0; width];
            for p in 0..hn {
                // u = τ - ξ runs over [u_lo, u_hi] on this panel; u_lo belongs to node p+1
                let u_lo = tau - w.t(p + 1);
                let u_hi = tau - w.t(p);
                let i0 = (u_lo.powf(-alpha) - u_hi.powf(-alpha)) / alpha;
                let i1 = (u_hi.powf(1.0 - alpha) - u_lo.powf(1.0 - alpha)) / (1.0 - alpha);
                for c in 0..width {
                    let g_near = w.node(p + 1)[c] - w0[c];
                    let g_far = w.node(p)[c] - w0[c];
                    let slope = (g_far - g_near) / h;
                    acc[c] += (g_near - slope * u_lo) * i0 + slope * i1;
                }
            }
            let scale = (tau - t_star).powf(alpha);
            acc.iter_mut().for_each(|v| *v *= scale);
            acc
        })
        .collect();
    GridFn::new(target.a, target.b, Shape::Vector(width), nodes.concat())
}
