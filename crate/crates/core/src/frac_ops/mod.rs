//! Fractional integrals, the Caputo derivative and the auxiliary operators
//! `R` and `J` on uniform grids.
//!
//! All operators act componentwise on [`GridFn`] values. The function is
//! interpolated piecewise linearly between nodes and the weakly singular
//! kernels are integrated against the hat functions exactly (in closed form
//! for the Abel kernel, by Gauss-Jacobi rules otherwise), so every operator is
//! exact for affine data up to quadrature rounding.
//!
//! Right-sided variants are obtained by mirroring `t ↦ a + b - t`.

mod grid_fn;
mod kernel;
pub(crate) mod weights;

use std::f64::consts::PI;

pub(crate) use grid_fn::read_table;
pub use grid_fn::{fmt_f64, GridFn, Interp, Shape, Side, UniformGrid};
pub use kernel::kernel_k;
pub(crate) use kernel::KernelQuad;

use crate::error::{Error, Result};
use crate::special_fn::gamma;
use weights::{AbelTable, WeightedMomentTable};

/// Constants bounding the operators for a fixed order α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpConstants {
    pub alpha: f64,
    /// Hölder constant of `I^α`: `2/Γ(α+1)`.
    pub h_i: f64,
    /// Norm bound of `R^α`: `sin(απ)/(απ)`.
    pub m_r: f64,
    /// Hölder constant of `J^α`: `(1 + M_R) H_I`.
    pub h_j: f64,
    /// Norm factor of `J^α`: `1 + M_R`.
    pub m_j: f64,
}

pub fn op_constants(alpha: f64) -> Result<OpConstants> {
    check_order(alpha)?;
    let h_i = 2.0 / gamma(alpha + 1.0)?;
    let m_r = (alpha * PI).sin() / (alpha * PI);
    Ok(OpConstants {
        alpha,
        h_i,
        m_r,
        h_j: (1.0 + m_r) * h_i,
        m_j: 1.0 + m_r,
    })
}

pub(crate) fn check_order(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "fractional order must lie in (0, 1), got {alpha}"
        )))
    }
}

fn check_resolved(phi: &GridFn) -> Result<()> {
    if phi.n_sub() == 0 && phi.a() < phi.b() {
        return Err(Error::grid("no subintervals on a non-degenerate interval"));
    }
    Ok(())
}

/// Applies a left-sided scalar operator, mirroring for the right side.
fn sided(phi: &GridFn, side: Side, op: impl Fn(&[f64], f64) -> Vec<f64>) -> Result<GridFn> {
    let h = phi.step();
    match side {
        Side::Left => phi.map_components(|c| op(c, h)),
        Side::Right => Ok(phi.mirrored().map_components(|c| op(c, h))?.mirrored()),
    }
}

/// Riemann-Liouville fractional integral `I^α_{a+}` or `I^α_{b-}`.
pub fn fractional_integral(phi: &GridFn, alpha: f64, side: Side) -> Result<GridFn> {
    check_order(alpha)?;
    check_resolved(phi)?;
    let table = AbelTable::new(phi.n_sub(), alpha);
    let scale_base = 1.0 / gamma(alpha)?;
    sided(phi, side, |values, h| {
        let scale = scale_base * h.powf(alpha);
        (0..values.len())
            .map(|i| scale * (0..=i).map(|k| table.weight(i, 0, k) * values[k]).sum::<f64>())
            .collect()
    })
}

/// L1 discretisation of the left Caputo derivative `ᶜD^α_{a+}`.
///
/// Node 0 carries the value of node 1.
pub fn caputo_derivative(x: &GridFn, alpha: f64) -> Result<GridFn> {
    check_order(alpha)?;
    let n = x.n_sub();
    if n == 0 {
        return Err(Error::grid("the Caputo derivative needs at least one subinterval"));
    }
    let h = x.step();
    let scale = h.powf(-alpha) / gamma(2.0 - alpha)?;
    let e = 1.0 - alpha;
    // b[d] = d^{1-α} - (d-1)^{1-α}
    let b: Vec<f64> = (0..=n)
        .map(|d| {
            if d == 0 {
                0.0
            } else {
                (d as f64).powf(e) - ((d - 1) as f64).powf(e)
            }
        })
        .collect();
    x.map_components(|v| {
        let mut out = vec![0.0; n + 1];
        for k in 1..=n {
            out[k] = scale * (0..k).map(|j| b[k - j] * (v[j + 1] - v[j])).sum::<f64>();
        }
        out[0] = out[1];
        out
    })
}

/// The operator `R^α` with kernel `K`.
pub fn r_operator(phi: &GridFn, alpha: f64, side: Side) -> Result<GridFn> {
    check_order(alpha)?;
    check_resolved(phi)?;
    let rows = KernelQuad::new(alpha).r_weight_rows(phi.n_sub());
    let c = (1.0 - alpha) * (alpha * PI).sin() / PI;
    // K is homogeneous of degree -1, so the weights do not depend on h
    sided(phi, side, |values, _h| {
        rows.iter()
            .enumerate()
            .map(|(i, row)| c * (0..=i).map(|k| row[k] * values[k]).sum::<f64>())
            .collect()
    })
}

/// `lim_{t→a+} (R 1)(t)`. `R` of a constant is constant on `(a, b]` while the node
/// `t = a` carries 0, so integrals of `Rφ` over the grid need this one-sided value there.
pub fn r_start_limit(alpha: f64) -> Result<f64> {
    check_order(alpha)?;
    let rows = KernelQuad::new(alpha).r_weight_rows(1);
    let c = (1.0 - alpha) * (alpha * PI).sin() / PI;
    Ok(c * rows[1].iter().sum::<f64>())
}

/// The operator `J^α`,`(J φ)(t) = (t-a)^{1-α}/Γ(α) ∫_a^t φ(τ) (t-τ)^{α-1} (τ-a)^{α-1} dτ`.
pub fn j_operator(phi: &GridFn, alpha: f64, side: Side) -> Result<GridFn> {
    check_order(alpha)?;
    check_resolved(phi)?;
    let table = WeightedMomentTable::new(phi.n_sub(), alpha - 1.0, alpha - 1.0);
    let g = gamma(alpha)?;
    sided(phi, side, |values, h| {
        (0..values.len())
            .map(|i| {
                if i == 0 {
                    return 0.0;
                }
                let scale = h.powf(alpha) * (i as f64).powf(1.0 - alpha) / g;
                scale * table.row(i).iter().zip(values).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect()
    })
}
