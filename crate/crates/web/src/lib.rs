//! WebAssembly bindings for the demo page in `www/`.
//!
//! Every export returns a flat `Float64Array`; the `*_impl` functions hold the logic and
//! are tested natively.

// `!(x > 0.0)` also rejects NaN, which is the point
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use nalgebra::{DMatrix, DVector};
use wasm_bindgen::prelude::*;

use fracfund::cauchy::{
    represent_gc, represent_gc_compact, represent_pc, solve_direct, CauchyProblem, CoeffSpec, ForcingSpec, HistorySpec,
    Method,
};
use fracfund::fundamental::{solve_f, TriangleGrid};
use fracfund::special_fn::{mittag_leffler_scalar, MlParams};

const MAX_N: usize = 512;

fn check_n(n: usize) -> Result<(), String> {
    if (8..=MAX_N).contains(&n) {
        Ok(())
    } else {
        Err(format!("grid size must lie in [8, {MAX_N}], got {n}"))
    }
}

/// `[z_0, E(z_0), z_1, E(z_1), ...]` on `count` points of `[z_lo, z_hi]`; points where
/// the series fails are NaN.
pub fn mlf_curve_impl(alpha: f64, beta: f64, z_lo: f64, z_hi: f64, count: usize) -> Result<Vec<f64>, String> {
    let params = MlParams::new(alpha, beta);
    params.validate().map_err(|e| e.to_string())?;
    if count < 2 || !(z_lo < z_hi) {
        return Err("need at least two points on a non-empty interval".into());
    }
    Ok((0..count)
        .flat_map(|k| {
            let z = z_lo + (z_hi - z_lo) * k as f64 / (count - 1) as f64;
            [z, mittag_leffler_scalar(&params, z).unwrap_or(f64::NAN)]
        })
        .collect())
}

/// The damped oscillator `D^α x = [[0, ω], [-ω, -c]] x + (0, f)` on `[0, 1]` with
/// `x(0) = (1, 0)`, held at that value up to `t_star`.
fn oscillator(alpha: f64, omega: f64, damping: f64, force: f64, t_star: f64) -> Result<CauchyProblem, String> {
    let a = DMatrix::from_row_slice(2, 2, &[0.0, omega, -omega, -damping]);
    CauchyProblem::new(
        alpha,
        0.0,
        1.0,
        CoeffSpec::Constant(a),
        ForcingSpec::Constant(DVector::from_column_slice(&[0.0, force])),
        t_star,
        HistorySpec::Constant(DVector::from_column_slice(&[1.0, 0.0])),
    )
    .map_err(|e| e.to_string())
}

/// Rows `[t, x_1, x_2]` of the oscillator solved by `method`
/// (`direct`, `repr-pc`, `repr-gc` or `repr-gc-compact`).
#[allow(clippy::too_many_arguments)]
pub fn solve_impl(
    alpha: f64,
    omega: f64,
    damping: f64,
    force: f64,
    t_star: f64,
    n: usize,
    method: &str,
) -> Result<Vec<f64>, String> {
    check_n(n)?;
    let t_star = (t_star * n as f64).round() / n as f64;
    let p = oscillator(alpha, omega, damping, force, t_star)?;
    let method: Method = method.parse().map_err(|e: fracfund::Error| e.to_string())?;
    let field = || solve_f(&p, &TriangleGrid::new(0.0, 1.0, n).map_err(|e| e.to_string())?).map_err(|e| e.to_string());
    let sol = match method {
        Method::Direct => solve_direct(&p, n),
        Method::ReprPc => represent_pc(&p, &field()?),
        Method::ReprGc => represent_gc(&p, &field()?),
        Method::ReprGcCompact => represent_gc_compact(&p, &field()?),
    }
    .map_err(|e| e.to_string())?;
    Ok((0..=n)
        .flat_map(|i| [sol.x.t(i), sol.x.node(i)[0], sol.x.node(i)[1]])
        .collect())
}

/// `‖F(t_i, t_j)‖∞` of the oscillator field as an `(n+1) × (n+1)` row-major image,
/// NaN above the diagonal.
pub fn field_norms_impl(alpha: f64, omega: f64, damping: f64, n: usize) -> Result<Vec<f64>, String> {
    check_n(n)?;
    let p = oscillator(alpha, omega, damping, 0.0, 0.0)?;
    let field = solve_f(&p, &TriangleGrid::new(0.0, 1.0, n).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let mut out = vec![f64::NAN; (n + 1) * (n + 1)];
    for i in 0..=n {
        for j in 0..=i {
            let e = field.entry(i, j);
            out[i * (n + 1) + j] = (e[0].abs() + e[1].abs()).max(e[2].abs() + e[3].abs());
        }
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn mlf_curve(alpha: f64, beta: f64, z_lo: f64, z_hi: f64, count: usize) -> Result<Vec<f64>, JsError> {
    mlf_curve_impl(alpha, beta, z_lo, z_hi, count).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn solve(
    alpha: f64,
    omega: f64,
    damping: f64,
    force: f64,
    t_star: f64,
    n: usize,
    method: &str,
) -> Result<Vec<f64>, JsError> {
    solve_impl(alpha, omega, damping, force, t_star, n, method).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn field_norms(alpha: f64, omega: f64, damping: f64, n: usize) -> Result<Vec<f64>, JsError> {
    field_norms_impl(alpha, omega, damping, n).map_err(|e| JsError::new(&e))
}
