use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frac_ops::weights::AbelTable;
use crate::frac_ops::{GridFn, Shape, UniformGrid};
use crate::linalg::{identity_flat, solve_left, vec_norm_inf};
use crate::special_fn::gamma;

use super::problem::{CauchyProblem, ResolvedHistory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Direct,
    ReprPc,
    ReprGc,
    ReprGcCompact,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Direct, Method::ReprPc, Method::ReprGc, Method::ReprGcCompact];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::ReprPc => "repr-pc",
            Method::ReprGc => "repr-gc",
            Method::ReprGcCompact => "repr-gc-compact",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::spec(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveMetadata {
    pub method: Method,
    pub grid_n: usize,
    pub wall_time_s: f64,
    /// Max residual of the solution in the discretised integral equation.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    /// `x` on `[t₀, ϑ]`.
    pub x: GridFn,
    pub method: Method,
    pub metadata: SolveMetadata,
}

impl Solution {
    pub(crate) fn finish(problem: &CauchyProblem, x: GridFn, method: Method, started: Instant) -> Result<Self> {
        let residual = integral_equation_residual(problem, &x)?;
        let grid_n = x.n_sub();
        Ok(Self {
            x,
            method,
            metadata: SolveMetadata {
                method,
                grid_n,
                wall_time_s: started.elapsed().as_secs_f64(),
                residual,
            },
        })
    }
}

/// The history term `w★(t₀) + 1/Γ(α) ∫_{t₀}^{t★} ᶜD^α w★ (t-τ)^{α-1} dτ` at node `i`.
pub(crate) fn history_term(hist: &ResolvedHistory, abel: &AbelTable, scale: f64, i: usize) -> Vec<f64> {
    let mut acc = hist.w.node(0).to_vec();
    for k in 0..=hist.i_star {
        let wk = abel.partial_weight(i, 0, hist.i_star, k) * scale;
        if wk != 0.0 {
            for (a, v) in acc.iter_mut().zip(hist.caputo.node(k)) {
                *a += wk * v;
            }
        }
    }
    acc
}

fn check_solution_grid(problem: &CauchyProblem, x: &GridFn) -> Result<UniformGrid> {
    let grid = problem.grid(x.n_sub())?;
    let tol = 1e-12 * (problem.theta - problem.t0).abs().max(1.0);
    if (x.a() - grid.a).abs() > tol || (x.b() - grid.b).abs() > tol || x.shape() != Shape::Vector(problem.dim()) {
        return Err(Error::grid("solution does not live on the problem's grid"));
    }
    Ok(grid)
}

/// Product-integration march of `x = w★(t₀) + I^α(ᶜD^α w★ on [t₀,t★]) + I^α(A x + b on [t★, t])`.
pub fn solve_direct(problem: &CauchyProblem, n: usize) -> Result<Solution> {
    let started = Instant::now();
    let grid = problem.grid(n)?;
    let hist = problem.resolve_history(&grid)?;
    let dim = problem.dim();
    let alpha = problem.alpha;
    let a = problem.sample_a(&grid)?;
    let b = problem.sample_b(&grid)?;
    let abel = AbelTable::new(n, alpha);
    let scale = grid.step().powf(alpha) / gamma(alpha)?;
    let i_star = hist.i_star;

    let mut x = vec![0.0; (n + 1) * dim];
    x[..(i_star + 1) * dim].copy_from_slice(hist.w.data());
    // f_k = A_k x_k + b_k for k ≥ i_star
    let mut f = vec![0.0; (n + 1) * dim];
    let w2 = dim * dim;
    let apply = |k: usize, x: &[f64], f: &mut [f64]| {
        let ak = &a[k * w2..(k + 1) * w2];
        for r in 0..dim {
            let mut s = b[k * dim + r];
            for c in 0..dim {
                s += ak[r * dim + c] * x[k * dim + c];
            }
            f[k * dim + r] = s;
        }
    };
    apply(i_star, &x, &mut f);
    let id = identity_flat(dim);
    let mut sys = vec![0.0; w2];
    for i in i_star + 1..=n {
        let mut rhs = history_term(&hist, &abel, scale, i);
        for k in i_star..i {
            let wk = abel.weight(i, i_star, k) * scale;
            for (r, v) in rhs.iter_mut().zip(&f[k * dim..(k + 1) * dim]) {
                *r += wk * v;
            }
        }
        let self_weight = abel.weight(i, i_star, i) * scale;
        for (r, v) in rhs.iter_mut().zip(&b[i * dim..(i + 1) * dim]) {
            *r += self_weight * v;
        }
        let ai = &a[i * w2..(i + 1) * w2];
        for ((s, e), av) in sys.iter_mut().zip(&id).zip(ai) {
            *s = e - self_weight * av;
        }
        let xi = solve_left(&sys, &rhs, dim, 1).ok_or(Error::SingularSystem { row: i, col: i_star })?;
        x[i * dim..(i + 1) * dim].copy_from_slice(&xi);
        apply(i, &x, &mut f);
    }
    let x = GridFn::new(grid.a, grid.b, Shape::Vector(dim), x)?;
    Solution::finish(problem, x, Method::Direct, started)
}

/// Largest node residual of `x` in the discretised integral equation; zero on the history nodes
/// by construction, so those are compared with `w★` instead.
pub fn integral_equation_residual(problem: &CauchyProblem, x: &GridFn) -> Result<f64> {
    let grid = check_solution_grid(problem, x)?;
    let n = grid.n;
    let hist = problem.resolve_history(&grid)?;
    let dim = problem.dim();
    let alpha = problem.alpha;
    let abel = AbelTable::new(n, alpha);
    let scale = grid.step().powf(alpha) / gamma(alpha)?;
    let i_star = hist.i_star;
    let mut worst: f64 = 0.0;
    for i in 0..=i_star {
        let d: Vec<f64> = x.node(i).iter().zip(hist.w.node(i)).map(|(p, q)| p - q).collect();
        worst = worst.max(vec_norm_inf(&d));
    }
    let mut f = vec![0.0; (n + 1) * dim];
    for k in i_star..=n {
        let t = grid.t(k);
        let ak = problem.a_at(t)?;
        let bk = problem.b_at(t)?;
        for r in 0..dim {
            f[k * dim + r] = bk[r] + (0..dim).map(|c| ak[r * dim + c] * x.node(k)[c]).sum::<f64>();
        }
    }
    for i in i_star + 1..=n {
        let mut rhs = history_term(&hist, &abel, scale, i);
        for k in i_star..=i {
            let wk = abel.weight(i, i_star, k) * scale;
            for (r, v) in rhs.iter_mut().zip(&f[k * dim..(k + 1) * dim]) {
                *r += wk * v;
            }
        }
        let d: Vec<f64> = x.node(i).iter().zip(&rhs).map(|(p, q)| p - q).collect();
        worst = worst.max(vec_norm_inf(&d));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cauchy::{CoeffSpec, ForcingSpec, HistorySpec};
    use crate::special_fn::{mittag_leffler_scalar, MlParams};
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("euler".parse::<Method>().is_err());
    }

    #[test]
    fn zero_dynamics_keep_the_initial_value() {
        let p = CauchyProblem::from_initial_value(
            0.5,
            0.0,
            1.0,
            CoeffSpec::Zero(2),
            ForcingSpec::Zero(2),
            DVector::from_column_slice(&[1.0, -2.0]),
        )
        .unwrap();
        let s = solve_direct(&p, 16).unwrap();
        for i in 0..=16 {
            assert_eq!(s.x.node(i), &[1.0, -2.0]);
        }
        assert_eq!(s.metadata.residual, 0.0);
    }

    #[test]
    fn unit_forcing_is_integrated_exactly() {
        let alpha = 0.7;
        let p = CauchyProblem::from_initial_value(
            alpha,
            0.0,
            1.0,
            CoeffSpec::Zero(1),
            ForcingSpec::Constant(DVector::from_element(1, 1.0)),
            DVector::from_element(1, 0.5),
        )
        .unwrap();
        let s = solve_direct(&p, 32).unwrap();
        for i in 0..=32 {
            let t = s.x.t(i);
            let exact = 0.5 + t.powf(alpha) / gamma(alpha + 1.0).unwrap();
            assert!((s.x.node(i)[0] - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn scalar_relaxation_matches_mittag_leffler() {
        let alpha = 0.6;
        let lambda = -1.5;
        let p = CauchyProblem::from_initial_value(
            alpha,
            0.0,
            1.0,
            CoeffSpec::Constant(DMatrix::from_element(1, 1, lambda)),
            ForcingSpec::Zero(1),
            DVector::from_element(1, 1.0),
        )
        .unwrap();
        let s = solve_direct(&p, 256).unwrap();
        let ml = MlParams::new(alpha, 1.0);
        for i in (0..=256).step_by(16) {
            let t = s.x.t(i);
            let exact = mittag_leffler_scalar(&ml, lambda * t.powf(alpha)).unwrap();
            assert!((s.x.node(i)[0] - exact).abs() < 5e-3);
        }
        assert!(s.metadata.residual < 1e-13);
    }

    #[test]
    fn history_prefix_is_copied() {
        let w = GridFn::from_fn(0.0, 0.25, 4, Shape::Vector(1), |t| vec![1.0 + t]).unwrap();
        let p = CauchyProblem::new(
            0.5,
            0.0,
            1.0,
            CoeffSpec::Constant(DMatrix::from_element(1, 1, -1.0)),
            ForcingSpec::Zero(1),
            0.25,
            HistorySpec::Samples {
                w: w.clone(),
                caputo: None,
            },
        )
        .unwrap();
        let s = solve_direct(&p, 16).unwrap();
        for i in 0..=4 {
            assert_eq!(s.x.node(i), w.node(i));
        }
    }
}
