//! Solutions assembled from the fundamental matrix.
//!
//! For `t > t★`, with `F` read off a precomputed field on the same grid:
//!
//! ```text
//! x(t) = (Id + ∫_{t★}^t F(t,τ) A(τ) (t-τ)^{α-1} dτ) w★(t★) + ∫_{t★}^t F(t,τ) b★(τ) (t-τ)^{α-1} dτ
//! ```
//!
//! where `b★ = b + (ψ★(τ) - ψ★(t★)) (τ - t★)^{-α}`. The `(τ - t★)^{-α}` part is
//! integrated with doubly weighted moments so the singularity is exact.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frac_ops::weights::{AbelTable, WeightedMomentTable};
use crate::frac_ops::{caputo_derivative, GridFn, Shape, UniformGrid};
use crate::fundamental::FundamentalField;
use crate::linalg::{flat_norm_inf, identity_flat};
use crate::special_fn::gamma;

use super::history::{psi_star, weighted_history_integral};
use super::problem::CauchyProblem;
use super::solve::{Method, Solution};

struct Assembly<'a> {
    field: &'a FundamentalField,
    dim: usize,
    i_star: usize,
    n: usize,
    /// `A` and `b` at every node.
    a: Vec<f64>,
    b: Vec<f64>,
    abel: AbelTable,
    abel_scale: f64,
}

impl<'a> Assembly<'a> {
    fn new(problem: &CauchyProblem, field: &'a FundamentalField) -> Result<(Self, UniformGrid)> {
        let fg = field.grid();
        let tol = 1e-12 * (problem.theta - problem.t0).abs().max(1.0);
        if (fg.t0 - problem.t0).abs() > tol || (fg.theta - problem.theta).abs() > tol {
            return Err(Error::grid("the field's triangle does not match the problem interval"));
        }
        if field.dim() != problem.dim() {
            return Err(Error::grid("the field's dimension does not match the problem"));
        }
        if (field.alpha() - problem.alpha).abs() > 1e-15 {
            return Err(Error::grid("the field was computed for a different order"));
        }
        let grid = problem.grid(fg.n)?;
        let i_star = problem.star_index(&grid)?;
        Ok((
            Self {
                field,
                dim: problem.dim(),
                i_star,
                n: grid.n,
                a: problem.sample_a(&grid)?,
                b: problem.sample_b(&grid)?,
                abel: AbelTable::new(grid.n, problem.alpha),
                abel_scale: grid.step().powf(problem.alpha),
            },
            grid,
        ))
    }

    /// `F(tᵢ, t_k) v`.
    fn f_times(&self, i: usize, k: usize, v: &[f64], out: &mut [f64]) {
        let d = self.dim;
        let f = self.field.entry(i, k);
        for r in 0..d {
            out[r] = (0..d).map(|c| f[r * d + c] * v[c]).sum();
        }
    }

    /// `w + ∫_{t★}^{tᵢ} F(tᵢ,τ) (A(τ) w + b(τ) - shift) (t-τ)^{α-1} dτ`.
    fn base_term(&self, i: usize, w: &[f64], shift: Option<&[f64]>) -> Vec<f64> {
        let d = self.dim;
        let mut acc = w.to_vec();
        let mut g = vec![0.0; d];
        let mut fg = vec![0.0; d];
        for k in self.i_star..=i {
            let wk = self.abel.weight(i, self.i_star, k) * self.abel_scale;
            let ak = &self.a[k * d * d..(k + 1) * d * d];
            for r in 0..d {
                g[r] = self.b[k * d + r] + (0..d).map(|c| ak[r * d + c] * w[c]).sum::<f64>();
            }
            if let Some(shift) = shift {
                g.iter_mut().zip(shift).for_each(|(g, s)| *g -= s);
            }
            self.f_times(i, k, &g, &mut fg);
            for (a, v) in acc.iter_mut().zip(&fg) {
                *a += wk * v;
            }
        }
        acc
    }

    /// `scale ∫_{t★}^{tᵢ} F(tᵢ,τ) u(τ) (τ-t★)^{-α} (t-τ)^{α-1} dτ` for `u` sampled at nodes `i★..`.
    fn weighted_term(&self, table: &WeightedMomentTable, i: usize, u: &GridFn, scale: f64, acc: &mut [f64]) {
        let m = i - self.i_star;
        let row = table.row(m);
        let mut fu = vec![0.0; self.dim];
        for (k, wk) in row.iter().enumerate() {
            self.f_times(i, self.i_star + k, u.node(k), &mut fu);
            for (a, v) in acc.iter_mut().zip(&fu) {
                *a += scale * wk * v;
            }
        }
    }

    fn assemble(
        &self,
        prefix: &GridFn,
        grid: &UniformGrid,
        node: impl Fn(usize) -> Vec<f64> + Sync + Send,
    ) -> Result<GridFn> {
        let tail: Vec<Vec<f64>> = (self.i_star + 1..=self.n).into_par_iter().map(node).collect();
        let mut data = prefix.data().to_vec();
        for v in tail {
            data.extend(v);
        }
        GridFn::new(grid.a, grid.b, Shape::Vector(self.dim), data)
    }
}

fn pc_solution(
    problem: &CauchyProblem,
    field: &FundamentalField,
    method: Method,
    started: Instant,
) -> Result<Solution> {
    let (asm, grid) = Assembly::new(problem, field)?;
    let w0 = problem.w_initial();
    let prefix = GridFn::new(grid.a, grid.a, Shape::Vector(asm.dim), w0.clone())?;
    let x = asm.assemble(&prefix, &grid, |i| asm.base_term(i, &w0, None))?;
    Solution::finish(problem, x, method, started)
}

/// Solution formula for an initial value at `t₀` (requires `t★ = t₀`).
pub fn represent_pc(problem: &CauchyProblem, field: &FundamentalField) -> Result<Solution> {
    if problem.t_star != problem.t0 {
        return Err(Error::Precondition(format!(
            "this formula needs t_star = t0, got t_star = {} > t0 = {}",
            problem.t_star, problem.t0
        )));
    }
    pc_solution(problem, field, Method::ReprPc, Instant::now())
}

/// Solution formula for a history on `[t₀, t★]`, through `ψ★` and `b★`.
pub fn represent_gc(problem: &CauchyProblem, field: &FundamentalField) -> Result<Solution> {
    let started = Instant::now();
    if problem.t_star == problem.t0 {
        return pc_solution(problem, field, Method::ReprGc, started);
    }
    let (asm, grid) = Assembly::new(problem, field)?;
    let hist = problem.resolve_history(&grid)?;
    let target = UniformGrid::new(grid.t(asm.i_star), grid.b, grid.n - asm.i_star)?;
    let psi = psi_star(&hist.caputo, problem.alpha, &target)?;
    // ψ★(t) - ψ★(t★) = -φ(t★) (t - t★)^α + O(t - t★): the leading term goes into the
    // smooth integral exactly and only the remainder is interpolated
    let phi_star = hist.caputo.node(asm.i_star).to_vec();
    let base = psi.node(0).to_vec();
    let mut shifted = psi.clone();
    for k in 0..=target.n {
        let lead = (target.t(k) - target.a).powf(problem.alpha);
        for ((v, b), p) in shifted.node_mut(k).iter_mut().zip(&base).zip(&phi_star) {
            *v += p * lead - b;
        }
    }
    let table = WeightedMomentTable::new(target.n, -problem.alpha, problem.alpha - 1.0);
    let w_star = hist.w.node(asm.i_star).to_vec();
    let x = asm.assemble(&hist.w, &grid, |i| {
        let mut acc = asm.base_term(i, &w_star, Some(&phi_star));
        asm.weighted_term(&table, i, &shifted, 1.0, &mut acc);
        acc
    })?;
    Solution::finish(problem, x, Method::ReprGc, started)
}

/// The compact form, with `w★(t₀)` in the first term and the history entering
/// through `∫ (w★(ξ) - w★(t₀)) (τ - ξ)^{-1-α} dξ`. The node at `t★` comes from the
/// initial condition, since the middle term does not vanish as `t ↓ t★`.
pub fn represent_gc_compact(problem: &CauchyProblem, field: &FundamentalField) -> Result<Solution> {
    let started = Instant::now();
    if problem.t_star == problem.t0 {
        return pc_solution(problem, field, Method::ReprGcCompact, started);
    }
    let alpha = problem.alpha;
    let (asm, grid) = Assembly::new(problem, field)?;
    let hist = problem.resolve_history(&grid)?;
    let target = UniformGrid::new(grid.t(asm.i_star), grid.b, grid.n - asm.i_star)?;
    let mut weighted = weighted_history_integral(&hist.w, alpha, &target)?;
    // the weighted integral of the piecewise-linear history starts like
    // (w(t★) - w(t₀))/α - Γ(1-α)/α · D(t★) (t - t★)^α with D its L1 Caputo value at t★
    let lead = caputo_derivative(&hist.w, alpha)?.node(asm.i_star).to_vec();
    let g = gamma(1.0 - alpha)?;
    for k in 0..=target.n {
        let s = (target.t(k) - target.a).powf(alpha) * g / alpha;
        for (v, d) in weighted.node_mut(k).iter_mut().zip(&lead) {
            *v += d * s;
        }
    }
    let table = WeightedMomentTable::new(target.n, -alpha, alpha - 1.0);
    let scale = alpha / g;
    let w0 = hist.w.node(0).to_vec();
    let x = asm.assemble(&hist.w, &grid, |i| {
        let mut acc = asm.base_term(i, &w0, Some(&lead));
        asm.weighted_term(&table, i, &weighted, scale, &mut acc);
        acc
    })?;
    Solution::finish(problem, x, Method::ReprGcCompact, started)
}

/// Defect of `Id + ∫ F A (t-τ)^{α-1} dτ = 1/Γ(1-α) ∫ F (t-τ)^{α-1} (τ-t★)^{-α} dτ`
/// (integrals over `[t★, tᵢ]`) at each requested node `i > i★`, in the induced norm.
pub fn compact_identity_defect(problem: &CauchyProblem, field: &FundamentalField, nodes: &[usize]) -> Result<Vec<f64>> {
    let (asm, grid) = Assembly::new(problem, field)?;
    let d = asm.dim;
    let w = d * d;
    let table = WeightedMomentTable::new(grid.n - asm.i_star, -problem.alpha, problem.alpha - 1.0);
    let inv_g = 1.0 / gamma(1.0 - problem.alpha)?;
    nodes
        .iter()
        .map(|&i| {
            if i <= asm.i_star || i > asm.n {
                return Err(Error::domain(format!("node {i} is not in (t_star, theta]")));
            }
            let mut lhs = identity_flat(d);
            for k in asm.i_star..=i {
                let wk = asm.abel.weight(i, asm.i_star, k) * asm.abel_scale;
                let f = field.entry(i, k);
                let ak = &asm.a[k * w..(k + 1) * w];
                for r in 0..d {
                    for c in 0..d {
                        lhs[r * d + c] += wk * (0..d).map(|l| f[r * d + l] * ak[l * d + c]).sum::<f64>();
                    }
                }
            }
            let row = table.row(i - asm.i_star);
            for (k, wk) in row.iter().enumerate() {
                let f = field.entry(i, asm.i_star + k);
                for (l, v) in lhs.iter_mut().zip(f) {
                    *l -= inv_g * wk * v;
                }
            }
            Ok(flat_norm_inf(&lhs, d))
        })
        .collect()
}
