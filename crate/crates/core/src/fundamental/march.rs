//! Product-integration solvers for `F` and `G`.
//!
//! With `s = tⱼ`, `t = tᵢ`, `m = i - j` and `τ = s + h v`,
//!
//! ```text
//! F(tᵢ, tⱼ) = Id/Γ(α) + c_m Σ_k W[m][k] A(t_{j+k}) F(t_{j+k}, tⱼ),   c_m = h^α m^{1-α}/Γ(α),
//! ```
//!
//! where `W[m][k]` are the hat moments of `v^{α-1} (m-v)^{α-1}` on `[0, m]`. The
//! last term (`k = m`) involves the unknown, so every step solves an `n x n`
//! system. The dual equation has the unknown at `k = 0` instead and is marched
//! backwards in `s` for each fixed `t`.

use rayon::prelude::*;

use super::bounds::bounds;
use super::field::{FundamentalField, TriangleGrid};
use crate::cauchy::CauchyProblem;
use crate::error::{Error, Result};
use crate::frac_ops::weights::WeightedMomentTable;
use crate::frac_ops::{GridFn, Shape};
use crate::linalg::{axpy, flat_norm_inf, identity_flat, mat_mul_into, solve_left, solve_right};
use crate::special_fn::gamma;

struct March {
    n: usize,
    steps: usize,
    h_alpha: f64,
    alpha: f64,
    inv_gamma: f64,
    /// `A(tᵢ)` for every node, flat.
    a: Vec<f64>,
    table: WeightedMomentTable,
}

impl March {
    fn new(problem: &CauchyProblem, grid: &TriangleGrid) -> Result<Self> {
        check_grid(problem, grid)?;
        let alpha = problem.alpha;
        Ok(Self {
            n: problem.dim(),
            steps: grid.n,
            h_alpha: grid.step().powf(alpha),
            alpha,
            inv_gamma: 1.0 / gamma(alpha)?,
            a: problem.sample_a(&grid.line())?,
            table: WeightedMomentTable::new(grid.n, alpha - 1.0, alpha - 1.0),
        })
    }

    fn a_at(&self, i: usize) -> &[f64] {
        let w = self.n * self.n;
        &self.a[i * w..(i + 1) * w]
    }

    fn coeff(&self, m: usize) -> f64 {
        self.h_alpha * (m as f64).powf(1.0 - self.alpha) * self.inv_gamma
    }

    fn diag(&self) -> Vec<f64> {
        let mut d = identity_flat(self.n);
        d.iter_mut().for_each(|v| *v *= self.inv_gamma);
        d
    }

    /// `F(t_{j+m}, tⱼ)` for `m = 0..=N-j`, concatenated.
    fn column(&self, j: usize) -> Result<Vec<f64>> {
        let n = self.n;
        let w = n * n;
        let len = self.steps - j + 1;
        let diag = self.diag();
        let mut col = Vec::with_capacity(len * w);
        col.extend_from_slice(&diag);
        // products A(t_{j+k}) F(t_{j+k}, tⱼ)
        let mut prod = vec![0.0; len * w];
        mat_mul_into(self.a_at(j), &diag, &mut prod[..w], n, n);
        let mut rhs = vec![0.0; w];
        let mut sys = vec![0.0; w];
        for m in 1..len {
            let i = j + m;
            let c = self.coeff(m);
            let row = self.table.row(m);
            rhs.fill(0.0);
            for k in 0..m {
                axpy(&mut rhs, row[k], &prod[k * w..(k + 1) * w]);
            }
            for (r, d) in rhs.iter_mut().zip(&diag) {
                *r = d + c * *r;
            }
            let self_weight = c * row[m];
            let a_i = self.a_at(i);
            for (s, (id, a)) in sys.iter_mut().zip(identity_flat(n).iter().zip(a_i)) {
                *s = id - self_weight * a;
            }
            let f = solve_left(&sys, &rhs, n, n).ok_or(Error::SingularSystem { row: i, col: j })?;
            mat_mul_into(a_i, &f, &mut prod[m * w..(m + 1) * w], n, n);
            col.extend_from_slice(&f);
        }
        Ok(col)
    }

    /// `G(tᵢ, tⱼ)` for `j = 0..=i`, concatenated.
    fn dual_row(&self, i: usize) -> Result<Vec<f64>> {
        let n = self.n;
        let w = n * n;
        let diag = self.diag();
        let mut row_vals = vec![0.0; (i + 1) * w];
        row_vals[i * w..].copy_from_slice(&diag);
        // products G(tᵢ, t_l) A(t_l)
        let mut prod = vec![0.0; (i + 1) * w];
        mat_mul_into(&diag, self.a_at(i), &mut prod[i * w..], n, n);
        let mut rhs = vec![0.0; w];
        let mut sys = vec![0.0; w];
        for j in (0..i).rev() {
            let m = i - j;
            let c = self.coeff(m);
            let weights = self.table.row(m);
            rhs.fill(0.0);
            for (k, &wk) in weights.iter().enumerate().take(m + 1).skip(1) {
                let l = j + k;
                axpy(&mut rhs, wk, &prod[l * w..(l + 1) * w]);
            }
            for (r, d) in rhs.iter_mut().zip(&diag) {
                *r = d + c * *r;
            }
            let self_weight = c * weights[0];
            let a_j = self.a_at(j);
            for (s, (id, a)) in sys.iter_mut().zip(identity_flat(n).iter().zip(a_j)) {
                *s = id - self_weight * a;
            }
            let g = solve_right(&sys, &rhs, n).ok_or(Error::SingularSystem { row: i, col: j })?;
            mat_mul_into(&g, a_j, &mut prod[j * w..(j + 1) * w], n, n);
            row_vals[j * w..(j + 1) * w].copy_from_slice(&g);
        }
        Ok(row_vals)
    }

    /// One explicit application of the discrete fixed-point map to a column.
    fn apply_map(&self, j: usize, phi: &[f64], out: &mut [f64]) {
        let n = self.n;
        let w = n * n;
        let len = phi.len() / w;
        let diag = self.diag();
        let mut prod = vec![0.0; len * w];
        for k in 0..len {
            mat_mul_into(
                self.a_at(j + k),
                &phi[k * w..(k + 1) * w],
                &mut prod[k * w..(k + 1) * w],
                n,
                n,
            );
        }
        out[..w].copy_from_slice(&diag);
        for m in 1..len {
            let c = self.coeff(m);
            let row = self.table.row(m);
            let dst = &mut out[m * w..(m + 1) * w];
            dst.fill(0.0);
            for k in 0..=m {
                axpy(dst, row[k], &prod[k * w..(k + 1) * w]);
            }
            for (r, d) in dst.iter_mut().zip(&diag) {
                *r = d + c * *r;
            }
        }
    }
}

fn check_grid(problem: &CauchyProblem, grid: &TriangleGrid) -> Result<()> {
    let tol = 1e-12 * (problem.theta - problem.t0).abs().max(1.0);
    if (grid.t0 - problem.t0).abs() > tol || (grid.theta - problem.theta).abs() > tol {
        return Err(Error::grid(format!(
            "triangle [{}, {}] does not match the problem interval [{}, {}]",
            grid.t0, grid.theta, problem.t0, problem.theta
        )));
    }
    Ok(())
}

/// Marches every column `s = tⱼ` of the triangle, columns in parallel.
pub fn solve_f(problem: &CauchyProblem, grid: &TriangleGrid) -> Result<FundamentalField> {
    let march = March::new(problem, grid)?;
    let columns = (0..=grid.n)
        .into_par_iter()
        .map(|j| march.column(j))
        .collect::<Result<Vec<_>>>()?;
    Ok(FundamentalField::from_columns(*grid, problem.alpha, march.n, &columns))
}

/// `t ↦ F(t, tⱼ)` on `[tⱼ, ϑ]`.
pub fn solve_f_column(problem: &CauchyProblem, grid: &TriangleGrid, j: usize) -> Result<GridFn> {
    if j > grid.n {
        return Err(Error::domain(format!("column {j} outside 0..={}", grid.n)));
    }
    let march = March::new(problem, grid)?;
    let col = march.column(j)?;
    GridFn::new(grid.t(j), grid.theta, Shape::Matrix(march.n), col)
}

/// Marches every row `t = tᵢ` of the dual equation backwards in `s`, rows in parallel.
pub fn solve_g_dual(problem: &CauchyProblem, grid: &TriangleGrid) -> Result<FundamentalField> {
    let march = March::new(problem, grid)?;
    let rows = (0..=grid.n)
        .into_par_iter()
        .map(|i| march.dual_row(i))
        .collect::<Result<Vec<_>>>()?;
    Ok(FundamentalField::from_rows(*grid, problem.alpha, march.n, rows))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardStats {
    /// Largest iteration count over all columns.
    pub iterations: usize,
    /// Largest weighted-norm distance between the first two iterates.
    pub initial_residual: f64,
    /// Largest weighted-norm distance between the last two iterates.
    pub final_residual: f64,
}

/// Fixed-point iteration from `F ≡ Id/Γ(α)`, stopped when successive iterates are
/// within `tol` both in the weighted norm `max ‖φ(t)‖ e^{-(t-s)κ}` and in the plain
/// max norm.
pub fn solve_f_picard(
    problem: &CauchyProblem,
    grid: &TriangleGrid,
    max_iter: usize,
    tol: f64,
) -> Result<(FundamentalField, PicardStats)> {
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::domain("Picard iteration needs tol > 0 and max_iter ≥ 1"));
    }
    let march = March::new(problem, grid)?;
    let kappa = bounds(problem, &grid.line())?.kappa;
    let n = march.n;
    let w = n * n;
    let h = grid.step();
    let results = (0..=grid.n)
        .into_par_iter()
        .map(|j| -> Result<(Vec<f64>, usize, f64, f64)> {
            let len = grid.n - j + 1;
            let diag = march.diag();
            let mut phi: Vec<f64> = (0..len).flat_map(|_| diag.iter().copied()).collect();
            let mut next = vec![0.0; len * w];
            let mut first = None;
            for iter in 1..=max_iter {
                march.apply_map(j, &phi, &mut next);
                let (mut dist, mut plain) = (0.0f64, 0.0f64);
                for m in 0..len {
                    let d: Vec<f64> = next[m * w..(m + 1) * w]
                        .iter()
                        .zip(&phi[m * w..(m + 1) * w])
                        .map(|(a, b)| a - b)
                        .collect();
                    let norm = flat_norm_inf(&d, n);
                    plain = plain.max(norm);
                    dist = dist.max(norm * (-(m as f64) * h * kappa).exp());
                }
                let first_dist = *first.get_or_insert(dist);
                std::mem::swap(&mut phi, &mut next);
                // the weighted norm discounts late times by up to e^{-(ϑ-s)κ}, so the
                // plain max norm is required to settle as well
                if dist <= tol && plain <= tol {
                    return Ok((phi, iter, first_dist, dist));
                }
                if iter == max_iter {
                    return Err(Error::NonConvergence {
                        what: "Picard iteration",
                        iterations: iter,
                        residual: dist,
                    });
                }
            }
            unreachable!("loop returns on its last iteration")
        })
        .collect::<Result<Vec<_>>>()?;
    let mut stats = PicardStats {
        iterations: 0,
        initial_residual: 0.0,
        final_residual: 0.0,
    };
    let mut columns = Vec::with_capacity(results.len());
    for (col, it, first, last) in results {
        stats.iterations = stats.iterations.max(it);
        stats.initial_residual = stats.initial_residual.max(first);
        stats.final_residual = stats.final_residual.max(last);
        columns.push(col);
    }
    Ok((FundamentalField::from_columns(*grid, problem.alpha, n, &columns), stats))
}
