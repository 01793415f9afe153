//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! Run with `cargo test -p fracfund-core --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use fracfund::cauchy::{represent_gc, represent_pc, solve_direct, CauchyProblem, CoeffSpec, ForcingSpec, HistorySpec};
use fracfund::frac_ops::{GridFn, Shape, Side, UniformGrid};
use fracfund::fundamental::{bounds, solve_f, solve_g_dual, FundamentalField, TriangleGrid};
use fracfund::oracle::convergence_order;
use fracfund::special_fn::{gamma, MlParams};
use fracfund::verify::{
    b_star_constant_history, caputo_round_trip, constant_coeff_error, field_bound_ratio, field_holder_ratio,
    history_checks, j_identity_residual, ml_exp_error, ml_origin_error, operator_holder_ratios, r_bound_ratio,
    restart_problem, BOUND_SLACK,
};
use fracfund::Result;

const ALPHA: f64 = 0.5;

fn a0() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
}

fn rotation_problem() -> CauchyProblem {
    CauchyProblem::from_initial_value(
        ALPHA,
        0.0,
        1.0,
        CoeffSpec::Constant(a0()),
        ForcingSpec::Zero(2),
        DVector::zeros(2),
    )
    .unwrap()
}

/// `A(t) = A₀ cos 4t`, `b(t) = (sin t, 1)`, `w₀ = (1, 0)`.
fn cosine_problem() -> CauchyProblem {
    CauchyProblem::from_initial_value(
        ALPHA,
        0.0,
        1.0,
        CoeffSpec::Cosine { base: a0(), omega: 4.0 },
        ForcingSpec::Harmonic {
            constant: DVector::from_column_slice(&[0.0, 1.0]),
            sine: DVector::from_column_slice(&[1.0, 0.0]),
            cosine: DVector::zeros(2),
            omega: 1.0,
        },
        DVector::from_column_slice(&[1.0, 0.0]),
    )
    .unwrap()
}

/// Node closest to `t = 0.4` on `[0, 1]`; the same point for every `N` divisible by 1024/gcd.
fn restart_node(n: usize) -> usize {
    410 * n / 1024
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn field_on(problem: &CauchyProblem, n: usize) -> Result<FundamentalField> {
    solve_f(problem, &TriangleGrid::new(problem.t0, problem.theta, n)?)
}

fn criterion_1() -> Result<Outcome> {
    let p = rotation_problem();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("thread pool");
    let started = Instant::now();
    let f1024 = pool.install(|| field_on(&p, 1024))?;
    let secs = started.elapsed().as_secs_f64();
    let e1024 = constant_coeff_error(&f1024, &a0(), &[0])?;
    let f512 = field_on(&p, 512)?;
    let e512 = constant_coeff_error(&f512, &a0(), &[0])?;
    let f2048 = field_on(&p, 2048)?;
    let e2048 = constant_coeff_error(&f2048, &a0(), &[0])?;
    let ratio = e1024 / e2048;
    let order = convergence_order(&[(512, e512), (1024, e1024), (2048, e2048)])?;
    outcome(
        e1024 <= 5e-3 && ratio >= 1.3 && secs <= 60.0,
        format!(
            "err(1024) = {e1024:.3e} <= 5e-3, err(1024)/err(2048) = {ratio:.3} >= 1.3, single-thread time {secs:.1} s <= 60 s (observed order {order:.2})"
        ),
    )
}

fn criterion_2(field: &FundamentalField, problem: &CauchyProblem) -> Result<Outcome> {
    let dual = solve_g_dual(problem, field.grid())?;
    let d = field.max_distance(&dual)?;
    outcome(d <= 5e-3, format!("max ||F - G|| = {d:.3e} <= 5e-3"))
}

fn criterion_3(field: &FundamentalField, problem: &CauchyProblem, direct: &GridFn) -> Result<Outcome> {
    let pc = represent_pc(problem, field)?;
    let d = pc.x.max_distance(direct)?;
    outcome(d <= 5e-3, format!("max |repr-pc - direct| = {d:.3e} <= 5e-3"))
}

/// gc vs direct, compact vs gc, worst compact identity defect, for the restart at t ≈ 0.4.
fn restart_errors(
    problem: &CauchyProblem,
    n: usize,
    field: &FundamentalField,
    direct: &GridFn,
) -> Result<(f64, f64, f64)> {
    let restarted = restart_problem(problem, direct, restart_node(n))?;
    history_checks(&restarted, field, direct)
}

fn criterion_4(e512: (f64, f64, f64), e1024: (f64, f64, f64)) -> Result<Outcome> {
    outcome(
        e512.0 <= 1e-2 && e1024.0 < e512.0,
        format!(
            "t_star = {}: max |repr-gc - direct| = {:.3e} <= 1e-2 at N = 512, {:.3e} at N = 1024 (decreasing)",
            restart_node(512) as f64 / 512.0,
            e512.0,
            e1024.0
        ),
    )
}

fn criterion_5(e512: (f64, f64, f64)) -> Result<Outcome> {
    let (_, compact, identity) = e512;
    outcome(
        compact <= 5e-3 && identity <= 5e-3,
        format!("max |compact - gc| = {compact:.3e} <= 5e-3, identity defect at 8 nodes <= {identity:.3e} <= 5e-3"),
    )
}

fn criterion_6() -> Result<Outcome> {
    let mut worst_a: f64 = 0.0;
    for alpha in [0.3, 0.5, 0.7] {
        worst_a = worst_a.max(caputo_round_trip(alpha, 0.0, 1.0, 512)?);
    }
    let phi = GridFn::from_fn(0.0, 1.0, 512, Shape::Vector(1), |t| vec![(3.0 * t).cos()])?;
    let b = j_identity_residual(&phi, ALPHA)?;
    outcome(
        worst_a <= 1e-3 && b <= 1e-4,
        format!("(a) I(D x) - (x - x(a)) = {worst_a:.3e} <= 1e-3, (b) J phi - I(phi + R phi) = {b:.3e} <= 1e-4"),
    )
}

fn criterion_7(cases: &[(&str, &CauchyProblem, &FundamentalField)]) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (name, problem, field) in cases {
        let n = field.grid().n;
        let grid = UniformGrid::new(problem.t0, problem.theta, n)?;
        let phi = GridFn::from_fn(grid.a, grid.b, n, Shape::Vector(1), |t| vec![(3.0 * t).cos()])?;
        let b = problem.sample_b(&grid)?;
        let forcing = GridFn::new(grid.a, grid.b, Shape::Vector(problem.dim()), b)?;
        let mut r: f64 = 0.0;
        let mut h: f64 = 0.0;
        for f in [&phi, &forcing] {
            r = r.max(r_bound_ratio(f, problem.alpha, Side::Left)?);
            r = r.max(r_bound_ratio(f, problem.alpha, Side::Right)?);
            let (hi, hj) = operator_holder_ratios(f, problem.alpha)?;
            h = h.max(hi).max(hj);
        }
        let ap = bounds(problem, &grid)?;
        let mf = field_bound_ratio(field, &ap);
        let hf = field_holder_ratio(field, &ap);
        worst = worst.max(r).max(h).max(mf).max(hf);
        parts.push(format!(
            "{name}: R {r:.3}, Holder I/J {h:.3}, |F|/M_F {mf:.2e}, F Holder {hf:.2e}"
        ));
    }
    outcome(
        worst <= BOUND_SLACK,
        format!("largest ratio {worst:.3} <= {BOUND_SLACK} ({})", parts.join("; ")),
    )
}

fn criterion_8() -> Result<Outcome> {
    let e = ml_exp_error(MlParams::new(1.0, 1.0).tol)?;
    let o = ml_origin_error()?;
    outcome(
        e <= 1e-10 && o <= 4.0 * f64::EPSILON,
        format!("|E_1,1(z) - exp z| = {e:.3e} <= 1e-10 on 101 points, E(0) vs 1/Gamma(beta) rel. {o:.2e} <= 4 ulp"),
    )
}

fn criterion_9(cosine: &CauchyProblem, cosine_field: &FundamentalField) -> Result<Outcome> {
    let zero = CauchyProblem::from_initial_value(
        ALPHA,
        0.0,
        1.0,
        CoeffSpec::Zero(2),
        ForcingSpec::Constant(DVector::from_column_slice(&[1.0, 0.5])),
        DVector::from_column_slice(&[1.0, 0.0]),
    )?;
    let f = field_on(&zero, 256)?;
    let inv_g = 1.0 / gamma(ALPHA)?;
    let mut f_dev: f64 = 0.0;
    for i in 0..=256 {
        for j in 0..=i {
            for (k, v) in f.entry(i, j).iter().enumerate() {
                let id = if k % 3 == 0 { inv_g } else { 0.0 };
                f_dev = f_dev.max((v - id).abs());
            }
        }
    }

    // history held constant at w★ = (1, -2) on [0, 0.25]
    let held = CauchyProblem::new(
        ALPHA,
        0.0,
        1.0,
        cosine.coefficient.clone(),
        cosine.forcing.clone(),
        0.25,
        HistorySpec::Constant(DVector::from_column_slice(&[1.0, -2.0])),
    )?;
    let b_dev = b_star_constant_history(&held, 512)?;

    let pc = represent_pc(cosine, cosine_field)?;
    let gc = represent_gc(cosine, cosine_field)?;
    let mut pc_csv = Vec::new();
    let mut gc_csv = Vec::new();
    pc.x.write_csv(&mut pc_csv)?;
    gc.x.write_csv(&mut gc_csv)?;
    let identical = pc_csv == gc_csv;
    outcome(
        f_dev <= 1e-12 && b_dev <= 1e-12 && identical,
        format!(
            "A = 0: |F - Id/Gamma| = {f_dev:.1e} <= 1e-12; constant history: |b_star - b| = {b_dev:.1e} <= 1e-12; repr-gc CSV byte-identical to repr-pc: {identical}"
        ),
    )
}

fn report(index: usize, result: Result<Outcome>) -> bool {
    match result {
        Ok(o) => {
            println!(
                "criterion {index}: {} {}",
                if o.pass { "PASS" } else { "FAIL" },
                o.detail
            );
            o.pass
        }
        Err(e) => {
            println!("criterion {index}: FAIL error: {e}");
            false
        }
    }
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut ok = true;
    ok &= report(1, criterion_1());

    let cosine = cosine_problem();
    let rotation = rotation_problem();
    let setup = || -> Result<_> {
        let f512 = field_on(&cosine, 512)?;
        let f1024 = field_on(&cosine, 1024)?;
        let d512 = solve_direct(&cosine, 512)?.x;
        let d1024 = solve_direct(&cosine, 1024)?.x;
        let e512 = restart_errors(&cosine, 512, &f512, &d512)?;
        let e1024 = restart_errors(&cosine, 1024, &f1024, &d1024)?;
        let rot = field_on(&rotation, 512)?;
        Ok((f512, d512, e512, e1024, rot))
    };
    match setup() {
        Ok((f512, d512, e512, e1024, rot)) => {
            ok &= report(2, criterion_2(&f512, &cosine));
            ok &= report(3, criterion_3(&f512, &cosine, &d512));
            ok &= report(4, criterion_4(e512, e1024));
            ok &= report(5, criterion_5(e512));
            ok &= report(6, criterion_6());
            ok &= report(
                7,
                criterion_7(&[("rotation", &rotation, &rot), ("cosine", &cosine, &f512)]),
            );
            ok &= report(8, criterion_8());
            ok &= report(9, criterion_9(&cosine, &f512));
        }
        Err(e) => {
            for i in 2..=9 {
                println!("criterion {i}: FAIL setup error: {e}");
            }
            ok = false;
        }
    }
    println!(
        "acceptance: {} in {:.1} s",
        if ok { "all criteria pass" } else { "FAILURES" },
        started.elapsed().as_secs_f64()
    );
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
