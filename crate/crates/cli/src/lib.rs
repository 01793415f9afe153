//! The `fracfund` commands, separated from argument parsing so they can be driven from tests.

// `!(x > 0.0)` also rejects NaN, which is the point
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use fracfund::cauchy::{represent_gc, represent_gc_compact, represent_pc, solve_direct, Method, SolveMetadata};
use fracfund::fundamental::{solve_f, solve_f_picard, FundamentalField, TriangleGrid};
use fracfund::special_fn::{mittag_leffler_scalar, MlParams};
use fracfund::verify::{run_suite, SuiteOptions, VerificationReport};

use config::{FieldSolver, LoadedConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_PRECONDITION: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Precondition(String),
    #[error("{0}")]
    Numerical(String),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Precondition(_) => EXIT_PRECONDITION,
            CliError::Numerical(_) | CliError::Output { .. } => EXIT_NUMERICAL,
        }
    }
}

/// Errors raised after the config was accepted.
impl From<fracfund::Error> for CliError {
    fn from(e: fracfund::Error) -> Self {
        match e {
            fracfund::Error::Precondition(m) => CliError::Precondition(m),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

/// Writes the whole file at once, so that a failed run leaves nothing behind.
fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("report types serialise");
    out.push(b'\n');
    out
}

/// Path of the metadata file written next to a solution CSV.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    out.with_file_name(name)
}

pub fn compute_field(cfg: &LoadedConfig) -> Result<FundamentalField, CliError> {
    let p = &cfg.problem;
    let grid = TriangleGrid::new(p.t0, p.theta, cfg.run.grid_n)?;
    Ok(match cfg.run.fundamental.solver {
        FieldSolver::March => solve_f(p, &grid)?,
        FieldSolver::Picard => solve_f_picard(p, &grid, cfg.run.fundamental.max_iter, cfg.run.tolerances.picard_tol)?.0,
    })
}

/// Writes the fundamental field as CSV.
pub fn cmd_fundamental(cfg: &LoadedConfig, out: &Path) -> Result<(), CliError> {
    let field = compute_field(cfg)?;
    let mut buf = Vec::new();
    field.write_csv(&mut buf)?;
    write_file(out, &buf)
}

#[derive(Debug, Serialize)]
struct SolveSidecar<'a> {
    #[serde(flatten)]
    metadata: &'a SolveMetadata,
    alpha: f64,
    t0: f64,
    theta: f64,
    t_star: f64,
}

/// Writes the solution CSV and its metadata sidecar.
pub fn cmd_solve(cfg: &LoadedConfig, method: Method, out: &Path) -> Result<SolveMetadata, CliError> {
    let p = &cfg.problem;
    if method == Method::ReprPc && p.t_star != p.t0 {
        return Err(CliError::Precondition(format!(
            "repr-pc needs t_star = t0, the config has t_star = {} > t0 = {}",
            p.t_star, p.t0
        )));
    }
    let solution = match method {
        Method::Direct => solve_direct(p, cfg.run.grid_n)?,
        Method::ReprPc => represent_pc(p, &compute_field(cfg)?)?,
        Method::ReprGc => represent_gc(p, &compute_field(cfg)?)?,
        Method::ReprGcCompact => represent_gc_compact(p, &compute_field(cfg)?)?,
    };
    let mut buf = Vec::new();
    solution.x.write_csv(&mut buf)?;
    let sidecar = SolveSidecar {
        metadata: &solution.metadata,
        alpha: p.alpha,
        t0: p.t0,
        theta: p.theta,
        t_star: p.t_star,
    };
    write_file(out, &buf)?;
    write_file(&sidecar_path(out), &to_json(&sidecar))?;
    Ok(solution.metadata)
}

/// Runs the invariant suite and writes the JSON report; the caller maps failures to exit 1.
pub fn cmd_verify(cfg: &LoadedConfig, report_path: &Path) -> Result<VerificationReport, CliError> {
    let options = SuiteOptions {
        ml_tol: cfg.run.tolerances.ml_tol,
    };
    let report = run_suite(&cfg.problem, cfg.run.grid_n, &options)?;
    write_file(report_path, &to_json(&report))?;
    Ok(report)
}

/// Human-readable summary of a report, one line per check.
pub fn write_summary(report: &VerificationReport, mut out: impl Write) -> std::io::Result<()> {
    for c in &report.checks {
        writeln!(
            out,
            "{:<4} {:<28} residual {:<12.4e} threshold {:.1e}",
            if c.pass { "ok" } else { "FAIL" },
            c.name,
            c.residual,
            c.threshold
        )?;
    }
    for s in &report.skipped {
        writeln!(out, "skip {s}")?;
    }
    Ok(())
}

/// `E_{α,β}(z)` to 15 significant digits.
pub fn cmd_mlf(alpha: f64, beta: f64, z: f64, tol: f64) -> Result<String, CliError> {
    let params = MlParams::new(alpha, beta).with_tol(tol);
    params.validate().map_err(|e| CliError::Config(e.to_string()))?;
    if !z.is_finite() {
        return Err(CliError::Config(format!("z must be finite, got {z}")));
    }
    Ok(format_significant(mittag_leffler_scalar(&params, z)?, 15))
}

/// Plain decimal for moderate magnitudes, scientific otherwise.
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..digits as i32).contains(&exp) {
        format!("{:.*}", (digits as i32 - 1 - exp) as usize, v)
    } else {
        sci
    }
}
