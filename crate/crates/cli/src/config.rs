//! TOML run configuration and its translation into a [`CauchyProblem`].
//!
//! ```toml
//! grid_N = 1024
//! method = "repr-gc"
//!
//! [problem]
//! alpha = 0.5
//! theta = 1.0
//! t_star = 0.25
//!
//! [problem.coefficient]
//! preset = "cosine"
//! matrix = [[0.0, 1.0], [-1.0, 0.0]]
//! omega = 4.0
//!
//! [problem.forcing]
//! preset = "harmonic"
//! constant = [0.0, 1.0]
//! sine = [1.0, 0.0]
//!
//! [problem.history]
//! preset = "constant"
//! w0 = [1.0, 0.0]
//! ```
//!
//! Relative CSV paths are resolved against the directory of the config file.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use fracfund::cauchy::{CauchyProblem, CoeffSpec, ForcingSpec, HistorySpec, Method};
use fracfund::frac_ops::{GridFn, Shape};
use fracfund::special_fn::MlParams;

use crate::CliError;

pub const MIN_GRID_N: usize = 8;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "grid_N")]
    pub grid_n: usize,
    pub method: Option<String>,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub fundamental: FundamentalConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub alpha: f64,
    #[serde(default)]
    pub t0: f64,
    pub theta: f64,
    /// Defaults to `t0`.
    pub t_star: Option<f64>,
    pub coefficient: CoeffConfig,
    pub forcing: Option<ForcingConfig>,
    pub history: HistoryConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "preset", rename_all = "lowercase", deny_unknown_fields)]
pub enum CoeffConfig {
    Zero {
        dim: usize,
    },
    Constant {
        matrix: Vec<Vec<f64>>,
    },
    /// `[[0, ω], [-ω, 0]]`.
    Rotation {
        #[serde(default = "one")]
        omega: f64,
    },
    /// `matrix · cos(ωt)`.
    Cosine {
        matrix: Vec<Vec<f64>>,
        omega: f64,
    },
    /// CSV `t,A_11,...,A_nn`.
    Samples {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "preset", rename_all = "lowercase", deny_unknown_fields)]
pub enum ForcingConfig {
    Zero,
    Constant {
        value: Vec<f64>,
    },
    /// `constant + sine · sin(ωt) + cosine · cos(ωt)`; missing parts are zero.
    Harmonic {
        #[serde(default)]
        constant: Vec<f64>,
        #[serde(default)]
        sine: Vec<f64>,
        #[serde(default)]
        cosine: Vec<f64>,
        #[serde(default = "one")]
        omega: f64,
    },
    /// CSV `t,b_1,...,b_n`.
    Samples {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "preset", rename_all = "lowercase", deny_unknown_fields)]
pub enum HistoryConfig {
    /// `w★ ≡ w0`.
    Constant { w0: Vec<f64> },
    /// CSV of `w★`, for instance the output of an earlier solve, and optionally of its
    /// Caputo derivative.
    Samples {
        path: PathBuf,
        caputo_path: Option<PathBuf>,
    },
    /// `w★ = w0 + I^α φ` with `φ` read from CSV.
    Generator { w0: Vec<f64>, phi_path: PathBuf },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_picard_tol")]
    pub picard_tol: f64,
    #[serde(default = "default_ml_tol")]
    pub ml_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            picard_tol: default_picard_tol(),
            ml_tol: default_ml_tol(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldSolver {
    /// Implicit march, one linear solve per node.
    #[default]
    March,
    /// Fixed-point iteration to `tolerances.picard_tol`.
    Picard,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FundamentalConfig {
    #[serde(default)]
    pub solver: FieldSolver,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

impl Default for FundamentalConfig {
    fn default() -> Self {
        Self {
            solver: FieldSolver::March,
            max_iter: default_max_iter(),
        }
    }
}

/// Fallback paths for when the command line does not name one.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub fundamental: Option<PathBuf>,
    pub solution: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}

fn default_picard_tol() -> f64 {
    1e-12
}

fn default_ml_tol() -> f64 {
    MlParams::new(1.0, 1.0).tol
}

fn default_max_iter() -> usize {
    500
}

/// A parsed config together with the problem it describes.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub run: RunConfig,
    pub problem: CauchyProblem,
    /// Directory that relative paths in the config refer to.
    pub base: PathBuf,
}

impl LoadedConfig {
    pub fn method(&self, cli: Option<&str>) -> Result<Method, CliError> {
        let name = cli
            .or(self.run.method.as_deref())
            .ok_or_else(|| CliError::Config("no method given on the command line or in the config".into()))?;
        name.parse()
            .map_err(|e: fracfund::Error| CliError::Config(e.to_string()))
    }

    /// The command-line path if given, else the config fallback resolved against [`Self::base`].
    pub fn output_path(&self, cli: Option<&Path>, fallback: Option<&PathBuf>, what: &str) -> Result<PathBuf, CliError> {
        match (cli, fallback) {
            (Some(p), _) => Ok(p.to_path_buf()),
            (None, Some(p)) => Ok(self.base.join(p)),
            (None, None) => Err(CliError::Config(format!(
                "no {what} path on the command line or in [output]"
            ))),
        }
    }
}

pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse(&text, &base)
}

pub fn parse(text: &str, base: &Path) -> Result<LoadedConfig, CliError> {
    let run: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    if run.grid_n < MIN_GRID_N {
        return Err(CliError::Config(format!(
            "grid_N must be at least {MIN_GRID_N}, got {}",
            run.grid_n
        )));
    }
    for (name, v) in [
        ("picard_tol", run.tolerances.picard_tol),
        ("ml_tol", run.tolerances.ml_tol),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Config(format!("{name} must be positive, got {v}")));
        }
    }
    if let Some(m) = &run.method {
        m.parse::<Method>().map_err(|e| CliError::Config(e.to_string()))?;
    }
    let problem = build_problem(&run.problem, base)?;
    problem.grid(run.grid_n).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(LoadedConfig {
        run,
        problem,
        base: base.to_path_buf(),
    })
}

fn matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>, CliError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Config(
            "matrix must be a non-empty square array of rows".into(),
        ));
    }
    Ok(DMatrix::from_row_iterator(n, n, rows.iter().flatten().copied()))
}

fn vector(v: &[f64], dim: usize, what: &str) -> Result<DVector<f64>, CliError> {
    if v.len() != dim {
        return Err(CliError::Config(format!(
            "{what} has length {}, the system has dimension {dim}",
            v.len()
        )));
    }
    Ok(DVector::from_column_slice(v))
}

/// Reads a CSV whose header fixes the number of value columns.
fn read_samples(base: &Path, path: &Path, matrix: bool) -> Result<GridFn, CliError> {
    let full = base.join(path);
    let text =
        fs::read_to_string(&full).map_err(|e| CliError::Config(format!("cannot read {}: {e}", full.display())))?;
    let columns = text
        .lines()
        .next()
        .map_or(0, |h| h.split(',').count())
        .saturating_sub(1);
    let shape = if matrix {
        let n = (columns as f64).sqrt().round() as usize;
        if n == 0 || n * n != columns {
            return Err(CliError::Config(format!(
                "{}: {columns} value columns is not a square matrix",
                full.display()
            )));
        }
        Shape::Matrix(n)
    } else {
        if columns == 0 {
            return Err(CliError::Config(format!("{}: no value columns", full.display())));
        }
        Shape::Vector(columns)
    };
    GridFn::read_csv(text.as_bytes(), shape).map_err(|e| CliError::Config(format!("{}: {e}", full.display())))
}

fn build_problem(p: &ProblemConfig, base: &Path) -> Result<CauchyProblem, CliError> {
    let coefficient = match &p.coefficient {
        CoeffConfig::Zero { dim } => CoeffSpec::Zero(*dim),
        CoeffConfig::Constant { matrix: m } => CoeffSpec::Constant(matrix(m)?),
        CoeffConfig::Rotation { omega } => CoeffSpec::Rotation { omega: *omega },
        CoeffConfig::Cosine { matrix: m, omega } => CoeffSpec::Cosine {
            base: matrix(m)?,
            omega: *omega,
        },
        CoeffConfig::Samples { path } => CoeffSpec::Samples(read_samples(base, path, true)?),
    };
    let dim = coefficient.dim();
    let forcing = match p.forcing.as_ref().unwrap_or(&ForcingConfig::Zero) {
        ForcingConfig::Zero => ForcingSpec::Zero(dim),
        ForcingConfig::Constant { value } => ForcingSpec::Constant(vector(value, dim, "forcing value")?),
        ForcingConfig::Harmonic {
            constant,
            sine,
            cosine,
            omega,
        } => {
            let part = |v: &Vec<f64>, what| {
                if v.is_empty() {
                    Ok(DVector::zeros(dim))
                } else {
                    vector(v, dim, what)
                }
            };
            ForcingSpec::Harmonic {
                constant: part(constant, "forcing constant")?,
                sine: part(sine, "forcing sine")?,
                cosine: part(cosine, "forcing cosine")?,
                omega: *omega,
            }
        }
        ForcingConfig::Samples { path } => ForcingSpec::Samples(read_samples(base, path, false)?),
    };
    let history = match &p.history {
        HistoryConfig::Constant { w0 } => HistorySpec::Constant(vector(w0, dim, "w0")?),
        HistoryConfig::Samples { path, caputo_path } => HistorySpec::Samples {
            w: read_samples(base, path, false)?,
            caputo: caputo_path.as_ref().map(|c| read_samples(base, c, false)).transpose()?,
        },
        HistoryConfig::Generator { w0, phi_path } => HistorySpec::Generator {
            w0: vector(w0, dim, "w0")?,
            phi: read_samples(base, phi_path, false)?,
        },
    };
    CauchyProblem::new(
        p.alpha,
        p.t0,
        p.theta,
        coefficient,
        forcing,
        p.t_star.unwrap_or(p.t0),
        history,
    )
    .map_err(|e| CliError::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
        grid_N = 16
        [problem]
        alpha = 0.5
        theta = 1.0
        [problem.coefficient]
        preset = "rotation"
        [problem.history]
        preset = "constant"
        w0 = [1.0, 0.0]
    "#;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse(BASIC, Path::new(".")).unwrap();
        assert_eq!(c.problem.t_star, 0.0);
        assert_eq!(c.problem.forcing, ForcingSpec::Zero(2));
        assert_eq!(c.run.tolerances.picard_tol, 1e-12);
        assert_eq!(c.run.fundamental.solver, FieldSolver::March);
        assert!(c.method(None).is_err());
        assert_eq!(c.method(Some("repr-gc")).unwrap(), Method::ReprGc);
    }

    #[test]
    fn matrices_are_row_major() {
        let text = BASIC.replace(
            "preset = \"rotation\"",
            "preset = \"constant\"\n        matrix = [[1.0, 2.0], [3.0, 4.0]]",
        );
        let c = parse(&text, Path::new(".")).unwrap();
        assert_eq!(c.problem.a_at(0.0).unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn rejects_bad_configs() {
        let cases = [
            BASIC.replace("grid_N = 16", "grid_N = 4"),
            BASIC.replace("alpha = 0.5", "alpha = 1.5"),
            BASIC.replace("w0 = [1.0, 0.0]", "w0 = [1.0]"),
            BASIC.replace("preset = \"rotation\"", "preset = \"spiral\""),
            BASIC.replace("theta = 1.0", "theta = 1.0\n        t_star = 0.3"),
            format!("method = \"euler\"\n{BASIC}"),
            BASIC.replace(
                "grid_N = 16",
                "grid_N = 16\n        method = \"direct\"\n        colour = 1",
            ),
            "grid_N = ".to_string(),
        ];
        for text in cases {
            assert!(
                matches!(parse(&text, Path::new(".")), Err(CliError::Config(_))),
                "{text}"
            );
        }
    }
}
