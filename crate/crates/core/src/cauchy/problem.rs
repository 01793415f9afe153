use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::frac_ops::{self, caputo_derivative, fractional_integral, GridFn, Shape, Side, UniformGrid};
use crate::linalg::from_dmatrix;

/// The coefficient matrix `A(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum CoeffSpec {
    /// `A ≡ 0` in dimension `n`.
    Zero(usize),
    Constant(DMatrix<f64>),
    /// `[[0, ω], [-ω, 0]]`.
    Rotation {
        omega: f64,
    },
    /// `A₀ cos(ωt)`.
    Cosine {
        base: DMatrix<f64>,
        omega: f64,
    },
    /// Matrix samples, interpolated piecewise linearly.
    Samples(GridFn),
}

impl CoeffSpec {
    pub fn dim(&self) -> usize {
        match self {
            CoeffSpec::Zero(n) => *n,
            CoeffSpec::Constant(m) | CoeffSpec::Cosine { base: m, .. } => m.nrows(),
            CoeffSpec::Rotation { .. } => 2,
            CoeffSpec::Samples(g) => g.shape().dim(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            CoeffSpec::Zero(_) => true,
            CoeffSpec::Constant(m) | CoeffSpec::Cosine { base: m, .. } => m.iter().all(|v| *v == 0.0),
            CoeffSpec::Rotation { omega } => *omega == 0.0,
            CoeffSpec::Samples(g) => g.data().iter().all(|v| *v == 0.0),
        }
    }

    /// `A₀` when the coefficient does not depend on time.
    pub fn constant_value(&self) -> Option<DMatrix<f64>> {
        match self {
            CoeffSpec::Zero(n) => Some(DMatrix::zeros(*n, *n)),
            CoeffSpec::Constant(m) => Some(m.clone()),
            CoeffSpec::Rotation { omega } => Some(DMatrix::from_row_slice(2, 2, &[0.0, *omega, -omega, 0.0])),
            CoeffSpec::Cosine { base, omega } if *omega == 0.0 => Some(base.clone()),
            _ => None,
        }
    }

    /// `A(t)` as a flat row-major `n*n` slice.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        Ok(match self {
            CoeffSpec::Zero(n) => vec![0.0; n * n],
            CoeffSpec::Constant(m) => from_dmatrix(m),
            CoeffSpec::Rotation { omega } => vec![0.0, *omega, -omega, 0.0],
            CoeffSpec::Cosine { base, omega } => {
                let c = (omega * t).cos();
                from_dmatrix(base).into_iter().map(|v| v * c).collect()
            }
            CoeffSpec::Samples(g) => g.eval(t)?,
        })
    }

    fn validate(&self, t0: f64, theta: f64) -> Result<()> {
        match self {
            CoeffSpec::Zero(n) if *n == 0 => Err(Error::spec("dimension must be positive")),
            CoeffSpec::Constant(m) | CoeffSpec::Cosine { base: m, .. } if !m.is_square() || m.nrows() == 0 => {
                Err(Error::spec("coefficient matrix must be square and non-empty"))
            }
            CoeffSpec::Samples(g) => {
                if !g.shape().is_matrix() {
                    return Err(Error::spec("coefficient samples must be matrix-valued"));
                }
                covers(g, t0, theta, "coefficient samples")
            }
            _ => Ok(()),
        }
    }
}

/// The forcing term `b(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ForcingSpec {
    Zero(usize),
    Constant(DVector<f64>),
    /// `c + s sin(ωt) + k cos(ωt)`.
    Harmonic {
        constant: DVector<f64>,
        sine: DVector<f64>,
        cosine: DVector<f64>,
        omega: f64,
    },
    Samples(GridFn),
}

impl ForcingSpec {
    pub fn dim(&self) -> usize {
        match self {
            ForcingSpec::Zero(n) => *n,
            ForcingSpec::Constant(v) => v.len(),
            ForcingSpec::Harmonic { constant, .. } => constant.len(),
            ForcingSpec::Samples(g) => g.shape().dim(),
        }
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        Ok(match self {
            ForcingSpec::Zero(n) => vec![0.0; *n],
            ForcingSpec::Constant(v) => v.as_slice().to_vec(),
            ForcingSpec::Harmonic {
                constant,
                sine,
                cosine,
                omega,
            } => {
                let (s, c) = (omega * t).sin_cos();
                (0..constant.len())
                    .map(|k| constant[k] + s * sine[k] + c * cosine[k])
                    .collect()
            }
            ForcingSpec::Samples(g) => g.eval(t)?,
        })
    }

    fn validate(&self, t0: f64, theta: f64) -> Result<()> {
        match self {
            ForcingSpec::Harmonic {
                constant, sine, cosine, ..
            } if sine.len() != constant.len() || cosine.len() != constant.len() => {
                Err(Error::spec("harmonic forcing parts differ in length"))
            }
            ForcingSpec::Samples(g) => {
                if g.shape().is_matrix() {
                    return Err(Error::spec("forcing samples must be vector-valued"));
                }
                covers(g, t0, theta, "forcing samples")
            }
            _ => Ok(()),
        }
    }
}

/// The history `w★` on `[t₀, t★]`.
#[derive(Debug, Clone, PartialEq)]
pub enum HistorySpec {
    /// `w★ ≡ w₀`.
    Constant(DVector<f64>),
    /// Samples of `w★`, optionally with samples of its Caputo derivative.
    /// Without them the L1 scheme is applied to `w`.
    Samples { w: GridFn, caputo: Option<GridFn> },
    /// `w★ = w₀ + I^α φ`, so that `φ` is the Caputo derivative of `w★`.
    Generator { w0: DVector<f64>, phi: GridFn },
}

/// Linear Caputo system `ᶜD^α x = A(t) x + b(t)` on `[t₀, ϑ]` with
/// `x = w★` on `[t₀, t★]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyProblem {
    pub alpha: f64,
    pub t0: f64,
    pub theta: f64,
    pub coefficient: CoeffSpec,
    pub forcing: ForcingSpec,
    pub t_star: f64,
    pub history: HistorySpec,
}

/// The history sampled on the nodes `0..=i_star` of a solve grid.
#[derive(Debug, Clone)]
pub struct ResolvedHistory {
    pub i_star: usize,
    /// `w★` on `[t₀, t★]`.
    pub w: GridFn,
    /// Caputo derivative of `w★` on the same nodes.
    pub caputo: GridFn,
}

fn covers(g: &GridFn, t0: f64, theta: f64, what: &str) -> Result<()> {
    let tol = 1e-9 * (theta - t0).abs().max(1.0);
    if g.a() > t0 + tol || g.b() < theta - tol {
        return Err(Error::spec(format!(
            "{what} span [{}, {}] but the problem needs [{t0}, {theta}]",
            g.a(),
            g.b()
        )));
    }
    Ok(())
}

impl CauchyProblem {
    pub fn new(
        alpha: f64,
        t0: f64,
        theta: f64,
        coefficient: CoeffSpec,
        forcing: ForcingSpec,
        t_star: f64,
        history: HistorySpec,
    ) -> Result<Self> {
        let p = Self {
            alpha,
            t0,
            theta,
            coefficient,
            forcing,
            t_star,
            history,
        };
        p.validate()?;
        Ok(p)
    }

    /// `x(t₀) = w₀`, no history beyond the initial point.
    pub fn from_initial_value(
        alpha: f64,
        t0: f64,
        theta: f64,
        coefficient: CoeffSpec,
        forcing: ForcingSpec,
        w0: DVector<f64>,
    ) -> Result<Self> {
        Self::new(alpha, t0, theta, coefficient, forcing, t0, HistorySpec::Constant(w0))
    }

    pub fn dim(&self) -> usize {
        self.coefficient.dim()
    }

    pub fn validate(&self) -> Result<()> {
        frac_ops::check_order(self.alpha).map_err(|e| Error::spec(e.to_string()))?;
        if !(self.t0 < self.theta) || !self.t0.is_finite() || !self.theta.is_finite() {
            return Err(Error::spec(format!(
                "need t0 < theta, got [{}, {}]",
                self.t0, self.theta
            )));
        }
        if !(self.t0 <= self.t_star && self.t_star < self.theta) {
            return Err(Error::spec(format!(
                "t_star = {} must lie in [{}, {})",
                self.t_star, self.t0, self.theta
            )));
        }
        self.coefficient.validate(self.t0, self.theta)?;
        self.forcing.validate(self.t0, self.theta)?;
        let n = self.dim();
        if self.forcing.dim() != n {
            return Err(Error::spec(format!(
                "forcing has dimension {}, coefficient {n}",
                self.forcing.dim()
            )));
        }
        let tol = 1e-9 * (self.theta - self.t0).max(1.0);
        let check_span = |g: &GridFn, what: &str| -> Result<()> {
            if g.shape() != Shape::Vector(n) {
                return Err(Error::spec(format!("{what} must be {n}-vectors")));
            }
            // longer samples are fine: only the part up to t★ is used
            if (g.a() - self.t0).abs() > tol || g.b() < self.t_star - tol {
                return Err(Error::spec(format!(
                    "{what} span [{}, {}] but must start at {} and reach {}",
                    g.a(),
                    g.b(),
                    self.t0,
                    self.t_star
                )));
            }
            Ok(())
        };
        match &self.history {
            HistorySpec::Constant(w0) if w0.len() != n => Err(Error::spec("initial value has the wrong dimension")),
            HistorySpec::Constant(_) => Ok(()),
            HistorySpec::Samples { w, caputo } => {
                check_span(w, "history samples")?;
                if let Some(c) = caputo {
                    check_span(c, "history derivative samples")?;
                }
                Ok(())
            }
            HistorySpec::Generator { w0, phi } => {
                if w0.len() != n {
                    return Err(Error::spec("initial value has the wrong dimension"));
                }
                check_span(phi, "history generator")
            }
        }
    }

    pub fn a_at(&self, t: f64) -> Result<Vec<f64>> {
        self.coefficient.eval(t)
    }

    pub fn b_at(&self, t: f64) -> Result<Vec<f64>> {
        self.forcing.eval(t)
    }

    /// `A` at every node of `grid`, concatenated.
    pub fn sample_a(&self, grid: &UniformGrid) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity((grid.n + 1) * self.dim().pow(2));
        for i in 0..=grid.n {
            out.extend(self.a_at(grid.t(i))?);
        }
        Ok(out)
    }

    pub fn sample_b(&self, grid: &UniformGrid) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity((grid.n + 1) * self.dim());
        for i in 0..=grid.n {
            out.extend(self.b_at(grid.t(i))?);
        }
        Ok(out)
    }

    /// The solve grid on `[t₀, ϑ]` with `n` subintervals; `t★` must be one of its nodes.
    pub fn grid(&self, n: usize) -> Result<UniformGrid> {
        let g = UniformGrid::new(self.t0, self.theta, n)?;
        self.star_index(&g)?;
        Ok(g)
    }

    pub fn star_index(&self, grid: &UniformGrid) -> Result<usize> {
        grid.node_index(self.t_star).ok_or_else(|| {
            Error::grid(format!(
                "t_star = {} is not a node of the grid with step {}",
                self.t_star,
                grid.step()
            ))
        })
    }

    /// `w★(t₀)`.
    pub fn w_initial(&self) -> Vec<f64> {
        match &self.history {
            HistorySpec::Constant(w0) | HistorySpec::Generator { w0, .. } => w0.as_slice().to_vec(),
            HistorySpec::Samples { w, .. } => w.node(0).to_vec(),
        }
    }

    /// Samples `w★` and its Caputo derivative on the history nodes of `grid`.
    pub fn resolve_history(&self, grid: &UniformGrid) -> Result<ResolvedHistory> {
        let i_star = self.star_index(grid)?;
        let n = self.dim();
        let shape = Shape::Vector(n);
        let t_star = grid.t(i_star);
        let resample = |g: &GridFn| -> Result<GridFn> {
            let mut data = Vec::with_capacity((i_star + 1) * n);
            for i in 0..=i_star {
                data.extend(g.eval(grid.t(i))?);
            }
            GridFn::new(grid.a, t_star, shape, data)
        };
        match &self.history {
            HistorySpec::Constant(w0) => {
                let w = GridFn::from_fn(grid.a, t_star, i_star, shape, |_| w0.as_slice().to_vec())?;
                let caputo = GridFn::zeros(grid.a, t_star, i_star, shape)?;
                Ok(ResolvedHistory { i_star, w, caputo })
            }
            HistorySpec::Samples { w, caputo } => {
                let w_nodes = resample(w)?;
                let caputo = match caputo {
                    Some(c) => resample(c)?,
                    None if i_star == 0 => GridFn::zeros(grid.a, t_star, 0, shape)?,
                    None => {
                        if w.n_sub() == 0 {
                            return Err(Error::spec(
                                "the history needs at least two samples or explicit derivative samples",
                            ));
                        }
                        caputo_derivative(&w_nodes, self.alpha)?
                    }
                };
                Ok(ResolvedHistory {
                    i_star,
                    w: w_nodes,
                    caputo,
                })
            }
            HistorySpec::Generator { w0, phi } => {
                let phi_nodes = resample(phi)?;
                let mut w = fractional_integral(&phi_nodes, self.alpha, Side::Left)?;
                for i in 0..=i_star {
                    for (v, base) in w.node_mut(i).iter_mut().zip(w0.iter()) {
                        *v += base;
                    }
                }
                Ok(ResolvedHistory {
                    i_star,
                    w,
                    caputo: phi_nodes,
                })
            }
        }
    }
}
