use std::io::{Read, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::entry_norm;

/// Shape of the value stored at every grid node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Vector(usize),
    /// Square `n x n` matrix, stored row-major.
    Matrix(usize),
}

impl Shape {
    pub fn width(&self) -> usize {
        match *self {
            Shape::Vector(n) => n,
            Shape::Matrix(n) => n * n,
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Shape::Vector(n) | Shape::Matrix(n) => n,
        }
    }

    pub fn is_matrix(&self) -> bool {
        matches!(self, Shape::Matrix(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interp {
    #[default]
    PiecewiseLinear,
}

/// Which end of the interval an operator integrates from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// From `a` up to `t`.
    Left,
    /// From `t` up to `b`.
    Right,
}

/// Nodes `a + i (b - a)/n`, `i = 0..=n`, with the last node pinned to `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl UniformGrid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a <= b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::grid(format!("invalid interval [{a}, {b}]")));
        }
        if a < b && n == 0 {
            return Err(Error::grid("no subintervals on a non-degenerate interval"));
        }
        Ok(Self {
            a,
            b,
            n: if a == b { 0 } else { n },
        })
    }

    pub fn step(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.b - self.a) / self.n as f64
        }
    }

    pub fn t(&self, i: usize) -> f64 {
        if i == self.n {
            self.b
        } else {
            self.a + i as f64 * self.step()
        }
    }

    /// Index of the node at `t`, if `t` coincides with a node to within `1e-9 h`.
    pub fn node_index(&self, t: f64) -> Option<usize> {
        if self.n == 0 {
            return ((t - self.a).abs() <= 1e-12 * self.a.abs().max(1.0)).then_some(0);
        }
        let x = (t - self.a) / self.step();
        let k = x.round();
        ((x - k).abs() <= 1e-9 && k >= 0.0 && k <= self.n as f64).then_some(k as usize)
    }
}

/// A vector- or matrix-valued function sampled on a uniform grid of `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn {
    a: f64,
    b: f64,
    shape: Shape,
    interp: Interp,
    data: Vec<f64>,
}

impl GridFn {
    /// `data` holds `N + 1` consecutive node values of `shape.width()` entries each.
    pub fn new(a: f64, b: f64, shape: Shape, data: Vec<f64>) -> Result<Self> {
        let width = shape.width();
        if width == 0 {
            return Err(Error::grid("grid function entries must be non-empty"));
        }
        if !(a <= b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::grid(format!("invalid interval [{a}, {b}]")));
        }
        if data.is_empty() || !data.len().is_multiple_of(width) {
            return Err(Error::grid(format!(
                "{} values do not split into nodes of width {width}",
                data.len()
            )));
        }
        let nodes = data.len() / width;
        if a < b && nodes < 2 {
            return Err(Error::grid("a non-degenerate interval needs at least two nodes"));
        }
        if a == b && nodes != 1 {
            return Err(Error::grid("a degenerate interval carries exactly one node"));
        }
        Ok(Self {
            a,
            b,
            shape,
            interp: Interp::PiecewiseLinear,
            data,
        })
    }

    pub fn from_fn(a: f64, b: f64, n_sub: usize, shape: Shape, mut f: impl FnMut(f64) -> Vec<f64>) -> Result<Self> {
        let n_sub = if a == b { 0 } else { n_sub };
        let h = if n_sub == 0 { 0.0 } else { (b - a) / n_sub as f64 };
        let mut data = Vec::with_capacity((n_sub + 1) * shape.width());
        for i in 0..=n_sub {
            let t = if i == n_sub { b } else { a + i as f64 * h };
            let v = f(t);
            if v.len() != shape.width() {
                return Err(Error::grid(format!(
                    "sample has {} entries, expected {}",
                    v.len(),
                    shape.width()
                )));
            }
            data.extend(v);
        }
        Self::new(a, b, shape, data)
    }

    pub fn scalar(a: f64, b: f64, values: Vec<f64>) -> Result<Self> {
        Self::new(a, b, Shape::Vector(1), values)
    }

    pub fn zeros(a: f64, b: f64, n_sub: usize, shape: Shape) -> Result<Self> {
        let n_sub = if a == b { 0 } else { n_sub };
        Self::new(a, b, shape, vec![0.0; (n_sub + 1) * shape.width()])
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn grid(&self) -> UniformGrid {
        UniformGrid {
            a: self.a,
            b: self.b,
            n: self.n_sub(),
        }
    }

    pub fn interp(&self) -> Interp {
        self.interp
    }

    pub fn width(&self) -> usize {
        self.shape.width()
    }

    /// Number of subintervals `N`.
    pub fn n_sub(&self) -> usize {
        self.data.len() / self.width() - 1
    }

    pub fn step(&self) -> f64 {
        match self.n_sub() {
            0 => 0.0,
            n => (self.b - self.a) / n as f64,
        }
    }

    pub fn t(&self, i: usize) -> f64 {
        let n = self.n_sub();
        if i == n {
            self.b
        } else {
            self.a + i as f64 * self.step()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_sub()).map(|i| self.t(i)).collect()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.data[i * w..(i + 1) * w]
    }

    pub fn node_mut(&mut self, i: usize) -> &mut [f64] {
        let w = self.width();
        &mut self.data[i * w..(i + 1) * w]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn node_matrix(&self, i: usize) -> DMatrix<f64> {
        let n = self.shape.dim();
        match self.shape {
            Shape::Matrix(_) => DMatrix::from_row_slice(n, n, self.node(i)),
            Shape::Vector(_) => DMatrix::from_column_slice(n, 1, self.node(i)),
        }
    }

    /// Samples of one scalar component across the grid.
    pub fn component(&self, c: usize) -> Vec<f64> {
        let w = self.width();
        self.data.iter().skip(c).step_by(w).copied().collect()
    }

    /// Rebuilds a grid function from per-component sample columns.
    pub fn from_components(a: f64, b: f64, shape: Shape, components: &[Vec<f64>]) -> Result<Self> {
        let w = shape.width();
        if components.len() != w {
            return Err(Error::grid(format!("{} components for width {w}", components.len())));
        }
        let len = components[0].len();
        let mut data = vec![0.0; len * w];
        for (c, col) in components.iter().enumerate() {
            if col.len() != len {
                return Err(Error::grid("component columns differ in length"));
            }
            for (i, v) in col.iter().enumerate() {
                data[i * w + c] = *v;
            }
        }
        Self::new(a, b, shape, data)
    }

    /// Applies a scalar-sequence operator to every component.
    pub(crate) fn map_components(&self, mut op: impl FnMut(&[f64]) -> Vec<f64>) -> Result<Self> {
        let cols: Vec<Vec<f64>> = (0..self.width()).map(|c| op(&self.component(c))).collect();
        Self::from_components(self.a, self.b, self.shape, &cols)
    }

    /// Same grid with the node order reversed, i.e. `t ↦ a + b - t`.
    pub fn mirrored(&self) -> Self {
        let w = self.width();
        let mut data = Vec::with_capacity(self.data.len());
        for chunk in self.data.chunks_exact(w).rev() {
            data.extend_from_slice(chunk);
        }
        Self { data, ..self.clone() }
    }

    /// Piecewise-linear value at `t ∈ [a, b]`.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let n = self.n_sub();
        if n == 0 {
            return Ok(self.node(0).to_vec());
        }
        let tol = 1e-12 * (self.b - self.a).abs().max(1.0);
        if t < self.a - tol || t > self.b + tol {
            return Err(Error::domain(format!("t = {t} outside [{}, {}]", self.a, self.b)));
        }
        let x = ((t - self.a) / self.step()).clamp(0.0, n as f64);
        let k = (x.floor() as usize).min(n - 1);
        let s = x - k as f64;
        Ok(self
            .node(k)
            .iter()
            .zip(self.node(k + 1))
            .map(|(l, r)| (1.0 - s) * l + s * r)
            .collect())
    }

    pub fn node_index(&self, t: f64) -> Option<usize> {
        self.grid().node_index(t)
    }

    /// The nodes `lo..=hi` as a grid function on `[t(lo), t(hi)]`.
    pub fn restrict(&self, lo: usize, hi: usize) -> Result<Self> {
        if lo > hi || hi > self.n_sub() {
            return Err(Error::grid(format!(
                "node range {lo}..={hi} outside 0..={}",
                self.n_sub()
            )));
        }
        let w = self.width();
        Self::new(
            self.t(lo),
            self.t(hi),
            self.shape,
            self.data[lo * w..(hi + 1) * w].to_vec(),
        )
    }

    /// Largest entry norm over all nodes.
    pub fn max_norm(&self) -> f64 {
        let n = self.shape.dim();
        self.data
            .chunks_exact(self.width())
            .map(|e| entry_norm(e, n, self.shape.is_matrix()))
            .fold(0.0, f64::max)
    }

    pub fn node_norm(&self, i: usize) -> f64 {
        entry_norm(self.node(i), self.shape.dim(), self.shape.is_matrix())
    }

    /// Largest node-wise distance to another function on the same grid.
    pub fn max_distance(&self, other: &GridFn) -> Result<f64> {
        if self.shape != other.shape || self.n_sub() != other.n_sub() {
            return Err(Error::grid("functions live on different grids"));
        }
        let n = self.shape.dim();
        let mut diff = vec![0.0; self.width()];
        let mut worst: f64 = 0.0;
        for i in 0..=self.n_sub() {
            for ((d, x), y) in diff.iter_mut().zip(self.node(i)).zip(other.node(i)) {
                *d = x - y;
            }
            worst = worst.max(entry_norm(&diff, n, self.shape.is_matrix()));
        }
        Ok(worst)
    }

    /// Writes `t,v_1,...,v_k` with 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.width()).map(|k| format!("v_{k}")));
        wtr.write_record(&header)?;
        for i in 0..=self.n_sub() {
            let mut rec = vec![fmt_f64(self.t(i))];
            rec.extend(self.node(i).iter().map(|v| fmt_f64(*v)));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads a CSV whose first column is `t` on a uniform grid; remaining columns
    /// are the node entries in row-major order.
    pub fn read_csv<R: Read>(input: R, shape: Shape) -> Result<Self> {
        let (times, rows) = read_table(input, shape.width())?;
        let a = times[0];
        let b = *times.last().unwrap();
        check_uniform(&times)?;
        Self::new(a, b, shape, rows.concat())
    }
}

/// Scientific notation with 17 significant digits, which reads back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Rows of a numeric CSV with a header line; first column is time.
pub(crate) fn read_table<R: Read>(input: R, width: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut times = Vec::new();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != width + 1 {
            return Err(Error::Parse(format!(
                "expected {} columns, found {}",
                width + 1,
                rec.len()
            )));
        }
        let mut vals = rec.iter().map(|f| {
            f.parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad number {f:?}: {e}")))
        });
        times.push(vals.next().unwrap()?);
        rows.push(vals.collect::<Result<Vec<f64>>>()?);
    }
    if times.is_empty() {
        return Err(Error::Parse("CSV has no data rows".into()));
    }
    Ok((times, rows))
}

fn check_uniform(times: &[f64]) -> Result<()> {
    if times.len() < 2 {
        return Ok(());
    }
    let n = times.len() - 1;
    let h = (times[n] - times[0]) / n as f64;
    if !(h > 0.0) {
        return Err(Error::grid("times must be increasing"));
    }
    for (i, t) in times.iter().enumerate() {
        if (t - (times[0] + i as f64 * h)).abs() > 1e-9 * h {
            return Err(Error::grid(format!("time column is not uniform at row {i}")));
        }
    }
    Ok(())
}
