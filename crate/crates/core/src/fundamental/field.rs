use std::io::{Read, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::frac_ops::{fmt_f64, read_table, UniformGrid};
use crate::linalg::{flat_norm_inf, identity_flat};
use crate::special_fn::gamma;

/// Nodes `tᵢ = t₀ + i (ϑ - t₀)/N` and the index pairs `0 ≤ j ≤ i ≤ N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleGrid {
    pub t0: f64,
    pub theta: f64,
    pub n: usize,
}

impl TriangleGrid {
    pub fn new(t0: f64, theta: f64, n: usize) -> Result<Self> {
        if !(t0 < theta) || !t0.is_finite() || !theta.is_finite() {
            return Err(Error::grid(format!("invalid interval [{t0}, {theta}]")));
        }
        if n == 0 {
            return Err(Error::grid("the triangle grid needs at least one subinterval"));
        }
        Ok(Self { t0, theta, n })
    }

    pub fn line(&self) -> UniformGrid {
        UniformGrid {
            a: self.t0,
            b: self.theta,
            n: self.n,
        }
    }

    pub fn step(&self) -> f64 {
        (self.theta - self.t0) / self.n as f64
    }

    pub fn t(&self, i: usize) -> f64 {
        self.line().t(i)
    }

    /// Number of index pairs.
    pub fn len(&self) -> usize {
        (self.n + 1) * (self.n + 2) / 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub(crate) fn pair_index(i: usize, j: usize) -> usize {
        i * (i + 1) / 2 + j
    }
}

impl From<UniformGrid> for TriangleGrid {
    fn from(g: UniformGrid) -> Self {
        Self {
            t0: g.a,
            theta: g.b,
            n: g.n,
        }
    }
}

/// One `n x n` matrix per node pair `(i, j)`, `j ≤ i`, stored row by row in `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalField {
    grid: TriangleGrid,
    alpha: f64,
    dim: usize,
    data: Vec<f64>,
}

impl FundamentalField {
    pub(crate) fn from_data(grid: TriangleGrid, alpha: f64, dim: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), grid.len() * dim * dim);
        Self { grid, alpha, dim, data }
    }

    /// Assembles a field from column `j` slices holding `F(t_{j+m}, t_j)` for `m = 0..`.
    pub(crate) fn from_columns(grid: TriangleGrid, alpha: f64, dim: usize, columns: &[Vec<f64>]) -> Self {
        let w = dim * dim;
        let mut data = vec![0.0; grid.len() * w];
        for (j, col) in columns.iter().enumerate() {
            for (m, entry) in col.chunks_exact(w).enumerate() {
                let at = TriangleGrid::pair_index(j + m, j) * w;
                data[at..at + w].copy_from_slice(entry);
            }
        }
        Self::from_data(grid, alpha, dim, data)
    }

    /// Assembles a field from row `i` slices holding `F(t_i, t_j)` for `j = 0..=i`.
    pub(crate) fn from_rows(grid: TriangleGrid, alpha: f64, dim: usize, rows: Vec<Vec<f64>>) -> Self {
        Self::from_data(grid, alpha, dim, rows.concat())
    }

    pub fn grid(&self) -> &TriangleGrid {
        &self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Flat row-major `F(tᵢ, tⱼ)`.
    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> &[f64] {
        debug_assert!(j <= i && i <= self.grid.n);
        let w = self.dim * self.dim;
        let at = TriangleGrid::pair_index(i, j) * w;
        &self.data[at..at + w]
    }

    /// `F(tᵢ, tⱼ)` for `j = 0..=i`, concatenated.
    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.dim * self.dim;
        let at = TriangleGrid::pair_index(i, 0) * w;
        &self.data[at..at + (i + 1) * w]
    }

    pub fn get(&self, i: usize, j: usize) -> Result<DMatrix<f64>> {
        if j > i || i > self.grid.n {
            return Err(Error::domain(format!("({i}, {j}) is not a node of the triangle")));
        }
        Ok(DMatrix::from_row_slice(self.dim, self.dim, self.entry(i, j)))
    }

    /// `Z(tᵢ, tⱼ) = F(tᵢ, tⱼ) / (tᵢ - tⱼ)^{1-α}`, defined off the diagonal only.
    pub fn z_value(&self, i: usize, j: usize) -> Result<DMatrix<f64>> {
        if i == j {
            return Err(Error::domain("Z is singular on the diagonal t = s"));
        }
        let f = self.get(i, j)?;
        let dt = self.grid.t(i) - self.grid.t(j);
        Ok(f / dt.powf(1.0 - self.alpha))
    }

    /// Largest induced norm over all nodes.
    pub fn max_norm(&self) -> f64 {
        self.data
            .chunks_exact(self.dim * self.dim)
            .map(|e| flat_norm_inf(e, self.dim))
            .fold(0.0, f64::max)
    }

    pub fn max_distance(&self, other: &FundamentalField) -> Result<f64> {
        if self.grid != other.grid || self.dim != other.dim {
            return Err(Error::grid("fields live on different triangles"));
        }
        let w = self.dim * self.dim;
        let mut diff = vec![0.0; w];
        let mut worst: f64 = 0.0;
        for (x, y) in self.data.chunks_exact(w).zip(other.data.chunks_exact(w)) {
            for ((d, a), b) in diff.iter_mut().zip(x).zip(y) {
                *d = a - b;
            }
            worst = worst.max(flat_norm_inf(&diff, self.dim));
        }
        Ok(worst)
    }

    /// Largest distance of a diagonal value from `Id/Γ(α)`.
    pub fn diagonal_defect(&self) -> Result<f64> {
        let mut expect = identity_flat(self.dim);
        let g = gamma(self.alpha)?;
        expect.iter_mut().for_each(|v| *v /= g);
        let mut worst: f64 = 0.0;
        let mut diff = vec![0.0; expect.len()];
        for i in 0..=self.grid.n {
            for ((d, a), b) in diff.iter_mut().zip(self.entry(i, i)).zip(&expect) {
                *d = a - b;
            }
            worst = worst.max(flat_norm_inf(&diff, self.dim));
        }
        Ok(worst)
    }

    /// CSV with header `t,s,F_11,...,F_nn`, one line per node pair.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string(), "s".to_string()];
        for r in 1..=self.dim {
            for c in 1..=self.dim {
                header.push(format!("F_{r}{c}"));
            }
        }
        wtr.write_record(&header)?;
        for i in 0..=self.grid.n {
            for j in 0..=i {
                let mut rec = vec![fmt_f64(self.grid.t(i)), fmt_f64(self.grid.t(j))];
                rec.extend(self.entry(i, j).iter().map(|v| fmt_f64(*v)));
                wtr.write_record(&rec)?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads the format of [`write_csv`](Self::write_csv); `alpha` is not stored in the file.
    pub fn read_csv<R: Read>(input: R, alpha: f64, dim: usize) -> Result<Self> {
        let (times, rows) = read_table(input, dim * dim + 1)?;
        // the triangle has (N+1)(N+2)/2 rows
        let count = rows.len();
        let n = ((((8 * count + 1) as f64).sqrt() - 3.0) / 2.0).round() as usize;
        if n == 0 || (n + 1) * (n + 2) / 2 != count {
            return Err(Error::Parse(format!("{count} rows do not form a triangle")));
        }
        let grid = TriangleGrid::new(times[0], *times.last().unwrap(), n)?;
        let h = grid.step();
        let mut data = Vec::with_capacity(count * dim * dim);
        let mut r = 0;
        for i in 0..=n {
            for j in 0..=i {
                let s = rows[r][0];
                if (times[r] - grid.t(i)).abs() > 1e-9 * h || (s - grid.t(j)).abs() > 1e-9 * h {
                    return Err(Error::grid(format!("row {r} is not node ({i}, {j})")));
                }
                data.extend_from_slice(&rows[r][1..]);
                r += 1;
            }
        }
        Ok(Self::from_data(grid, alpha, dim, data))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_field() -> FundamentalField {
        let grid = TriangleGrid::new(0.0, 1.0, 3).unwrap();
        let data: Vec<f64> = (0..grid.len() * 4).map(|k| (k as f64).sin() / 7.0).collect();
        FundamentalField::from_data(grid, 0.5, 2, data)
    }

    #[test]
    fn triangle_indexing() {
        let g = TriangleGrid::new(0.0, 2.0, 4).unwrap();
        assert_eq!(g.len(), 15);
        assert_eq!(TriangleGrid::pair_index(0, 0), 0);
        assert_eq!(TriangleGrid::pair_index(4, 4), 14);
        assert!(TriangleGrid::new(1.0, 1.0, 4).is_err());
    }

    #[test]
    fn z_is_undefined_on_the_diagonal() {
        let f = sample_field();
        assert!(matches!(f.z_value(2, 2), Err(Error::Domain(_))));
        let z = f.z_value(3, 1).unwrap();
        let scale = (f.grid().t(3) - f.grid().t(1)).powf(0.5);
        assert!((z * scale - f.get(3, 1).unwrap()).abs().max() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let f = sample_field();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,s,F_11,F_12,F_21,F_22\n"));
        assert_eq!(text.lines().count(), 1 + 10);
        let back = FundamentalField::read_csv(buf.as_slice(), 0.5, 2).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn rows_and_columns_assemble_consistently() {
        let f = sample_field();
        let n = f.grid().n;
        let rows: Vec<Vec<f64>> = (0..=n).map(|i| f.row(i).to_vec()).collect();
        let cols: Vec<Vec<f64>> = (0..=n)
            .map(|j| (j..=n).flat_map(|i| f.entry(i, j).to_vec()).collect())
            .collect();
        assert_eq!(FundamentalField::from_rows(*f.grid(), 0.5, 2, rows), f);
        assert_eq!(FundamentalField::from_columns(*f.grid(), 0.5, 2, &cols), f);
    }
}
