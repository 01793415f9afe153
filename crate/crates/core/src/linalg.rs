//! Small dense helpers. Matrices in hot loops are flat row-major `n*n` slices;
//! the public API uses `nalgebra::DMatrix`.
//!
//! All norms are the max norm on vectors and the induced (max row sum) norm on
//! matrices.

use nalgebra::{DMatrix, DVector};

pub fn norm_inf(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn vec_norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Induced max norm of a flat row-major `n*n` matrix.
pub fn flat_norm_inf(m: &[f64], n: usize) -> f64 {
    m.chunks_exact(n)
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Norm of a flat entry: the max norm when `width` is a vector length, the
/// induced norm when it is `n*n` of a square matrix.
pub fn entry_norm(entry: &[f64], n: usize, is_matrix: bool) -> f64 {
    if is_matrix {
        flat_norm_inf(entry, n)
    } else {
        vec_norm_inf(entry)
    }
}

/// out = a * b for flat row-major matrices (b may be `n x m`).
pub fn mat_mul_into(a: &[f64], b: &[f64], out: &mut [f64], n: usize, m: usize) {
    for i in 0..n {
        let row = &mut out[i * m..(i + 1) * m];
        row.fill(0.0);
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for (o, bv) in row.iter_mut().zip(&b[k * m..(k + 1) * m]) {
                *o += aik * bv;
            }
        }
    }
}

#[inline]
pub fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn identity_flat(n: usize) -> Vec<f64> {
    let mut id = vec![0.0; n * n];
    for i in 0..n {
        id[i * n + i] = 1.0;
    }
    id
}

pub fn to_dmatrix(flat: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, flat)
}

pub fn from_dmatrix(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

pub fn to_dvector(flat: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(flat)
}

/// Relative determinant below which a step matrix is treated as singular.
const SINGULAR_RCOND: f64 = 1e-13;

fn nearly_singular(lu: &nalgebra::linalg::LU<f64, nalgebra::Dyn, nalgebra::Dyn>, m: &[f64], n: usize) -> bool {
    // step matrices have the form I - cA, so the scale is at least one
    let scale = flat_norm_inf(m, n).max(1.0).powi(n as i32);
    !(lu.determinant().abs() > SINGULAR_RCOND * scale)
}

/// Solves `m x = rhs` for a flat `n x n` matrix and a flat `n x cols` right-hand side.
/// Returns `None` when `m` is numerically singular.
pub fn solve_left(m: &[f64], rhs: &[f64], n: usize, cols: usize) -> Option<Vec<f64>> {
    let lu = DMatrix::from_row_slice(n, n, m).lu();
    if nearly_singular(&lu, m, n) {
        return None;
    }
    let b = DMatrix::from_row_slice(n, cols, rhs);
    let x = lu.solve(&b)?;
    if x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(x.transpose().as_slice().to_vec())
}

/// Solves `x m = rhs` for flat `n x n` matrices.
pub fn solve_right(m: &[f64], rhs: &[f64], n: usize) -> Option<Vec<f64>> {
    let lu = DMatrix::from_row_slice(n, n, m).transpose().lu();
    if nearly_singular(&lu, m, n) {
        return None;
    }
    let b = DMatrix::from_row_slice(n, n, rhs).transpose();
    let x = lu.solve(&b)?;
    if x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    // x holds the transpose of the answer; its column-major data is the answer row-major
    Some(x.as_slice().to_vec())
}
