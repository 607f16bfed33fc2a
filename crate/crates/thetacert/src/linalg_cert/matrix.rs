use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Index, IndexMut};

use super::LinalgError;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        m
    }

    /// Builds from row vectors; every row must have the same length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(LinalgError::ShapeMismatch {
                    left: (rows.len(), cols),
                    right: (1, r.len()),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn from_columns(cols: &[Vec<C64>]) -> Result<Self, LinalgError> {
        Ok(Self::from_rows(cols)?.transpose())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::ShapeMismatch { left: self.shape(), right: other.shape() });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[C64]) -> Result<Vec<C64>, LinalgError> {
        if self.cols != v.len() {
            return Err(LinalgError::ShapeMismatch { left: self.shape(), right: (v.len(), 1) });
        }
        Ok((0..self.rows).map(|i| dot_plain(self.row(i), v)).collect())
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.cols && self.rows > 0 && other.rows > 0 {
            return Err(LinalgError::ShapeMismatch { left: self.shape(), right: other.shape() });
        }
        let cols = if self.rows > 0 { self.cols } else { other.cols };
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Self { rows: self.rows + other.rows, cols, data })
    }

    pub fn push_row(&mut self, row: &[C64]) -> Result<(), LinalgError> {
        if self.rows == 0 && self.data.is_empty() {
            self.cols = row.len();
        }
        if row.len() != self.cols {
            return Err(LinalgError::ShapeMismatch { left: self.shape(), right: (1, row.len()) });
        }
        self.data.extend_from_slice(row);
        self.rows += 1;
        Ok(())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn check_same_shape(&self, other: &Self) -> Result<(), LinalgError> {
        if self.shape() != other.shape() {
            return Err(LinalgError::ShapeMismatch { left: self.shape(), right: other.shape() });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(a: &ComplexMatrix) -> Result<C64, LinalgError> {
    let (n, m) = a.shape();
    if n != m {
        return Err(LinalgError::ShapeMismatch { left: a.shape(), right: (m, n) });
    }
    let mut w = a.clone();
    let mut d = ONE;
    for k in 0..n {
        let mut piv = k;
        for i in (k + 1)..n {
            if w[(i, k)].norm() > w[(piv, k)].norm() {
                piv = i;
            }
        }
        if w[(piv, k)] == ZERO {
            return Ok(ZERO);
        }
        if piv != k {
            for j in 0..n {
                let t = w[(k, j)];
                w[(k, j)] = w[(piv, j)];
                w[(piv, j)] = t;
            }
            d = -d;
        }
        let p = w[(k, k)];
        d *= p;
        for i in (k + 1)..n {
            let f = w[(i, k)] / p;
            if f == ZERO {
                continue;
            }
            for j in k..n {
                let t = w[(k, j)];
                w[(i, j)] -= f * t;
            }
        }
    }
    Ok(d)
}

/// Determinant of the matrix whose columns are `cols` (all of length `cols.len()`).
pub fn det_columns(cols: &[&[C64]]) -> C64 {
    let n = cols.len();
    let m = ComplexMatrix::from_fn(n, n, |i, j| cols[j][i]);
    det(&m).unwrap_or(ZERO)
}

/// Cofactor vector `c` with `cᵀx = det(x, p₁, …, pₙ)` for `n = g − 1` points in Cᵍ.
pub fn wedge(points: &[Vec<C64>]) -> Vec<C64> {
    let g = points.len() + 1;
    (0..g)
        .map(|k| {
            let mut e = vec![ZERO; g];
            e[k] = ONE;
            let mut cols: Vec<&[C64]> = vec![&e];
            cols.extend(points.iter().map(|p| p.as_slice()));
            det_columns(&cols)
        })
        .collect()
}

/// Distance between the unit representatives of two projective points,
/// minimized over a common phase.
pub fn projective_distance(a: &[C64], b: &[C64]) -> f64 {
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return f64::INFINITY;
    }
    let ip = dot(a, b);
    let ph = if ip.norm() > 0.0 { ip.conj() / ip.norm() } else { ONE };
    a.iter().zip(b).map(|(x, y)| (x / na - ph * y / nb).norm_sqr()).sum::<f64>().sqrt()
}

/// Multiplies `v` by the unit scalar that makes `⟨reference, v⟩` real and non-negative.
pub fn align_phase(v: &[C64], reference: &[C64]) -> Vec<C64> {
    let ip = dot(v, reference);
    if ip.norm() == 0.0 {
        return v.to_vec();
    }
    let ph = ip / ip.norm();
    v.iter().map(|z| z * ph).collect()
}

/// Hermitian inner product `a† b`.
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Bilinear product `aᵗ b` (no conjugation).
pub fn dot_plain(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(v: &[C64]) -> Vec<C64> {
    let n = norm(v);
    if n == 0.0 {
        return v.to_vec();
    }
    v.iter().map(|z| z / n).collect()
}

pub fn sub_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale_vec(a: &[C64], s: C64) -> Vec<C64> {
    a.iter().map(|x| x * s).collect()
}

pub fn real_vec(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

/// Orthonormal basis of the complement of span(`basis`) in Cⁿ.
/// `basis` must already be orthonormal.
pub fn orthogonal_complement(basis: &[Vec<C64>], n: usize) -> Vec<Vec<C64>> {
    let mut all: Vec<Vec<C64>> = basis.to_vec();
    let mut out = Vec::new();
    let target = n.saturating_sub(basis.len());
    // Candidates ordered by how much of them survives projection, to keep
    // the Gram-Schmidt step well conditioned.
    let mut cand: Vec<(f64, usize)> = (0..n)
        .map(|k| {
            let proj: f64 = all.iter().map(|b| b[k].norm_sqr()).sum();
            (1.0 - proj, k)
        })
        .collect();
    cand.sort_by(|a, b| b.0.total_cmp(&a.0));
    for &(_, k) in &cand {
        if out.len() == target {
            break;
        }
        let mut v = vec![ZERO; n];
        v[k] = ONE;
        for _ in 0..2 {
            for b in &all {
                let c = dot(b, &v);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= c * bi;
                }
            }
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            let v: Vec<C64> = v.iter().map(|z| z / nv).collect();
            all.push(v.clone());
            out.push(v);
        }
    }
    out
}
