//! Dense row-major matrices over the complex numbers.
//!
//! Real matrices are a restriction: the entries are stored as complex values
//! with zero imaginary part and the [`Field`] tag records that the matrix was
//! built from real data. Arithmetic propagates the tag (real ⊗ real = real,
//! anything involving a complex operand is complex).

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn join(self, other: Field) -> Field {
        if self == Field::Real && other == Field::Real {
            Field::Real
        } else {
            Field::Complex
        }
    }
}

#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    field: Field,
    data: Vec<C64>,
}

impl Matrix {
    /// Builds a matrix from row-major complex entries, rejecting NaN/Inf.
    pub fn new(rows: usize, cols: usize, field: Field, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                op: "Matrix::new",
                detail: format!("{} entries for a {rows}x{cols} matrix", data.len()),
            });
        }
        if let Some(k) = data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite {
                row: k / cols.max(1),
                col: k % cols.max(1),
            });
        }
        let field = if field == Field::Real && data.iter().any(|z| z.im != 0.0) {
            Field::Complex
        } else {
            field
        };
        Ok(Self {
            rows,
            cols,
            field,
            data,
        })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            Field::Real,
            data.iter().map(|&x| C64::new(x, 0.0)).collect(),
        )
    }

    pub fn from_complex(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        Self::new(rows, cols, Field::Complex, data)
    }

    /// Real matrix from nested rows. Panics on ragged input; meant for tests
    /// and literals.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let flat: Vec<f64> = rows.iter().flat_map(|row| row.iter().copied()).collect();
        Self::from_real(r, c, &flat).expect("finite literal")
    }

    pub(crate) fn from_fn(
        rows: usize,
        cols: usize,
        field: Field,
        mut f: impl FnMut(usize, usize) -> C64,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self {
            rows,
            cols,
            field,
            data,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            field: Field::Real,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, Field::Real, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_diag_real(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, Field::Real, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// Matrix whose columns are the given vectors (all of equal length).
    pub fn from_columns(rows: usize, columns: &[Vec<C64>], field: Field) -> Self {
        Self::from_fn(rows, columns.len(), field, |i, j| columns[j][i])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub(crate) fn with_field(mut self, field: Field) -> Self {
        self.field = field;
        self
    }

    /// Drops imaginary parts and tags the result real.
    pub fn real_part(&self) -> Matrix {
        Self::from_fn(self.rows, self.cols, Field::Real, |i, j| {
            C64::new(self[(i, j)].re, 0.0)
        })
    }

    /// Real entries when the matrix is real, `None` otherwise.
    pub fn to_real_vec(&self) -> Option<Vec<f64>> {
        if self.data.iter().all(|z| z.im == 0.0) {
            Some(self.data.iter().map(|z| z.re).collect())
        } else {
            None
        }
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[C64]) {
        for (i, &z) in v.iter().enumerate() {
            self[(i, j)] = z;
        }
    }

    pub fn columns(&self) -> Vec<Vec<C64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        Self::from_fn(self.rows, idx.len(), self.field, |i, j| self[(i, idx[j])])
    }

    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "hstack row mismatch");
        let c = self.cols;
        Self::from_fn(
            self.rows,
            self.cols + other.cols,
            self.field.join(other.field),
            |i, j| {
                if j < c {
                    self[(i, j)]
                } else {
                    other[(i, j - c)]
                }
            },
        )
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Matrix {
        Self::from_fn(self.cols, self.rows, self.field, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Matrix {
        Self::from_fn(self.cols, self.rows, self.field, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Matrix {
        Self::from_fn(self.rows, self.cols, self.field, |i, j| self[(i, j)].conj())
    }

    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul: {}x{} times {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Matrix::zeros(self.rows, rhs.cols).with_field(self.field.join(rhs.field));
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `self^* · rhs` without materialising the adjoint.
    pub fn adjoint_mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.rows, rhs.rows, "adjoint_mul row mismatch");
        Self::from_fn(self.cols, rhs.cols, self.field.join(rhs.field), |i, j| {
            (0..self.rows)
                .map(|k| self[(k, i)].conj() * rhs[(k, j)])
                .sum()
        })
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|k| self[(i, k)] * v[k]).sum())
            .collect()
    }

    fn zip_with(&self, rhs: &Matrix, f: impl Fn(C64, C64) -> C64) -> Matrix {
        assert_eq!(self.shape(), rhs.shape(), "elementwise shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            field: self.field.join(rhs.field),
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, rhs: &Matrix) -> Matrix {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        self.zip_with(rhs, |a, b| a - b)
    }

    /// Entrywise (Schur) product.
    pub fn hadamard(&self, rhs: &Matrix) -> Matrix {
        self.zip_with(rhs, |a, b| a * b)
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            field: self.field,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_c(&self, s: C64) -> Matrix {
        let field = if s.im == 0.0 { self.field } else { Field::Complex };
        Matrix {
            rows: self.rows,
            cols: self.cols,
            field,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    /// Scales column `j` by `d[j]`.
    pub fn scale_columns(&self, d: &[f64]) -> Matrix {
        assert_eq!(d.len(), self.cols);
        Self::from_fn(self.rows, self.cols, self.field, |i, j| self[(i, j)] * d[j])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, rhs: &Matrix) -> f64 {
        self.sub(rhs).max_abs()
    }

    /// ‖A − A*‖ in the max-entry norm; zero exactly for Hermitian input.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.sub(&self.adjoint()).max_abs()
    }

    /// `(A + A*)/2`.
    pub fn hermitian_part(&self) -> Matrix {
        self.add(&self.adjoint()).scale(0.5)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} ({:?})", self.rows, self.cols, self.field)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| {
                    let z = self[(i, j)];
                    if self.field == Field::Real {
                        format!("{:>10.6}", z.re)
                    } else {
                        format!("{:>10.6}{:+.6}i", z.re, z.im)
                    }
                })
                .collect();
            writeln!(f, "  [{}]", row.join(" "))?;
        }
        Ok(())
    }
}

pub(crate) fn dot(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub(crate) fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
