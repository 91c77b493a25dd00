use crate::error::{Error, Result};
use crate::matrix::{Matrix, C64, ZERO};

use super::{eig_hermitian_with, KernelConfig};

pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    cholesky_with(a, &KernelConfig::default())
}

/// Upper-triangular `R` with `A = R* R`.
pub fn cholesky_with(a: &Matrix, cfg: &KernelConfig) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::Domain(format!(
            "Cholesky needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let defect = a.hermitian_defect();
    if defect > cfg.tolerance * scale.max(1.0) {
        return Err(Error::Domain(format!(
            "matrix is not Hermitian (‖A − A*‖ = {defect:e})"
        )));
    }
    let max_diag = (0..n).map(|i| a[(i, i)].re).fold(0.0, f64::max);
    let floor = cfg.degeneracy_threshold * max_diag;
    let mut r = Matrix::zeros(n, n).with_field(a.field());
    for i in 0..n {
        let s: f64 = (0..i).map(|k| r[(k, i)].norm_sqr()).sum();
        let d = a[(i, i)].re - s;
        if !(d > floor) || d <= 0.0 {
            return Err(Error::NotPositiveDefinite { pivot: i, value: d });
        }
        let rii = d.sqrt();
        r[(i, i)] = C64::new(rii, 0.0);
        for j in i + 1..n {
            let s: C64 = (0..i).map(|k| r[(k, i)].conj() * r[(k, j)]).sum();
            r[(i, j)] = (a[(i, j)] - s) / rii;
        }
    }
    Ok(r)
}

pub fn inv_sqrt_psd(a: &Matrix) -> Result<Matrix> {
    inv_sqrt_psd_with(a, &KernelConfig::default())
}

/// Hermitian `A^{-1/2}` of a positive definite matrix.
pub fn inv_sqrt_psd_with(a: &Matrix, cfg: &KernelConfig) -> Result<Matrix> {
    cholesky_with(a, cfg)?;
    let e = eig_hermitian_with(a, cfg)?;
    if let Some((idx, &l)) = e.values.iter().enumerate().find(|(_, &l)| l <= 0.0) {
        return Err(Error::NotPositiveDefinite {
            pivot: idx,
            value: l,
        });
    }
    let b = e.map_values(|l| 1.0 / l.sqrt());
    Ok(b.hermitian_part().with_field(a.field()))
}

/// Inverse of an upper-triangular matrix with nonzero diagonal.
pub(crate) fn upper_triangular_inverse(r: &Matrix) -> Matrix {
    let n = r.rows();
    let mut inv = Matrix::zeros(n, n).with_field(r.field());
    for j in 0..n {
        inv[(j, j)] = C64::new(1.0, 0.0) / r[(j, j)];
        for i in (0..j).rev() {
            let s: C64 = (i + 1..=j).map(|k| r[(i, k)] * inv[(k, j)]).sum();
            inv[(i, j)] = if s == ZERO { ZERO } else { -s / r[(i, i)] };
        }
    }
    inv
}
