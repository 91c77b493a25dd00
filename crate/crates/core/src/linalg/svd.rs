use crate::error::{Error, Result};
use crate::matrix::{dot, norm, Matrix, C64, ZERO};

use super::qr::complete_orthonormal;
use super::KernelConfig;

/// Thin singular value decomposition `A = left · diag(values) · right*`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `m × k` with orthonormal columns, `k = min(m, n)`.
    pub left: Matrix,
    /// Sorted decreasing, non-negative.
    pub values: Vec<f64>,
    /// `n × k` with orthonormal columns.
    pub right: Matrix,
}

impl Svd {
    pub fn reconstruct(&self) -> Matrix {
        self.left
            .scale_columns(&self.values)
            .matmul(&self.right.adjoint())
    }

    pub fn smallest(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn largest(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

pub fn svd(a: &Matrix) -> Result<Svd> {
    svd_with(a, &KernelConfig::default())
}

pub fn svd_with(a: &Matrix, cfg: &KernelConfig) -> Result<Svd> {
    if a.rows() < a.cols() {
        let t = one_sided_jacobi(&a.adjoint(), cfg)?;
        return Ok(Svd {
            left: t.right,
            values: t.values,
            right: t.left,
        });
    }
    one_sided_jacobi(a, cfg)
}

/// Hestenes one-sided Jacobi for `m ≥ n`: rotate column pairs of `A·V` until
/// all columns are mutually orthogonal; their norms are the singular values.
fn one_sided_jacobi(a: &Matrix, cfg: &KernelConfig) -> Result<Svd> {
    let (m, n) = a.shape();
    let field = a.field();
    let mut cols = a.columns();
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut e = vec![ZERO; n];
            e[j] = C64::new(1.0, 0.0);
            e
        })
        .collect();

    let threshold = f64::EPSILON * (m as f64).sqrt();
    // pairs whose inner product is below rounding of the whole matrix are
    // left alone; otherwise noise-level columns can rotate forever
    let scale_sq = cols.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>();
    let floor = f64::EPSILON * f64::EPSILON * scale_sq;
    let mut converged = n < 2;
    let mut sweep = 0;
    while !converged {
        if sweep >= cfg.max_sweeps {
            return Err(Error::Convergence {
                algorithm: "one-sided Jacobi SVD",
                rows: m,
                cols: n,
                sweeps: sweep,
            });
        }
        sweep += 1;
        converged = true;
        for i in 0..n - 1 {
            for j in i + 1..n {
                let alpha = cols[i].iter().map(|z| z.norm_sqr()).sum::<f64>();
                let beta = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>();
                let gamma = dot(&cols[i], &cols[j]);
                let g = gamma.norm();
                if g <= floor || g <= threshold * (alpha * beta).sqrt() {
                    continue;
                }
                converged = false;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, i, j, c, s, phase);
                rotate(&mut v, i, j, c, s, phase);
            }
        }
    }

    let mut order: Vec<(f64, usize)> = cols.iter().enumerate().map(|(j, c)| (norm(c), j)).collect();
    order.sort_by(|x, y| y.0.total_cmp(&x.0));
    let values: Vec<f64> = order.iter().map(|&(s, _)| s).collect();
    let sigma_max = values.first().copied().unwrap_or(0.0);

    let mut left_cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut missing = 0;
    for &(s, j) in &order {
        if s > sigma_max * f64::EPSILON * (n as f64) && s > f64::MIN_POSITIVE {
            left_cols.push(cols[j].iter().map(|z| z / s).collect());
        } else {
            missing += 1;
        }
    }
    if missing > 0 {
        let extra = complete_orthonormal(m, &left_cols, missing);
        left_cols.extend(extra);
    }
    let right_cols: Vec<Vec<C64>> = order.iter().map(|&(_, j)| v[j].clone()).collect();

    Ok(Svd {
        left: Matrix::from_columns(m, &left_cols, field),
        values,
        right: Matrix::from_columns(n, &right_cols, field),
    })
}

/// Column update `(x_i, x_j) ← (c x_i − s φ̄ x_j, s x_i + c φ̄ x_j)` where `φ`
/// is the unit phase of `⟨x_i, x_j⟩`.
fn rotate(cols: &mut [Vec<C64>], i: usize, j: usize, c: f64, s: f64, phase: C64) {
    let ph = phase.conj();
    let (lo, hi) = cols.split_at_mut(j);
    let (xi, xj) = (&mut lo[i], &mut hi[0]);
    for (a, b) in xi.iter_mut().zip(xj.iter_mut()) {
        let bj = ph * *b;
        let ai = *a;
        *a = ai * c - bj * s;
        *b = ai * s + bj * c;
    }
}
