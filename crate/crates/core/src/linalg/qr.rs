use crate::error::{Error, Result};
use crate::matrix::{dot, norm, Field, Matrix, C64, ZERO};

use super::{svd_with, KernelConfig};

pub fn qr_orthonormalize(a: &Matrix) -> Result<Matrix> {
    qr_orthonormalize_with(a, &KernelConfig::default())
}

/// Orthonormal basis of the column span of a full-column-rank matrix.
///
/// Rank is decided from the singular values first; the basis itself comes
/// from modified Gram–Schmidt applied twice, which is orthogonal to working
/// precision once rank is known.
pub fn qr_orthonormalize_with(a: &Matrix, cfg: &KernelConfig) -> Result<Matrix> {
    let (m, n) = a.shape();
    if n == 0 || m < n {
        return Err(Error::RankDeficient {
            rank: m.min(n),
            cols: n,
        });
    }
    let s = svd_with(a, cfg)?;
    let cutoff = cfg.rank_threshold * s.largest();
    let rank = s.values.iter().filter(|&&x| x > cutoff).count();
    if rank < n || s.largest() == 0.0 {
        return Err(Error::RankDeficient { rank, cols: n });
    }
    let mut q: Vec<Vec<C64>> = Vec::with_capacity(n);
    for col in a.columns() {
        let mut v = col;
        for _ in 0..2 {
            for u in &q {
                let c = dot(u, &v);
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= c * y;
                }
            }
        }
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        q.push(v);
    }
    Ok(Matrix::from_columns(m, &q, a.field()))
}

/// `count` unit vectors in `C^dim` orthonormal to each other and to the
/// (orthonormal) `existing` vectors, built by projecting out standard basis
/// vectors in order of largest residual.
pub(crate) fn complete_orthonormal(
    dim: usize,
    existing: &[Vec<C64>],
    count: usize,
) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = existing.to_vec();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut best: Option<(f64, Vec<C64>)> = None;
        for k in 0..dim {
            let mut v = vec![ZERO; dim];
            v[k] = C64::new(1.0, 0.0);
            for _ in 0..2 {
                for u in &basis {
                    let c = dot(u, &v);
                    for (x, y) in v.iter_mut().zip(u) {
                        *x -= c * y;
                    }
                }
            }
            let nv = norm(&v);
            if best.as_ref().is_none_or(|(b, _)| nv > *b) {
                best = Some((nv, v));
            }
        }
        let (nv, mut v) = best.expect("dim > 0");
        assert!(nv > 1e-8, "cannot complete: space exhausted");
        v.iter_mut().for_each(|x| *x /= nv);
        basis.push(v.clone());
        out.push(v);
    }
    out
}

/// Orthonormal frame of the orthogonal complement of the span of an
/// orthonormal frame `q` (`n × p`), as an `n × (n − p)` matrix.
pub fn orthonormal_complement(q: &Matrix) -> Matrix {
    let n = q.rows();
    let extra = complete_orthonormal(n, &q.columns(), n - q.cols());
    let field = if q.field() == Field::Real {
        Field::Real
    } else {
        Field::Complex
    };
    Matrix::from_columns(n, &extra, field)
}
