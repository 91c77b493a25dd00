use crate::error::{Error, Result};
use crate::matrix::{Field, Matrix, C64};

use super::KernelConfig;

/// Spectral decomposition of a Hermitian matrix: `A · vectors = vectors · diag(values)`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Sorted decreasing.
    pub values: Vec<f64>,
    /// Unitary; column `j` belongs to `values[j]`.
    pub vectors: Matrix,
}

impl HermitianEigen {
    /// `V · diag(f(λ)) · V*`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let d: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        self.vectors
            .scale_columns(&d)
            .matmul(&self.vectors.adjoint())
    }
}

pub fn eig_hermitian(a: &Matrix) -> Result<HermitianEigen> {
    eig_hermitian_with(a, &KernelConfig::default())
}

/// Cyclic Jacobi for Hermitian matrices. Each step applies a unitary plane
/// rotation `G = diag(1, e^{-iφ}) · [[c, s], [-s, c]]` that zeroes one
/// off-diagonal pair.
pub fn eig_hermitian_with(a: &Matrix, cfg: &KernelConfig) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(Error::Domain(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let scale = a.max_abs().max(1.0);
    let defect = a.hermitian_defect();
    if defect > cfg.tolerance * scale {
        return Err(Error::Domain(format!(
            "matrix is not Hermitian (‖A − A*‖ = {defect:e})"
        )));
    }
    let field = a.field();
    let mut m = a.hermitian_part();
    let mut vecs = Matrix::identity(n).with_field(field);

    let frob = m.frobenius_norm();
    let mut sweep = 0;
    loop {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * 0.5 * frob || off == 0.0 {
            break;
        }
        if sweep >= cfg.max_sweeps {
            return Err(Error::Convergence {
                algorithm: "cyclic Jacobi eigensolver",
                rows: n,
                cols: n,
                sweeps: sweep,
            });
        }
        sweep += 1;
        for p in 0..n {
            for q in p + 1..n {
                let b = m[(p, q)];
                let g = b.norm();
                if g == 0.0 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                if g <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    m[(p, q)] = C64::new(0.0, 0.0);
                    m[(q, p)] = C64::new(0.0, 0.0);
                    continue;
                }
                let phase = b / g;
                let zeta = (aqq - app) / (2.0 * g);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let ph = phase.conj();
                // columns: A ← A G
                for r in 0..n {
                    let x = m[(r, p)];
                    let y = m[(r, q)] * ph;
                    m[(r, p)] = x * c - y * s;
                    m[(r, q)] = x * s + y * c;
                }
                // rows: A ← G* A
                for col in 0..n {
                    let x = m[(p, col)];
                    let y = m[(q, col)] * phase;
                    m[(p, col)] = x * c - y * s;
                    m[(q, col)] = x * s + y * c;
                }
                for r in 0..n {
                    let x = vecs[(r, p)];
                    let y = vecs[(r, q)] * ph;
                    vecs[(r, p)] = x * c - y * s;
                    vecs[(r, q)] = x * s + y * c;
                }
                m[(p, q)] = C64::new(0.0, 0.0);
                m[(q, p)] = C64::new(0.0, 0.0);
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
            }
        }
    }

    let mut order: Vec<(f64, usize)> = (0..n).map(|i| (m[(i, i)].re, i)).collect();
    order.sort_by(|x, y| y.0.total_cmp(&x.0));
    let idx: Vec<usize> = order.iter().map(|&(_, i)| i).collect();
    let vectors = vecs.select_columns(&idx);
    let vectors = if field == Field::Real {
        vectors.real_part()
    } else {
        vectors
    };
    Ok(HermitianEigen {
        values: order.into_iter().map(|(l, _)| l).collect(),
        vectors,
    })
}
