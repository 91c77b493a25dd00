//! Dense factorizations used by every geometric routine in the crate.
//!
//! Sizes here are small (a few dozen rows at most), so the algorithms are the
//! Jacobi family: one-sided Jacobi for the SVD and cyclic two-sided Jacobi for
//! Hermitian eigenproblems. Both deliver high relative accuracy, which matters
//! because angles are recovered from singular values close to 0 and 1.

mod chol;
mod eig;
mod qr;
mod svd;

pub use chol::{cholesky, cholesky_with, inv_sqrt_psd, inv_sqrt_psd_with};
pub(crate) use chol::upper_triangular_inverse;
pub use eig::{eig_hermitian, eig_hermitian_with, HermitianEigen};
pub use qr::{orthonormal_complement, qr_orthonormalize, qr_orthonormalize_with};
pub use svd::{svd, svd_with, Svd};

/// Numerical thresholds shared by the kernel routines.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KernelConfig {
    /// Relative tolerance for convergence and Hermitian checks.
    pub tolerance: f64,
    /// Columns whose singular value falls below `rank_threshold * sigma_max`
    /// count as rank-deficient.
    pub rank_threshold: f64,
    /// Pivots at or below `degeneracy_threshold * max_diag` fail Cholesky.
    pub degeneracy_threshold: f64,
    pub max_sweeps: usize,
}

pub const KERNEL_TOLERANCE: f64 = 1e-12;
pub const RANK_THRESHOLD: f64 = 1e-10;
pub const DEGENERACY_THRESHOLD: f64 = 1e-14;

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            tolerance: KERNEL_TOLERANCE,
            rank_threshold: RANK_THRESHOLD,
            degeneracy_threshold: DEGENERACY_THRESHOLD,
            max_sweeps: 80,
        }
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    use crate::matrix::{Matrix, C64};

    pub fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    pub fn gaussian_real(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
        let data: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
        Matrix::from_real(rows, cols, &data).unwrap()
    }

    pub fn gaussian_complex(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
        let data: Vec<C64> = (0..rows * cols)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Matrix::from_complex(rows, cols, data).unwrap()
    }
}
