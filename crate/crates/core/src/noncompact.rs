//! Noncompact analogues: the cone of positive-definite matrices, Hermitian
//! eigenvalue perturbation (Lidskii), and the ball of complex symmetric
//! matrices with operator norm below one.
//!
//! Positive-definite angles are signed, so the orbit hulls there use the
//! symmetric group rather than signed permutations.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{cholesky, eig_hermitian, inv_sqrt_psd, svd, upper_triangular_inverse};
use crate::matrix::Matrix;
use crate::metrics::TriangleReport;
use crate::norms::NormSpec;
use crate::weyl::{orbit_membership, Group, MembershipResult, SignedPermutation};

/// Hermitian and symmetry defects are measured against this, relative to
/// `max(1, max |a_ij|)`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;
/// Ball points need `σ_max(T) ≤ 1 − BALL_MARGIN`.
pub const BALL_MARGIN: f64 = 1e-9;
/// Singular values of `Λ[T, S]` within this of 1 from below are clamped;
/// anything lower is reported as a numerical inconsistency.
pub const BALL_CONSISTENCY: f64 = 1e-6;

fn relative_defect(defect: f64, a: &Matrix) -> f64 {
    defect / a.max_abs().max(1.0)
}

fn check_square(a: &Matrix, op: &'static str) -> Result<()> {
    if !a.is_square() || a.rows() == 0 {
        return Err(Error::DimensionMismatch {
            op,
            detail: format!("need a non-empty square matrix, got {}x{}", a.rows(), a.cols()),
        });
    }
    Ok(())
}

fn check_same_size(a: &Matrix, b: &Matrix, op: &'static str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            op,
            detail: format!("{:?} vs {:?}", a.shape(), b.shape()),
        });
    }
    Ok(())
}

fn check_hermitian(a: &Matrix, op: &'static str) -> Result<()> {
    check_square(a, op)?;
    let d = relative_defect(a.hermitian_defect(), a);
    if d > SYMMETRY_TOLERANCE {
        return Err(Error::Domain(format!("{op}: matrix is not Hermitian (defect {d:e})")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosDefPoint {
    matrix: Matrix,
}

impl PosDefPoint {
    pub fn new(matrix: Matrix) -> Result<Self> {
        check_hermitian(&matrix, "PosDefPoint")?;
        let matrix = matrix.hermitian_part();
        cholesky(&matrix)?;
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn size(&self) -> usize {
        self.matrix.rows()
    }
}

/// Roots of `det(L − e^ψ M) = 0`: the logs of the eigenvalues of
/// `R^{-*} L R^{-1}` where `M = R* R`, sorted decreasing.
pub fn posdef_angles(l: &PosDefPoint, m: &PosDefPoint) -> Result<Vec<f64>> {
    check_same_size(l.matrix(), m.matrix(), "posdef_angles")?;
    let r = cholesky(m.matrix())?;
    let r_inv = upper_triangular_inverse(&r);
    let k = r_inv.adjoint().matmul(l.matrix()).matmul(&r_inv).hermitian_part();
    let eig = eig_hermitian(&k)?;
    eig.values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if v > 0.0 {
                Ok(v.ln())
            } else {
                Err(Error::NotPositiveDefinite { pivot: i, value: v })
            }
        })
        .collect()
}

/// `Ψ[L, N] − Ψ[L, M]` in the permutation-orbit hull of `Ψ[M, N]`.
pub fn posdef_triangle_check(
    l: &PosDefPoint,
    m: &PosDefPoint,
    n: &PosDefPoint,
) -> Result<TriangleReport> {
    let phi = posdef_angles(l, m)?;
    let psi = posdef_angles(m, n)?;
    let theta = posdef_angles(l, n)?;
    let x: Vec<f64> = theta.iter().zip(&phi).map(|(t, f)| t - f).collect();
    let r = orbit_membership(&x, &psi, Group::PermutationOnly, false)?;
    Ok(TriangleReport {
        inside: r.inside,
        best_slack: r.slack,
        witness: r.inside.then(|| SignedPermutation::identity(phi.len())),
        certificate: None,
        near_cut_locus: false,
        phi,
        psi,
        theta,
    })
}

/// Eigenvalues of a Hermitian matrix, decreasing.
pub fn hermitian_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    check_hermitian(a, "hermitian_eigenvalues")?;
    Ok(eig_hermitian(&a.hermitian_part())?.values)
}

/// `λ(X + Z) − λ(X)` in the permutation-orbit hull of `λ(Z)`.
pub fn lidskii_check(x: &Matrix, z: &Matrix) -> Result<MembershipResult> {
    check_same_size(x, z, "lidskii_check")?;
    check_hermitian(x, "lidskii_check")?;
    check_hermitian(z, "lidskii_check")?;
    let sum = hermitian_eigenvalues(&x.add(z))?;
    let base = hermitian_eigenvalues(x)?;
    let shift = hermitian_eigenvalues(z)?;
    let query: Vec<f64> = sum.iter().zip(&base).map(|(a, b)| a - b).collect();
    orbit_membership(&query, &shift, Group::PermutationOnly, false)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint {
    matrix: Matrix,
}

impl BallPoint {
    pub fn new(matrix: Matrix) -> Result<Self> {
        check_square(&matrix, "BallPoint")?;
        let d = relative_defect(matrix.sub(&matrix.transpose()).max_abs(), &matrix);
        if d > SYMMETRY_TOLERANCE {
            return Err(Error::Domain(format!(
                "ball points must be symmetric (T = T^t), defect {d:e}"
            )));
        }
        let top = svd(&matrix)?.largest();
        if top > 1.0 - BALL_MARGIN {
            return Err(Error::Domain(format!(
                "operator norm {top} is not below 1 - {BALL_MARGIN:e}"
            )));
        }
        let sym = matrix.add(&matrix.transpose()).scale(0.5);
        Ok(Self { matrix: sym })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn size(&self) -> usize {
        self.matrix.rows()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallAngles {
    /// `arcosh` of the singular values of `Λ`, sorted increasing.
    pub angles: Vec<f64>,
    /// Singular values of `Λ[T, S]`, sorted increasing, before clamping.
    pub lambda_singular_values: Vec<f64>,
}

/// `Λ[T, S] = (1 − TT*)^{-1/2} (1 − TS*) (1 − SS*)^{-1/2}`.
pub fn ball_lambda(t: &BallPoint, s: &BallPoint) -> Result<Matrix> {
    check_same_size(t.matrix(), s.matrix(), "ball_lambda")?;
    let (t, s) = (t.matrix(), s.matrix());
    let id = Matrix::identity(t.rows());
    let a = inv_sqrt_psd(&id.sub(&t.matmul(&t.adjoint())).hermitian_part())?;
    let b = inv_sqrt_psd(&id.sub(&s.matmul(&s.adjoint())).hermitian_part())?;
    Ok(a.matmul(&id.sub(&t.matmul(&s.adjoint()))).matmul(&b))
}

pub fn ball_angles(t: &BallPoint, s: &BallPoint) -> Result<Vec<f64>> {
    Ok(ball_angles_detailed(t, s)?.angles)
}

/// Besides `σ(Λ)`, computes `σ(K)` for
/// `K = (1 − TT*)^{-1/2} (T − S) (1 − S*S)^{-1/2}`, which satisfies
/// `ΛΛ* = 1 + KK*`. Angles come from `arsinh σ(K)` while `σ(Λ) < 2`
/// (where `arcosh` loses half the digits) and from `arcosh σ(Λ)` above.
pub fn ball_angles_detailed(t: &BallPoint, s: &BallPoint) -> Result<BallAngles> {
    let lambda = ball_lambda(t, s)?;
    let mut sv = svd(&lambda)?.values;
    sv.reverse();
    if let Some(&low) = sv.iter().find(|&&v| v < 1.0 - BALL_CONSISTENCY) {
        return Err(Error::NumericalConsistency(format!(
            "singular value {low} of the ball cross matrix is below 1"
        )));
    }

    let (tm, sm) = (t.matrix(), s.matrix());
    let id = Matrix::identity(tm.rows());
    let a = inv_sqrt_psd(&id.sub(&tm.matmul(&tm.adjoint())).hermitian_part())?;
    let b = inv_sqrt_psd(&id.sub(&sm.adjoint_mul(sm)).hermitian_part())?;
    let k = a.matmul(&tm.sub(sm)).matmul(&b);
    let mut sinh = svd(&k)?.values;
    sinh.reverse();

    let angles = sv
        .iter()
        .zip(&sinh)
        .map(|(&c, &sh)| if c < 2.0 { sh.asinh() } else { c.max(1.0).acosh() })
        .collect();
    Ok(BallAngles {
        angles,
        lambda_singular_values: sv,
    })
}

pub fn ball_distance(t: &BallPoint, s: &BallPoint, norm: &NormSpec) -> Result<f64> {
    norm.eval(&ball_angles(t, s)?)
}
