//! Subspaces of `K^{p+q}` (`K = R` or `C`) and the Jordan (principal) angles
//! between them.
//!
//! A [`Subspace`] is stored as an orthonormal frame. Angles come out sorted
//! increasing in `[0, π/2]`; cosines are sorted decreasing so that index `j`
//! refers to the same principal pair in both conventions.
//!
//! Small angles are poorly conditioned through `arccos` alone (an error of
//! `1e-16` in a cosine near 1 becomes `1e-8` in the angle), so the routes that
//! have access to both subspaces also compute sines from the component of one
//! frame orthogonal to the other and use `arcsin` below `π/4`.

use std::f64::consts::FRAC_PI_2;
use std::ops::Deref;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    self, cholesky, eig_hermitian, orthonormal_complement, qr_orthonormalize,
    qr_orthonormalize_with, svd, KernelConfig,
};
use crate::matrix::{dot, norm, Field, Matrix, C64};

/// Orthonormality tolerance for frames handed in from outside.
pub const FRAME_TOLERANCE: f64 = 1e-10;
/// Minimal angle gap and boundary margin for [`angle_rate`].
pub const GENERICITY_THRESHOLD: f64 = 1e-6;

/// A `p`-dimensional subspace of a `(p+q)`-dimensional space, `1 ≤ p ≤ q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    frame: Matrix,
}

impl Subspace {
    /// Span of the columns of an arbitrary full-rank basis.
    pub fn from_basis(basis: &Matrix) -> Result<Self> {
        Self::from_basis_with(basis, &KernelConfig::default())
    }

    pub fn from_basis_with(basis: &Matrix, cfg: &KernelConfig) -> Result<Self> {
        check_dims(basis.rows(), basis.cols())?;
        let frame = qr_orthonormalize_with(basis, cfg)?;
        Ok(Self { frame })
    }

    /// Wraps a frame that is already orthonormal (checked to 1e-10).
    pub fn from_frame(frame: Matrix) -> Result<Self> {
        check_dims(frame.rows(), frame.cols())?;
        let defect = frame
            .adjoint_mul(&frame)
            .max_abs_diff(&Matrix::identity(frame.cols()));
        if defect > FRAME_TOLERANCE {
            return Err(Error::Domain(format!(
                "frame is not orthonormal (defect {defect:e})"
            )));
        }
        Ok(Self { frame })
    }

    /// Span of the first `p` standard basis vectors of `R^{p+q}`.
    pub fn coordinate(p: usize, q: usize) -> Result<Self> {
        check_dims(p + q, p)?;
        Ok(Self {
            frame: Matrix::identity(p + q).select_columns(&(0..p).collect::<Vec<_>>()),
        })
    }

    pub fn frame(&self) -> &Matrix {
        &self.frame
    }

    pub fn dim(&self) -> usize {
        self.frame.cols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.rows()
    }

    pub fn codim(&self) -> usize {
        self.ambient_dim() - self.dim()
    }

    pub fn field(&self) -> Field {
        self.frame.field()
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> Matrix {
        self.frame.matmul(&self.frame.adjoint())
    }

    /// Image under a unitary (or orthogonal) map of the ambient space.
    pub fn transform(&self, g: &Matrix) -> Result<Self> {
        if g.shape() != (self.ambient_dim(), self.ambient_dim()) {
            return Err(Error::DimensionMismatch {
                op: "Subspace::transform",
                detail: format!(
                    "{}x{} map on a {}-dimensional space",
                    g.rows(),
                    g.cols(),
                    self.ambient_dim()
                ),
            });
        }
        Self::from_basis(&g.matmul(&self.frame))
    }

    /// Same subspace, different orthonormal frame `frame · u` for unitary `u`.
    pub fn reframe(&self, u: &Matrix) -> Result<Self> {
        Self::from_frame(self.frame.matmul(u))
    }

    /// Max-entry distance between orthogonal projectors.
    pub fn span_distance(&self, other: &Subspace) -> f64 {
        if self.ambient_dim() != other.ambient_dim() {
            return f64::INFINITY;
        }
        self.projector().max_abs_diff(&other.projector())
    }

    pub fn orthogonal_complement(&self) -> Matrix {
        orthonormal_complement(&self.frame)
    }
}

fn check_dims(ambient: usize, p: usize) -> Result<()> {
    if p == 0 || 2 * p > ambient {
        return Err(Error::DimensionMismatch {
            op: "Subspace",
            detail: format!("need 1 <= p <= q, got p = {p}, p + q = {ambient}"),
        });
    }
    Ok(())
}

fn check_pair(op: &'static str, l: &Subspace, m: &Subspace) -> Result<()> {
    if l.dim() != m.dim() || l.ambient_dim() != m.ambient_dim() {
        return Err(Error::DimensionMismatch {
            op,
            detail: format!(
                "Gr({}, {}) vs Gr({}, {})",
                l.dim(),
                l.codim(),
                m.dim(),
                m.codim()
            ),
        });
    }
    Ok(())
}

/// Angles sorted increasing, each in `[0, π/2]`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(transparent)]
pub struct AngleVector(Vec<f64>);

impl AngleVector {
    /// Sorts and validates; entries must lie in `[0, π/2]` up to 1e-12 and are
    /// clamped into range.
    pub fn new(mut angles: Vec<f64>) -> Result<Self> {
        for &a in &angles {
            if !a.is_finite() || !(-1e-12..=FRAC_PI_2 + 1e-12).contains(&a) {
                return Err(Error::Domain(format!("angle {a} outside [0, pi/2]")));
            }
        }
        angles.iter_mut().for_each(|a| *a = a.clamp(0.0, FRAC_PI_2));
        angles.sort_by(f64::total_cmp);
        Ok(Self(angles))
    }

    pub fn cosines(&self) -> Vec<f64> {
        self.0.iter().map(|a| a.cos()).collect()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn max_abs_diff(&self, other: &AngleVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Deref for AngleVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Combines cosines (sorted decreasing) and sines (sorted increasing) of the
/// same angles into an [`AngleVector`].
fn angles_from_cos_sin(cos_desc: &[f64], sin_asc: &[f64]) -> AngleVector {
    let angles = cos_desc
        .iter()
        .zip(sin_asc)
        .map(|(&c, &s)| {
            let c = c.clamp(0.0, 1.0);
            let s = s.clamp(0.0, 1.0);
            if s < c {
                s.asin()
            } else {
                c.acos()
            }
        })
        .collect();
    let mut v = AngleVector(angles);
    v.0.sort_by(f64::total_cmp);
    v
}

fn angles_from_cos(cos_desc: &[f64]) -> AngleVector {
    let mut v = AngleVector(
        cos_desc
            .iter()
            .map(|&c| c.clamp(0.0, 1.0).acos())
            .collect(),
    );
    v.0.sort_by(f64::total_cmp);
    v
}

fn ascending(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Jordan angles from the singular values of the cross-Gram matrix of the
/// two frames.
pub fn jordan_angles(l: &Subspace, m: &Subspace) -> Result<AngleVector> {
    check_pair("jordan_angles", l, m)?;
    let (f, g) = (l.frame(), m.frame());
    let cross = f.adjoint_mul(g);
    let cos = svd(&cross)?.values;
    // component of M's frame orthogonal to L
    let residual = g.sub(&f.matmul(&cross));
    let sin = ascending(svd(&residual)?.values);
    Ok(angles_from_cos_sin(&cos, &sin))
}

/// Angles as singular values of the orthogonal projection `Π_M : L → M`,
/// expressed in the frames of `L` and `M`. Sines come from `Π_{M⊥} : L → M⊥`.
pub fn projector_angles(l: &Subspace, m: &Subspace) -> Result<AngleVector> {
    check_pair("projector_angles", l, m)?;
    let (f, g) = (l.frame(), m.frame());
    let pm = m.projector();
    let compressed = g.adjoint_mul(&pm.matmul(f));
    let cos = svd(&compressed)?.values;
    let n = l.ambient_dim();
    let pm_perp = Matrix::identity(n).sub(&pm);
    let sin = ascending(svd(&pm_perp.matmul(f))?.values);
    Ok(angles_from_cos_sin(&cos, &sin))
}

/// Angles from Gram data of two arbitrary (non-orthogonal) bases:
/// `U = (⟨u_i, u_j⟩)`, `V = (⟨v_i, v_j⟩)`, `W = (⟨u_i, v_j⟩)`. The squared
/// cosines are the eigenvalues of `U⁻¹ W V⁻¹ W*`, computed here through the
/// similar Hermitian matrix `K K*` with `K = R_U^{-*} W R_V^{-1}`.
pub fn angles_from_gram(u: &Matrix, v: &Matrix, w: &Matrix) -> Result<AngleVector> {
    let p = u.rows();
    if u.shape() != (p, p) || v.shape() != (p, p) || w.shape() != (p, p) {
        return Err(Error::DimensionMismatch {
            op: "angles_from_gram",
            detail: format!(
                "U {:?}, V {:?}, W {:?} must all be {p}x{p}",
                u.shape(),
                v.shape(),
                w.shape()
            ),
        });
    }
    let ru = cholesky(u).map_err(|e| Error::DegenerateBasis(format!("U: {e}")))?;
    let rv = cholesky(v).map_err(|e| Error::DegenerateBasis(format!("V: {e}")))?;
    let ru_inv = linalg::upper_triangular_inverse(&ru);
    let rv_inv = linalg::upper_triangular_inverse(&rv);
    let k = ru_inv.adjoint().matmul(w).matmul(&rv_inv);
    let kk = k.matmul(&k.adjoint()).hermitian_part();
    let eig = eig_hermitian(&kk)?;
    let cos: Vec<f64> = eig
        .values
        .iter()
        .map(|&l| l.clamp(0.0, 1.0).sqrt())
        .collect();
    Ok(angles_from_cos(&cos))
}

/// Gram-matrix route starting from explicit bases (columns of `a` span `L`,
/// columns of `b` span `M`).
pub fn angles_from_bases(a: &Matrix, b: &Matrix) -> Result<AngleVector> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            op: "angles_from_bases",
            detail: format!("{:?} vs {:?}", a.shape(), b.shape()),
        });
    }
    angles_from_gram(&a.adjoint_mul(a), &b.adjoint_mul(b), &a.adjoint_mul(b))
}

/// Paired orthonormal bases `e_j ∈ L`, `f_j ∈ M` with a diagonal cross-Gram
/// matrix.
#[derive(Debug, Clone)]
pub struct PrincipalPair {
    pub e_basis: Matrix,
    pub f_basis: Matrix,
    /// `⟨e_j, f_j⟩`, sorted decreasing.
    pub cosines: Vec<f64>,
}

impl PrincipalPair {
    /// Largest deviation of `⟨e_i, f_j⟩` from `δ_ij · cosines_j`.
    pub fn diagonality_defect(&self) -> f64 {
        let cross = self.e_basis.adjoint_mul(&self.f_basis);
        let target = Matrix::from_diag_real(&self.cosines);
        cross.max_abs_diff(&target)
    }
}

pub fn principal_vectors(l: &Subspace, m: &Subspace) -> Result<PrincipalPair> {
    check_pair("principal_vectors", l, m)?;
    let cross = l.frame().adjoint_mul(m.frame());
    let s = svd(&cross)?;
    Ok(PrincipalPair {
        e_basis: l.frame().matmul(&s.left),
        f_basis: m.frame().matmul(&s.right),
        cosines: s.values.iter().map(|c| c.min(1.0)).collect(),
    })
}

/// Which min-max characterization of `λ_k` the probe samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinimaxForm {
    /// `λ_k = max over k-dim P ⊂ L of min over unit v ∈ P of ‖Π_M v‖`.
    MaxMin,
    /// `λ_k = min over Q ⊂ L with dim Q = p − k + 1 of max over unit v ∈ Q of
    /// ‖Π_M v‖`.
    MinMax,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimaxProbe {
    /// The inner extremum at the principal subspace; equals `λ_k`.
    pub certified_value: f64,
    /// `λ_k` from the SVD.
    pub lambda_k: f64,
    /// Worst amount by which a sampled subspace beat `λ_k` in the forbidden
    /// direction (zero or negative when the characterization holds).
    pub max_violation: f64,
}

/// Samples random subspaces of `L` to probe the min-max characterization of
/// the `k`-th cosine (`1 ≤ k ≤ p`). The inner extremum over a subspace `P`
/// with orthonormal frame `F·B` is a singular value of `G* F B`, because
/// `max_{w ∈ M, ‖w‖=1} ⟨v, w⟩ = ‖Π_M v‖`.
pub fn minimax_probe(
    l: &Subspace,
    m: &Subspace,
    k: usize,
    form: MinimaxForm,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<MinimaxProbe> {
    check_pair("minimax_probe", l, m)?;
    let p = l.dim();
    if k == 0 || k > p {
        return Err(Error::Domain(format!("k = {k} outside 1..={p}")));
    }
    let cross = l.frame().adjoint_mul(m.frame());
    let s = svd(&cross)?;
    let lambda_k = s.values[k - 1];
    // the inner extremum for a subspace with frame F·B, B orthonormal in K^p
    let inner = |b: &Matrix| -> Result<f64> {
        let vals = svd(&cross.adjoint().matmul(b))?.values;
        Ok(match form {
            MinimaxForm::MaxMin => *vals.last().unwrap(),
            MinimaxForm::MinMax => vals[0],
        })
    };
    let (sub_dim, principal_cols): (usize, Vec<usize>) = match form {
        MinimaxForm::MaxMin => (k, (0..k).collect()),
        MinimaxForm::MinMax => (p - k + 1, (k - 1..p).collect()),
    };
    let certified_value = inner(&s.left.select_columns(&principal_cols))?;

    let mut max_violation = f64::NEG_INFINITY;
    for _ in 0..trials {
        let g = crate::harness::gaussian_matrix(p, sub_dim, l.field(), rng);
        let b = qr_orthonormalize(&g)?;
        let value = inner(&b)?;
        let excess = match form {
            MinimaxForm::MaxMin => value - lambda_k,
            MinimaxForm::MinMax => lambda_k - value,
        };
        max_violation = max_violation.max(excess);
    }
    Ok(MinimaxProbe {
        certified_value,
        lambda_k,
        max_violation: if trials == 0 { 0.0 } else { max_violation },
    })
}

/// A tangent vector at `base`, identified with an operator `base → base⊥`.
/// `map` is its `q × p` matrix in the frame of `base` and the stored
/// orthonormal frame `complement` of `base⊥`.
#[derive(Debug, Clone)]
pub struct TangentVector {
    base: Subspace,
    complement: Matrix,
    map: Matrix,
}

impl TangentVector {
    /// Uses a canonical complement frame computed from `base`.
    pub fn new(base: Subspace, map: Matrix) -> Result<Self> {
        let complement = base.orthogonal_complement();
        Self::with_complement(base, complement, map)
    }

    pub fn with_complement(base: Subspace, complement: Matrix, map: Matrix) -> Result<Self> {
        let (n, p) = base.frame().shape();
        let q = n - p;
        if complement.shape() != (n, q) || map.shape() != (q, p) {
            return Err(Error::DimensionMismatch {
                op: "TangentVector",
                detail: format!(
                    "complement {:?} (want {n}x{q}), map {:?} (want {q}x{p})",
                    complement.shape(),
                    map.shape()
                ),
            });
        }
        let ortho = complement
            .adjoint_mul(&complement)
            .max_abs_diff(&Matrix::identity(q));
        let cross = base.frame().adjoint_mul(&complement).max_abs();
        if ortho > FRAME_TOLERANCE || cross > FRAME_TOLERANCE {
            return Err(Error::Domain(format!(
                "complement frame invalid (orthonormality {ortho:e}, overlap {cross:e})"
            )));
        }
        Ok(Self {
            base,
            complement,
            map,
        })
    }

    /// Tangent vector given as an ambient operator `h` (only `h` restricted to
    /// `base` and projected to `base⊥` matters).
    pub fn from_operator(base: Subspace, h: &Matrix) -> Result<Self> {
        let complement = base.orthogonal_complement();
        let map = complement.adjoint_mul(&h.matmul(base.frame()));
        Self::with_complement(base, complement, map)
    }

    pub fn zero(base: Subspace) -> Self {
        let (n, p) = base.frame().shape();
        Self::new(base, Matrix::zeros(n - p, p)).expect("consistent shapes")
    }

    pub fn base(&self) -> &Subspace {
        &self.base
    }

    pub fn complement(&self) -> &Matrix {
        &self.complement
    }

    pub fn map(&self) -> &Matrix {
        &self.map
    }

    /// The ambient `(p+q) × (p+q)` operator `C · map · F*`.
    pub fn operator(&self) -> Matrix {
        self.complement
            .matmul(&self.map)
            .matmul(&self.base.frame().adjoint())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            base: self.base.clone(),
            complement: self.complement.clone(),
            map: self.map.scale(s),
        }
    }
}

/// `ρ_1 ≤ … ≤ ρ_p`: singular values of the tangent operator.
pub fn tangent_invariants(h: &TangentVector) -> Result<Vec<f64>> {
    Ok(ascending(svd(h.map())?.values))
}

/// Derivative of `Ψ_j[L, M(ε)]` at `ε = 0` along a curve with `M(0) = M`,
/// `M'(0) = H`: the diagonal entries `h_jj` of `H` in the bases `f_j` (principal
/// vectors of `M`) and `r_j = (f_j cos ψ_j − e_j) / sin ψ_j` of `M⊥`.
///
/// Over `C` the rate is `Re h_jj`.
pub fn angle_rate(l: &Subspace, m: &Subspace, h: &TangentVector) -> Result<Vec<f64>> {
    check_pair("angle_rate", l, m)?;
    if h.base().span_distance(m) > 1e-8 {
        return Err(Error::Domain(
            "tangent vector is not based at the second subspace".into(),
        ));
    }
    let angles = jordan_angles(l, m)?;
    let p = angles.len();
    let mut margin = angles[0].min(FRAC_PI_2 - angles[p - 1]);
    for w in angles.windows(2) {
        margin = margin.min(w[1] - w[0]);
    }
    if margin < GENERICITY_THRESHOLD {
        return Err(Error::DegenerateConfiguration(format!(
            "angles {:?} have gap or boundary margin {margin:e} < {GENERICITY_THRESHOLD:e}",
            &*angles
        )));
    }
    let pair = principal_vectors(l, m)?;
    let op = h.operator();
    let mut rates = Vec::with_capacity(p);
    for j in 0..p {
        let e = pair.e_basis.column(j);
        let f = pair.f_basis.column(j);
        let c = pair.cosines[j];
        let r: Vec<C64> = f.iter().zip(&e).map(|(fi, ei)| fi * c - ei).collect();
        let nr = norm(&r);
        let r: Vec<C64> = r.into_iter().map(|x| x / nr).collect();
        let hf = op.mul_vec(&f);
        rates.push(dot(&r, &hf).re);
    }
    Ok(rates)
}

/// Point at parameter `eps` on the geodesic through `M` with initial
/// velocity `H`: `exp(eps·[[0, −X*], [X, 0]])` applied to the frame of `M` in
/// the basis `(F, C)`, evaluated in closed form through the SVD
/// `X = U Σ V*` as `F V cos(εΣ) + C U sin(εΣ)`.
pub fn geodesic_transport(m: &Subspace, h: &TangentVector, eps: f64) -> Result<Subspace> {
    if h.base().span_distance(m) > 1e-8 {
        return Err(Error::Domain(
            "tangent vector is not based at the given subspace".into(),
        ));
    }
    let s = svd(h.map())?;
    let cos: Vec<f64> = s.values.iter().map(|x| (eps * x).cos()).collect();
    let sin: Vec<f64> = s.values.iter().map(|x| (eps * x).sin()).collect();
    let base = h.base().frame();
    let frame = base
        .matmul(&s.right)
        .scale_columns(&cos)
        .add(&h.complement().matmul(&s.left).scale_columns(&sin));
    Subspace::from_basis(&frame)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::linalg::testutil::{gaussian_complex, gaussian_real, rng};

    pub fn random_subspace(p: usize, q: usize, complex: bool, r: &mut impl Rng) -> Subspace {
        let g = if complex {
            gaussian_complex(p + q, p, r)
        } else {
            gaussian_real(p + q, p, r)
        };
        Subspace::from_basis(&g).unwrap()
    }

    fn unit(n: usize, k: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        v
    }

    /// span(cos a_j e_j + sin a_j e_{p+j}) in R^{p+q}.
    pub fn canonical(p: usize, q: usize, angles: &[f64]) -> Subspace {
        let n = p + q;
        let mut data = vec![0.0; n * p];
        for (j, &a) in angles.iter().enumerate() {
            data[j * p + j] = a.cos();
            data[(p + j) * p + j] = a.sin();
        }
        Subspace::from_frame(Matrix::from_real(n, p, &data).unwrap()).unwrap()
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn identical_subspaces_have_zero_angles() {
        let mut r = rng(1);
        let l = random_subspace(3, 4, false, &mut r);
        let u = qr_orthonormalize(&gaussian_real(3, 3, &mut r)).unwrap();
        let same = l.reframe(&u).unwrap();
        assert_close(&jordan_angles(&l, &same).unwrap(), &[0.0; 3], 1e-14);
        assert_close(&projector_angles(&l, &same).unwrap(), &[0.0; 3], 1e-14);
    }

    #[test]
    fn line_in_plane() {
        let t = std::f64::consts::FRAC_PI_3;
        let l = Subspace::from_basis(&Matrix::from_rows(&[&[1.0], &[0.0]])).unwrap();
        let m = Subspace::from_basis(&Matrix::from_rows(&[&[t.cos()], &[t.sin()]])).unwrap();
        assert_close(&jordan_angles(&l, &m).unwrap(), &[t], 1e-15);
    }

    #[test]
    fn canonical_pair_angles() {
        let l = Subspace::coordinate(2, 2).unwrap();
        let m = canonical(2, 2, &[0.3, 0.7]);
        assert_close(&jordan_angles(&l, &m).unwrap(), &[0.3, 0.7], 1e-15);
        assert_close(&projector_angles(&l, &m).unwrap(), &[0.3, 0.7], 1e-15);
        let pair = principal_vectors(&l, &m).unwrap();
        assert_close(&pair.cosines, &[0.3f64.cos(), 0.7f64.cos()], 1e-15);
        assert!(pair.diagonality_defect() < 1e-15);
        // e-basis spans the coordinate plane
        let e = Subspace::from_frame(pair.e_basis.clone()).unwrap();
        assert!(e.span_distance(&l) < 1e-15);
    }

    #[test]
    fn orthogonal_subspaces() {
        let l = Subspace::coordinate(2, 3).unwrap();
        let m = Subspace::from_basis(&Matrix::from_columns(
            5,
            &[unit(5, 2), unit(5, 3)]
                .iter()
                .map(|v| v.iter().map(|&x| C64::new(x, 0.0)).collect())
                .collect::<Vec<_>>(),
            Field::Real,
        ))
        .unwrap();
        assert_close(&projector_angles(&l, &m).unwrap(), &[FRAC_PI_2; 2], 1e-15);
        assert_close(&jordan_angles(&l, &m).unwrap(), &[FRAC_PI_2; 2], 1e-15);
    }

    #[test]
    fn dimension_checks() {
        assert!(Subspace::from_basis(&Matrix::identity(3)).is_err());
        let l = Subspace::coordinate(1, 2).unwrap();
        let m = Subspace::coordinate(2, 2).unwrap();
        assert!(matches!(
            jordan_angles(&l, &m),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(Subspace::from_frame(Matrix::from_rows(&[&[2.0], &[0.0]])).is_err());
    }

    #[test]
    fn gram_route_examples() {
        let id = Matrix::identity(3);
        assert_eq!(&*angles_from_gram(&id, &id, &id).unwrap(), &[0.0; 3]);

        let mut r = rng(2);
        let a = gaussian_real(7, 3, &mut r);
        let b = gaussian_real(7, 3, &mut r);
        let base = angles_from_bases(&a, &b).unwrap();
        let scaled = angles_from_bases(&a.scale_columns(&[3.0, 0.1, -2.0]), &b).unwrap();
        assert!(base.max_abs_diff(&scaled) < 1e-12);

        let singular = Matrix::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(matches!(
            angles_from_gram(&singular, &Matrix::identity(2), &Matrix::identity(2)),
            Err(Error::DegenerateBasis(_))
        ));
    }

    #[test]
    fn routes_agree_on_random_pairs() {
        let mut r = rng(3);
        for trial in 0..40 {
            let complex = trial % 2 == 1;
            let (p, q) = (1 + trial % 4, 4 + trial % 3);
            let a = if complex {
                gaussian_complex(p + q, p, &mut r)
            } else {
                gaussian_real(p + q, p, &mut r)
            };
            let b = if complex {
                gaussian_complex(p + q, p, &mut r)
            } else {
                gaussian_real(p + q, p, &mut r)
            };
            let l = Subspace::from_basis(&a).unwrap();
            let m = Subspace::from_basis(&b).unwrap();
            let j = jordan_angles(&l, &m).unwrap();
            assert!(j.max_abs_diff(&projector_angles(&l, &m).unwrap()) < 1e-8);
            assert!(j.max_abs_diff(&angles_from_bases(&a, &b).unwrap()) < 1e-8);
            assert!(j.max_abs_diff(&jordan_angles(&m, &l).unwrap()) < 1e-10);
        }
    }

    #[test]
    fn principal_pair_diagonal_on_random_input() {
        let mut r = rng(4);
        for complex in [false, true] {
            let l = random_subspace(3, 5, complex, &mut r);
            let m = random_subspace(3, 5, complex, &mut r);
            let pair = principal_vectors(&l, &m).unwrap();
            assert!(pair.diagonality_defect() < 1e-9);
            let angles = jordan_angles(&l, &m).unwrap();
            assert_close(&pair.cosines, &angles.cosines(), 1e-12);
        }
    }

    #[test]
    fn minimax_examples() {
        let mut r = rng(5);
        let l = random_subspace(3, 3, false, &mut r);
        let probe = minimax_probe(&l, &l, 1, MinimaxForm::MaxMin, 10, &mut r).unwrap();
        assert!((probe.certified_value - 1.0).abs() < 1e-12);

        let l = Subspace::coordinate(2, 2).unwrap();
        let m = canonical(2, 2, &[0.3, 0.7]);
        let probe = minimax_probe(&l, &m, 2, MinimaxForm::MaxMin, 50, &mut r).unwrap();
        assert!((probe.certified_value - 0.7f64.cos()).abs() < 1e-12);
        assert!(probe.max_violation <= 1e-8);

        assert!(minimax_probe(&l, &m, 0, MinimaxForm::MaxMin, 1, &mut r).is_err());
        assert!(minimax_probe(&l, &m, 3, MinimaxForm::MinMax, 1, &mut r).is_err());
    }

    #[test]
    fn minimax_random_pairs_both_forms() {
        let mut r = rng(6);
        for complex in [false, true] {
            let l = random_subspace(4, 5, complex, &mut r);
            let m = random_subspace(4, 5, complex, &mut r);
            for k in 1..=4 {
                for form in [MinimaxForm::MaxMin, MinimaxForm::MinMax] {
                    let probe = minimax_probe(&l, &m, k, form, 200, &mut r).unwrap();
                    assert!((probe.certified_value - probe.lambda_k).abs() < 1e-8);
                    assert!(probe.max_violation <= 1e-8, "{form:?} k={k}");
                }
            }
        }
    }

    #[test]
    fn tangent_invariant_examples() {
        let base = Subspace::coordinate(2, 3).unwrap();
        assert_eq!(
            tangent_invariants(&TangentVector::zero(base.clone())).unwrap(),
            vec![0.0, 0.0]
        );
        let map = Matrix::from_rows(&[&[2.0, 0.0], &[0.0, 5.0], &[0.0, 0.0]]);
        let h = TangentVector::new(base, map).unwrap();
        assert_close(&tangent_invariants(&h).unwrap(), &[2.0, 5.0], 1e-14);
    }

    #[test]
    fn tangent_invariants_survive_ambient_rotation() {
        let mut r = rng(7);
        for complex in [false, true] {
            let (p, q) = (2, 4);
            let base = random_subspace(p, q, complex, &mut r);
            let map = if complex {
                gaussian_complex(q, p, &mut r)
            } else {
                gaussian_real(q, p, &mut r)
            };
            let h = TangentVector::new(base.clone(), map.clone()).unwrap();
            let g = if complex {
                qr_orthonormalize(&gaussian_complex(p + q, p + q, &mut r)).unwrap()
            } else {
                qr_orthonormalize(&gaussian_real(p + q, p + q, &mut r)).unwrap()
            };
            let moved = TangentVector::with_complement(
                Subspace::from_frame(g.matmul(base.frame())).unwrap(),
                g.matmul(h.complement()),
                map,
            )
            .unwrap();
            let a = tangent_invariants(&h).unwrap();
            let b = tangent_invariants(&moved).unwrap();
            assert_close(&a, &b, 1e-10);
            // the ambient operators are conjugate: g H g*
            let conj = g.matmul(&h.operator()).matmul(&g.adjoint());
            assert!(conj.max_abs_diff(&moved.operator()) < 1e-12);
        }
    }

    #[test]
    fn geodesic_transport_examples() {
        let m = Subspace::coordinate(3, 3).unwrap();
        let mut map = Matrix::zeros(3, 3);
        map[(0, 0)] = C64::new(1.0, 0.0);
        let h = TangentVector::new(m.clone(), map).unwrap();
        let at0 = geodesic_transport(&m, &h, 0.0).unwrap();
        assert!(at0.span_distance(&m) < 1e-15);
        let moved = geodesic_transport(&m, &h, 0.2).unwrap();
        assert_close(&jordan_angles(&m, &moved).unwrap(), &[0.0, 0.0, 0.2], 1e-14);
    }

    /// Taylor series with scaling and squaring; test-only oracle.
    fn expm(a: &Matrix) -> Matrix {
        let n = a.rows();
        let norm = a.frobenius_norm();
        let squarings = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as i32
        } else {
            0
        };
        let scaled = a.scale(0.5f64.powi(squarings));
        let mut term = Matrix::identity(n);
        let mut sum = Matrix::identity(n);
        for k in 1..30 {
            term = term.matmul(&scaled).scale(1.0 / k as f64);
            sum = sum.add(&term);
        }
        for _ in 0..squarings {
            sum = sum.matmul(&sum);
        }
        sum
    }

    #[test]
    fn closed_form_matches_matrix_exponential() {
        let mut r = rng(8);
        for complex in [false, true] {
            let (p, q) = (2, 3);
            let m = random_subspace(p, q, complex, &mut r);
            let map = if complex {
                gaussian_complex(q, p, &mut r)
            } else {
                gaussian_real(q, p, &mut r)
            };
            let h = TangentVector::new(m.clone(), map.clone()).unwrap();
            let eps = 0.37;
            let basis = m.frame().hstack(h.complement());
            let mut gen = Matrix::zeros(p + q, p + q);
            for i in 0..q {
                for j in 0..p {
                    gen[(p + i, j)] = map[(i, j)];
                    gen[(j, p + i)] = -map[(i, j)].conj();
                }
            }
            let k = basis.matmul(&gen).matmul(&basis.adjoint());
            let frame = expm(&k.scale(eps)).matmul(m.frame());
            let oracle = Subspace::from_basis(&frame).unwrap();
            let got = geodesic_transport(&m, &h, eps).unwrap();
            assert!(got.span_distance(&oracle) < 1e-12);
        }
    }

    #[test]
    fn transport_ratio_tends_to_tangent_invariants() {
        let mut r = rng(9);
        for complex in [false, true] {
            let (p, q) = (3, 4);
            let m = random_subspace(p, q, complex, &mut r);
            let map = if complex {
                gaussian_complex(q, p, &mut r)
            } else {
                gaussian_real(q, p, &mut r)
            };
            let h = TangentVector::new(m.clone(), map).unwrap();
            let eps = 1e-3;
            let moved = geodesic_transport(&m, &h, eps).unwrap();
            let psi = jordan_angles(&moved, &m).unwrap();
            let rho = tangent_invariants(&h).unwrap();
            for (a, b) in psi.iter().zip(&rho) {
                assert!((a / eps - b).abs() <= 1e-5, "{a} {b}");
            }
        }
    }

    #[test]
    fn angle_rate_examples() {
        let l = Subspace::coordinate(2, 2).unwrap();
        let m = canonical(2, 2, &[0.3, 0.7]);
        let zero = TangentVector::zero(m.clone());
        assert_close(&angle_rate(&l, &m, &zero).unwrap(), &[0.0, 0.0], 1e-15);

        // rotate principal plane j at speed c_j: d/dε of span(cos(a_j + c_j ε) e_j + sin(..) e_{p+j})
        let speeds = [0.4, -1.3];
        let mut op = Matrix::zeros(4, 4);
        for j in 0..2 {
            let (a, c) = ([0.3f64, 0.7][j], speeds[j]);
            // f_j = (cos a, sin a) in plane (j, 2+j); velocity along r_j = (-sin a, cos a)
            let f = [(j, a.cos()), (2 + j, a.sin())];
            let rj = [(j, -a.sin()), (2 + j, a.cos())];
            for &(ri, rv) in &rj {
                for &(fi, fv) in &f {
                    op[(ri, fi)] += C64::new(c * rv * fv, 0.0);
                }
            }
        }
        let h = TangentVector::from_operator(m.clone(), &op).unwrap();
        assert_close(&angle_rate(&l, &m, &h).unwrap(), &speeds, 1e-14);

        let degenerate = canonical(2, 2, &[0.5, 0.5]);
        assert!(matches!(
            angle_rate(&l, &degenerate, &TangentVector::zero(degenerate.clone())),
            Err(Error::DegenerateConfiguration(_))
        ));
        let touching = canonical(2, 2, &[0.0, 0.5]);
        assert!(angle_rate(&l, &touching, &TangentVector::zero(touching.clone())).is_err());
    }

    #[test]
    fn angle_rate_matches_central_difference() {
        let mut r = rng(10);
        let mut checked = 0;
        while checked < 10 {
            let complex = checked % 2 == 1;
            let (p, q) = (3, 4);
            let l = random_subspace(p, q, complex, &mut r);
            let m = random_subspace(p, q, complex, &mut r);
            let psi = jordan_angles(&l, &m).unwrap();
            let gap = psi.windows(2).map(|w| w[1] - w[0]).fold(psi[0], f64::min);
            if gap < 0.05 || FRAC_PI_2 - psi[p - 1] < 0.05 {
                continue;
            }
            let map = if complex {
                gaussian_complex(q, p, &mut r)
            } else {
                gaussian_real(q, p, &mut r)
            };
            let h = TangentVector::new(m.clone(), map).unwrap();
            let rates = angle_rate(&l, &m, &h).unwrap();
            let step = 1e-4;
            let plus = jordan_angles(&l, &geodesic_transport(&m, &h, step).unwrap()).unwrap();
            let minus = jordan_angles(&l, &geodesic_transport(&m, &h, -step).unwrap()).unwrap();
            for j in 0..p {
                let fd = (plus[j] - minus[j]) / (2.0 * step);
                assert!((fd - rates[j]).abs() < 1e-5, "fd {fd} vs {}", rates[j]);
            }
            checked += 1;
        }
    }

    #[test]
    fn frame_choice_does_not_matter() {
        let mut r = rng(12);
        for complex in [false, true] {
            let l = random_subspace(3, 4, complex, &mut r);
            let m = random_subspace(3, 4, complex, &mut r);
            let u = if complex {
                qr_orthonormalize(&gaussian_complex(3, 3, &mut r)).unwrap()
            } else {
                qr_orthonormalize(&gaussian_real(3, 3, &mut r)).unwrap()
            };
            let a = jordan_angles(&l, &m).unwrap();
            let b = jordan_angles(&l.reframe(&u).unwrap(), &m).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-10);
        }
    }
}
