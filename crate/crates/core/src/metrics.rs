//! Invariant distances on the Grassmannian, H-curve geodesics, chordal
//! Finsler length, and the triangle inclusion for Jordan angles.
//!
//! For a `W_p`-invariant norm `ℓ`, `d(L, M) = ℓ(Ψ[L, M])` is an invariant
//! metric. The H-curve through principal pairs `(e_j, f_j)` is
//! `v_j(s) = cos(a_j s) e_j + sin(a_j s) f_j`; along it angles add as long as
//! `a_p |s − t| ≤ π/2`, which makes it a geodesic for every such metric.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grassmann::{jordan_angles, principal_vectors, Subspace, FRAME_TOLERANCE};
use crate::matrix::{dot, norm, Matrix, C64};
use crate::norms::NormSpec;
use crate::weyl::{
    group_elements, orbit_membership, ConvexTerm, Group, SignedPermutation, BOUNDARY_TOLERANCE,
    MAX_ENUMERATION_DIM,
};

/// How close to `π/2` the top angle may come before an H-curve between two
/// subspaces stops being unique.
pub const CUT_LOCUS_MARGIN: f64 = 1e-9;

pub fn distance(l: &Subspace, m: &Subspace, norm: &NormSpec) -> Result<f64> {
    let psi = jordan_angles(l, m)?;
    norm.eval(&psi)
}

/// Distance of the symmetric Riemannian metric: the `ℓ2` norm of the angles.
pub fn riemannian_distance(l: &Subspace, m: &Subspace) -> Result<f64> {
    distance(l, m, &NormSpec::L2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HCurve {
    e_frame: Matrix,
    f_frame: Matrix,
    invariants: Vec<f64>,
}

impl HCurve {
    /// `e` and `f` are `n × p` with jointly orthonormal columns; `a` is sorted
    /// increasing and non-negative.
    pub fn new(e_frame: Matrix, f_frame: Matrix, invariants: Vec<f64>) -> Result<Self> {
        let p = e_frame.cols();
        if f_frame.shape() != e_frame.shape() || invariants.len() != p || p == 0 {
            return Err(Error::DimensionMismatch {
                op: "HCurve::new",
                detail: format!(
                    "e {:?}, f {:?}, {} invariants",
                    e_frame.shape(),
                    f_frame.shape(),
                    invariants.len()
                ),
            });
        }
        if invariants.iter().any(|a| !a.is_finite() || *a < 0.0)
            || invariants.windows(2).any(|w| w[1] < w[0])
        {
            return Err(Error::Domain(format!(
                "H-curve invariants must be non-negative and increasing, got {invariants:?}"
            )));
        }
        let both = e_frame.hstack(&f_frame);
        let defect = both.adjoint_mul(&both).max_abs_diff(&Matrix::identity(2 * p));
        if defect > FRAME_TOLERANCE {
            return Err(Error::Domain(format!(
                "H-curve frames are not jointly orthonormal (defect {defect:e})"
            )));
        }
        Ok(Self {
            e_frame,
            f_frame,
            invariants,
        })
    }

    pub fn e_frame(&self) -> &Matrix {
        &self.e_frame
    }

    pub fn f_frame(&self) -> &Matrix {
        &self.f_frame
    }

    pub fn invariants(&self) -> &[f64] {
        &self.invariants
    }

    /// Whether `s` and `t` are close enough for angle additivity.
    pub fn sufficiently_near(&self, s: f64, t: f64) -> bool {
        self.invariants.last().copied().unwrap_or(0.0) * (s - t).abs() <= FRAC_PI_2
    }
}

/// The H-curve with `γ(0) = L`, `γ(1) = M`. Unique while the top angle stays
/// below `π/2`.
pub fn hcurve_between(l: &Subspace, m: &Subspace) -> Result<HCurve> {
    let pair = principal_vectors(l, m)?;
    let n = l.ambient_dim();
    let p = l.dim();
    let top = jordan_angles(l, m)?.last().copied().unwrap_or(0.0);
    if top >= FRAC_PI_2 - CUT_LOCUS_MARGIN {
        return Err(Error::NoUniqueGeodesic { top_angle: top });
    }

    let e_cols = pair.e_basis.columns();
    let f_cols = pair.f_basis.columns();
    let mut angles = Vec::with_capacity(p);
    let mut dirs: Vec<Option<Vec<C64>>> = Vec::with_capacity(p);
    for (e, f) in e_cols.iter().zip(&f_cols) {
        // component of f_j orthogonal to L, against the whole frame
        let mut g = f.clone();
        for _ in 0..2 {
            for u in &e_cols {
                let c = dot(u, &g);
                g.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
            }
        }
        let s = norm(&g);
        let c = dot(e, f).re;
        angles.push(s.atan2(c));
        dirs.push((s > 1e-7).then(|| g.into_iter().map(|x| x / s).collect()));
    }

    // orthonormalize the nonzero directions against L and each other; fill
    // the rest (zero angles, where the direction is immaterial) by completion
    let mut basis = e_cols.clone();
    let mut f_dirs = vec![Vec::new(); p];
    for (j, d) in dirs.iter().enumerate() {
        if let Some(d) = d {
            let mut v = d.clone();
            for _ in 0..2 {
                for u in &basis {
                    let c = dot(u, &v);
                    v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
                }
            }
            let nv = norm(&v);
            v.iter_mut().for_each(|x| *x /= nv);
            basis.push(v.clone());
            f_dirs[j] = v;
        }
    }
    let missing: Vec<usize> = (0..p).filter(|&j| dirs[j].is_none()).collect();
    let extra = complete(n, &basis, missing.len());
    for (j, v) in missing.into_iter().zip(extra) {
        f_dirs[j] = v;
    }

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]));
    let field = l.field().join(m.field());
    let e = Matrix::from_columns(n, &order.iter().map(|&j| e_cols[j].clone()).collect::<Vec<_>>(), field);
    let f = Matrix::from_columns(n, &order.iter().map(|&j| f_dirs[j].clone()).collect::<Vec<_>>(), field);
    let a = order.iter().map(|&j| angles[j].max(0.0)).collect();
    HCurve::new(e, f, a)
}

fn complete(n: usize, basis: &[Vec<C64>], count: usize) -> Vec<Vec<C64>> {
    if count == 0 {
        return Vec::new();
    }
    let existing = Matrix::from_columns(n, basis, crate::matrix::Field::Complex);
    let comp = crate::linalg::orthonormal_complement(&existing);
    comp.columns().into_iter().take(count).collect()
}

pub fn hcurve_eval(curve: &HCurve, s: f64) -> Result<Subspace> {
    let cos: Vec<f64> = curve.invariants.iter().map(|a| (a * s).cos()).collect();
    let sin: Vec<f64> = curve.invariants.iter().map(|a| (a * s).sin()).collect();
    let frame = curve
        .e_frame
        .scale_columns(&cos)
        .add(&curve.f_frame.scale_columns(&sin));
    Subspace::from_frame(frame)
}

/// Chordal Finsler length `Σ ℓ(Ψ[path_i, path_{i+1}])`.
pub fn finsler_length(path: &[Subspace], norm: &NormSpec) -> Result<f64> {
    if path.is_empty() {
        return Err(Error::EmptyPath);
    }
    path.windows(2)
        .map(|w| distance(&w[0], &w[1], norm))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriangleReport {
    /// Angles of `(L, M)`.
    pub phi: Vec<f64>,
    /// Angles of `(M, N)`.
    pub psi: Vec<f64>,
    /// Angles of `(L, N)`.
    pub theta: Vec<f64>,
    pub inside: bool,
    pub best_slack: f64,
    /// Group element `w` with `w · θ − φ` in the orbit hull of `ψ`.
    pub witness: Option<SignedPermutation>,
    /// Convex weights over the orbit of `ψ` reproducing `w · θ − φ`.
    pub certificate: Option<Vec<ConvexTerm>>,
    /// Set when `Ψ_p[M, N]` reaches `π/2`, where no H-curve from `M` to `N`
    /// is unique and the inclusion is checked without that support.
    pub near_cut_locus: bool,
}

impl TriangleReport {
    /// The query point `w · θ − φ` for the witness.
    pub fn witness_point(&self) -> Option<Vec<f64>> {
        let w = self.witness.as_ref()?;
        Some(
            w.apply(&self.theta)
                .iter()
                .zip(&self.phi)
                .map(|(t, f)| t - f)
                .collect(),
        )
    }

    /// Largest deviation between the witness point and its certificate.
    pub fn certificate_error(&self) -> Option<f64> {
        let x = self.witness_point()?;
        let cert = self.certificate.as_ref()?;
        let mut rec = vec![0.0; x.len()];
        for term in cert {
            for (r, v) in rec.iter_mut().zip(term.element.apply(&self.psi)) {
                *r += term.weight * v;
            }
        }
        Some(rec.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }
}

pub fn triangle_check(
    l: &Subspace,
    m: &Subspace,
    n: &Subspace,
    want_certificate: bool,
) -> Result<TriangleReport> {
    let phi = jordan_angles(l, m)?.into_inner();
    let psi = jordan_angles(m, n)?.into_inner();
    let theta = jordan_angles(l, n)?.into_inner();
    let near_cut_locus = psi.last().is_some_and(|&t| t >= FRAC_PI_2 - CUT_LOCUS_MARGIN);
    let p = phi.len();
    let elements = if p <= MAX_ENUMERATION_DIM {
        group_elements(p, Group::Signed)
    } else {
        vec![SignedPermutation::identity(p)]
    };

    let mut best: Option<(f64, &SignedPermutation)> = None;
    for w in &elements {
        let x: Vec<f64> = w.apply(&theta).iter().zip(&phi).map(|(t, f)| t - f).collect();
        let r = orbit_membership(&x, &psi, Group::Signed, false)?;
        if best.is_none_or(|(s, _)| r.slack > s) {
            best = Some((r.slack, w));
        }
    }
    let (best_slack, witness) = best.expect("orbit is non-empty");
    let inside = best_slack >= -BOUNDARY_TOLERANCE;
    let certificate = if want_certificate && inside {
        let x: Vec<f64> = witness.apply(&theta).iter().zip(&phi).map(|(t, f)| t - f).collect();
        orbit_membership(&x, &psi, Group::Signed, true)?.certificate
    } else {
        None
    };
    Ok(TriangleReport {
        phi,
        psi,
        theta,
        inside,
        best_slack,
        witness: inside.then(|| witness.clone()),
        certificate,
        near_cut_locus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::tests::{canonical, random_subspace};
    use crate::linalg::qr_orthonormalize;
    use crate::linalg::testutil::{gaussian_complex, gaussian_real, rng};
    use crate::weyl::majorization_slack;
    use rand::Rng;

    fn perturb(l: &Subspace, size: f64, r: &mut impl Rng) -> Subspace {
        let n = l.ambient_dim();
        let noise = gaussian_real(n, l.dim(), r).scale(size);
        Subspace::from_basis(&l.frame().add(&noise)).unwrap()
    }

    #[test]
    fn distance_examples() {
        let l = canonical(2, 3, &[0.0, 0.0]);
        for norm in NormSpec::builtins() {
            assert_eq!(distance(&l, &l, &norm).unwrap(), 0.0);
        }
        let a = canonical(1, 1, &[0.0]);
        let b = canonical(1, 1, &[0.4]);
        for norm in NormSpec::builtins() {
            let one = norm.eval(&[1.0]).unwrap();
            assert!((distance(&a, &b, &norm).unwrap() - 0.4 * one).abs() < 1e-15);
        }
        let m = canonical(2, 3, &[0.3, 0.7]);
        let d = riemannian_distance(&l, &m).unwrap();
        assert!((d - (0.09f64 + 0.49).sqrt()).abs() < 1e-14);
        assert_eq!(d, distance(&l, &m, &NormSpec::L2).unwrap());
    }

    #[test]
    fn metric_axioms_sampled() {
        let mut r = rng(41);
        for trial in 0..300 {
            let p = 1 + trial % 4;
            let q = p + trial % 3;
            let complex = trial % 2 == 1;
            let l = random_subspace(p, q, complex, &mut r);
            let m = random_subspace(p, q, complex, &mut r);
            let n = random_subspace(p, q, complex, &mut r);
            for norm in NormSpec::builtins() {
                let lm = distance(&l, &m, &norm).unwrap();
                let ml = distance(&m, &l, &norm).unwrap();
                let mn = distance(&m, &n, &norm).unwrap();
                let ln = distance(&l, &n, &norm).unwrap();
                assert!(lm >= 0.0);
                assert!((lm - ml).abs() <= 1e-10);
                assert!(ln <= lm + mn + 1e-9, "{norm}: {ln} > {lm} + {mn}");
            }
        }
    }

    #[test]
    fn hcurve_trivial_cases() {
        let l = canonical(2, 3, &[0.0, 0.0]);
        let c = hcurve_between(&l, &l).unwrap();
        assert_eq!(c.invariants(), &[0.0, 0.0]);
        for s in [0.0, 0.5, 1.0] {
            assert!(hcurve_eval(&c, s).unwrap().span_distance(&l) < 1e-14);
        }

        let m = canonical(2, 2, &[0.3, 0.7]);
        let c = hcurve_between(&canonical(2, 2, &[0.0, 0.0]), &m).unwrap();
        assert!((c.invariants()[0] - 0.3).abs() < 1e-14);
        assert!((c.invariants()[1] - 0.7).abs() < 1e-14);
        // f-frame lives in the span of e3, e4
        for i in 0..2 {
            for j in 0..2 {
                assert!(c.f_frame()[(i, j)].norm() < 1e-14);
            }
        }
        assert!(hcurve_eval(&c, 1.0).unwrap().span_distance(&m) < 1e-14);
    }

    #[test]
    fn hcurve_rejects_orthogonal_pairs() {
        let l = canonical(1, 1, &[0.0]);
        let m = canonical(1, 1, &[FRAC_PI_2]);
        assert!(matches!(
            hcurve_between(&l, &m),
            Err(Error::NoUniqueGeodesic { .. })
        ));
    }

    #[test]
    fn hcurve_endpoints_random() {
        let mut r = rng(42);
        let mut checked = 0;
        for trial in 0..200 {
            let p = 1 + trial % 4;
            let q = p + trial % 3;
            let l = random_subspace(p, q, trial % 2 == 0, &mut r);
            let m = random_subspace(p, q, trial % 2 == 0, &mut r);
            let angles = jordan_angles(&l, &m).unwrap();
            if *angles.last().unwrap() >= FRAC_PI_2 - 1e-3 {
                continue;
            }
            let c = hcurve_between(&l, &m).unwrap();
            assert!(hcurve_eval(&c, 0.0).unwrap().span_distance(&l) < 1e-8);
            assert!(hcurve_eval(&c, 1.0).unwrap().span_distance(&m) < 1e-8);
            for (a, b) in angles.iter().zip(c.invariants()) {
                assert!((a - b).abs() < 1e-10);
            }
            checked += 1;
        }
        assert!(checked > 150);
    }

    #[test]
    fn repeated_and_zero_angles() {
        let mut r = rng(43);
        let l = canonical(3, 4, &[0.0, 0.0, 0.0]);
        let m = canonical(3, 4, &[0.0, 0.5, 0.5]);
        let u = qr_orthonormalize(&gaussian_complex(3, 3, &mut r)).unwrap();
        let m = m.reframe(&u).unwrap();
        let c = hcurve_between(&l, &m).unwrap();
        assert!(hcurve_eval(&c, 1.0).unwrap().span_distance(&m) < 1e-12);
        assert!(c.invariants()[0].abs() < 1e-12);
    }

    #[test]
    fn additivity_along_hcurves() {
        let mut r = rng(44);
        for trial in 0..100 {
            let p = 1 + trial % 4;
            let q = p + 1 + trial % 2;
            let l = random_subspace(p, q, trial % 3 == 0, &mut r);
            let m = random_subspace(p, q, trial % 3 == 0, &mut r);
            let Ok(c) = hcurve_between(&l, &m) else { continue };
            let mut s: Vec<f64> = (0..3).map(|_| r.random::<f64>()).collect();
            s.sort_by(f64::total_cmp);
            if !c.sufficiently_near(s[0], s[2]) {
                continue;
            }
            let g: Vec<Subspace> = s.iter().map(|&t| hcurve_eval(&c, t).unwrap()).collect();
            let a = jordan_angles(&g[0], &g[1]).unwrap();
            let b = jordan_angles(&g[1], &g[2]).unwrap();
            let total = jordan_angles(&g[0], &g[2]).unwrap();
            for j in 0..p {
                assert!((a[j] + b[j] - total[j]).abs() < 1e-9, "trial {trial}, j {j}");
            }
        }
    }

    #[test]
    fn finsler_length_of_hcurve() {
        let mut r = rng(45);
        let l = random_subspace(2, 3, false, &mut r);
        let m = random_subspace(2, 3, false, &mut r);
        let c = hcurve_between(&l, &m).unwrap();
        let path: Vec<Subspace> = (0..1000)
            .map(|i| hcurve_eval(&c, i as f64 / 999.0).unwrap())
            .collect();
        let d = riemannian_distance(&l, &m).unwrap();
        assert!((finsler_length(&path, &NormSpec::L2).unwrap() - d).abs() < 1e-6);
        for norm in NormSpec::builtins() {
            let coarse: Vec<Subspace> = (0..7)
                .map(|i| hcurve_eval(&c, i as f64 / 6.0).unwrap())
                .collect();
            let len = finsler_length(&coarse, &norm).unwrap();
            assert!((len - distance(&l, &m, &norm).unwrap()).abs() < 1e-8, "{norm}");
        }
        assert!(finsler_length(&[l.clone(), l.clone()], &NormSpec::L1).unwrap() < 1e-14);
        assert!(matches!(finsler_length(&[], &NormSpec::L1), Err(Error::EmptyPath)));
    }

    #[test]
    fn perturbed_paths_are_not_shorter() {
        let mut r = rng(46);
        for _ in 0..30 {
            let l = random_subspace(2, 3, false, &mut r);
            let m = random_subspace(2, 3, false, &mut r);
            let Ok(c) = hcurve_between(&l, &m) else { continue };
            let mut path = vec![l.clone()];
            for i in 1..20 {
                let g = hcurve_eval(&c, i as f64 / 20.0).unwrap();
                path.push(perturb(&g, 0.05, &mut r));
            }
            path.push(m.clone());
            for norm in NormSpec::builtins() {
                let d = distance(&l, &m, &norm).unwrap();
                assert!(finsler_length(&path, &norm).unwrap() >= d - 1e-6);
            }
        }
    }

    #[test]
    fn inclusion_along_curves() {
        let mut r = rng(47);
        for trial in 0..60 {
            let p = 1 + trial % 3;
            let q = p + 1;
            let l = random_subspace(p, q, false, &mut r);
            let m0 = random_subspace(p, q, false, &mut r);
            let m1 = random_subspace(p, q, false, &mut r);
            let Ok(c) = hcurve_between(&m0, &m1) else { continue };
            let theta = c.invariants().to_vec();
            let base = jordan_angles(&l, &m0).unwrap();
            for _ in 0..5 {
                let t: f64 = r.random_range(0.01..=1.0);
                let at = jordan_angles(&l, &hcurve_eval(&c, t).unwrap()).unwrap();
                let x: Vec<f64> = at.iter().zip(base.iter()).map(|(a, b)| a - b).collect();
                let scaled: Vec<f64> = theta.iter().map(|v| v * t).collect();
                assert!(majorization_slack(&x, &scaled, Group::Signed) >= -1e-7);
            }
        }
    }

    #[test]
    fn triangle_trivial_cases() {
        let mut r = rng(48);
        let l = random_subspace(3, 4, false, &mut r);
        let m = random_subspace(3, 4, false, &mut r);
        let rep = triangle_check(&l, &m, &m, true).unwrap();
        assert!(rep.inside);
        assert!(rep.witness.as_ref().unwrap().is_identity());
        assert!(rep.best_slack.abs() < 1e-12);
        let rep = triangle_check(&l, &l, &m, true).unwrap();
        assert!(rep.inside);
        assert!(rep.best_slack.abs() < 1e-12);
        assert!(rep.certificate_error().unwrap() < 1e-12);
    }

    #[test]
    fn triangle_random_triples() {
        let mut r = rng(49);
        for trial in 0..200 {
            let p = 1 + trial % 4;
            let q = p + trial % 3;
            let complex = trial % 4 == 3;
            let l = random_subspace(p, q, complex, &mut r);
            let m = random_subspace(p, q, complex, &mut r);
            let n = random_subspace(p, q, complex, &mut r);
            let rep = triangle_check(&l, &m, &n, true).unwrap();
            assert!(rep.inside && rep.best_slack >= -1e-8, "trial {trial}: {}", rep.best_slack);
            assert!(rep.certificate_error().unwrap() <= 1e-7);
        }
    }

    #[test]
    fn triangle_for_small_perturbations() {
        let mut r = rng(50);
        let l = random_subspace(3, 4, false, &mut r);
        let m = perturb(&l, 1e-4, &mut r);
        let n = perturb(&m, 1e-4, &mut r);
        assert!(triangle_check(&l, &m, &n, false).unwrap().inside);
        let big = random_subspace(3, 3, false, &mut r);
        let rep = triangle_check(&big, &big, &big, true).unwrap();
        assert!(rep.inside && rep.best_slack.abs() < 1e-14);
    }
}
