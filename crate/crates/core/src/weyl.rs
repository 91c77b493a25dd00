//! The hyperoctahedral group `W_p` (signed permutations) and the symmetric
//! group `S_p`, convex hulls of their orbits, and Birkhoff-type
//! decompositions of bistochastic and quasistochastic matrices.
//!
//! Orbit-hull membership is decided by majorization:
//!
//! * `x ∈ conv(W_p · ψ)` (ψ ≥ 0) iff `Σ_{i≤k} |x|↓_i ≤ Σ_{i≤k} ψ↓_i` for all `k`
//!   (weak absolute majorization);
//! * `x ∈ conv(S_p · ψ)` iff the same partial-sum bounds hold for `x↓` and the
//!   total sums agree.
//!
//! Certificates (explicit convex combinations of orbit points) come from a
//! phase-one simplex over the enumerated orbit, which caps them at `p ≤ 5`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, svd};
use crate::lp::convex_combination;
use crate::matrix::Matrix;

/// Inequalities within this margin count as satisfied.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;
/// Largest `p` for which the orbit is enumerated.
pub const MAX_ENUMERATION_DIM: usize = 5;

/// `(w · x)_i = signs_i · x_{perm_i}`; as a matrix, row `i` has `signs_i` in
/// column `perm_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SignedPermutation {
    perm: Vec<usize>,
    signs: Vec<i8>,
}

impl SignedPermutation {
    pub fn new(perm: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &i in &perm {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Domain(format!("{perm:?} is not a permutation")));
            }
        }
        if signs.len() != n || signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Domain(format!("invalid sign vector {signs:?}")));
        }
        Ok(Self { perm, signs })
    }

    pub fn unsigned(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        Self::new(perm, vec![1; n])
    }

    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
            signs: vec![1; n],
        }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p) && self.signs.iter().all(|&s| s == 1)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.len());
        self.perm
            .iter()
            .zip(&self.signs)
            .map(|(&j, &s)| f64::from(s) * x[j])
            .collect()
    }

    pub fn to_matrix(&self) -> Matrix {
        let n = self.len();
        let mut data = vec![0.0; n * n];
        for (i, (&j, &s)) in self.perm.iter().zip(&self.signs).enumerate() {
            data[i * n + j] = f64::from(s);
        }
        Matrix::from_real(n, n, &data).expect("finite")
    }
}

impl fmt::Display for SignedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .perm
            .iter()
            .zip(&self.signs)
            .map(|(&j, &s)| format!("{}{}", if s < 0 { "-" } else { "+" }, j))
            .collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Group {
    /// Hyperoctahedral group `W_p`.
    Signed,
    /// Symmetric group `S_p` (type A).
    PermutationOnly,
}

/// Every element of `S_p`, lexicographic order, identity first.
pub fn permutations(p: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..p).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (1..p).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..p).rev().find(|&j| cur[j] > cur[i - 1]).expect("exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// Group elements in a fixed order with the identity first.
pub fn group_elements(p: usize, group: Group) -> Vec<SignedPermutation> {
    let perms = permutations(p);
    match group {
        Group::PermutationOnly => perms
            .into_iter()
            .map(|perm| SignedPermutation {
                signs: vec![1; p],
                perm,
            })
            .collect(),
        Group::Signed => {
            let mut out = Vec::with_capacity(perms.len() << p);
            for perm in perms {
                for mask in 0u32..(1 << p) {
                    let signs = (0..p)
                        .map(|i| if mask >> i & 1 == 1 { -1 } else { 1 })
                        .collect();
                    out.push(SignedPermutation {
                        perm: perm.clone(),
                        signs,
                    });
                }
            }
            out
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexTerm {
    pub weight: f64,
    pub element: SignedPermutation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipResult {
    pub inside: bool,
    /// Tightest margin over the defining inequalities; negative values are
    /// the size of the worst violation.
    pub slack: f64,
    /// Weights over group elements `w` with `Σ weight · (w · ψ) = x`.
    pub certificate: Option<Vec<ConvexTerm>>,
}

impl MembershipResult {
    /// Largest deviation between `x` and the certificate's reconstruction.
    pub fn certificate_error(&self, x: &[f64], psi: &[f64]) -> Option<f64> {
        let cert = self.certificate.as_ref()?;
        let mut rec = vec![0.0; x.len()];
        for term in cert {
            for (r, v) in rec.iter_mut().zip(term.element.apply(psi)) {
                *r += term.weight * v;
            }
        }
        Some(
            rec.iter()
                .zip(x)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Majorization margin of `x` against `ψ` for the given group.
pub fn majorization_slack(x: &[f64], psi: &[f64], group: Group) -> f64 {
    let (xs, ps) = match group {
        Group::Signed => (
            sorted_desc(x.iter().map(|v| v.abs()).collect()),
            sorted_desc(psi.to_vec()),
        ),
        Group::PermutationOnly => (sorted_desc(x.to_vec()), sorted_desc(psi.to_vec())),
    };
    let p = xs.len();
    let (mut sx, mut sp) = (0.0, 0.0);
    let mut slack = f64::INFINITY;
    for k in 0..p {
        sx += xs[k];
        sp += ps[k];
        let margin = if group == Group::PermutationOnly && k == p - 1 {
            -(sx - sp).abs()
        } else {
            sp - sx
        };
        slack = slack.min(margin);
    }
    slack
}

pub fn orbit_membership(
    x: &[f64],
    psi: &[f64],
    group: Group,
    want_certificate: bool,
) -> Result<MembershipResult> {
    orbit_membership_with_tol(x, psi, group, want_certificate, BOUNDARY_TOLERANCE)
}

pub fn orbit_membership_with_tol(
    x: &[f64],
    psi: &[f64],
    group: Group,
    want_certificate: bool,
    tol: f64,
) -> Result<MembershipResult> {
    if x.len() != psi.len() || x.is_empty() {
        return Err(Error::DimensionMismatch {
            op: "orbit_membership",
            detail: format!("query of length {} vs orbit of length {}", x.len(), psi.len()),
        });
    }
    if let Some(v) = x.iter().chain(psi).find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite coordinate {v}")));
    }
    if group == Group::Signed {
        if let Some(&neg) = psi.iter().find(|&&v| v < 0.0) {
            return Err(Error::Domain(format!(
                "signed orbit needs a non-negative vector, found {neg}"
            )));
        }
    }
    let slack = majorization_slack(x, psi, group);
    let inside = slack >= -tol;
    let certificate = if want_certificate && inside && x.len() <= MAX_ENUMERATION_DIM {
        orbit_certificate(x, psi, group)
    } else {
        None
    };
    Ok(MembershipResult {
        inside,
        slack,
        certificate,
    })
}

/// Distinct orbit points `w · ψ` with one representative group element each.
fn distinct_orbit(psi: &[f64], group: Group) -> (Vec<Vec<f64>>, Vec<SignedPermutation>) {
    let mut seen = std::collections::HashSet::new();
    let mut points = Vec::new();
    let mut elements = Vec::new();
    for w in group_elements(psi.len(), group) {
        let v = w.apply(psi);
        let key: Vec<u64> = v.iter().map(|x| (x + 0.0).to_bits()).collect();
        if seen.insert(key) {
            points.push(v);
            elements.push(w);
        }
    }
    (points, elements)
}

fn lp_tolerance(x: &[f64], psi: &[f64]) -> f64 {
    let scale = x.iter().chain(psi).fold(1.0f64, |a, v| a.max(v.abs()));
    1e-9 * scale
}

fn orbit_certificate(x: &[f64], psi: &[f64], group: Group) -> Option<Vec<ConvexTerm>> {
    let p = x.len();
    if x.iter().zip(psi).all(|(a, b)| (a - b).abs() <= 1e-12) {
        return Some(vec![ConvexTerm {
            weight: 1.0,
            element: SignedPermutation::identity(p),
        }]);
    }
    let (points, elements) = distinct_orbit(psi, group);
    let sol = convex_combination(&points, x);
    if !sol.is_feasible(lp_tolerance(x, psi)) {
        return None;
    }
    let total: f64 = sol.weights.iter().map(|w| w.1).sum();
    let terms: Vec<ConvexTerm> = sol
        .weights
        .into_iter()
        .filter(|&(_, w)| w > 1e-15)
        .map(|(j, w)| ConvexTerm {
            weight: w / total,
            element: elements[j].clone(),
        })
        .collect();
    Some(terms)
}

/// Brute-force membership: phase-one simplex over the enumerated orbit.
/// Independent of the majorization inequalities; `p ≤ 5`.
pub fn vertex_lp_membership(x: &[f64], psi: &[f64], group: Group) -> Result<bool> {
    if x.len() != psi.len() || x.is_empty() {
        return Err(Error::DimensionMismatch {
            op: "vertex_lp_membership",
            detail: format!("{} vs {}", x.len(), psi.len()),
        });
    }
    if x.len() > MAX_ENUMERATION_DIM {
        return Err(Error::Capability(format!(
            "orbit enumeration limited to p <= {MAX_ENUMERATION_DIM}"
        )));
    }
    let (points, _) = distinct_orbit(psi, group);
    Ok(convex_combination(&points, x).is_feasible(lp_tolerance(x, psi)))
}

fn line_sums(a: &Matrix, abs: bool) -> (Vec<f64>, Vec<f64>) {
    let n = a.rows();
    let v = |i: usize, j: usize| {
        let z = a[(i, j)].re;
        if abs {
            z.abs()
        } else {
            z
        }
    };
    let rows = (0..n).map(|i| (0..n).map(|j| v(i, j)).sum()).collect();
    let cols = (0..n).map(|j| (0..n).map(|i| v(i, j)).sum()).collect();
    (rows, cols)
}

fn real_square(a: &Matrix, op: &'static str) -> Result<Vec<f64>> {
    if !a.is_square() || a.rows() == 0 {
        return Err(Error::DimensionMismatch {
            op,
            detail: format!("need a non-empty square matrix, got {}x{}", a.rows(), a.cols()),
        });
    }
    a.to_real_vec()
        .ok_or_else(|| Error::Domain(format!("{op} needs a real matrix")))
}

/// Maximum-cardinality bipartite matching restricted to edges `allowed(i, j)`;
/// returns `row → column` when perfect.
fn perfect_matching(n: usize, allowed: impl Fn(usize, usize) -> bool) -> Option<Vec<usize>> {
    fn augment(
        i: usize,
        n: usize,
        allowed: &dyn Fn(usize, usize) -> bool,
        seen: &mut [bool],
        col_owner: &mut [Option<usize>],
    ) -> bool {
        for j in 0..n {
            if allowed(i, j) && !seen[j] {
                seen[j] = true;
                if col_owner[j].is_none_or(|k| augment(k, n, allowed, seen, col_owner)) {
                    col_owner[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    let mut col_owner = vec![None; n];
    for i in 0..n {
        let mut seen = vec![false; n];
        if !augment(i, n, &allowed, &mut seen, &mut col_owner) {
            return None;
        }
    }
    let mut row_to_col = vec![0; n];
    for (j, owner) in col_owner.iter().enumerate() {
        row_to_col[owner.expect("perfect")] = j;
    }
    Some(row_to_col)
}

/// Decomposes a bistochastic matrix into a convex combination of permutation
/// matrices. Each round subtracts the bottleneck perfect matching on the
/// positive support; a Carathéodory pass then trims the list to at most
/// `(p−1)² + 1` terms.
pub fn birkhoff_decompose(a: &Matrix) -> Result<Vec<ConvexTerm>> {
    let entries = real_square(a, "birkhoff_decompose")?;
    let n = a.rows();
    let (rows, cols) = line_sums(a, false);
    let worst_sum = rows
        .iter()
        .chain(&cols)
        .map(|s| (s - 1.0).abs())
        .fold(0.0, f64::max);
    let min_entry = entries.iter().copied().fold(f64::INFINITY, f64::min);
    if worst_sum > 1e-9 || min_entry < -1e-12 {
        return Err(Error::NotBistochastic {
            worst: worst_sum.max(-min_entry),
        });
    }

    let mut residual: Vec<f64> = entries.iter().map(|v| v.max(0.0)).collect();
    let mut terms: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut remaining = 1.0;
    while remaining > 1e-13 && terms.len() < n * n + 1 {
        // bottleneck: largest threshold that still admits a perfect matching
        let mut levels: Vec<f64> = residual.iter().copied().filter(|&v| v > 0.0).collect();
        levels.sort_by(|a, b| b.total_cmp(a));
        levels.dedup();
        let (mut lo, mut hi) = (0usize, levels.len());
        let mut best = None;
        while lo < hi {
            let mid = (lo + hi) / 2;
            let t = levels[mid];
            match perfect_matching(n, |i, j| residual[i * n + j] >= t) {
                Some(m) => {
                    best = Some(m);
                    hi = mid;
                }
                None => lo = mid + 1,
            }
        }
        let Some(matching) = best.or_else(|| {
            levels
                .get(lo)
                .and_then(|&t| perfect_matching(n, |i, j| residual[i * n + j] >= t))
        }) else {
            break;
        };
        let w = (0..n)
            .map(|i| residual[i * n + matching[i]])
            .fold(f64::INFINITY, f64::min);
        if w <= 0.0 {
            break;
        }
        for (i, &j) in matching.iter().enumerate() {
            let e = &mut residual[i * n + j];
            *e = if *e - w <= 1e-15 { 0.0 } else { *e - w };
        }
        remaining -= w;
        terms.push((w, matching));
    }

    let terms = caratheodory_reduce(terms, n, (n - 1) * (n - 1) + 1);
    let total: f64 = terms.iter().map(|t| t.0).sum();
    Ok(terms
        .into_iter()
        .map(|(w, perm)| ConvexTerm {
            weight: w / total,
            element: SignedPermutation {
                signs: vec![1; n],
                perm,
            },
        })
        .collect())
}

/// Removes affinely dependent points from a convex combination of
/// permutation matrices until at most `limit` remain.
fn caratheodory_reduce(
    mut terms: Vec<(f64, Vec<usize>)>,
    n: usize,
    limit: usize,
) -> Vec<(f64, Vec<usize>)> {
    while terms.len() > limit {
        let k = terms.len();
        // columns [vec P_i; 1]; find μ in the kernel via the smallest
        // eigenvector of the k × k Gram matrix
        let mut gram = vec![0.0; k * k];
        for a in 0..k {
            for b in 0..k {
                let shared = (0..n).filter(|&i| terms[a].1[i] == terms[b].1[i]).count();
                gram[a * k + b] = shared as f64 + 1.0;
            }
        }
        let Ok(eig) = eig_hermitian(&Matrix::from_real(k, k, &gram).expect("finite")) else {
            break;
        };
        let mu: Vec<f64> = eig.vectors.column(k - 1).iter().map(|z| z.re).collect();
        if eig.values[k - 1] > 1e-8 {
            break;
        }
        let Some((idx, step)) = mu
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 1e-12)
            .map(|(i, &m)| (i, terms[i].0 / m))
            .min_by(|a, b| a.1.total_cmp(&b.1))
        else {
            break;
        };
        for (t, &m) in terms.iter_mut().zip(&mu) {
            t.0 -= step * m;
        }
        terms[idx].0 = 0.0;
        terms.retain(|t| t.0 > 1e-15);
    }
    terms
}

/// Decomposes a quasistochastic matrix (absolute row and column sums ≤ 1)
/// into a convex combination of signed permutation matrices. Exact orbit
/// enumeration limits this to `p ≤ 5`.
pub fn quasistochastic_decompose(a: &Matrix) -> Result<Vec<ConvexTerm>> {
    let entries = real_square(a, "quasistochastic_decompose")?;
    let n = a.rows();
    let (rows, cols) = line_sums(a, true);
    let worst = rows.iter().chain(&cols).copied().fold(0.0, f64::max);
    if worst > 1.0 + 1e-12 {
        return Err(Error::NotQuasistochastic { worst });
    }
    if n > MAX_ENUMERATION_DIM {
        return Err(Error::Capability(format!(
            "signed Birkhoff decomposition enumerates 2^p p! vertices; p = {n} exceeds {MAX_ENUMERATION_DIM}"
        )));
    }
    if let Some(w) = exact_signed_permutation(&entries, n) {
        return Ok(vec![ConvexTerm {
            weight: 1.0,
            element: w,
        }]);
    }
    let elements = group_elements(n, Group::Signed);
    let points: Vec<Vec<f64>> = elements
        .iter()
        .map(|w| {
            let mut v = vec![0.0; n * n];
            for (i, (&j, &s)) in w.perm.iter().zip(&w.signs).enumerate() {
                v[i * n + j] = f64::from(s);
            }
            v
        })
        .collect();
    let sol = convex_combination(&points, &entries);
    if !sol.is_feasible(1e-9) {
        return Err(Error::NumericalConsistency(format!(
            "no signed-permutation decomposition found (infeasibility {:e})",
            sol.infeasibility
        )));
    }
    let total: f64 = sol.weights.iter().map(|w| w.1).sum();
    Ok(sol
        .weights
        .into_iter()
        .filter(|&(_, w)| w > 1e-15)
        .map(|(j, w)| ConvexTerm {
            weight: w / total,
            element: elements[j].clone(),
        })
        .collect())
}

fn exact_signed_permutation(entries: &[f64], n: usize) -> Option<SignedPermutation> {
    let mut perm = vec![usize::MAX; n];
    let mut signs = vec![1i8; n];
    for i in 0..n {
        for j in 0..n {
            let v = entries[i * n + j];
            if v == 1.0 || v == -1.0 {
                if perm[i] != usize::MAX {
                    return None;
                }
                perm[i] = j;
                signs[i] = if v < 0.0 { -1 } else { 1 };
            } else if v != 0.0 {
                return None;
            }
        }
    }
    SignedPermutation::new(perm, signs).ok()
}

/// Σ weight · matrix(element).
pub fn recombine(terms: &[ConvexTerm], n: usize) -> Matrix {
    terms.iter().fold(Matrix::zeros(n, n), |acc, t| {
        acc.add(&t.element.to_matrix().scale(t.weight))
    })
}

/// The diagonal of a real `p × q` matrix lies in the `W_p`-orbit hull of its
/// singular values.
pub fn fan_ky_diagonal_check(a: &Matrix) -> Result<MembershipResult> {
    let (p, q) = a.shape();
    if p == 0 || p > q {
        return Err(Error::DimensionMismatch {
            op: "fan_ky_diagonal_check",
            detail: format!("need 1 <= p <= q, got {p}x{q}"),
        });
    }
    if a.to_real_vec().is_none() {
        return Err(Error::Domain("fan_ky_diagonal_check needs a real matrix".into()));
    }
    let diag: Vec<f64> = a.diag().iter().map(|z| z.re).collect();
    let sv = svd(a)?.values;
    orbit_membership(&diag, &sv, Group::Signed, false)
}
