//! Dense phase-one simplex for convex-combination feasibility:
//! find `λ ≥ 0`, `Σ λ_i = 1`, `Σ λ_i v_i = b`.
//!
//! Problem sizes here are tiny (at most a few dozen rows and a few thousand
//! columns), so a full tableau is fine.

use crate::linalg::svd;
use crate::matrix::Matrix;

const PIVOT_EPS: f64 = 1e-12;
const MAX_ITERATIONS: usize = 20_000;
/// Degenerate pivots tolerated under Dantzig's rule before switching to
/// Bland's rule.
const STALL_LIMIT: usize = 50;

#[derive(Debug, Clone)]
pub struct Feasibility {
    /// Sum of artificial variables at the phase-one optimum (zero for a
    /// feasible system).
    pub infeasibility: f64,
    /// `(column index, weight)` for the basic structural columns.
    pub weights: Vec<(usize, f64)>,
}

impl Feasibility {
    pub fn is_feasible(&self, tol: f64) -> bool {
        self.infeasibility <= tol
    }
}

/// Phase-one simplex on `[v_1 … v_N; 1 … 1] λ = [b; 1]`, `λ ≥ 0`.
pub fn convex_combination(points: &[Vec<f64>], target: &[f64]) -> Feasibility {
    let d = target.len();
    let m = d + 1;
    let n = points.len();
    let width = n + m + 1;
    let rhs = width - 1;

    let mut t = vec![vec![0.0; width]; m + 1];
    for (j, v) in points.iter().enumerate() {
        debug_assert_eq!(v.len(), d);
        for i in 0..d {
            t[i][j] = v[i];
        }
        t[d][j] = 1.0;
    }
    for i in 0..d {
        t[i][rhs] = target[i];
    }
    t[d][rhs] = 1.0;
    for (i, row) in t.iter_mut().enumerate().take(m) {
        if row[rhs] < 0.0 {
            row.iter_mut().for_each(|x| *x = -*x);
        }
        row[n + i] = 1.0;
    }
    // objective row: reduced costs of minimizing the artificial sum
    for j in 0..width {
        if (n..n + m).contains(&j) {
            continue;
        }
        t[m][j] = -(0..m).map(|i| t[i][j]).sum::<f64>();
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let mut stalled = 0;
    for _ in 0..MAX_ITERATIONS {
        let bland = stalled >= STALL_LIMIT;
        let entering = if bland {
            (0..n + m).find(|&j| t[m][j] < -PIVOT_EPS)
        } else {
            (0..n + m)
                .filter(|&j| t[m][j] < -PIVOT_EPS)
                .min_by(|&a, &b| t[m][a].total_cmp(&t[m][b]))
        };
        let Some(col) = entering else { break };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if t[i][col] > PIVOT_EPS {
                let ratio = t[i][rhs] / t[i][col];
                let better = match leave {
                    None => true,
                    Some((r, best)) => {
                        ratio < best - 1e-15 || (ratio <= best + 1e-15 && basis[i] < basis[r])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((row, ratio)) = leave else {
            // unbounded direction cannot occur in phase one; treat as stuck
            break;
        };
        if ratio <= 1e-15 {
            stalled += 1;
        } else {
            stalled = 0;
        }
        let piv = t[row][col];
        t[row].iter_mut().for_each(|x| *x /= piv);
        let pivot_row = t[row].clone();
        for (i, r) in t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for (x, y) in r.iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
            }
        }
        basis[row] = col;
    }

    let infeasibility = (-t[m][rhs]).max(0.0);
    let raw: Vec<(usize, f64)> = basis
        .iter()
        .enumerate()
        .filter(|&(_, &b)| b < n)
        .map(|(i, &b)| (b, t[i][rhs].max(0.0)))
        .collect();
    let weights = polish(points, target, &raw).unwrap_or(raw);
    Feasibility {
        infeasibility,
        weights,
    }
}

/// Re-solves for the weights on the final support by least squares, which
/// removes the rounding accumulated over the pivots.
fn polish(points: &[Vec<f64>], target: &[f64], raw: &[(usize, f64)]) -> Option<Vec<(usize, f64)>> {
    if raw.is_empty() {
        return None;
    }
    let d = target.len();
    let k = raw.len();
    let mut data = Vec::with_capacity((d + 1) * k);
    for i in 0..=d {
        for &(j, _) in raw {
            data.push(if i < d { points[j][i] } else { 1.0 });
        }
    }
    let a = Matrix::from_real(d + 1, k, &data).ok()?;
    let s = svd(&a).ok()?;
    let cutoff = 1e-12 * s.largest();
    if s.smallest() <= cutoff {
        return None;
    }
    let mut b = target.to_vec();
    b.push(1.0);
    // λ = V Σ⁻¹ Uᵀ b
    let mut coeffs = vec![0.0; k];
    for (c, coeff) in coeffs.iter_mut().enumerate() {
        let ub: f64 = (0..=d).map(|i| s.left[(i, c)].re * b[i]).sum();
        *coeff = ub / s.values[c];
    }
    let lambda: Vec<f64> = (0..k)
        .map(|r| (0..k).map(|c| s.right[(r, c)].re * coeffs[c]).sum())
        .collect();
    if lambda.iter().any(|&l| l < -1e-12) {
        return None;
    }
    Some(
        raw.iter()
            .zip(lambda)
            .map(|(&(j, _), l)| (j, l.max(0.0)))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Vec<f64>> {
        vec![
            vec![1.0, 1.0],
            vec![-1.0, 1.0],
            vec![-1.0, -1.0],
            vec![1.0, -1.0],
        ]
    }

    fn reconstruct(points: &[Vec<f64>], w: &[(usize, f64)]) -> Vec<f64> {
        let mut out = vec![0.0; points[0].len()];
        for &(j, l) in w {
            for (o, x) in out.iter_mut().zip(&points[j]) {
                *o += l * x;
            }
        }
        out
    }

    #[test]
    fn interior_point_is_feasible() {
        let pts = square();
        let target = [0.3, -0.2];
        let r = convex_combination(&pts, &target);
        assert!(r.is_feasible(1e-12));
        let sum: f64 = r.weights.iter().map(|w| w.1).sum();
        assert!((sum - 1.0).abs() < 1e-14);
        let rec = reconstruct(&pts, &r.weights);
        assert!((rec[0] - 0.3).abs() < 1e-14 && (rec[1] + 0.2).abs() < 1e-14);
    }

    #[test]
    fn exterior_point_is_infeasible() {
        let r = convex_combination(&square(), &[1.2, 0.0]);
        assert!(!r.is_feasible(1e-9));
        assert!(r.infeasibility > 0.1);
    }

    #[test]
    fn duplicated_columns_do_not_cycle() {
        let mut pts = square();
        pts.extend(square());
        pts.push(vec![0.0, 0.0]);
        let r = convex_combination(&pts, &[0.0, 1.0]);
        assert!(r.is_feasible(1e-12));
        let rec = reconstruct(&pts, &r.weights);
        assert!(rec[0].abs() < 1e-14 && (rec[1] - 1.0).abs() < 1e-14);
    }
}
