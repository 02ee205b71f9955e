//! Dense primal simplex for linear programs of the form
//!
//!   maximize c^T x  subject to  A x <= b,  x >= 0,  b >= 0,
//!
//! which always admit the all-slack basis at the origin, so no phase-one is
//! needed. Pivoting follows Bland's rule (lowest eligible index for both the
//! entering and leaving variable), which rules out cycling on the heavily
//! degenerate programs barrier synthesis produces.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimplexStatus {
    Optimal,
    /// Iteration cap reached; the solution is feasible but may be suboptimal.
    IterationCap,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct SimplexSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub status: SimplexStatus,
}

/// Solves max c^T x s.t. A x <= b, x >= 0 with b >= 0. `rows` holds the
/// constraint coefficients row by row.
pub fn solve_max(rows: &[Vec<f64>], b: &[f64], c: &[f64], max_iters: usize) -> Result<SimplexSolution> {
    let m = rows.len();
    let n = c.len();
    if b.len() != m {
        return Err(Error::DimensionMismatch(b.len(), m));
    }
    for r in rows {
        if r.len() != n {
            return Err(Error::DimensionMismatch(r.len(), n));
        }
    }
    if let Some(bad) = b.iter().find(|v| **v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "this solver form needs b >= 0 (feasible origin), found {bad}"
        )));
    }

    // Tableau: m constraint rows + objective row; n structural columns,
    // m slack columns, rhs column.
    let width = n + m + 1;
    let mut t = vec![vec![0.0f64; width]; m + 1];
    for (i, row) in rows.iter().enumerate() {
        t[i][..n].copy_from_slice(row);
        t[i][n + i] = 1.0;
        t[i][width - 1] = b[i];
    }
    // Objective row stores reduced costs of the maximization directly.
    t[m][..n].copy_from_slice(c);

    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut status = SimplexStatus::IterationCap;
    const EPS: f64 = 1e-9;

    for _ in 0..max_iters {
        // Bland: first column with positive reduced cost enters.
        let enter = match (0..n + m).find(|&j| t[m][j] > EPS) {
            Some(j) => j,
            None => {
                status = SimplexStatus::Optimal;
                break;
            }
        };
        // Ratio test; ties broken by lowest basis variable index (Bland).
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..m {
            let a = t[i][enter];
            if a > EPS {
                let ratio = t[i][width - 1] / a;
                let better = ratio < best_ratio - EPS
                    || (ratio < best_ratio + EPS
                        && leave.map(|l| basis[i] < basis[l]).unwrap_or(true));
                if better {
                    best_ratio = ratio.min(best_ratio);
                    leave = Some(i);
                }
            }
        }
        let Some(leave) = leave else {
            status = SimplexStatus::Unbounded;
            break;
        };

        // Pivot on (leave, enter).
        let piv = t[leave][enter];
        for v in &mut t[leave] {
            *v /= piv;
        }
        for i in 0..=m {
            if i == leave {
                continue;
            }
            let f = t[i][enter];
            if f == 0.0 {
                continue;
            }
            // Row operation: row_i -= f * row_leave.
            let (pivot_row, target_row) = if i < leave {
                let (a, bpart) = t.split_at_mut(leave);
                (&bpart[0], &mut a[i])
            } else {
                let (a, bpart) = t.split_at_mut(i);
                (&a[leave], &mut bpart[0])
            };
            for (tv, pv) in target_row.iter_mut().zip(pivot_row) {
                *tv -= f * pv;
            }
            t[i][enter] = 0.0;
        }
        basis[leave] = enter;
    }

    if status == SimplexStatus::Unbounded {
        return Ok(SimplexSolution { x: vec![0.0; n], objective: f64::INFINITY, status });
    }

    let mut x = vec![0.0; n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = t[i][width - 1];
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(SimplexSolution { x, objective, status })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_known_program() {
        // max x + y, x <= 2, y <= 3, x + y <= 4 -> 4.
        let sol = solve_max(
            &[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
            &[2.0, 3.0, 4.0],
            &[1.0, 1.0],
            1000,
        )
        .unwrap();
        assert_eq!(sol.status, SimplexStatus::Optimal);
        assert_abs_diff_eq!(sol.objective, 4.0, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_zero_rhs_terminates() {
        // max x, x - y <= 0, y <= 1 -> x = 1 via the chain.
        let sol = solve_max(
            &[vec![1.0, -1.0], vec![0.0, 1.0]],
            &[0.0, 1.0],
            &[1.0, 0.0],
            1000,
        )
        .unwrap();
        assert_eq!(sol.status, SimplexStatus::Optimal);
        assert_abs_diff_eq!(sol.objective, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.x[0], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn unbounded_detected() {
        let sol = solve_max(&[vec![-1.0]], &[1.0], &[1.0], 1000).unwrap();
        assert_eq!(sol.status, SimplexStatus::Unbounded);
    }

    #[test]
    fn negative_rhs_rejected() {
        assert!(solve_max(&[vec![1.0]], &[-1.0], &[1.0], 10).is_err());
    }

    #[test]
    fn two_variable_programs_match_vertex_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let m = rng.gen_range(2..6);
            let rows: Vec<Vec<f64>> = (0..m)
                .map(|_| vec![rng.gen_range(-1.0..2.0), rng.gen_range(-1.0..2.0)])
                .collect();
            let b: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..3.0)).collect();
            let c = vec![rng.gen_range(0.1..2.0), rng.gen_range(0.1..2.0)];
            let sol = solve_max(&rows, &b, &c, 10_000).unwrap();
            if sol.status != SimplexStatus::Optimal {
                continue; // unbounded instances have no finite oracle value
            }
            // Oracle: evaluate all candidate vertices (axis and row pairs).
            let mut lines: Vec<(f64, f64, f64)> = vec![(1.0, 0.0, 0.0), (0.0, 1.0, 0.0)];
            for (r, bi) in rows.iter().zip(&b) {
                lines.push((r[0], r[1], *bi));
            }
            let feasible = |x: f64, y: f64| {
                x >= -1e-7
                    && y >= -1e-7
                    && rows
                        .iter()
                        .zip(&b)
                        .all(|(r, bi)| r[0] * x + r[1] * y <= bi + 1e-7)
            };
            let mut best = 0.0f64; // origin is always feasible
            for i in 0..lines.len() {
                for j in (i + 1)..lines.len() {
                    let (a1, b1, c1) = lines[i];
                    let (a2, b2, c2) = lines[j];
                    let det = a1 * b2 - a2 * b1;
                    if det.abs() < 1e-12 {
                        continue;
                    }
                    let x = (c1 * b2 - c2 * b1) / det;
                    let y = (a1 * c2 - a2 * c1) / det;
                    if feasible(x, y) {
                        best = best.max(c[0] * x + c[1] * y);
                    }
                }
            }
            assert_abs_diff_eq!(sol.objective, best, epsilon = 1e-6);
        }
    }
}
