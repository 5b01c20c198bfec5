//! Small dense simplex solver for `max cᵀx  s.t.  Ax ≤ b, x ≥ 0` with `b ≥ 0`.
//!
//! The origin is always feasible under `b ≥ 0`, so no phase one is needed.
//! Pivoting follows Bland's rule, which cannot cycle.

use crate::error::{Error, Result};

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
}

/// Maximizes `c·x` subject to `a x ≤ b`, `x ≥ 0`.
///
/// Returns [`Error::Config`] if some `b_i < 0` and [`Error::Capacity`] when
/// the program is unbounded.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let n = c.len();
    let m = a.len();
    if b.len() != m {
        return Err(Error::Dimension {
            expected: m,
            got: b.len(),
        });
    }
    if a.iter().any(|row| row.len() != n) {
        return Err(Error::Malformed(
            "constraint rows must have one entry per variable".into(),
        ));
    }
    if b.iter().any(|&bi| bi < 0.0) {
        return Err(Error::Config("right-hand side must be nonnegative".into()));
    }

    // Tableau columns: n structural, m slack, 1 rhs. Last row is the objective (reduced costs).
    let width = n + m + 1;
    let mut t = vec![vec![0.0; width]; m + 1];
    for i in 0..m {
        t[i][..n].copy_from_slice(&a[i]);
        t[i][n + i] = 1.0;
        t[i][width - 1] = b[i];
    }
    for j in 0..n {
        t[m][j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Bland: lowest-index column with negative reduced cost.
    while let Some(enter) = (0..n + m).find(|&j| t[m][j] < -EPS) {
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            let coef = t[i][enter];
            if coef > EPS {
                let ratio = t[i][width - 1] / coef;
                let better = match leave {
                    None => true,
                    Some(l) => ratio < best - EPS || (ratio <= best + EPS && basis[i] < basis[l]),
                };
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(row) = leave else {
            return Err(Error::Capacity("linear program is unbounded".into()));
        };
        pivot(&mut t, row, enter);
        basis[row] = enter;
    }

    let mut x = vec![0.0; n];
    for (i, &var) in basis.iter().enumerate() {
        if var < n {
            x[var] = t[i][width - 1];
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpSolution { value, x })
}

fn pivot(t: &mut [Vec<f64>], row: usize, col: usize) {
    let p = t[row][col];
    for v in t[row].iter_mut() {
        *v /= p;
    }
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i == row {
            continue;
        }
        let factor = r[col];
        if factor != 0.0 {
            for (v, pv) in r.iter_mut().zip(&pivot_row) {
                *v -= factor * pv;
            }
            r[col] = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_program() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → 36 at (2, 6)
        let sol = maximize(
            &[3.0, 5.0],
            &[vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]],
            &[4.0, 12.0, 18.0],
        )
        .unwrap();
        assert!((sol.value - 36.0).abs() < 1e-12);
        assert!((sol.x[0] - 2.0).abs() < 1e-12 && (sol.x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_and_bad_rhs() {
        assert!(matches!(
            maximize(&[1.0], &[vec![-1.0]], &[1.0]),
            Err(Error::Capacity(_))
        ));
        assert!(matches!(
            maximize(&[1.0], &[vec![1.0]], &[-1.0]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn degenerate_program_terminates() {
        // Several constraints tight at the origin.
        let sol = maximize(
            &[1.0, 1.0],
            &[vec![1.0, -1.0], vec![-1.0, 1.0], vec![1.0, 1.0]],
            &[0.0, 0.0, 2.0],
        )
        .unwrap();
        assert!((sol.value - 2.0).abs() < 1e-12);
    }
}
