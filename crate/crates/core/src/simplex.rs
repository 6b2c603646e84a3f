//! Dense-tableau two-phase simplex for small equality-form LPs:
//! maximize `c . x` subject to `A x = b`, `x >= 0`.
//!
//! Problems here are a handful of rows by a few dozen columns, so the
//! implementation favors transparency over speed: reduced costs are priced
//! from scratch each iteration, the artificial block doubles as an explicit
//! basis inverse for dual recovery, and Bland's rule (lowest eligible index
//! for both the entering and leaving choice) rules out cycling on the
//! degenerate bases these allocation problems routinely produce.

use thiserror::Error;

/// Entries smaller than this are treated as zero when picking pivots.
pub const PIVOT_TOL: f64 = 1e-10;

/// Residual infeasibility above this after phase 1 means no feasible point.
const FEAS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimplexError {
    #[error("no feasible point (phase-1 residual {residual})")]
    Infeasible { residual: f64 },
    #[error("objective unbounded above")]
    Unbounded,
}

/// Optimal basic solution plus one dual multiplier per constraint row (in
/// the caller's row order; redundant rows get dual 0).
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub duals: Vec<f64>,
}

struct Tableau {
    /// Structural column count.
    n: usize,
    /// Row-major `[structural | artificial | rhs]`, width `n + m + 1`.
    rows: Vec<Vec<f64>>,
    /// Basic column index per row.
    basis: Vec<usize>,
    /// Rows found redundant after phase 1 are deactivated.
    live: Vec<bool>,
    /// -1 where the input row was negated to make `b` non-negative.
    row_sign: Vec<f64>,
}

impl Tableau {
    fn new(n: usize, a: &[Vec<f64>], b: &[f64]) -> Self {
        let m = a.len();
        let mut rows = Vec::with_capacity(m);
        let mut row_sign = Vec::with_capacity(m);
        for (i, coeffs) in a.iter().enumerate() {
            assert_eq!(coeffs.len(), n, "ragged constraint matrix");
            let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
            let mut row = Vec::with_capacity(n + m + 1);
            row.extend(coeffs.iter().map(|&v| sign * v));
            row.extend((0..m).map(|j| if j == i { 1.0 } else { 0.0 }));
            row.push(sign * b[i]);
            rows.push(row);
            row_sign.push(sign);
        }
        Tableau {
            n,
            rows,
            basis: (0..m).map(|i| n + i).collect(),
            live: vec![true; m],
            row_sign,
        }
    }

    fn m(&self) -> usize {
        self.rows.len()
    }

    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.n + self.m()]
    }

    fn reduced_cost(&self, costs: &[f64], col: usize) -> f64 {
        let mut rc = costs[col];
        for i in 0..self.m() {
            if self.live[i] {
                let cb = costs[self.basis[i]];
                if cb != 0.0 {
                    rc -= cb * self.rows[i][col];
                }
            }
        }
        rc
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.n + self.m() + 1;
        let inv = 1.0 / self.rows[row][col];
        for j in 0..width {
            self.rows[row][j] *= inv;
        }
        self.rows[row][col] = 1.0; // cancel round-off on the pivot itself
        for i in 0..self.m() {
            if i == row {
                continue;
            }
            let factor = self.rows[i][col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..width {
                self.rows[i][j] -= factor * self.rows[row][j];
            }
            self.rows[i][col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// One simplex phase under Bland's rule. `enterable` bounds the columns
    /// allowed to enter (structural-only in phase 2, and artificials never
    /// re-enter in either phase).
    fn optimize(&mut self, costs: &[f64], enterable: usize) -> Result<(), SimplexError> {
        // Bland's rule terminates; the cap is a tripwire for solver bugs.
        let max_iters = 200 * (self.n + self.m() + 1);
        for _ in 0..max_iters {
            let mut entering = None;
            for col in 0..enterable {
                if self.basis.contains(&col) {
                    continue;
                }
                if self.reduced_cost(costs, col) > PIVOT_TOL {
                    entering = Some(col);
                    break;
                }
            }
            let Some(col) = entering else {
                return Ok(());
            };

            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.m() {
                if !self.live[i] || self.rows[i][col] <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i) / self.rows[i][col];
                let better = match leaving {
                    None => true,
                    Some((best_row, best_ratio)) => {
                        ratio < best_ratio - PIVOT_TOL
                            || (ratio < best_ratio + PIVOT_TOL
                                && self.basis[i] < self.basis[best_row])
                    }
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
            match leaving {
                Some((row, _)) => self.pivot(row, col),
                None => return Err(SimplexError::Unbounded),
            }
        }
        unreachable!("simplex exceeded its pivot cap; anti-cycling rule violated");
    }

    /// Removes artificial variables from the basis after phase 1. A row
    /// whose artificial cannot be swapped for any structural column is a
    /// redundant constraint and is deactivated.
    fn purge_artificials(&mut self) {
        for i in 0..self.m() {
            if !self.live[i] || self.basis[i] < self.n {
                continue;
            }
            let swap = (0..self.n).find(|&j| self.rows[i][j].abs() > PIVOT_TOL);
            match swap {
                Some(col) => self.pivot(i, col),
                None => self.live[i] = false,
            }
        }
    }
}

/// Solves `max c . x` s.t. `A x = b`, `x >= 0`.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<SimplexSolution, SimplexError> {
    assert_eq!(a.len(), b.len(), "row count mismatch");
    let m = a.len();
    let n = c.len();
    let mut tab = Tableau::new(n, a, b);

    // Phase 1: drive the artificial total to zero.
    let mut phase1 = vec![0.0; n + m];
    for v in phase1[n..].iter_mut() {
        *v = -1.0;
    }
    tab.optimize(&phase1, n)?;
    let residual: f64 = (0..m)
        .filter(|&i| tab.live[i] && tab.basis[i] >= n)
        .map(|i| tab.rhs(i))
        .sum();
    if residual > FEAS_TOL {
        return Err(SimplexError::Infeasible { residual });
    }
    tab.purge_artificials();

    // Phase 2: the caller's objective over structural columns only.
    let mut phase2 = vec![0.0; n + m];
    phase2[..n].copy_from_slice(c);
    tab.optimize(&phase2, n)?;

    let mut x = vec![0.0; n];
    for i in 0..m {
        if tab.live[i] && tab.basis[i] < n {
            x[tab.basis[i]] = tab.rhs(i);
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    // Duals from y = c_B B^-1: the artificial block holds B^-1.
    let mut duals = vec![0.0; m];
    for (j, dual) in duals.iter_mut().enumerate() {
        let mut y = 0.0;
        for i in 0..m {
            if tab.live[i] {
                y += phase2[tab.basis[i]] * tab.rows[i][n + j];
            }
        }
        *dual = y * tab.row_sign[j];
    }
    Ok(SimplexSolution { x, objective, duals })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_row_split() {
        let sol = maximize(&[1.0, 1.0], &[vec![1.0, 1.0]], &[1.0]).unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-12);
        assert!((sol.x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_constraints_with_known_duals() {
        // max 2x + y, x + y = 1, x - y = 0 -> x = y = 1/2, value 3/2.
        // Stationarity on both basic columns gives y = (3/2, 1/2).
        let sol = maximize(&[2.0, 1.0], &[vec![1.0, 1.0], vec![1.0, -1.0]], &[1.0, 0.0]).unwrap();
        assert!((sol.objective - 1.5).abs() < 1e-12);
        assert!((sol.x[0] - 0.5).abs() < 1e-12);
        assert!((sol.x[1] - 0.5).abs() < 1e-12);
        assert!((sol.duals[0] - 1.5).abs() < 1e-12, "duals = {:?}", sol.duals);
        assert!((sol.duals[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasibility() {
        let err = maximize(&[1.0, 1.0], &[vec![1.0, 1.0], vec![1.0, 1.0]], &[1.0, 2.0]).unwrap_err();
        assert!(matches!(err, SimplexError::Infeasible { .. }));
    }

    #[test]
    fn detects_unboundedness() {
        // x0 appears in no constraint but has positive cost.
        let err = maximize(&[1.0, 0.0], &[vec![0.0, 1.0]], &[1.0]).unwrap_err();
        assert_eq!(err, SimplexError::Unbounded);
    }

    #[test]
    fn drops_redundant_rows() {
        let sol = maximize(
            &[1.0, 2.0],
            &[vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 0.0]],
            &[1.0, 1.0, 0.25],
        )
        .unwrap();
        assert!((sol.x[0] - 0.25).abs() < 1e-12);
        assert!((sol.x[1] - 0.75).abs() < 1e-12);
        assert!((sol.objective - 1.75).abs() < 1e-12);
        // One of the duplicated rows carries the dual, the dropped one is 0.
        assert!((sol.duals[0] + sol.duals[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn negated_rows_flip_dual_signs_back() {
        // max 3x s.t. -x = -2: x = 2, and the original row's dual is -3.
        let sol = maximize(&[3.0], &[vec![-1.0]], &[-2.0]).unwrap();
        assert!((sol.x[0] - 2.0).abs() < 1e-12);
        assert!((sol.objective - 6.0).abs() < 1e-12);
        assert!((sol.duals[0] + 3.0).abs() < 1e-12, "duals = {:?}", sol.duals);
    }

    #[test]
    fn survives_degenerate_vertices() {
        // The second constraint makes the feasible set a single point with a
        // degenerate basis; Bland's rule must still terminate.
        let sol = maximize(
            &[1.0, 1.0, 0.0],
            &[vec![1.0, 1.0, 1.0], vec![1.0, 1.0, 1.0], vec![0.0, 0.0, 1.0]],
            &[1.0, 1.0, 1.0],
        )
        .unwrap();
        assert!((sol.objective - 0.0).abs() < 1e-12);
    }
}
