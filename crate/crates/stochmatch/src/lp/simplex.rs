//! Dense-tableau two-phase simplex with Bland's anti-cycling rule.
//!
//! Solves `maximize c·x` subject to rows `a·x ≤ b` or `a·x = b` with
//! `x ≥ 0`. Desk-scale by design: the tableau is a dense `Vec<Vec<f64>>`
//! and every pivot touches the whole thing. Bland's rule (smallest
//! eligible index in, smallest basic index out on ratio ties) guarantees
//! termination without perturbation tricks.

use crate::lp::Relation;

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DenseStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

pub struct DenseResult {
    pub status: DenseStatus,
    pub objective: f64,
    pub solution: Vec<f64>,
}

struct Tableau {
    /// rows[i] has `ncols + 1` entries, the last being the rhs.
    rows: Vec<Vec<f64>>,
    /// Reduced-cost row for the active objective (same width as rows).
    cost: Vec<f64>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let scale = self.rows[row][col];
        for x in self.rows[row].iter_mut() {
            *x /= scale;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let factor = r[col];
            if factor != 0.0 {
                for (x, p) in r.iter_mut().zip(&pivot_row) {
                    *x -= factor * p;
                }
            }
        }
        let factor = self.cost[col];
        if factor != 0.0 {
            for (x, p) in self.cost.iter_mut().zip(&pivot_row) {
                *x -= factor * p;
            }
        }
        self.basis[row] = col;
    }

    /// Runs simplex iterations on the current cost row (a minimization:
    /// entering columns have negative reduced cost). Returns false on
    /// unboundedness.
    fn iterate(&mut self, eligible: usize) -> bool {
        loop {
            // Bland: smallest-index column with room to improve.
            let entering = (0..eligible).find(|&j| self.cost[j] < -EPS);
            let Some(col) = entering else {
                return true;
            };
            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][col];
                if a > EPS {
                    let ratio = self.rows[i][self.ncols] / a;
                    let better = match leaving {
                        None => true,
                        Some((best_i, best_r)) => {
                            ratio < best_r - EPS
                                || (ratio < best_r + EPS && self.basis[i] < self.basis[best_i])
                        }
                    };
                    if better {
                        leaving = Some((i, ratio));
                    }
                }
            }
            match leaving {
                None => return false,
                Some((row, _)) => self.pivot(row, col),
            }
        }
    }
}

/// Solves the LP given dense row data. `rows` are `(coefficients, relation,
/// rhs)` with `coefficients.len() == ncols`.
pub fn solve_dense(
    ncols: usize,
    objective: &[f64],
    rows: &[(Vec<f64>, Relation, f64)],
) -> DenseResult {
    let m = rows.len();
    if m == 0 {
        // No constraints: optimum is 0 unless some objective coefficient is
        // positive, in which case the LP is unbounded.
        if objective.iter().any(|&c| c > EPS) {
            return DenseResult {
                status: DenseStatus::Unbounded,
                objective: 0.0,
                solution: vec![0.0; ncols],
            };
        }
        return DenseResult {
            status: DenseStatus::Optimal,
            objective: 0.0,
            solution: vec![0.0; ncols],
        };
    }

    // Column layout: structural | slack (one slot per ≤ row) | artificial | rhs.
    // A ≤ row with negative rhs is sign-flipped into a ≥ row; its slot holds
    // a surplus (−1) and the row gets an artificial like an equality.
    let n_slack = rows
        .iter()
        .filter(|(_, rel, _)| *rel == Relation::Le)
        .count();
    let total = ncols + n_slack + m;
    let art_base = ncols + n_slack;

    let mut tab_rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut basis = vec![0usize; m];
    let mut slack_idx = ncols;
    let mut need_artificial = vec![false; m];

    for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
        let flip = *rhs < 0.0;
        let sign = if flip { -1.0 } else { 1.0 };
        let mut row = vec![0.0; total + 1];
        for (j, &c) in coeffs.iter().enumerate() {
            row[j] = sign * c;
        }
        row[total] = sign * rhs;
        match (rel, flip) {
            (Relation::Le, false) => {
                row[slack_idx] = 1.0;
                basis[i] = slack_idx;
                slack_idx += 1;
            }
            (Relation::Le, true) => {
                row[slack_idx] = -1.0;
                slack_idx += 1;
                need_artificial[i] = true;
            }
            (Relation::Eq, _) => {
                need_artificial[i] = true;
            }
        }
        if need_artificial[i] {
            row[art_base + i] = 1.0;
            basis[i] = art_base + i;
        }
        tab_rows.push(row);
    }

    let mut tab = Tableau {
        rows: tab_rows,
        cost: vec![0.0; total + 1],
        basis,
        ncols: total,
    };

    // Phase 1: minimize the sum of artificials.
    if need_artificial.iter().any(|&b| b) {
        for i in 0..m {
            if need_artificial[i] {
                tab.cost[art_base + i] = 1.0;
            }
        }
        // Price out the basic artificials.
        for i in 0..m {
            if need_artificial[i] {
                let row = tab.rows[i].clone();
                for (x, r) in tab.cost.iter_mut().zip(&row) {
                    *x -= r;
                }
            }
        }
        if !tab.iterate(art_base) {
            // Phase 1 is bounded below by 0; this cannot happen.
            return DenseResult {
                status: DenseStatus::Infeasible,
                objective: 0.0,
                solution: vec![0.0; ncols],
            };
        }
        let residual = -tab.cost[total];
        if residual > 1e-7 {
            return DenseResult {
                status: DenseStatus::Infeasible,
                objective: 0.0,
                solution: vec![0.0; ncols],
            };
        }
        // Drive surviving artificials out of the basis where possible.
        for i in 0..m {
            if tab.basis[i] >= art_base {
                if let Some(col) = (0..art_base).find(|&j| tab.rows[i][j].abs() > EPS) {
                    tab.pivot(i, col);
                }
                // Otherwise the row is redundant; the artificial stays basic
                // at value zero, which is harmless.
            }
        }
    }

    // Phase 2: minimize −c·x with artificial columns frozen.
    tab.cost = vec![0.0; total + 1];
    for (j, &c) in objective.iter().enumerate() {
        tab.cost[j] = -c;
    }
    for i in 0..m {
        let b = tab.basis[i];
        let factor = tab.cost[b];
        if factor != 0.0 {
            let row = tab.rows[i].clone();
            for (x, r) in tab.cost.iter_mut().zip(&row) {
                *x -= factor * r;
            }
        }
    }
    if !tab.iterate(art_base) {
        return DenseResult {
            status: DenseStatus::Unbounded,
            objective: 0.0,
            solution: vec![0.0; ncols],
        };
    }

    let mut solution = vec![0.0; ncols];
    for i in 0..m {
        if tab.basis[i] < ncols {
            solution[tab.basis[i]] = tab.rows[i][total];
        }
    }
    for x in solution.iter_mut() {
        if *x < 0.0 && *x > -1e-9 {
            *x = 0.0;
        }
    }
    let objective_value: f64 = objective.iter().zip(&solution).map(|(c, x)| c * x).sum();
    DenseResult {
        status: DenseStatus::Optimal,
        objective: objective_value,
        solution,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bound() {
        // max x s.t. x ≤ 1
        let r = solve_dense(1, &[1.0], &[(vec![1.0], Relation::Le, 1.0)]);
        assert_eq!(r.status, DenseStatus::Optimal);
        assert!((r.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_tie() {
        // max x + y s.t. x + y ≤ 1
        let r = solve_dense(2, &[1.0, 1.0], &[(vec![1.0, 1.0], Relation::Le, 1.0)]);
        assert_eq!(r.status, DenseStatus::Optimal);
        assert!((r.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn equality_rows_need_phase_one() {
        // max 2x + 3y s.t. x + y = 1, y ≤ 0.25 → x = 0.75, y = 0.25, obj 2.25
        let r = solve_dense(
            2,
            &[2.0, 3.0],
            &[
                (vec![1.0, 1.0], Relation::Eq, 1.0),
                (vec![0.0, 1.0], Relation::Le, 0.25),
            ],
        );
        assert_eq!(r.status, DenseStatus::Optimal);
        assert!((r.objective - 2.25).abs() < 1e-9);
        assert!((r.solution[0] - 0.75).abs() < 1e-9);
        assert!((r.solution[1] - 0.25).abs() < 1e-9);
    }

    #[test]
    fn infeasible_detected() {
        // x ≤ 1, x = 2
        let r = solve_dense(
            1,
            &[1.0],
            &[
                (vec![1.0], Relation::Le, 1.0),
                (vec![1.0], Relation::Eq, 2.0),
            ],
        );
        assert_eq!(r.status, DenseStatus::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        // max x s.t. −x ≤ 1
        let r = solve_dense(1, &[1.0], &[(vec![-1.0], Relation::Le, 1.0)]);
        assert_eq!(r.status, DenseStatus::Unbounded);
    }

    #[test]
    fn negative_rhs_normalizes() {
        // max −x s.t. −x ≤ −1  (i.e. x ≥ 1) → x = 1, obj −1
        let r = solve_dense(1, &[-1.0], &[(vec![-1.0], Relation::Le, -1.0)]);
        assert_eq!(r.status, DenseStatus::Optimal);
        assert!((r.objective + 1.0).abs() < 1e-9);
        assert!((r.solution[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn classic_two_by_two() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → obj 36 at (2,6)
        let r = solve_dense(
            2,
            &[3.0, 5.0],
            &[
                (vec![1.0, 0.0], Relation::Le, 4.0),
                (vec![0.0, 2.0], Relation::Le, 12.0),
                (vec![3.0, 2.0], Relation::Le, 18.0),
            ],
        );
        assert_eq!(r.status, DenseStatus::Optimal);
        assert!((r.objective - 36.0).abs() < 1e-9);
        assert!((r.solution[0] - 2.0).abs() < 1e-9);
        assert!((r.solution[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn redundant_equality_rows() {
        // x + y = 1 twice plus max y → 1
        let r = solve_dense(
            2,
            &[0.0, 1.0],
            &[
                (vec![1.0, 1.0], Relation::Eq, 1.0),
                (vec![1.0, 1.0], Relation::Eq, 1.0),
            ],
        );
        assert_eq!(r.status, DenseStatus::Optimal);
        assert!((r.objective - 1.0).abs() < 1e-9);
    }
}
