//! Small dense linear-program solver.
//!
//! Solves `maximize c^T x` subject to `A x <= b` and box bounds
//! `lo <= x <= hi`, at desk scale (tens of variables). Right-hand sides may
//! be negative, so the solver runs a two-phase simplex: phase 1 drives
//! artificial variables to zero (or proves infeasibility), phase 2 optimizes
//! the real objective. Bland's rule keeps the pivoting cycle-free, and at
//! termination every reduced cost is nonnegative, i.e. no feasible improving
//! direction remains among the non-basic columns.
//!
//! Unboundedness cannot occur for well-formed inputs because the box bounds
//! are mandatory; it is still reported as a distinct status rather than
//! silently misclassified.

/// `maximize c^T x  s.t.  A x <= b,  lo <= x <= hi`.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub c: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal point (empty unless status is Optimal).
    pub x: Vec<f64>,
    pub objective: f64,
}

const EPS: f64 = 1e-11;

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    n_structural: usize,
    n_slack: usize,
    n_artificial: usize,
}

impl Tableau {
    fn n_cols(&self) -> usize {
        self.n_structural + self.n_slack + self.n_artificial
    }

    fn pivot(&mut self, row: usize, col: usize, cost: &mut [f64], cost_rhs: &mut f64) {
        let p = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v /= p;
        }
        self.rhs[row] /= p;
        for r in 0..self.rows.len() {
            if r == row {
                continue;
            }
            let factor = self.rows[r][col];
            if factor.abs() <= EPS {
                continue;
            }
            for c in 0..self.rows[r].len() {
                self.rows[r][c] -= factor * self.rows[row][c];
            }
            self.rhs[r] -= factor * self.rhs[row];
        }
        let factor = cost[col];
        if factor.abs() > 0.0 {
            for c in 0..cost.len() {
                cost[c] -= factor * self.rows[row][c];
            }
            *cost_rhs -= factor * self.rhs[row];
        }
        self.basis[row] = col;
    }

    /// Minimize the given cost vector with Bland's rule. Returns false when
    /// an unbounded ray is detected.
    fn run_simplex(&mut self, cost: &mut [f64], cost_rhs: &mut f64, allow: impl Fn(usize) -> bool) -> bool {
        loop {
            // Bland: smallest-index column with negative reduced cost.
            let entering = (0..self.n_cols())
                .find(|&j| allow(j) && !self.basis.contains(&j) && cost[j] < -EPS);
            let Some(col) = entering else {
                return true;
            };
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let coef = self.rows[r][col];
                if coef > EPS {
                    let ratio = self.rhs[r] / coef;
                    let better = match leaving {
                        None => true,
                        // Tie-break by smallest basis index (Bland).
                        Some((lr, lv)) => {
                            ratio < lv - EPS
                                || (ratio < lv + EPS && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leaving = Some((r, ratio));
                    }
                }
            }
            let Some((row, _)) = leaving else {
                return false;
            };
            self.pivot(row, col, cost, cost_rhs);
        }
    }
}

/// Solve the LP. See the module docs for the method.
pub fn solve_lp(problem: &LpProblem) -> LpSolution {
    let n = problem.c.len();
    assert_eq!(problem.lo.len(), n, "bound dimensions must match c");
    assert_eq!(problem.hi.len(), n, "bound dimensions must match c");
    assert!(
        problem.a.iter().all(|row| row.len() == n),
        "constraint rows must match variable count"
    );
    assert_eq!(problem.a.len(), problem.b.len());
    if problem.lo.iter().zip(&problem.hi).any(|(l, h)| l > h) {
        return LpSolution {
            status: LpStatus::Infeasible,
            x: Vec::new(),
            objective: f64::NEG_INFINITY,
        };
    }

    // Shift to y = x - lo >= 0 and append the upper-bound rows y_i <= hi-lo.
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(problem.a.len() + n);
    let mut rhs: Vec<f64> = Vec::with_capacity(problem.a.len() + n);
    for (row, &b) in problem.a.iter().zip(&problem.b) {
        let shift: f64 = row.iter().zip(&problem.lo).map(|(a, l)| a * l).sum();
        rows.push(row.clone());
        rhs.push(b - shift);
    }
    for i in 0..n {
        let mut row = vec![0.0; n];
        row[i] = 1.0;
        rows.push(row);
        rhs.push(problem.hi[i] - problem.lo[i]);
    }

    // Normalize row scales so the pivot tolerance is meaningful across
    // mixed-unit inputs.
    for (row, r) in rows.iter_mut().zip(rhs.iter_mut()) {
        let scale = row.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if scale > 0.0 {
            row.iter_mut().for_each(|v| *v /= scale);
            *r /= scale;
        }
    }

    let m = rows.len();
    let n_artificial = rhs.iter().filter(|&&b| b < 0.0).count();
    let mut tab = Tableau {
        rows: vec![vec![0.0; n + m + n_artificial]; m],
        rhs: vec![0.0; m],
        basis: vec![0; m],
        n_structural: n,
        n_slack: m,
        n_artificial,
    };

    let mut next_artificial = n + m;
    for i in 0..m {
        let negate = rhs[i] < 0.0;
        let sign = if negate { -1.0 } else { 1.0 };
        for j in 0..n {
            tab.rows[i][j] = sign * rows[i][j];
        }
        tab.rows[i][n + i] = sign; // slack
        tab.rhs[i] = sign * rhs[i];
        if negate {
            tab.rows[i][next_artificial] = 1.0;
            tab.basis[i] = next_artificial;
            next_artificial += 1;
        } else {
            tab.basis[i] = n + i;
        }
    }

    // Phase 1: minimize the sum of artificials.
    if n_artificial > 0 {
        let mut cost = vec![0.0; n + m + n_artificial];
        for j in n + m..n + m + n_artificial {
            cost[j] = 1.0;
        }
        let mut cost_rhs = 0.0;
        // Price out the basic artificials.
        for i in 0..m {
            if tab.basis[i] >= n + m {
                for c in 0..cost.len() {
                    cost[c] -= tab.rows[i][c];
                }
                cost_rhs -= tab.rhs[i];
            }
        }
        if !tab.run_simplex(&mut cost, &mut cost_rhs, |_| true) {
            // A phase-1 ray cannot occur (costs bounded below by 0); treat
            // defensively as infeasible.
            return LpSolution {
                status: LpStatus::Infeasible,
                x: Vec::new(),
                objective: f64::NEG_INFINITY,
            };
        }
        // cost_rhs holds -z; phase-1 optimum is feasible iff z ~ 0.
        if -cost_rhs > 1e-8 {
            return LpSolution {
                status: LpStatus::Infeasible,
                x: Vec::new(),
                objective: f64::NEG_INFINITY,
            };
        }
        // Pivot remaining artificials (at value zero) out of the basis.
        for i in 0..m {
            if tab.basis[i] >= n + m {
                if let Some(col) = (0..n + m).find(|&j| tab.rows[i][j].abs() > EPS) {
                    let mut dummy = vec![0.0; n + m + n_artificial];
                    let mut dummy_rhs = 0.0;
                    tab.pivot(i, col, &mut dummy, &mut dummy_rhs);
                }
            }
        }
    }

    // Phase 2: minimize -c^T y, never re-entering artificial columns.
    let mut cost = vec![0.0; n + m + n_artificial];
    for j in 0..n {
        cost[j] = -problem.c[j];
    }
    let mut cost_rhs = 0.0;
    for i in 0..m {
        let bj = tab.basis[i];
        // Redundant rows may keep a zero-valued artificial basic; skip them.
        if bj < n + m && cost[bj].abs() > 0.0 {
            let factor = cost[bj];
            for c in 0..cost.len() {
                cost[c] -= factor * tab.rows[i][c];
            }
            cost_rhs -= factor * tab.rhs[i];
        }
    }
    let n_total = n + m;
    if !tab.run_simplex(&mut cost, &mut cost_rhs, |j| j < n_total) {
        return LpSolution {
            status: LpStatus::Unbounded,
            x: Vec::new(),
            objective: f64::INFINITY,
        };
    }

    let mut y = vec![0.0; n];
    for i in 0..m {
        if tab.basis[i] < n {
            y[tab.basis[i]] = tab.rhs[i];
        }
    }
    let x: Vec<f64> = y
        .iter()
        .zip(&problem.lo)
        .zip(&problem.hi)
        .map(|((&yi, &lo), &hi)| (yi + lo).clamp(lo, hi))
        .collect();
    let objective = problem.c.iter().zip(&x).map(|(c, x)| c * x).sum();
    LpSolution {
        status: LpStatus::Optimal,
        x,
        objective,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_variable_capped_by_row() {
        let p = LpProblem {
            c: vec![1.0],
            a: vec![vec![1.0]],
            b: vec![1.0],
            lo: vec![0.0],
            hi: vec![2.0],
        };
        let sol = solve_lp(&p);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        // x >= 2 written as -x <= -2, together with x <= 1.
        let p = LpProblem {
            c: vec![1.0],
            a: vec![vec![-1.0], vec![1.0]],
            b: vec![-2.0, 1.0],
            lo: vec![0.0],
            hi: vec![5.0],
        };
        assert_eq!(solve_lp(&p).status, LpStatus::Infeasible);
    }

    #[test]
    fn negative_rhs_requires_phase_one() {
        // x + y >= 1 with minimize x + y (maximize -(x+y)): optimum on the line.
        let p = LpProblem {
            c: vec![-1.0, -1.0],
            a: vec![vec![-1.0, -1.0]],
            b: vec![-1.0],
            lo: vec![0.0, 0.0],
            hi: vec![3.0, 3.0],
        };
        let sol = solve_lp(&p);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] + sol.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn nonzero_lower_bounds_shift_correctly() {
        let p = LpProblem {
            c: vec![2.0, -1.0],
            a: vec![vec![1.0, 1.0]],
            b: vec![4.0],
            lo: vec![1.0, 1.5],
            hi: vec![10.0, 10.0],
        };
        let sol = solve_lp(&p);
        assert_eq!(sol.status, LpStatus::Optimal);
        // Push x up to the row limit, keep y at its lower bound.
        assert!((sol.x[0] - 2.5).abs() < 1e-9, "x = {}", sol.x[0]);
        assert!((sol.x[1] - 1.5).abs() < 1e-9, "y = {}", sol.x[1]);
    }

    /// Random fat-feasible instances checked against a dense grid oracle.
    fn grid_oracle(p: &LpProblem, steps: usize) -> Option<f64> {
        let n = p.c.len();
        let mut best: Option<f64> = None;
        let mut idx = vec![0usize; n];
        loop {
            let x: Vec<f64> = (0..n)
                .map(|i| {
                    p.lo[i] + (p.hi[i] - p.lo[i]) * idx[i] as f64 / (steps - 1) as f64
                })
                .collect();
            let feasible = p
                .a
                .iter()
                .zip(&p.b)
                .all(|(row, &b)| row.iter().zip(&x).map(|(a, x)| a * x).sum::<f64>() <= b + 1e-12);
            if feasible {
                let obj: f64 = p.c.iter().zip(&x).map(|(c, x)| c * x).sum();
                best = Some(best.map_or(obj, |b: f64| b.max(obj)));
            }
            let mut dim = 0;
            loop {
                if dim == n {
                    return best;
                }
                idx[dim] += 1;
                if idx[dim] < steps {
                    break;
                }
                idx[dim] = 0;
                dim += 1;
            }
        }
    }

    fn random_fat_instance(rng: &mut ChaCha8Rng, n: usize, m: usize) -> LpProblem {
        // Guarantee an interior feasible point so the grid sees the region.
        let lo = vec![0.0; n];
        let hi = vec![1.0; n];
        let x0: Vec<f64> = (0..n).map(|_| 0.2 + 0.6 * rng.gen::<f64>()).collect();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for _ in 0..m {
            let row: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let at_x0: f64 = row.iter().zip(&x0).map(|(a, x)| a * x).sum();
            a.push(row);
            b.push(at_x0 + 0.05 + 0.3 * rng.gen::<f64>());
        }
        // Normalize the objective so grid resolution maps to objective error.
        let mut c: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let norm: f64 = c.iter().map(|v| v.abs()).sum();
        c.iter_mut().for_each(|v| *v /= norm.max(1e-9));
        LpProblem { c, a, b, lo, hi }
    }

    #[test]
    fn two_variable_instances_match_grid_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1001);
        for trial in 0..20 {
            let p = random_fat_instance(&mut rng, 2, 3);
            let sol = solve_lp(&p);
            assert_eq!(sol.status, LpStatus::Optimal, "trial {trial}");
            let grid = grid_oracle(&p, 1001).expect("fat instance must be grid-feasible");
            // ||c||_1 = 1 and grid step 1e-3 of the box bound the gap by 1e-3.
            assert!(
                sol.objective >= grid - 1e-9,
                "trial {trial}: solver below a feasible grid point: {} < {grid}",
                sol.objective
            );
            assert!(
                sol.objective - grid <= 1.1e-3,
                "trial {trial}: gap {} exceeds grid resolution",
                sol.objective - grid
            );
            for (row, &b) in p.a.iter().zip(&p.b) {
                let lhs: f64 = row.iter().zip(&sol.x).map(|(a, x)| a * x).sum();
                assert!(lhs <= b + 1e-8, "constraint violated at optimum");
            }
        }
    }

    #[test]
    fn three_variable_instances_match_grid_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1002);
        for trial in 0..5 {
            let p = random_fat_instance(&mut rng, 3, 4);
            let sol = solve_lp(&p);
            assert_eq!(sol.status, LpStatus::Optimal, "trial {trial}");
            let grid = grid_oracle(&p, 201).expect("fat instance must be grid-feasible");
            assert!(sol.objective >= grid - 1e-9, "trial {trial}");
            assert!(
                sol.objective - grid <= 1.6e-2,
                "trial {trial}: gap {} too large for 1/200 grid",
                sol.objective - grid
            );
        }
    }
}
