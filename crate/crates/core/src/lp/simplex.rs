//! Dense-tableau primal simplex with bounded variables and Bland's rule.
//!
//! Rows `a·x ≥ b` become `a·x − s = b` with a surplus `s ≥ 0`. Nonbasic
//! variables rest at one of their bounds. Rows whose starting point violates
//! the constraint get an artificial variable, removed by a first phase that
//! minimizes the artificial sum.

use std::time::Instant;

use super::{LpError, LpProblem, LpSolution, LpStatus};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;
const RATIO_TIE: f64 = 1e-12;

pub fn lp_solve(problem: &LpProblem) -> Result<LpSolution, LpError> {
    lp_solve_until(problem, None)
}

pub(crate) fn lp_solve_until(
    problem: &LpProblem,
    deadline: Option<Instant>,
) -> Result<LpSolution, LpError> {
    problem.check()?;
    let mut tab = Tableau::new(problem);
    let phase1_cost: Vec<f64> = (0..tab.ncols)
        .map(|j| if j >= tab.first_artificial { 1.0 } else { 0.0 })
        .collect();
    tab.run(&phase1_cost, deadline)?;
    let infeasibility: f64 = (tab.first_artificial..tab.ncols).map(|j| tab.val[j]).sum();
    if infeasibility > FEAS_TOL {
        return Ok(LpSolution {
            values: tab.val[..tab.n].to_vec(),
            objective_value: f64::NAN,
            status: LpStatus::Infeasible,
        });
    }
    tab.retire_artificials();

    let mut cost = vec![0.0; tab.ncols];
    cost[..tab.n].copy_from_slice(&problem.objective);
    tab.run(&cost, deadline)?;

    let values: Vec<f64> = (0..tab.n)
        .map(|j| tab.val[j].clamp(tab.lo[j], tab.hi[j]))
        .collect();
    let objective_value = values
        .iter()
        .zip(&problem.objective)
        .map(|(x, c)| x * c)
        .sum();
    Ok(LpSolution { values, objective_value, status: LpStatus::Optimal })
}

struct Tableau {
    n: usize,
    m: usize,
    ncols: usize,
    first_artificial: usize,
    /// `m` rows of `ncols + 1` entries; the last entry is the transformed rhs.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    at_upper: Vec<bool>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    val: Vec<f64>,
}

impl Tableau {
    fn new(p: &LpProblem) -> Self {
        let n = p.num_vars();
        let m = p.constraints.len();
        let residual: Vec<f64> = p
            .constraints
            .iter()
            .map(|c| c.rhs - c.terms.iter().map(|&(j, a)| a * p.bounds[j].0).sum::<f64>())
            .collect();
        let n_art = residual.iter().filter(|&&r| r > 0.0).count();
        let ncols = n + m + n_art;
        let first_artificial = n + m;

        let mut lo = vec![0.0; ncols];
        let mut hi = vec![f64::INFINITY; ncols];
        for (j, &(l, h)) in p.bounds.iter().enumerate() {
            lo[j] = l;
            hi[j] = h;
        }
        let mut val = lo.clone();
        let mut rows = vec![vec![0.0; ncols + 1]; m];
        let mut basis = vec![0; m];
        let mut is_basic = vec![false; ncols];
        let mut next_art = first_artificial;
        for (i, c) in p.constraints.iter().enumerate() {
            let row = &mut rows[i];
            if residual[i] > 0.0 {
                for &(j, a) in &c.terms {
                    row[j] = a;
                }
                row[n + i] = -1.0;
                row[next_art] = 1.0;
                row[ncols] = c.rhs;
                basis[i] = next_art;
                val[next_art] = residual[i];
                next_art += 1;
            } else {
                for &(j, a) in &c.terms {
                    row[j] = -a;
                }
                row[n + i] = 1.0;
                row[ncols] = -c.rhs;
                basis[i] = n + i;
                val[n + i] = -residual[i];
            }
            is_basic[basis[i]] = true;
        }
        Self {
            n,
            m,
            ncols,
            first_artificial,
            rows,
            basis,
            is_basic,
            at_upper: vec![false; ncols],
            lo,
            hi,
            val,
        }
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (dj, &t) in d.iter_mut().zip(row.iter()) {
                    *dj -= cb * t;
                }
            }
        }
        d
    }

    fn run(&mut self, cost: &[f64], deadline: Option<Instant>) -> Result<(), LpError> {
        let mut d = self.reduced_costs(cost);
        let mut iterations: u64 = 0;
        loop {
            iterations += 1;
            if iterations.is_multiple_of(64) && deadline.is_some_and(|dl| Instant::now() >= dl) {
                return Err(LpError::Deadline);
            }
            // Bland: lowest-index improving nonbasic variable.
            let entering = (0..self.ncols).find_map(|j| {
                if self.is_basic[j] || self.hi[j] - self.lo[j] <= 0.0 {
                    return None;
                }
                if !self.at_upper[j] && d[j] < -COST_TOL {
                    Some((j, 1.0))
                } else if self.at_upper[j] && d[j] > COST_TOL {
                    Some((j, -1.0))
                } else {
                    None
                }
            });
            let Some((q, dir)) = entering else {
                break;
            };

            let mut theta = self.hi[q] - self.lo[q];
            let mut leave: Option<(usize, bool)> = None;
            for i in 0..self.m {
                let alpha = self.rows[i][q] * dir;
                let b = self.basis[i];
                let (limit, to_upper) = if alpha > PIVOT_TOL {
                    ((self.val[b] - self.lo[b]) / alpha, false)
                } else if alpha < -PIVOT_TOL && self.hi[b].is_finite() {
                    ((self.hi[b] - self.val[b]) / -alpha, true)
                } else {
                    continue;
                };
                let limit = limit.max(0.0);
                // Ties go to the smallest variable index; a bound flip of
                // the entering variable competes as index `q`.
                let incumbent = leave.map_or(q, |(r, _)| self.basis[r]);
                let better = limit < theta - RATIO_TIE
                    || (limit <= theta + RATIO_TIE && b < incumbent);
                if better {
                    theta = limit;
                    leave = Some((i, to_upper));
                }
            }
            if !theta.is_finite() {
                return Err(LpError::Unbounded);
            }

            let step = dir * theta;
            self.val[q] += step;
            for i in 0..self.m {
                let t = self.rows[i][q];
                if t != 0.0 {
                    self.val[self.basis[i]] -= t * step;
                }
            }
            match leave {
                None => {
                    self.at_upper[q] = !self.at_upper[q];
                    self.val[q] = if self.at_upper[q] { self.hi[q] } else { self.lo[q] };
                }
                Some((r, to_upper)) => {
                    let b = self.basis[r];
                    self.val[b] = if to_upper { self.hi[b] } else { self.lo[b] };
                    self.at_upper[b] = to_upper;
                    self.pivot(r, q, &mut d);
                }
            }
        }
        self.refresh_basic_values();
        Ok(())
    }

    fn pivot(&mut self, r: usize, q: usize, d: &mut [f64]) {
        let piv = self.rows[r][q];
        for x in self.rows[r].iter_mut() {
            *x /= piv;
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[q];
            if f != 0.0 {
                for (x, &p) in row.iter_mut().zip(pivot_row.iter()) {
                    *x -= f * p;
                }
                row[q] = 0.0;
            }
        }
        let f = d[q];
        if f != 0.0 {
            for (x, &p) in d.iter_mut().zip(pivot_row.iter()) {
                *x -= f * p;
            }
            d[q] = 0.0;
        }
        self.rows[r] = pivot_row;
        self.is_basic[self.basis[r]] = false;
        self.is_basic[q] = true;
        self.at_upper[q] = false;
        self.basis[r] = q;
    }

    /// Recomputes basic values from the transformed rhs to shed drift.
    fn refresh_basic_values(&mut self) {
        for i in 0..self.m {
            let row = &self.rows[i];
            let mut v = row[self.ncols];
            for (j, &a) in row[..self.ncols].iter().enumerate() {
                if !self.is_basic[j] && a != 0.0 {
                    v -= a * self.val[j];
                }
            }
            self.val[self.basis[i]] = v;
        }
    }

    /// Pivots zero-valued artificials out of the basis where possible and
    /// pins every artificial to zero.
    fn retire_artificials(&mut self) {
        let mut scratch = vec![0.0; self.ncols + 1];
        for r in 0..self.m {
            if self.basis[r] < self.first_artificial {
                continue;
            }
            let q = (0..self.first_artificial)
                .find(|&j| !self.is_basic[j] && self.rows[r][j].abs() > PIVOT_TOL);
            if let Some(q) = q {
                let b = self.basis[r];
                self.val[b] = 0.0;
                self.pivot(r, q, &mut scratch);
            }
        }
        for j in self.first_artificial..self.ncols {
            self.hi[j] = 0.0;
            if !self.is_basic[j] {
                self.val[j] = 0.0;
                self.at_upper[j] = false;
            }
        }
        self.refresh_basic_values();
    }
}
