//! Dense bounded-variable primal simplex with Bland's rule.
//!
//! Only meant for the small continuous relaxations solved by the enumeration
//! backend and by tests. Integrality is ignored.

use crate::milp::model::MilpModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    /// One value per model variable; meaningful only when optimal.
    pub values: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;
const MAX_ITERATIONS: usize = 50_000;

struct Tableau {
    /// `B⁻¹·A` over structural, slack and artificial columns.
    rows: Vec<Vec<f64>>,
    /// Original `A` (for the final re-solve of the basic values).
    a: Vec<Vec<f64>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    iterations: usize,
}

enum Phase {
    Done,
    Unbounded,
    Limit,
}

impl Tableau {
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (dj, rij) in d.iter_mut().zip(row) {
                    *dj -= cb * rij;
                }
            }
        }
        d
    }

    fn run(&mut self, cost: &[f64]) -> Phase {
        loop {
            if self.iterations >= MAX_ITERATIONS {
                return Phase::Limit;
            }
            let d = self.reduced_costs(cost);
            // Bland: lowest-index improving column.
            let entering = (0..d.len()).find_map(|j| {
                if self.is_basic[j] || self.lower[j] == self.upper[j] {
                    return None;
                }
                if d[j] < -COST_TOL && self.x[j] < self.upper[j] {
                    Some((j, 1.0))
                } else if d[j] > COST_TOL && self.x[j] > self.lower[j] {
                    Some((j, -1.0))
                } else {
                    None
                }
            });
            let Some((j, dir)) = entering else {
                return Phase::Done;
            };
            self.iterations += 1;

            let mut theta = self.upper[j] - self.lower[j];
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let rate = -dir * row[j];
                if rate.abs() <= PIVOT_TOL {
                    continue;
                }
                let b = self.basis[i];
                let (limit, bound) = if rate < 0.0 {
                    ((self.x[b] - self.lower[b]) / -rate, self.lower[b])
                } else {
                    ((self.upper[b] - self.x[b]) / rate, self.upper[b])
                };
                let limit = limit.max(0.0);
                let better = match leave {
                    _ if limit < theta => true,
                    Some((r, _)) if limit == theta => b < self.basis[r],
                    _ => false,
                };
                if better {
                    theta = limit;
                    leave = Some((i, bound));
                }
            }
            if theta.is_infinite() {
                return Phase::Unbounded;
            }
            let step = dir * theta;
            self.x[j] += step;
            for (i, row) in self.rows.iter().enumerate() {
                self.x[self.basis[i]] -= row[j] * step;
            }
            match leave {
                None => {
                    // Bound flip.
                    self.x[j] = if dir > 0.0 { self.upper[j] } else { self.lower[j] };
                }
                Some((r, bound)) => {
                    let old = self.basis[r];
                    self.x[old] = bound;
                    self.pivot(r, j);
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let p = self.rows[r][j];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[j];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[j] = 0.0;
            }
        }
        self.rows[r] = pivot_row;
        let old = self.basis[r];
        self.is_basic[old] = false;
        self.is_basic[j] = true;
        self.basis[r] = j;
    }

    /// Recomputes the basic values from the original matrix, removing the
    /// drift accumulated by repeated pivoting.
    fn refresh_basic_values(&mut self) {
        let m = self.basis.len();
        if m == 0 {
            return;
        }
        let mut b: Vec<Vec<f64>> = (0..m)
            .map(|i| self.basis.iter().map(|&c| self.a[i][c]).collect())
            .collect();
        let mut rhs: Vec<f64> = (0..m)
            .map(|i| {
                -(0..self.x.len())
                    .filter(|&c| !self.is_basic[c])
                    .map(|c| self.a[i][c] * self.x[c])
                    .sum::<f64>()
            })
            .collect();
        if let Some(sol) = gauss_solve(&mut b, &mut rhs) {
            for (k, &c) in self.basis.iter().enumerate() {
                self.x[c] = sol[k];
            }
        }
    }
}

/// Solves `b·x = rhs` with partial pivoting; `None` if singular.
#[allow(clippy::needless_range_loop)]
fn gauss_solve(b: &mut [Vec<f64>], rhs: &mut [f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &k| b[i][col].abs().total_cmp(&b[k][col].abs()))?;
        if b[piv][col].abs() < 1e-14 {
            return None;
        }
        b.swap(col, piv);
        rhs.swap(col, piv);
        for i in col + 1..n {
            let f = b[i][col] / b[col][col];
            if f != 0.0 {
                for k in col..n {
                    b[i][k] -= f * b[col][k];
                }
                rhs[i] -= f * rhs[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| b[i][k] * x[k]).sum();
        x[i] = (rhs[i] - s) / b[i][i];
    }
    Some(x)
}

/// Minimizes the model's objective over its constraints with the variable
/// bounds replaced by `lower`/`upper`.
#[allow(clippy::needless_range_loop)]
pub fn solve_lp(model: &MilpModel, lower: &[f64], upper: &[f64]) -> LpResult {
    let n = model.variables.len();
    let infeasible = |iterations| LpResult {
        status: LpStatus::Infeasible,
        values: vec![0.0; n],
        objective: f64::NAN,
        iterations,
    };
    if (0..n).any(|j| lower[j] > upper[j]) {
        return infeasible(0);
    }

    // Fixed columns are substituted out.
    let free: Vec<usize> = (0..n).filter(|&j| lower[j] < upper[j]).collect();
    let mut col_of = vec![usize::MAX; n];
    for (k, &j) in free.iter().enumerate() {
        col_of[j] = k;
    }
    let nc = free.len();
    let m = model.constraints.len();
    let nv = nc + 2 * m;

    let mut a = vec![vec![0.0; nv]; m];
    let mut lo = vec![0.0; nv];
    let mut up = vec![0.0; nv];
    for (k, &j) in free.iter().enumerate() {
        lo[k] = lower[j];
        up[k] = upper[j];
    }
    for (i, c) in model.constraints.iter().enumerate() {
        let mut fixed = 0.0;
        for &(v, coef) in &c.terms {
            if col_of[v.0] == usize::MAX {
                fixed += coef * lower[v.0];
            } else {
                a[i][col_of[v.0]] += coef;
            }
        }
        a[i][nc + i] = -1.0;
        lo[nc + i] = c.lower - fixed;
        up[nc + i] = c.upper - fixed;
        if lo[nc + i] > up[nc + i] {
            return infeasible(0);
        }
    }

    let mut x = vec![0.0; nv];
    for j in 0..nc + m {
        x[j] = if lo[j].is_finite() {
            lo[j]
        } else if up[j].is_finite() {
            up[j]
        } else {
            0.0
        };
    }
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for i in 0..m {
        let r: f64 = -(0..nc + m).map(|j| a[i][j] * x[j]).sum::<f64>();
        let sigma = if r >= 0.0 { 1.0 } else { -1.0 };
        let art = nc + m + i;
        a[i][art] = sigma;
        lo[art] = 0.0;
        up[art] = f64::INFINITY;
        x[art] = r.abs();
        rows.push(a[i].iter().map(|v| v * sigma).collect::<Vec<f64>>());
        basis.push(art);
    }
    let mut is_basic = vec![false; nv];
    for &b in &basis {
        is_basic[b] = true;
    }
    let mut tab = Tableau {
        rows,
        a,
        lower: lo,
        upper: up,
        x,
        basis,
        is_basic,
        iterations: 0,
    };

    let mut phase1 = vec![0.0; nv];
    for c in phase1.iter_mut().skip(nc + m) {
        *c = 1.0;
    }
    if let Phase::Limit = tab.run(&phase1) {
        return LpResult {
            status: LpStatus::IterationLimit,
            values: vec![0.0; n],
            objective: f64::NAN,
            iterations: tab.iterations,
        };
    }
    let scale = 1.0 + model.constraints.iter().map(|c| c.lower.abs().min(c.upper.abs())).fold(0.0, f64::max);
    let artificial: f64 = (nc + m..nv).map(|j| tab.x[j]).sum();
    if artificial > FEAS_TOL * scale {
        return infeasible(tab.iterations);
    }
    for j in nc + m..nv {
        tab.upper[j] = 0.0;
        if !tab.is_basic[j] {
            tab.x[j] = 0.0;
        }
    }

    let mut cost = vec![0.0; nv];
    for &(v, c) in &model.objective.terms {
        if col_of[v.0] != usize::MAX {
            cost[col_of[v.0]] += c;
        }
    }
    let status = match tab.run(&cost) {
        Phase::Done => LpStatus::Optimal,
        Phase::Unbounded => LpStatus::Unbounded,
        Phase::Limit => LpStatus::IterationLimit,
    };
    tab.refresh_basic_values();

    let mut values: Vec<f64> = lower.to_vec();
    for (k, &j) in free.iter().enumerate() {
        values[j] = tab.x[k].clamp(lower[j], upper[j]);
    }
    let objective = if status == LpStatus::Optimal {
        model.objective.eval(&values)
    } else {
        f64::NAN
    };
    LpResult {
        status,
        values,
        objective,
        iterations: tab.iterations,
    }
}

/// [`solve_lp`] with the model's own bounds.
pub fn solve_relaxation(model: &MilpModel) -> LpResult {
    let lower: Vec<f64> = model.variables.iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = model.variables.iter().map(|v| v.upper).collect();
    solve_lp(model, &lower, &upper)
}
