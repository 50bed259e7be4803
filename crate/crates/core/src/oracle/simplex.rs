//! Dense two-phase simplex with Bland's rule.
//!
//! Sized for the tiny LPs the capacity oracle produces (a few hundred
//! variables). Bland's anti-cycling rule guarantees termination and makes
//! the returned vertex deterministic on degenerate optima, which matters
//! because downstream condition checks consume the argmax vector, not just
//! the optimal value. Double precision with a 1e-9 feasibility tolerance.

pub const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub rel: Rel,
    pub rhs: f64,
}

/// `maximize c.x  s.t.  constraints, x >= 0`.
#[derive(Debug, Clone, Default)]
pub struct Lp {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl Lp {
    pub fn new(n_vars: usize) -> Self {
        Lp {
            n_vars,
            objective: vec![0.0; n_vars],
            constraints: Vec::new(),
        }
    }

    pub fn constrain(&mut self, coeffs: Vec<(usize, f64)>, rel: Rel, rhs: f64) {
        debug_assert!(coeffs.iter().all(|&(j, _)| j < self.n_vars));
        self.constraints.push(Constraint { coeffs, rel, rhs });
    }

    pub fn solve(&self) -> LpResult {
        Tableau::build(self).solve(&self.objective)
    }
}

struct Tableau {
    n_structural: usize,
    n_total: usize, // structural + slack/surplus + artificial
    artificial_start: usize,
    rows: Vec<Vec<f64>>, // each of length n_total + 1 (rhs last)
    basis: Vec<usize>,
}

impl Tableau {
    fn build(lp: &Lp) -> Tableau {
        let m = lp.constraints.len();
        let n = lp.n_vars;
        // One slack/surplus column per inequality, one artificial per
        // Ge/Eq row (after rhs normalization).
        let mut normalized: Vec<(Vec<f64>, Rel, f64)> = Vec::with_capacity(m);
        for c in &lp.constraints {
            let mut dense = vec![0.0; n];
            for &(j, v) in &c.coeffs {
                dense[j] += v;
            }
            let (dense, rel, rhs) = if c.rhs < 0.0 {
                let flipped = match c.rel {
                    Rel::Le => Rel::Ge,
                    Rel::Ge => Rel::Le,
                    Rel::Eq => Rel::Eq,
                };
                (dense.iter().map(|v| -v).collect(), flipped, -c.rhs)
            } else {
                (dense, c.rel, c.rhs)
            };
            normalized.push((dense, rel, rhs));
        }
        let n_slack = normalized
            .iter()
            .filter(|(_, rel, _)| *rel != Rel::Eq)
            .count();
        let n_art = normalized
            .iter()
            .filter(|(_, rel, _)| *rel != Rel::Le)
            .count();
        let n_total = n + n_slack + n_art;
        let artificial_start = n + n_slack;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut next_slack = n;
        let mut next_art = artificial_start;
        for (dense, rel, rhs) in normalized {
            let mut row = vec![0.0; n_total + 1];
            row[..n].copy_from_slice(&dense);
            row[n_total] = rhs;
            match rel {
                Rel::Le => {
                    row[next_slack] = 1.0;
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Rel::Ge => {
                    row[next_slack] = -1.0;
                    next_slack += 1;
                    row[next_art] = 1.0;
                    basis.push(next_art);
                    next_art += 1;
                }
                Rel::Eq => {
                    row[next_art] = 1.0;
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            rows.push(row);
        }
        Tableau {
            n_structural: n,
            n_total,
            artificial_start,
            rows,
            basis,
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.rows[row][col];
        debug_assert!(piv.abs() > TOL);
        for v in self.rows[row].iter_mut() {
            *v /= piv;
        }
        for i in 0..self.rows.len() {
            if i == row {
                continue;
            }
            let factor = self.rows[i][col];
            if factor.abs() <= TOL {
                continue;
            }
            for j in 0..=self.n_total {
                let delta = factor * self.rows[row][j];
                self.rows[i][j] -= delta;
            }
            self.rows[i][col] = 0.0;
        }
        self.basis[row] = col;
    }

    // Bland's rule: entering column is the lowest-index one with positive
    // reduced cost; leaving row has the minimum ratio, ties broken by the
    // lowest basis variable index. `allowed` bounds the entering columns.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<(), ()> {
        loop {
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut reduced = cost[j];
                for (i, row) in self.rows.iter().enumerate() {
                    reduced -= cost[self.basis[i]] * row[j];
                }
                if reduced > TOL {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else { return Ok(()) };
            let mut leaving: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[col] > TOL {
                    let ratio = row[self.n_total] / row[col];
                    let better = match leaving {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - TOL || (ratio < lr + TOL && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leaving = Some((i, ratio));
                    }
                }
            }
            let Some((row, _)) = leaving else {
                return Err(());
            };
            self.pivot(row, col);
        }
    }

    fn solve(mut self, objective: &[f64]) -> LpResult {
        // Phase 1: drive the artificials to zero.
        if self.artificial_start < self.n_total {
            let mut cost = vec![0.0; self.n_total];
            for c in cost[self.artificial_start..].iter_mut() {
                *c = -1.0;
            }
            // Maximize -(sum of artificials); always bounded by 0.
            self.optimize(&cost, self.n_total)
                .expect("phase 1 cannot be unbounded");
            let infeasibility: f64 = self
                .basis
                .iter()
                .enumerate()
                .filter(|(_, &b)| b >= self.artificial_start)
                .map(|(i, _)| self.rows[i][self.n_total])
                .sum();
            if infeasibility > 1e-7 {
                return LpResult::Infeasible;
            }
            // Drive remaining basic artificials out; drop redundant rows.
            let mut i = 0;
            while i < self.rows.len() {
                if self.basis[i] >= self.artificial_start {
                    let col = (0..self.artificial_start).find(|&j| self.rows[i][j].abs() > TOL);
                    match col {
                        Some(j) => self.pivot(i, j),
                        None => {
                            self.rows.remove(i);
                            self.basis.remove(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
        }
        // Phase 2 over structural + slack columns only.
        let mut cost = vec![0.0; self.n_total];
        cost[..self.n_structural].copy_from_slice(objective);
        if self.optimize(&cost, self.artificial_start).is_err() {
            return LpResult::Unbounded;
        }
        let mut x = vec![0.0; self.n_structural];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n_structural {
                x[b] = self.rows[i][self.n_total];
            }
        }
        let value = x.iter().zip(objective).map(|(xi, ci)| xi * ci).sum();
        LpResult::Optimal { x, value }
    }
}
