//! Dense two-phase simplex with Bland's anti-cycling rule.
//!
//! Problems are tiny (a few dozen rows, at most a few dozen columns), so the
//! tableau is a plain `Vec<Vec<f64>>` and reduced costs are recomputed every
//! pivot. Variables are free unless flagged nonnegative.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<f64>,
    nonneg: Vec<bool>,
    constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<(Vec<f64>, f64)> {
        match self {
            LpOutcome::Optimal { x, value } => Some((x, value)),
            _ => None,
        }
    }
}

impl LinearProgram {
    /// Minimize `objective · x`; all variables free.
    pub fn minimize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            num_vars: n,
            objective,
            nonneg: vec![false; n],
            constraints: Vec::new(),
        }
    }

    pub fn set_nonneg(&mut self, var: usize) -> &mut Self {
        self.nonneg[var] = true;
        self
    }

    pub fn all_nonneg(&mut self) -> &mut Self {
        self.nonneg.iter_mut().for_each(|f| *f = true);
        self
    }

    pub fn add(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        debug_assert_eq!(coeffs.len(), self.num_vars);
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        // Column layout: one column per nonneg var, two (pos, neg) per free var,
        // then one slack/surplus per inequality, then artificials.
        let mut var_cols: Vec<(usize, Option<usize>)> = Vec::with_capacity(self.num_vars);
        let mut ncols = 0;
        for j in 0..self.num_vars {
            if self.nonneg[j] {
                var_cols.push((ncols, None));
                ncols += 1;
            } else {
                var_cols.push((ncols, Some(ncols + 1)));
                ncols += 2;
            }
        }
        let m = self.constraints.len();
        let mut slack_col = vec![None; m];
        for (i, c) in self.constraints.iter().enumerate() {
            if c.relation != Relation::Eq {
                slack_col[i] = Some(ncols);
                ncols += 1;
            }
        }
        let first_art = ncols;

        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut num_art = 0;
        for (i, c) in self.constraints.iter().enumerate() {
            let mut row = vec![0.0; first_art];
            for (j, &a) in c.coeffs.iter().enumerate() {
                let (p, n) = var_cols[j];
                row[p] = a;
                if let Some(n) = n {
                    row[n] = -a;
                }
            }
            match c.relation {
                Relation::Le => row[slack_col[i].unwrap()] = 1.0,
                Relation::Ge => row[slack_col[i].unwrap()] = -1.0,
                Relation::Eq => {}
            }
            let mut b = c.rhs;
            if b < 0.0 {
                row.iter_mut().for_each(|v| *v = -*v);
                b = -b;
            }
            // A slack with +1 after sign normalization can start basic.
            let basic_slack = slack_col[i].filter(|&s| row[s] > 0.0);
            match basic_slack {
                Some(s) => basis.push(s),
                None => {
                    basis.push(first_art + num_art);
                    num_art += 1;
                }
            }
            rows.push(row);
            rhs.push(b);
        }
        let total = first_art + num_art;
        let mut art = 0;
        for (i, row) in rows.iter_mut().enumerate() {
            row.resize(total, 0.0);
            if basis[i] >= first_art {
                row[first_art + art] = 1.0;
                art += 1;
            }
        }

        let mut tab = Tableau {
            rows,
            rhs,
            basis,
            allowed: vec![true; total],
        };
        let scale = 1.0 + tab.rhs.iter().fold(0.0_f64, |a, b| a.max(b.abs()));

        if num_art > 0 {
            let mut cost = vec![0.0; total];
            cost[first_art..].iter_mut().for_each(|c| *c = 1.0);
            match tab.run(&cost)? {
                Phase::Optimal => {}
                Phase::Unbounded => return Err(Error::Lp("phase one unbounded".into())),
            }
            let infeas: f64 = tab
                .basis
                .iter()
                .zip(&tab.rhs)
                .filter(|(b, _)| **b >= first_art)
                .map(|(_, v)| *v)
                .sum();
            if infeas > 1e-9 * scale {
                return Ok(LpOutcome::Infeasible);
            }
            tab.drive_out_artificials(first_art);
            for c in first_art..total {
                tab.allowed[c] = false;
            }
        }

        let mut cost = vec![0.0; total];
        for (j, &c) in self.objective.iter().enumerate() {
            let (p, n) = var_cols[j];
            cost[p] = c;
            if let Some(n) = n {
                cost[n] = -c;
            }
        }
        match tab.run(&cost)? {
            Phase::Unbounded => return Ok(LpOutcome::Unbounded),
            Phase::Optimal => {}
        }
        let mut col_val = vec![0.0; total];
        for (i, &b) in tab.basis.iter().enumerate() {
            col_val[b] = tab.rhs[i];
        }
        let x: Vec<f64> = var_cols
            .iter()
            .map(|&(p, n)| col_val[p] - n.map_or(0.0, |n| col_val[n]))
            .collect();
        let value = x.iter().zip(&self.objective).map(|(a, b)| a * b).sum();
        Ok(LpOutcome::Optimal { x, value })
    }
}

enum Phase {
    Optimal,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    allowed: Vec<bool>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        let inv = 1.0 / p;
        self.rows[r].iter_mut().for_each(|v| *v *= inv);
        self.rhs[r] *= inv;
        self.rows[r][c] = 1.0;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r];
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c];
            if f != 0.0 {
                for (v, pv) in self.rows[i].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                self.rows[i][c] = 0.0;
                self.rhs[i] -= f * pivot_rhs;
                if self.rhs[i] < 0.0 && self.rhs[i] > -1e-12 {
                    self.rhs[i] = 0.0;
                }
            }
        }
        self.basis[r] = c;
    }

    fn run(&mut self, cost: &[f64]) -> Result<Phase> {
        let ncols = cost.len();
        let cap = 50 * (self.rows.len() + ncols) + 100;
        let mut in_basis = vec![false; ncols];
        for _ in 0..cap {
            in_basis.iter_mut().for_each(|b| *b = false);
            for &b in &self.basis {
                in_basis[b] = true;
            }
            // Bland: lowest-index column with negative reduced cost.
            let mut entering = None;
            for j in 0..ncols {
                if !self.allowed[j] || in_basis[j] {
                    continue;
                }
                let mut rc = cost[j];
                for (i, &b) in self.basis.iter().enumerate() {
                    rc -= cost[b] * self.rows[i][j];
                }
                if rc < -COST_EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else {
                return Ok(Phase::Optimal);
            };
            // Ratio test, ties broken by lowest basic variable index.
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a > PIVOT_EPS {
                    let ratio = self.rhs[i].max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-14
                                || (ratio <= lr + 1e-14 && self.basis[i] < self.basis[li])
                            {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Ok(Phase::Unbounded);
            };
            self.pivot(r, c);
        }
        Err(Error::NonConvergence {
            what: "simplex",
            iterations: cap,
        })
    }

    fn drive_out_artificials(&mut self, first_art: usize) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= first_art {
                let col = (0..first_art).find(|&j| self.rows[i][j].abs() > 1e-9);
                match col {
                    Some(j) => {
                        self.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        // Redundant row.
                        self.rows.remove(i);
                        self.rhs.remove(i);
                        self.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }
}
