//! Dense-tableau bounded-variable simplex.
//!
//! Every row `i` gets a slack column `n + i` so that the system reads `A x + s = b`:
//! `<=` rows give `s >= 0`, `>=` rows give `s <= 0`, equalities fix `s = 0`.
//! The tableau holds `B^-1 [A I]`, so the slack block is `B^-1` itself, which keeps
//! basic values and row duals cheap to recover. Rows may be appended after a solve;
//! the dual simplex then restores feasibility from the previous basis.

use serde::{Deserialize, Serialize};
use thiserror::Error;

const PIVOT_TOL: f64 = 1e-9;
const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-13;
const REFACTOR_EVERY: usize = 100;
const DEGENERATE_LIMIT: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("variable {var} has lower bound {lower} above upper bound {upper}")]
    InvalidBounds { var: usize, lower: f64, upper: f64 },
    #[error("row refers to variable {index}, but the model has {count} variables")]
    BadIndex { index: usize, count: usize },
    #[error("coefficient or bound is not a number")]
    NotANumber,
    #[error("basis token does not match the model")]
    BadBasis,
    #[error("simplex iteration limit of {0} reached")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjSense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

impl LpRow {
    pub fn new(coeffs: Vec<(usize, f64)>, sense: RowSense, rhs: f64) -> Self {
        Self { coeffs, sense, rhs }
    }

    pub fn dense(coeffs: &[f64], sense: RowSense, rhs: f64) -> Self {
        let coeffs = coeffs
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(j, &v)| (j, v))
            .collect();
        Self { coeffs, sense, rhs }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    sense: ObjSense,
    objective: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<LpRow>,
}

impl LpModel {
    pub fn new(sense: ObjSense) -> Self {
        Self { sense, objective: Vec::new(), lower: Vec::new(), upper: Vec::new(), rows: Vec::new() }
    }

    /// Adds a variable with bounds `[lower, upper]` (either may be infinite) and returns its index.
    pub fn add_var(&mut self, lower: f64, upper: f64, cost: f64) -> Result<usize, LpError> {
        if lower.is_nan() || upper.is_nan() || cost.is_nan() || !cost.is_finite() {
            return Err(LpError::NotANumber);
        }
        let var = self.objective.len();
        if lower > upper {
            return Err(LpError::InvalidBounds { var, lower, upper });
        }
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        Ok(var)
    }

    pub fn add_row(&mut self, row: LpRow) -> Result<usize, LpError> {
        self.check_row(&row)?;
        self.rows.push(row);
        Ok(self.rows.len() - 1)
    }

    fn check_row(&self, row: &LpRow) -> Result<(), LpError> {
        if !row.rhs.is_finite() {
            return Err(LpError::NotANumber);
        }
        for &(j, v) in &row.coeffs {
            if j >= self.objective.len() {
                return Err(LpError::BadIndex { index: j, count: self.objective.len() });
            }
            if !v.is_finite() {
                return Err(LpError::NotANumber);
            }
        }
        Ok(())
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> Result<(), LpError> {
        if lower > upper {
            return Err(LpError::InvalidBounds { var, lower, upper });
        }
        self.lower[var] = lower;
        self.upper[var] = upper;
        Ok(())
    }

    pub fn sense(&self) -> ObjSense {
        self.sense
    }
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }
    pub fn rows(&self) -> &[LpRow] {
        &self.rows
    }
    pub fn objective(&self) -> &[f64] {
        &self.objective
    }
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }
    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Largest violation of any row or bound by `values`.
    pub fn max_infeasibility(&self, values: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (j, &v) in values.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        for row in &self.rows {
            let act: f64 = row.coeffs.iter().map(|&(j, a)| a * values[j]).sum();
            let gap = match row.sense {
                RowSense::Le => act - row.rhs,
                RowSense::Ge => row.rhs - act,
                RowSense::Eq => (act - row.rhs).abs(),
            };
            worst = worst.max(gap);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Opaque warm-start data: which columns are basic and where the others sit.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisToken {
    basic: Vec<usize>,
    values: Vec<f64>,
    num_vars: usize,
}

impl BasisToken {
    /// Columns in the basis; index `num_vars + i` is the slack of row `i`.
    pub fn basic_columns(&self) -> &[usize] {
        &self.basic
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective: f64,
    /// Shadow price of each row in the model's own objective sense.
    pub row_duals: Vec<f64>,
    /// Reduced cost of each structural variable in the model's own objective sense.
    pub reduced_costs: Vec<f64>,
    pub basis: BasisToken,
    pub iterations: usize,
}

impl LpSolution {
    /// Rows whose slack is nonbasic, i.e. rows that are active by virtue of the basis.
    pub fn active_rows(&self) -> Vec<usize> {
        let n = self.basis.num_vars;
        let m = self.row_duals.len();
        let mut basic = vec![false; m];
        for &c in &self.basis.basic {
            if c >= n {
                basic[c - n] = true;
            }
        }
        (0..m).filter(|&i| !basic[i]).collect()
    }

    /// Structural variables that are nonbasic, hence sitting at a bound.
    pub fn nonbasic_vars(&self) -> Vec<usize> {
        let n = self.basis.num_vars;
        let mut basic = vec![false; n];
        for &c in &self.basis.basic {
            if c < n {
                basic[c] = true;
            }
        }
        (0..n).filter(|&j| !basic[j]).collect()
    }
}

/// Solves from a slack basis.
pub fn solve(model: &LpModel) -> Result<LpSolution, LpError> {
    LpSolver::new(model.clone())?.optimize()
}

/// Solves starting from a basis of an earlier solve; rows appended since are made basic on their slack.
pub fn resolve(model: &LpModel, basis: &BasisToken) -> Result<LpSolution, LpError> {
    LpSolver::from_basis(model.clone(), basis)?.optimize()
}

#[derive(Clone, Copy, PartialEq)]
enum Phase {
    One,
    Two,
}

/// Incremental solver; keeps its tableau between `optimize` calls.
#[derive(Debug, Clone)]
pub struct LpSolver {
    model: LpModel,
    n: usize,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    tab: Vec<Vec<f64>>,
    basis: Vec<usize>,
    pos: Vec<Option<usize>>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    cost: Vec<f64>,
    val: Vec<f64>,
    d: Vec<f64>,
    since_refactor: usize,
    dual_tol: f64,
    iterations: usize,
}

impl LpSolver {
    pub fn new(model: LpModel) -> Result<Self, LpError> {
        let n = model.num_vars();
        let sign = if model.sense == ObjSense::Maximize { -1.0 } else { 1.0 };
        let cost: Vec<f64> = model.objective.iter().map(|&c| sign * c).collect();
        let max_c = cost.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let mut solver = Self {
            n,
            a: Vec::new(),
            b: Vec::new(),
            tab: Vec::new(),
            basis: Vec::new(),
            pos: vec![None; n],
            lb: model.lower.clone(),
            ub: model.upper.clone(),
            cost,
            val: vec![0.0; n],
            d: Vec::new(),
            since_refactor: 0,
            dual_tol: DUAL_TOL * (1.0 + max_c),
            iterations: 0,
            model: LpModel { rows: Vec::new(), ..model.clone() },
        };
        for j in 0..n {
            solver.val[j] = solver.preferred_value(j);
        }
        for row in model.rows {
            solver.push_row(row)?;
        }
        solver.compute_duals();
        solver.compute_primal();
        Ok(solver)
    }

    pub fn from_basis(model: LpModel, token: &BasisToken) -> Result<Self, LpError> {
        if token.num_vars != model.num_vars() || token.values.len() < model.num_vars() {
            return Err(LpError::BadBasis);
        }
        let mut solver = Self::new(model)?;
        let known_rows = token.values.len() - token.num_vars;
        if known_rows > solver.basis.len() {
            return Err(LpError::BadBasis);
        }
        let total = solver.lb.len();
        let mut basic_flag = vec![false; total];
        for &c in &token.basic {
            if c >= token.num_vars + known_rows {
                return Err(LpError::BadBasis);
            }
            basic_flag[c] = true;
        }
        for i in known_rows..solver.basis.len() {
            basic_flag[solver.n + i] = true;
        }
        let mut basis: Vec<usize> = token.basic.clone();
        basis.extend((known_rows..solver.basis.len()).map(|i| solver.n + i));
        if basis.len() != solver.basis.len() {
            return Err(LpError::BadBasis);
        }
        for (j, &v) in token.values.iter().enumerate() {
            if !basic_flag[j] {
                solver.val[j] = solver.clamp_nonbasic(j, v);
            }
        }
        solver.basis = basis;
        solver.refactor();
        Ok(solver)
    }

    pub fn model(&self) -> &LpModel {
        &self.model
    }

    /// Appends a row; its slack enters the basis so the previous basis stays dual feasible.
    pub fn add_row(&mut self, row: LpRow) -> Result<(), LpError> {
        self.push_row(row)?;
        let j = self.n + self.basis.len() - 1;
        self.d.push(0.0);
        let i = self.basis.len() - 1;
        self.val[j] = self.basic_value(i);
        Ok(())
    }

    pub fn add_rows(&mut self, rows: impl IntoIterator<Item = LpRow>) -> Result<(), LpError> {
        for row in rows {
            self.add_row(row)?;
        }
        Ok(())
    }

    fn push_row(&mut self, row: LpRow) -> Result<(), LpError> {
        self.model.check_row(&row)?;
        let n = self.n;
        let m = self.basis.len();
        let mut dense = vec![0.0; n];
        for &(j, v) in &row.coeffs {
            dense[j] += v;
        }
        let (slo, shi) = match row.sense {
            RowSense::Le => (0.0, f64::INFINITY),
            RowSense::Ge => (f64::NEG_INFINITY, 0.0),
            RowSense::Eq => (0.0, 0.0),
        };
        for t in &mut self.tab {
            t.push(0.0);
        }
        // new tableau row: [a 0 1] minus the multiples of existing rows that clear basic columns
        let mut newrow = vec![0.0; n + m + 1];
        newrow[..n].copy_from_slice(&dense);
        newrow[n + m] = 1.0;
        for (i, &bj) in self.basis.iter().enumerate() {
            let f = if bj < n { dense[bj] } else { 0.0 };
            if f != 0.0 {
                for (x, &t) in newrow.iter_mut().zip(&self.tab[i]) {
                    *x -= f * t;
                }
            }
        }
        self.tab.push(newrow);
        self.a.push(dense);
        self.b.push(row.rhs);
        self.lb.push(slo);
        self.ub.push(shi);
        self.cost.push(0.0);
        self.val.push(0.0);
        self.pos.push(Some(m));
        self.basis.push(n + m);
        self.model.rows.push(row);
        Ok(())
    }

    fn preferred_value(&self, j: usize) -> f64 {
        let (l, u) = (self.lb[j], self.ub[j]);
        if self.cost[j] >= 0.0 {
            if l.is_finite() {
                l
            } else if u.is_finite() {
                u
            } else {
                0.0
            }
        } else if u.is_finite() {
            u
        } else if l.is_finite() {
            l
        } else {
            0.0
        }
    }

    fn clamp_nonbasic(&self, j: usize, v: f64) -> f64 {
        let (l, u) = (self.lb[j], self.ub[j]);
        if l.is_finite() && (v - l).abs() <= (v - u).abs() {
            l
        } else if u.is_finite() {
            u
        } else if l.is_finite() {
            l
        } else {
            0.0
        }
    }

    fn basic_value(&self, i: usize) -> f64 {
        let n = self.n;
        let row = &self.tab[i];
        let mut v: f64 = self.b.iter().enumerate().map(|(k, &bk)| row[n + k] * bk).sum();
        for (j, &x) in self.val.iter().enumerate() {
            if x != 0.0 && self.pos[j].is_none() {
                v -= row[j] * x;
            }
        }
        v
    }

    fn compute_primal(&mut self) {
        for i in 0..self.basis.len() {
            let v = self.basic_value(i);
            self.val[self.basis[i]] = v;
        }
    }

    fn compute_duals(&mut self) {
        let total = self.lb.len();
        let mut d = self.cost.clone();
        for (i, &bj) in self.basis.iter().enumerate() {
            let cb = self.cost[bj];
            if cb != 0.0 {
                for (dj, &t) in d.iter_mut().zip(&self.tab[i]) {
                    *dj -= cb * t;
                }
            }
        }
        for &bj in &self.basis {
            d[bj] = 0.0;
        }
        debug_assert_eq!(d.len(), total);
        self.d = d;
    }

    /// Rebuilds `B^-1 [A I]` from the original rows by Gauss-Jordan elimination.
    fn refactor(&mut self) {
        let n = self.n;
        let m = self.basis.len();
        let total = n + m;
        let mut t: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let mut r = vec![0.0; total];
                r[..n].copy_from_slice(&self.a[i]);
                r[n + i] = 1.0;
                r
            })
            .collect();
        let mut assigned = vec![false; m];
        let mut new_basis = vec![usize::MAX; m];
        let mut rejected = Vec::new();
        for &col in &self.basis {
            let mut best = None;
            let mut best_mag = 1e-11;
            for (i, row) in t.iter().enumerate() {
                if !assigned[i] && row[col].abs() > best_mag {
                    best_mag = row[col].abs();
                    best = Some(i);
                }
            }
            match best {
                Some(r) => {
                    gauss_pivot(&mut t, r, col);
                    assigned[r] = true;
                    new_basis[r] = col;
                }
                None => rejected.push(col),
            }
        }
        // a singular basis is repaired with slack columns
        for r in 0..m {
            if assigned[r] {
                continue;
            }
            let mut best = None;
            let mut best_mag = 0.0;
            for k in 0..m {
                let col = n + k;
                if new_basis.contains(&col) {
                    continue;
                }
                if t[r][col].abs() > best_mag {
                    best_mag = t[r][col].abs();
                    best = Some(col);
                }
            }
            let col = best.expect("slack columns span every row");
            gauss_pivot(&mut t, r, col);
            assigned[r] = true;
            new_basis[r] = col;
        }
        for col in rejected {
            self.val[col] = self.clamp_nonbasic(col, self.val[col]);
        }
        self.pos = vec![None; total];
        for (i, &c) in new_basis.iter().enumerate() {
            self.pos[c] = Some(i);
        }
        for j in 0..total {
            if self.pos[j].is_none() {
                let v = self.val[j];
                let (l, u) = (self.lb[j], self.ub[j]);
                if !(v == l || v == u || (v == 0.0 && l.is_infinite() && u.is_infinite())) {
                    self.val[j] = self.clamp_nonbasic(j, v);
                }
            }
        }
        self.basis = new_basis;
        self.tab = t;
        self.since_refactor = 0;
        self.compute_duals();
        self.compute_primal();
    }

    fn pivot(&mut self, r: usize, j: usize) {
        gauss_pivot(&mut self.tab, r, j);
        let dj = self.d[j];
        if dj != 0.0 {
            for (dk, &t) in self.d.iter_mut().zip(&self.tab[r]) {
                *dk -= dj * t;
            }
        }
        self.d[j] = 0.0;
        let old = self.basis[r];
        self.pos[old] = None;
        self.pos[j] = Some(r);
        self.basis[r] = j;
        self.since_refactor += 1;
        self.iterations += 1;
        if self.since_refactor >= REFACTOR_EVERY {
            self.refactor();
        } else {
            self.compute_primal();
        }
    }

    fn infeasibility(&self, i: usize) -> f64 {
        let j = self.basis[i];
        let v = self.val[j];
        (self.lb[j] - v).max(v - self.ub[j]).max(0.0)
    }

    fn primal_feasible(&self) -> bool {
        (0..self.basis.len()).all(|i| self.infeasibility(i) <= PRIMAL_TOL)
    }

    fn dual_feasible(&self) -> bool {
        (0..self.lb.len()).all(|j| self.pos[j].is_some() || self.dual_ok(j, self.d[j]))
    }

    fn dual_ok(&self, j: usize, dj: f64) -> bool {
        let (l, u, v) = (self.lb[j], self.ub[j], self.val[j]);
        if l == u {
            return true;
        }
        let at_lower = l.is_finite() && v == l;
        let at_upper = u.is_finite() && v == u;
        (dj >= -self.dual_tol || at_upper) && (dj <= self.dual_tol || at_lower)
    }

    fn limit(&self) -> usize {
        20_000 + 50 * (self.lb.len() + self.basis.len())
    }

    /// Runs the simplex method to optimality from the current basis.
    pub fn optimize(&mut self) -> Result<LpSolution, LpError> {
        self.iterations = 0;
        for _attempt in 0..4 {
            self.refactor();
            let status = if self.primal_feasible() {
                self.primal(Phase::Two)?
            } else if self.dual_feasible() {
                match self.dual()? {
                    LpStatus::Optimal => self.primal(Phase::Two)?,
                    other => other,
                }
            } else {
                match self.primal(Phase::One)? {
                    LpStatus::Optimal => self.primal(Phase::Two)?,
                    other => other,
                }
            };
            if status == LpStatus::Infeasible {
                return Ok(self.solution(status));
            }
            // fresh factorization to confirm the answer before reporting it
            self.refactor();
            let clean = self.primal_feasible() && (status == LpStatus::Unbounded || self.dual_feasible());
            if clean {
                return Ok(self.solution(status));
            }
        }
        Err(LpError::IterationLimit(self.iterations))
    }

    fn solution(&self, status: LpStatus) -> LpSolution {
        let n = self.n;
        let sign = if self.model.sense == ObjSense::Maximize { -1.0 } else { 1.0 };
        let values: Vec<f64> = self.val[..n].to_vec();
        let objective = self.model.objective.iter().zip(&values).map(|(c, x)| c * x).sum();
        let m = self.basis.len();
        // pi_i = -d(slack_i) for the internal minimization
        let row_duals = (0..m).map(|i| -sign * self.d[n + i]).collect();
        let reduced_costs = (0..n).map(|j| sign * self.d[j]).collect();
        LpSolution {
            status,
            values,
            objective,
            row_duals,
            reduced_costs,
            basis: BasisToken { basic: self.basis.clone(), values: self.val.clone(), num_vars: n },
            iterations: self.iterations,
        }
    }

    fn phase_one_prices(&self) -> Vec<f64> {
        let total = self.lb.len();
        let mut d = vec![0.0; total];
        for (i, &bj) in self.basis.iter().enumerate() {
            let v = self.val[bj];
            let c = if v < self.lb[bj] - PRIMAL_TOL {
                -1.0
            } else if v > self.ub[bj] + PRIMAL_TOL {
                1.0
            } else {
                continue;
            };
            for (dk, &t) in d.iter_mut().zip(&self.tab[i]) {
                *dk -= c * t;
            }
        }
        for &bj in &self.basis {
            d[bj] = 0.0;
        }
        d
    }

    fn primal(&mut self, phase: Phase) -> Result<LpStatus, LpError> {
        let mut degenerate = 0usize;
        let limit = self.limit();
        loop {
            if self.iterations > limit {
                return Err(LpError::IterationLimit(self.iterations));
            }
            if phase == Phase::One && self.primal_feasible() {
                return Ok(LpStatus::Optimal);
            }
            let prices = if phase == Phase::One { self.phase_one_prices() } else { self.d.clone() };
            let bland = degenerate >= DEGENERATE_LIMIT;
            let tol = if phase == Phase::One { DUAL_TOL } else { self.dual_tol };
            let mut enter: Option<(usize, f64)> = None;
            let mut best = 0.0;
            for j in 0..self.lb.len() {
                if self.pos[j].is_some() || self.lb[j] == self.ub[j] {
                    continue;
                }
                let dj = prices[j];
                let v = self.val[j];
                let dir = if dj < -tol && v < self.ub[j] {
                    1.0
                } else if dj > tol && v > self.lb[j] {
                    -1.0
                } else {
                    continue;
                };
                if bland {
                    enter = Some((j, dir));
                    break;
                }
                if dj.abs() > best {
                    best = dj.abs();
                    enter = Some((j, dir));
                }
            }
            let Some((j, dir)) = enter else {
                if phase == Phase::One {
                    return Ok(LpStatus::Infeasible);
                }
                return Ok(LpStatus::Optimal);
            };

            // ratio test; basic i moves at rate -dir * tab[i][j]
            let mut theta = if self.lb[j].is_finite() && self.ub[j].is_finite() {
                self.ub[j] - self.lb[j]
            } else {
                f64::INFINITY
            };
            let mut leave: Option<(usize, f64)> = None;
            let mut leave_mag = 0.0;
            for i in 0..self.basis.len() {
                let alpha = self.tab[i][j];
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                let bj = self.basis[i];
                let rate = -dir * alpha;
                let v = self.val[bj];
                let (l, u) = (self.lb[bj], self.ub[bj]);
                let (room, target) = if rate < 0.0 {
                    if phase == Phase::One && v > u + PRIMAL_TOL {
                        ((v - u) / -rate, u)
                    } else if phase == Phase::One && v < l - PRIMAL_TOL {
                        continue;
                    } else if l.is_finite() {
                        (((v - l).max(0.0)) / -rate, l)
                    } else {
                        continue;
                    }
                } else if phase == Phase::One && v < l - PRIMAL_TOL {
                    ((l - v) / rate, l)
                } else if phase == Phase::One && v > u + PRIMAL_TOL {
                    continue;
                } else if u.is_finite() {
                    (((u - v).max(0.0)) / rate, u)
                } else {
                    continue;
                };
                let better = match leave {
                    None => room < theta,
                    Some((li, _)) => {
                        if room < theta - 1e-12 {
                            true
                        } else if room <= theta + 1e-12 {
                            if bland {
                                bj < self.basis[li]
                            } else {
                                alpha.abs() > leave_mag
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    theta = room;
                    leave = Some((i, target));
                    leave_mag = alpha.abs();
                }
            }
            if theta.is_infinite() {
                return Ok(LpStatus::Unbounded);
            }
            if theta <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            match leave {
                None => {
                    // bound flip of the entering variable
                    self.val[j] = if dir > 0.0 { self.ub[j] } else { self.lb[j] };
                    self.iterations += 1;
                    self.compute_primal();
                }
                Some((r, target)) => {
                    let out = self.basis[r];
                    self.val[j] += dir * theta;
                    self.val[out] = target;
                    self.pivot(r, j);
                }
            }
        }
    }

    fn dual(&mut self) -> Result<LpStatus, LpError> {
        let mut degenerate = 0usize;
        let limit = self.limit();
        loop {
            if self.iterations > limit {
                return Err(LpError::IterationLimit(self.iterations));
            }
            let bland = degenerate >= DEGENERATE_LIMIT;
            let mut leave: Option<usize> = None;
            let mut worst = PRIMAL_TOL;
            for i in 0..self.basis.len() {
                let inf = self.infeasibility(i);
                if inf > PRIMAL_TOL {
                    if bland {
                        if leave.map_or(true, |r| self.basis[i] < self.basis[r]) {
                            leave = Some(i);
                        }
                    } else if inf > worst {
                        worst = inf;
                        leave = Some(i);
                    }
                }
            }
            let Some(r) = leave else {
                return Ok(LpStatus::Optimal);
            };
            let out = self.basis[r];
            let v = self.val[out];
            let below = v < self.lb[out];
            let target = if below { self.lb[out] } else { self.ub[out] };
            // basic moves by -alpha * delta_j; find entering keeping reduced costs sign-correct
            let mut enter: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            let mut best_mag = 0.0;
            for j in 0..self.lb.len() {
                if self.pos[j].is_some() || self.lb[j] == self.ub[j] {
                    continue;
                }
                let alpha = self.tab[r][j];
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                let xj = self.val[j];
                let can_up = xj < self.ub[j];
                let can_down = xj > self.lb[j];
                // need basic to increase when below, i.e. -alpha * delta > 0
                let want_up = if below { alpha < 0.0 } else { alpha > 0.0 };
                if (want_up && !can_up) || (!want_up && !can_down) {
                    continue;
                }
                let ratio = self.d[j].abs() / alpha.abs();
                let better = if ratio < best_ratio - 1e-12 {
                    true
                } else if ratio <= best_ratio + 1e-12 {
                    if bland {
                        enter.map_or(true, |e| j < e)
                    } else {
                        alpha.abs() > best_mag
                    }
                } else {
                    false
                };
                if better {
                    best_ratio = ratio;
                    best_mag = alpha.abs();
                    enter = Some(j);
                }
            }
            let Some(j) = enter else {
                return Ok(LpStatus::Infeasible);
            };
            if best_ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            let alpha = self.tab[r][j];
            let delta = (v - target) / alpha;
            self.val[j] += delta;
            self.val[out] = target;
            self.pivot(r, j);
        }
    }
}

fn gauss_pivot(t: &mut [Vec<f64>], r: usize, j: usize) {
    let p = t[r][j];
    for x in t[r].iter_mut() {
        *x /= p;
    }
    t[r][j] = 1.0;
    let pivot_row = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r {
            continue;
        }
        let f = row[j];
        if f == 0.0 {
            continue;
        }
        for (x, &pv) in row.iter_mut().zip(&pivot_row) {
            if pv != 0.0 {
                *x -= f * pv;
                if x.abs() < DROP_TOL {
                    *x = 0.0;
                }
            }
        }
        row[j] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-7
    }

    #[test]
    fn single_variable() {
        let mut m = LpModel::new(ObjSense::Maximize);
        let x = m.add_var(0.0, INF, 1.0).unwrap();
        m.add_row(LpRow::new(vec![(x, 1.0)], RowSense::Le, 1.0)).unwrap();
        let s = solve(&m).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(approx(s.values[0], 1.0));
        assert!(approx(s.objective, 1.0));
        assert!(approx(s.row_duals[0], 1.0));
    }

    #[test]
    fn boxed_pair() {
        let mut m = LpModel::new(ObjSense::Maximize);
        m.add_var(0.0, 1.0, 1.0).unwrap();
        m.add_var(0.0, 1.0, 1.0).unwrap();
        m.add_row(LpRow::dense(&[1.0, 1.0], RowSense::Le, 1.5)).unwrap();
        let s = solve(&m).unwrap();
        assert!(approx(s.objective, 1.5));
    }

    /// Partial separation LP for the third worked instance, one generator point.
    fn example_three_partial() -> LpModel {
        let xbar = [0.9, 0.5, 0.7, 0.1];
        let ybar = 0.7;
        let mut m = LpModel::new(ObjSense::Maximize);
        for (q, a) in [11.0f64, 15.0, 24.0, 50.0].iter().enumerate() {
            m.add_var(0.0, (a / 60.0).ceil(), xbar[q]).unwrap();
        }
        m.add_var(1.0, 1.0, -ybar).unwrap();
        m.add_var(0.0, INF, -1.0).unwrap();
        m.add_row(LpRow::dense(&[1.0, 1.0, 1.0, 1.0, -2.0, -1.0], RowSense::Le, 0.0)).unwrap();
        m
    }

    #[test]
    fn example_three_first_iteration() {
        let m = example_three_partial();
        let s = solve(&m).unwrap();
        assert!(approx(s.objective, 0.9), "{}", s.objective);
        let expect = [1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        for (v, e) in s.values.iter().zip(expect) {
            assert!(approx(*v, e), "{:?}", s.values);
        }
    }

    #[test]
    fn example_three_second_iteration_warm() {
        let m = example_three_partial();
        let mut solver = LpSolver::new(m.clone()).unwrap();
        solver.optimize().unwrap();
        let row = LpRow::dense(&[1.0, 1.0, 1.0, 0.0, -1.0, -1.0], RowSense::Le, 0.0);
        solver.add_row(row.clone()).unwrap();
        let warm = solver.optimize().unwrap();
        let expect = [1.0, 0.0, 0.0, 1.0, 1.0, 0.0];
        for (v, e) in warm.values.iter().zip(expect) {
            assert!(approx(*v, e), "{:?}", warm.values);
        }
        assert!(approx(warm.objective, 0.3));
        let mut cold = m;
        cold.add_row(row).unwrap();
        assert!(approx(solve(&cold).unwrap().objective, warm.objective));
    }

    #[test]
    fn nonbinding_row_keeps_objective() {
        let m = example_three_partial();
        let mut solver = LpSolver::new(m).unwrap();
        let before = solver.optimize().unwrap().objective;
        solver.add_row(LpRow::dense(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0], RowSense::Le, 5.0)).unwrap();
        assert!(approx(solver.optimize().unwrap().objective, before));
    }

    #[test]
    fn cutting_row_decreases_objective() {
        let m = example_three_partial();
        let mut solver = LpSolver::new(m).unwrap();
        let first = solver.optimize().unwrap();
        // cut off the current optimum x1 = 1
        solver.add_row(LpRow::dense(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0], RowSense::Le, 0.5)).unwrap();
        let second = solver.optimize().unwrap();
        assert!(second.objective < first.objective - 1e-9);
    }

    #[test]
    fn resolve_matches_cold() {
        let m = example_three_partial();
        let s = solve(&m).unwrap();
        let mut m2 = m.clone();
        m2.add_row(LpRow::dense(&[1.0, 1.0, 1.0, 0.0, -1.0, -1.0], RowSense::Le, 0.0)).unwrap();
        let warm = resolve(&m2, &s.basis).unwrap();
        let cold = solve(&m2).unwrap();
        assert!(approx(warm.objective, cold.objective));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut m = LpModel::new(ObjSense::Minimize);
        let x = m.add_var(0.0, INF, 1.0).unwrap();
        m.add_row(LpRow::new(vec![(x, 1.0)], RowSense::Ge, 2.0)).unwrap();
        m.add_row(LpRow::new(vec![(x, 1.0)], RowSense::Le, 1.0)).unwrap();
        assert_eq!(solve(&m).unwrap().status, LpStatus::Infeasible);

        let mut m = LpModel::new(ObjSense::Maximize);
        let x = m.add_var(0.0, INF, 1.0).unwrap();
        let y = m.add_var(0.0, INF, 0.0).unwrap();
        m.add_row(LpRow::new(vec![(x, 1.0), (y, -1.0)], RowSense::Le, 1.0)).unwrap();
        assert_eq!(solve(&m).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_and_free_variables() {
        // min x + 2y, x + y = 3, x - y free-ranged
        let mut m = LpModel::new(ObjSense::Minimize);
        let x = m.add_var(-INF, INF, 1.0).unwrap();
        let y = m.add_var(0.0, 2.0, 2.0).unwrap();
        m.add_row(LpRow::new(vec![(x, 1.0), (y, 1.0)], RowSense::Eq, 3.0)).unwrap();
        m.add_row(LpRow::new(vec![(x, 1.0)], RowSense::Ge, -1.0)).unwrap();
        let s = solve(&m).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(approx(s.values[x], 3.0) && approx(s.values[y], 0.0), "{:?}", s.values);
        assert!(approx(s.objective, 3.0));
    }

    #[test]
    fn phase_one_needed() {
        // max -x - y with x >= 1, y >= 1, x + y >= 3 on free-signed costs
        let mut m = LpModel::new(ObjSense::Maximize);
        let x = m.add_var(-INF, INF, -1.0).unwrap();
        let y = m.add_var(-INF, INF, 2.0).unwrap();
        m.add_row(LpRow::new(vec![(x, 1.0)], RowSense::Ge, 1.0)).unwrap();
        m.add_row(LpRow::new(vec![(y, 1.0)], RowSense::Le, 4.0)).unwrap();
        m.add_row(LpRow::new(vec![(x, 1.0), (y, 1.0)], RowSense::Ge, 3.0)).unwrap();
        let s = solve(&m).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(approx(s.objective, 7.0), "{:?}", s.values);
    }

    #[test]
    fn basic_solution_has_n_active_constraints() {
        let m = example_three_partial();
        let s = solve(&m).unwrap();
        assert_eq!(s.active_rows().len() + s.nonbasic_vars().len(), m.num_vars());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn brute_force_box(c: &[f64], rows: &[(Vec<f64>, f64)]) -> f64 {
            // vertices of a small LP over [0,2]^n enumerated on a fine lattice is not exact;
            // instead compare against the dual bound: any feasible lattice point gives a lower bound
            let n = c.len();
            let mut best = f64::NEG_INFINITY;
            let steps = 8;
            let mut idx = vec![0usize; n];
            loop {
                let x: Vec<f64> = idx.iter().map(|&k| 2.0 * k as f64 / steps as f64).collect();
                if rows.iter().all(|(a, b)| a.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() <= b + 1e-12) {
                    best = best.max(c.iter().zip(&x).map(|(p, q)| p * q).sum());
                }
                let mut k = 0;
                loop {
                    if k == n {
                        return best;
                    }
                    idx[k] += 1;
                    if idx[k] <= steps {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
            }
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(200))]
            #[test]
            fn warm_equals_cold_and_bounds_lattice(
                c in prop::collection::vec(-3i32..4, 3),
                rows in prop::collection::vec((prop::collection::vec(-3i32..4, 3), 0i32..6), 1..5),
                extra in prop::collection::vec((prop::collection::vec(-3i32..4, 3), 0i32..6), 1..4),
            ) {
                let mut m = LpModel::new(ObjSense::Maximize);
                for &cj in &c {
                    m.add_var(0.0, 2.0, cj as f64).unwrap();
                }
                let mut plain = Vec::new();
                for (a, b) in &rows {
                    let a: Vec<f64> = a.iter().map(|&v| v as f64).collect();
                    m.add_row(LpRow::dense(&a, RowSense::Le, *b as f64)).unwrap();
                    plain.push((a, *b as f64));
                }
                let mut solver = LpSolver::new(m.clone()).unwrap();
                let s0 = solver.optimize().unwrap();
                prop_assert_eq!(s0.status, LpStatus::Optimal);
                prop_assert!(m.max_infeasibility(&s0.values) < 1e-7);
                let cf: Vec<f64> = c.iter().map(|&v| v as f64).collect();
                prop_assert!(s0.objective >= brute_force_box(&cf, &plain) - 1e-7);
                for (a, b) in &extra {
                    let a: Vec<f64> = a.iter().map(|&v| v as f64).collect();
                    let row = LpRow::dense(&a, RowSense::Le, *b as f64);
                    solver.add_row(row.clone()).unwrap();
                    m.add_row(row).unwrap();
                }
                let warm = solver.optimize().unwrap();
                let cold = solve(&m).unwrap();
                prop_assert_eq!(warm.status, cold.status);
                prop_assert!((warm.objective - cold.objective).abs() < 1e-7);
                prop_assert!(m.max_infeasibility(&warm.values) < 1e-7);
                prop_assert_eq!(warm.active_rows().len() + warm.nonbasic_vars().len(), m.num_vars());
            }
        }
    }
}
