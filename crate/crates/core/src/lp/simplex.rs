//! Bounded-variable revised primal simplex.
//!
//! Every row `i` gets a logical (slack) variable `s_i` with `a_iᵀv − s_i = 0`;
//! the row sense becomes a bound on `s_i`. Variables are numbered structural
//! first (`0..ncols`) then logical (`ncols..ncols+nrows`). The basis inverse is
//! kept dense and updated by elementary row operations. Every `refactor_every`
//! pivots the row residual of the current point is checked and the inverse is
//! recomputed if it has drifted (or after five such intervals regardless).
//!
//! Phase 1 minimizes the sum of bound infeasibilities of the basic variables
//! starting from any basis, so a basis from a related model (tightened bounds,
//! changed objective) is a valid warm start.

use std::sync::Arc;

use super::sparse::Csc;
use super::{LpError, LpModel, RowSense};

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    pub primal_tol: f64,
    pub dual_tol: f64,
    pub pivot_tol: f64,
    pub refactor_every: usize,
    /// Iteration cap; `None` derives one from the model size.
    pub max_iterations: Option<usize>,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            primal_tol: 1e-9,
            dual_tol: 1e-9,
            pivot_tol: 1e-7,
            refactor_every: 100,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    UnboundedBelow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable sitting at zero.
    Free,
}

#[derive(Debug)]
pub(crate) struct Factor {
    binv: Vec<f64>,
    fingerprint: u64,
    pivots: usize,
}

/// Simplex basis over structural and logical variables.
///
/// Carries the basis inverse of the solve that produced it, so re-solving a
/// model with the same constraint matrix skips the initial factorization.
#[derive(Debug, Clone)]
pub struct Basis {
    ncols: usize,
    status: Vec<VarStatus>,
    order: Vec<usize>,
    factor: Option<Arc<Factor>>,
}

impl PartialEq for Basis {
    fn eq(&self, other: &Self) -> bool {
        self.ncols == other.ncols && self.status == other.status && self.order == other.order
    }
}

impl Basis {
    /// All-logical basis with structurals at a finite bound (or free at zero).
    pub fn slack(model: &LpModel) -> Self {
        let n = model.ncols();
        let m = model.nrows();
        let mut status = Vec::with_capacity(n + m);
        for j in 0..n {
            status.push(nonbasic_status(
                model.lower()[j],
                model.upper()[j],
                VarStatus::AtLower,
            ));
        }
        status.extend(std::iter::repeat(VarStatus::Basic).take(m));
        Self {
            ncols: n,
            status,
            order: (n..n + m).collect(),
            factor: None,
        }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.order.len()
    }

    pub fn status(&self) -> &[VarStatus] {
        &self.status
    }

    /// Basic variable per row position.
    pub fn basic_order(&self) -> &[usize] {
        &self.order
    }

    pub fn is_basic(&self, var: usize) -> bool {
        self.status[var] == VarStatus::Basic
    }

    /// Logical variable id of `row`.
    pub fn slack_of(&self, row: usize) -> usize {
        self.ncols + row
    }

    /// The same basis with a freshly computed inverse for `model`. Worth doing
    /// before warm-starting many solves from one basis, so that each of them
    /// does not separately reach the refactorization limit.
    pub fn refreshed(&self, model: &LpModel) -> Self {
        if matches!(&self.factor, Some(f) if f.pivots == 0)
            || self.ncols != model.ncols()
            || self.order.len() != model.nrows()
        {
            return self.clone();
        }
        let opts = SimplexOptions::default();
        let csc = model.csc();
        let mut w = Work::new(model, csc.clone(), &opts);
        w.order = self.order.clone();
        if w.refactor().is_err() {
            return self.clone();
        }
        let factor = Factor {
            binv: w.binv,
            fingerprint: csc.fingerprint,
            pivots: 0,
        };
        Self {
            factor: Some(Arc::new(factor)),
            ..self.clone()
        }
    }

    /// Drops the cached factorization (for long-term storage).
    pub fn without_factor(&self) -> Self {
        Self {
            factor: None,
            ..self.clone()
        }
    }

    /// Extends the basis to `nrows` rows; the new rows' logicals become basic.
    pub fn extend_rows(&self, nrows: usize) -> Self {
        let mut b = self.without_factor();
        for r in b.order.len()..nrows {
            b.status.push(VarStatus::Basic);
            b.order.push(b.ncols + r);
        }
        b
    }

    /// Removes rows whose logicals are basic, renumbering the remaining logicals.
    /// Returns `None` if some removed row's logical is nonbasic.
    pub fn remove_rows(&self, rows: &[usize]) -> Option<Self> {
        let m = self.order.len();
        let mut drop = vec![false; m];
        for &r in rows {
            if self.status[self.ncols + r] != VarStatus::Basic {
                return None;
            }
            drop[r] = true;
        }
        let mut new_id = vec![usize::MAX; self.ncols + m];
        for j in 0..self.ncols {
            new_id[j] = j;
        }
        let mut next = self.ncols;
        for r in 0..m {
            if !drop[r] {
                new_id[self.ncols + r] = next;
                next += 1;
            }
        }
        let status = (0..self.ncols + m)
            .filter(|&j| new_id[j] != usize::MAX)
            .map(|j| self.status[j])
            .collect();
        let order = self
            .order
            .iter()
            .filter(|&&j| new_id[j] != usize::MAX)
            .map(|&j| new_id[j])
            .collect();
        Some(Self {
            ncols: self.ncols,
            status,
            order,
            factor: None,
        })
    }
}

fn nonbasic_status(lo: f64, up: f64, preferred: VarStatus) -> VarStatus {
    match preferred {
        VarStatus::AtUpper if up.is_finite() => VarStatus::AtUpper,
        _ if lo.is_finite() => VarStatus::AtLower,
        _ if up.is_finite() => VarStatus::AtUpper,
        _ => VarStatus::Free,
    }
}

pub(crate) struct TableauData {
    csc: Arc<Csc>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Structural values (phase-1 end point when infeasible; ray base when unbounded).
    pub x: Vec<f64>,
    /// Row activities `a_iᵀx`, i.e. the logical variable values.
    pub row_activity: Vec<f64>,
    pub objective: f64,
    pub basis: Basis,
    /// Unit infinity-norm improving direction, present iff `UnboundedBelow`.
    pub ray: Option<Vec<f64>>,
    /// Row prices `π` of the final basis (phase-2 costs when optimal).
    pub duals: Vec<f64>,
    /// `c_j − πᵀa_j` for structural columns.
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
    tableau: Arc<TableauData>,
}

impl std::fmt::Debug for LpSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LpSolution")
            .field("status", &self.status)
            .field("objective", &self.objective)
            .field("x", &self.x)
            .field("ray", &self.ray)
            .field("iterations", &self.iterations)
            .finish()
    }
}

/// Where a nonbasic variable sits in the current basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NonbasicAt {
    Lower(f64),
    Upper(f64),
    /// Lower equals upper; the variable cannot move.
    Fixed(f64),
    Free,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableauEntry {
    pub var: usize,
    pub coeff: f64,
    pub at: NonbasicAt,
}

/// `basic = constant − Σ coeff_j · (v_j − v*_j)` over the nonbasic variables,
/// where `v*_j` is the nonbasic's current value.
#[derive(Debug, Clone, PartialEq)]
pub struct TableauRow {
    pub basic: usize,
    pub constant: f64,
    pub entries: Vec<TableauEntry>,
}

impl TableauRow {
    /// Coefficients over displacement variables `ξ_j ≥ 0` measured away from the
    /// active bound (`ξ = v − l` at a lower bound, `ξ = u − v` at an upper
    /// bound), so that `basic = constant − Σ g_j ξ_j`. Fixed nonbasics are
    /// dropped. Returns `None` when a free nonbasic has a nonzero coefficient.
    pub fn shifted(&self) -> Option<Vec<(usize, f64, NonbasicAt)>> {
        let mut out = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            match e.at {
                NonbasicAt::Lower(_) => out.push((e.var, e.coeff, e.at)),
                NonbasicAt::Upper(_) => out.push((e.var, -e.coeff, e.at)),
                NonbasicAt::Fixed(_) => {}
                NonbasicAt::Free => return None,
            }
        }
        Some(out)
    }
}

impl LpSolution {
    pub fn ncols(&self) -> usize {
        self.x.len()
    }

    /// Constraint rows of the solved model as sorted `(col, coeff)` lists.
    pub fn constraint_rows(&self) -> Vec<Vec<(usize, f64)>> {
        let csc = &self.tableau.csc;
        let mut rows = vec![Vec::new(); csc.nrows];
        for j in 0..csc.ncols {
            let (idx, vals) = csc.column(j);
            for (&i, &v) in idx.iter().zip(vals) {
                rows[i].push((j, v));
            }
        }
        rows
    }

    /// Lower and upper bounds of every structural then logical variable; the
    /// logical bounds encode the row senses.
    pub fn var_bounds(&self) -> (&[f64], &[f64]) {
        (&self.tableau.lower, &self.tableau.upper)
    }

    /// Value of any variable (structural or logical).
    pub fn value(&self, var: usize) -> f64 {
        self.tableau.values[var]
    }

    /// Simplex tableau row of basic variable `var`.
    pub fn tableau_row(&self, var: usize) -> Result<TableauRow, LpError> {
        if self.status != LpStatus::Optimal {
            return Err(LpError::NotOptimal);
        }
        if var >= self.basis.status.len() || !self.basis.is_basic(var) {
            return Err(LpError::NotBasic(var));
        }
        let factor = self.basis.factor.as_ref().ok_or(LpError::NotOptimal)?;
        let m = self.basis.order.len();
        let r = self
            .basis
            .order
            .iter()
            .position(|&j| j == var)
            .ok_or(LpError::NotBasic(var))?;
        let row = &factor.binv[r * m..(r + 1) * m];
        let t = &self.tableau;
        let n = self.basis.ncols;
        let mut entries = Vec::new();
        for (j, st) in self.basis.status.iter().enumerate() {
            if *st == VarStatus::Basic {
                continue;
            }
            let coeff = if j < n {
                let (rows, vals) = t.csc.column(j);
                rows.iter()
                    .zip(vals)
                    .map(|(&i, &v)| row[i] * v)
                    .sum::<f64>()
            } else {
                -row[j - n]
            };
            if coeff.abs() <= 1e-12 {
                continue;
            }
            let (lo, up) = (t.lower[j], t.upper[j]);
            let at = if lo == up {
                NonbasicAt::Fixed(lo)
            } else {
                match st {
                    VarStatus::AtLower => NonbasicAt::Lower(lo),
                    VarStatus::AtUpper => NonbasicAt::Upper(up),
                    _ => NonbasicAt::Free,
                }
            };
            entries.push(TableauEntry { var: j, coeff, at });
        }
        Ok(TableauRow {
            basic: var,
            constant: t.values[var],
            entries,
        })
    }
}

pub fn solve_lp(model: &LpModel, warm: Option<&Basis>) -> Result<LpSolution, LpError> {
    solve_lp_with(model, warm, &SimplexOptions::default())
}

/// Solves from `warm` and, if that fails numerically, once more from the slack basis.
pub fn solve_lp_robust(model: &LpModel, warm: Option<&Basis>) -> Result<LpSolution, LpError> {
    match solve_lp(model, warm) {
        Err(LpError::NumericalFailure(_)) if warm.is_some() => solve_lp(model, None),
        r => r,
    }
}

pub fn solve_lp_with(
    model: &LpModel,
    warm: Option<&Basis>,
    opts: &SimplexOptions,
) -> Result<LpSolution, LpError> {
    model.validate()?;
    let csc = model.csc();
    let mut work = Work::new(model, csc, opts);
    let loaded = match warm {
        Some(b) => work.load_basis(b),
        None => false,
    };
    if !loaded {
        work.load_slack_basis();
    }
    work.run()
}

const RESIDUAL_TOL: f64 = 1e-8;
/// Consecutive degenerate pivots before the bounds are perturbed.
const PERTURB_AFTER: usize = 50;

enum Step {
    Flip(f64),
    Pivot { pos: usize, t: f64, target: f64 },
    Unbounded,
}

struct Work<'a> {
    opts: &'a SimplexOptions,
    n: usize,
    m: usize,
    csc: Arc<Csc>,
    cost: Vec<f64>,
    lo: Vec<f64>,
    up: Vec<f64>,
    x: Vec<f64>,
    status: Vec<VarStatus>,
    order: Vec<usize>,
    binv: Vec<f64>,
    since_refactor: usize,
    iterations: usize,
}

impl<'a> Work<'a> {
    fn new(model: &LpModel, csc: Arc<Csc>, opts: &'a SimplexOptions) -> Self {
        let n = model.ncols();
        let m = model.nrows();
        let nt = n + m;
        let mut cost = model.objective().to_vec();
        cost.resize(nt, 0.0);
        let mut lo = model.lower().to_vec();
        let mut up = model.upper().to_vec();
        for (&s, &r) in model.senses().iter().zip(model.rhs()) {
            let (l, u) = match s {
                RowSense::Ge => (r, f64::INFINITY),
                RowSense::Le => (f64::NEG_INFINITY, r),
                RowSense::Eq => (r, r),
            };
            lo.push(l);
            up.push(u);
        }
        Self {
            opts,
            n,
            m,
            csc,
            cost,
            lo,
            up,
            x: vec![0.0; nt],
            status: vec![VarStatus::AtLower; nt],
            order: Vec::new(),
            binv: Vec::new(),
            since_refactor: 0,
            iterations: 0,
        }
    }

    fn load_slack_basis(&mut self) {
        let (n, m) = (self.n, self.m);
        for j in 0..n {
            self.status[j] = nonbasic_status(self.lo[j], self.up[j], VarStatus::AtLower);
        }
        for j in n..n + m {
            self.status[j] = VarStatus::Basic;
        }
        self.order = (n..n + m).collect();
        self.binv = vec![0.0; m * m];
        for i in 0..m {
            self.binv[i * m + i] = -1.0;
        }
        self.since_refactor = 0;
        self.set_nonbasic_values();
        self.compute_basic_values();
    }

    fn load_basis(&mut self, b: &Basis) -> bool {
        let (n, m) = (self.n, self.m);
        if b.ncols != n || b.status.len() != n + m || b.order.len() != m {
            return false;
        }
        let mut seen = vec![false; n + m];
        for &j in &b.order {
            if j >= n + m || b.status[j] != VarStatus::Basic || seen[j] {
                return false;
            }
            seen[j] = true;
        }
        if b.status.iter().filter(|s| **s == VarStatus::Basic).count() != m {
            return false;
        }
        for j in 0..n + m {
            self.status[j] = match b.status[j] {
                VarStatus::Basic => VarStatus::Basic,
                s => nonbasic_status(self.lo[j], self.up[j], s),
            };
        }
        self.order = b.order.clone();
        match &b.factor {
            Some(f) if f.fingerprint == self.csc.fingerprint && f.binv.len() == m * m => {
                self.binv = f.binv.clone();
                self.since_refactor = f.pivots;
            }
            _ => {
                if self.refactor().is_err() {
                    return false;
                }
            }
        }
        self.set_nonbasic_values();
        self.compute_basic_values();
        true
    }

    fn set_nonbasic_values(&mut self) {
        for j in 0..self.n + self.m {
            self.x[j] = match self.status[j] {
                VarStatus::Basic => self.x[j],
                VarStatus::AtLower => self.lo[j],
                VarStatus::AtUpper => self.up[j],
                VarStatus::Free => 0.0,
            };
        }
    }

    /// `Σ_i a_ij v_i` for structural or logical column `j`.
    #[inline]
    fn col_dot(&self, j: usize, v: &[f64]) -> f64 {
        if j < self.n {
            let (rows, vals) = self.csc.column(j);
            rows.iter().zip(vals).map(|(&i, &a)| a * v[i]).sum()
        } else {
            -v[j - self.n]
        }
    }

    /// `B⁻¹ a_j`.
    fn ftran(&self, j: usize, out: &mut [f64]) {
        let m = self.m;
        if j < self.n {
            let (rows, vals) = self.csc.column(j);
            for (r, o) in out.iter_mut().enumerate() {
                let row = &self.binv[r * m..(r + 1) * m];
                *o = rows.iter().zip(vals).map(|(&i, &a)| row[i] * a).sum();
            }
        } else {
            let i = j - self.n;
            for r in 0..m {
                out[r] = -self.binv[r * m + i];
            }
        }
    }

    fn compute_basic_values(&mut self) {
        let m = self.m;
        let mut rhs = vec![0.0; m];
        for j in 0..self.n + m {
            if self.status[j] == VarStatus::Basic || self.x[j] == 0.0 {
                continue;
            }
            let v = self.x[j];
            if j < self.n {
                let (rows, vals) = self.csc.column(j);
                for (&i, &a) in rows.iter().zip(vals) {
                    rhs[i] -= a * v;
                }
            } else {
                rhs[j - self.n] += v;
            }
        }
        for r in 0..m {
            let row = &self.binv[r * m..(r + 1) * m];
            self.x[self.order[r]] = row.iter().zip(&rhs).map(|(a, b)| a * b).sum();
        }
    }

    /// Widens every finite, non-fixed bound by a small deterministic amount;
    /// returns the original bounds.
    fn perturb_bounds(&mut self) -> (Vec<f64>, Vec<f64>) {
        let saved = (self.lo.clone(), self.up.clone());
        for j in 0..self.n + self.m {
            if self.lo[j] == self.up[j] {
                continue;
            }
            let r = 1.0 + ((j as u64).wrapping_mul(2_654_435_761) % 1000) as f64 / 1000.0;
            if self.lo[j].is_finite() {
                self.lo[j] -= 1e-7 * r * (1.0 + self.lo[j].abs());
            }
            if self.up[j].is_finite() {
                self.up[j] += 1e-7 * r * (1.0 + self.up[j].abs());
            }
        }
        self.set_nonbasic_values();
        self.compute_basic_values();
        saved
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        self.try_refactor()
            .map_err(|_| LpError::NumericalFailure("singular basis".into()))
    }

    /// Refactors, swapping dependent basic columns for logicals of uncovered
    /// rows until the basis is nonsingular.
    fn refactor_repair(&mut self) -> Result<(), LpError> {
        for _ in 0..=self.m {
            let Err(sing) = self.try_refactor() else {
                return Ok(());
            };
            let Some(&row) = sing
                .rows
                .iter()
                .find(|&&i| self.status[self.n + i] != VarStatus::Basic)
            else {
                break;
            };
            let out = self.order[sing.col];
            self.status[out] = nonbasic_status(self.lo[out], self.up[out], VarStatus::AtLower);
            self.order[sing.col] = self.n + row;
            self.status[self.n + row] = VarStatus::Basic;
            self.set_nonbasic_values();
        }
        Err(LpError::NumericalFailure("singular basis".into()))
    }

    fn try_refactor(&mut self) -> Result<(), Singular> {
        let m = self.m;
        let mut b = vec![0.0; m * m];
        for (r, &j) in self.order.iter().enumerate() {
            if j < self.n {
                let (rows, vals) = self.csc.column(j);
                for (&i, &a) in rows.iter().zip(vals) {
                    b[i * m + r] = a;
                }
            } else {
                b[(j - self.n) * m + r] = -1.0;
            }
        }
        self.binv = invert_dense(&mut b, m)?;
        self.since_refactor = 0;
        Ok(())
    }

    /// Largest relative mismatch between a row's activity and its logical.
    fn row_residual(&self) -> f64 {
        let mut act = vec![0.0; self.m];
        for j in 0..self.n {
            let v = self.x[j];
            if v != 0.0 {
                let (rows, vals) = self.csc.column(j);
                for (&i, &a) in rows.iter().zip(vals) {
                    act[i] += a * v;
                }
            }
        }
        act.iter()
            .enumerate()
            .map(|(i, a)| (a - self.x[self.n + i]).abs() / (1.0 + a.abs()))
            .fold(0.0, f64::max)
    }

    #[inline]
    fn tol_at(&self, bound: f64) -> f64 {
        self.opts.primal_tol * (1.0 + bound.abs())
    }

    /// Phase-1 or phase-2 basic costs; returns whether phase 1 is active.
    fn basic_costs(&self, cb: &mut [f64]) -> bool {
        let mut infeasible = false;
        for r in 0..self.m {
            let j = self.order[r];
            let v = self.x[j];
            cb[r] = if v < self.lo[j] - self.tol_at(self.lo[j]) {
                infeasible = true;
                -1.0
            } else if v > self.up[j] + self.tol_at(self.up[j]) {
                infeasible = true;
                1.0
            } else {
                0.0
            };
        }
        if !infeasible {
            for r in 0..self.m {
                cb[r] = self.cost[self.order[r]];
            }
        }
        infeasible
    }

    fn duals(&self, cb: &[f64], pi: &mut [f64]) {
        let m = self.m;
        pi.iter_mut().for_each(|p| *p = 0.0);
        for r in 0..m {
            let c = cb[r];
            if c == 0.0 {
                continue;
            }
            let row = &self.binv[r * m..(r + 1) * m];
            for i in 0..m {
                pi[i] += c * row[i];
            }
        }
    }

    /// Entering variable and direction (+1 increase, −1 decrease).
    fn price(&self, phase1: bool, pi: &[f64], bland: bool) -> Option<(usize, f64)> {
        let tol = self.opts.dual_tol;
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.n + self.m {
            let st = self.status[j];
            if st == VarStatus::Basic || self.lo[j] == self.up[j] {
                continue;
            }
            let c = if phase1 { 0.0 } else { self.cost[j] };
            let d = c - self.col_dot(j, pi);
            let dir = match st {
                VarStatus::AtLower if d < -tol => 1.0,
                VarStatus::AtUpper if d > tol => -1.0,
                VarStatus::Free if d.abs() > tol => -d.signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    fn ratio_test(&self, q: usize, dir: f64, alpha: &[f64], phase1: bool, bland: bool) -> Step {
        let ptol = self.opts.pivot_tol;
        // (pos, exact step, relaxed step, target bound)
        let mut cands: Vec<(usize, f64, f64, f64)> = Vec::new();
        let mut t_relaxed_min = f64::INFINITY;
        for r in 0..self.m {
            let a = alpha[r];
            if a.abs() < ptol {
                continue;
            }
            let rate = -dir * a;
            let j = self.order[r];
            let v = self.x[j];
            let (lo, up) = (self.lo[j], self.up[j]);
            let target = if rate < 0.0 {
                if phase1 && v > up + self.tol_at(up) {
                    up
                } else if v < lo - self.tol_at(lo) || lo == f64::NEG_INFINITY {
                    continue;
                } else {
                    lo
                }
            } else if phase1 && v < lo - self.tol_at(lo) {
                lo
            } else if v > up + self.tol_at(up) || up == f64::INFINITY {
                continue;
            } else {
                up
            };
            let exact = ((target - v) / rate).max(0.0);
            let slack = self.tol_at(target);
            let relaxed = ((target - v) / rate + slack / rate.abs()).max(0.0);
            t_relaxed_min = t_relaxed_min.min(relaxed);
            cands.push((r, exact, relaxed, target));
        }
        let range = self.up[q] - self.lo[q];
        if range.is_finite() && range <= t_relaxed_min {
            return Step::Flip(range);
        }
        if cands.is_empty() {
            return Step::Unbounded;
        }
        let chosen = if bland {
            let t_min = cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
            cands
                .iter()
                .filter(|c| c.1 <= t_min + 1e-12)
                .min_by_key(|c| self.order[c.0])
                .copied()
        } else {
            cands
                .iter()
                .filter(|c| c.1 <= t_relaxed_min)
                .max_by(|a, b| {
                    alpha[a.0]
                        .abs()
                        .total_cmp(&alpha[b.0].abs())
                        .then(b.0.cmp(&a.0))
                })
                .copied()
        };
        let (pos, t, _, target) = chosen.expect("nonempty candidate set");
        Step::Pivot { pos, t, target }
    }

    fn pivot(&mut self, pos: usize, q: usize, alpha: &[f64]) {
        let m = self.m;
        let p = alpha[pos];
        let (head, tail) = self.binv.split_at_mut(pos * m);
        let (prow, tail) = tail.split_at_mut(m);
        prow.iter_mut().for_each(|v| *v /= p);
        for (r, row) in head.chunks_exact_mut(m).enumerate() {
            let f = alpha[r];
            if f != 0.0 {
                row.iter_mut()
                    .zip(prow.iter())
                    .for_each(|(a, b)| *a -= f * b);
            }
        }
        for (k, row) in tail.chunks_exact_mut(m).enumerate() {
            let f = alpha[pos + 1 + k];
            if f != 0.0 {
                row.iter_mut()
                    .zip(prow.iter())
                    .for_each(|(a, b)| *a -= f * b);
            }
        }
        self.order[pos] = q;
        self.status[q] = VarStatus::Basic;
        self.since_refactor += 1;
    }

    fn run(mut self) -> Result<LpSolution, LpError> {
        let (n, m) = (self.n, self.m);
        let nt = n + m;
        let max_iter = self.opts.max_iterations.unwrap_or(50 * (m + nt) + 5000);
        let bland_after = 5 * (m + nt);
        let mut degenerate_run = 0usize;
        let mut bland = false;
        // original bounds while a degeneracy-breaking perturbation is active
        let mut saved: Option<(Vec<f64>, Vec<f64>)> = None;
        let mut perturbed_once = false;
        let mut cb = vec![0.0; m];
        let mut pi = vec![0.0; m];
        let mut alpha = vec![0.0; m];
        let mut verified = false;
        let mut since_check = 0usize;
        loop {
            if self.iterations > max_iter {
                return Err(LpError::NumericalFailure("iteration limit".into()));
            }
            if since_check >= self.opts.refactor_every {
                since_check = 0;
                self.compute_basic_values();
                if self.since_refactor >= 5 * self.opts.refactor_every
                    || self.row_residual() > RESIDUAL_TOL
                {
                    self.refactor_repair()?;
                    self.compute_basic_values();
                }
            }
            let phase1 = self.basic_costs(&mut cb);
            self.duals(&cb, &mut pi);
            let Some((q, dir)) = self.price(phase1, &pi, bland) else {
                // Before declaring termination, recompute the basic values from
                // the updated inverse; refactor only if the rows no longer hold.
                if let Some((lo, up)) = saved.take() {
                    self.lo = lo;
                    self.up = up;
                    self.set_nonbasic_values();
                    self.compute_basic_values();
                    bland = false;
                    degenerate_run = 0;
                    verified = false;
                    continue;
                }
                if self.since_refactor > 0 && !verified {
                    verified = true;
                    self.compute_basic_values();
                    if self.row_residual() > RESIDUAL_TOL {
                        self.refactor_repair()?;
                        self.compute_basic_values();
                    }
                    continue;
                }
                let status = if phase1 {
                    LpStatus::Infeasible
                } else {
                    LpStatus::Optimal
                };
                return Ok(self.finish(status, None, &pi));
            };
            self.iterations += 1;
            since_check += 1;
            verified = false;
            self.ftran(q, &mut alpha);
            match self.ratio_test(q, dir, &alpha, phase1, bland) {
                Step::Flip(range) => {
                    self.x[q] += dir * range;
                    self.status[q] = if dir > 0.0 {
                        VarStatus::AtUpper
                    } else {
                        VarStatus::AtLower
                    };
                    self.x[q] = if dir > 0.0 { self.up[q] } else { self.lo[q] };
                    for r in 0..m {
                        self.x[self.order[r]] -= dir * range * alpha[r];
                    }
                    degenerate_run = 0;
                }
                Step::Pivot { pos, t, target } => {
                    self.x[q] += dir * t;
                    for r in 0..m {
                        self.x[self.order[r]] -= dir * t * alpha[r];
                    }
                    let out = self.order[pos];
                    self.x[out] = target;
                    self.status[out] = if target == self.lo[out] {
                        VarStatus::AtLower
                    } else {
                        VarStatus::AtUpper
                    };
                    self.pivot(pos, q, &alpha);
                    if t <= 1e-12 {
                        degenerate_run += 1;
                        if !perturbed_once && degenerate_run > PERTURB_AFTER {
                            perturbed_once = true;
                            saved = Some(self.perturb_bounds());
                            degenerate_run = 0;
                        } else if degenerate_run > bland_after {
                            bland = true;
                        }
                    } else {
                        degenerate_run = 0;
                    }
                }
                Step::Unbounded => {
                    if let Some((lo, up)) = saved.take() {
                        self.lo = lo;
                        self.up = up;
                        self.set_nonbasic_values();
                        self.compute_basic_values();
                    }
                    // a drifted inverse can fake a ray; confirm on a fresh one
                    if self.since_refactor > 0 {
                        self.refactor_repair()?;
                        self.compute_basic_values();
                        since_check = 0;
                        continue;
                    }
                    if phase1 {
                        return Err(LpError::NumericalFailure("unbounded phase-1 step".into()));
                    }
                    let mut ray = vec![0.0; n];
                    if q < n {
                        ray[q] = dir;
                    }
                    for r in 0..m {
                        let j = self.order[r];
                        if j < n {
                            ray[j] = -dir * alpha[r];
                        }
                    }
                    let scale = ray.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                    if scale <= 0.0 {
                        return Err(LpError::NumericalFailure("empty ray".into()));
                    }
                    ray.iter_mut().for_each(|v| *v /= scale);
                    return Ok(self.finish(LpStatus::UnboundedBelow, Some(ray), &pi));
                }
            }
        }
    }

    fn finish(self, status: LpStatus, ray: Option<Vec<f64>>, pi: &[f64]) -> LpSolution {
        let n = self.n;
        let x = self.x[..n].to_vec();
        let row_activity = self.x[n..].to_vec();
        let objective = match status {
            LpStatus::Infeasible => f64::INFINITY,
            LpStatus::UnboundedBelow => f64::NEG_INFINITY,
            LpStatus::Optimal => self.cost[..n].iter().zip(&x).map(|(c, v)| c * v).sum(),
        };
        let reduced_costs = (0..n).map(|j| self.cost[j] - self.col_dot(j, pi)).collect();
        let factor = Arc::new(Factor {
            binv: self.binv,
            fingerprint: self.csc.fingerprint,
            pivots: self.since_refactor,
        });
        let basis = Basis {
            ncols: n,
            status: self.status,
            order: self.order,
            factor: Some(factor),
        };
        LpSolution {
            status,
            x,
            row_activity,
            objective,
            basis,
            ray,
            duals: pi.to_vec(),
            reduced_costs,
            iterations: self.iterations,
            tableau: Arc::new(TableauData {
                csc: self.csc,
                lower: self.lo,
                upper: self.up,
                values: self.x,
            }),
        }
    }
}

/// Column position without a usable pivot, and the rows not yet pivoted on.
struct Singular {
    col: usize,
    rows: Vec<usize>,
}

/// Gauss–Jordan inverse with partial pivoting of a row-major `m×m` matrix.
fn invert_dense(a: &mut [f64], m: usize) -> Result<Vec<f64>, Singular> {
    let mut inv = vec![0.0; m * m];
    for i in 0..m {
        inv[i * m + i] = 1.0;
    }
    let mut perm: Vec<usize> = (0..m).collect();
    for col in 0..m {
        let mut piv = col;
        let mut best = a[col * m + col].abs();
        for r in col + 1..m {
            let v = a[r * m + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best < 1e-11 {
            return Err(Singular {
                col,
                rows: perm[col..].to_vec(),
            });
        }
        if piv != col {
            perm.swap(col, piv);
            for k in 0..m {
                a.swap(col * m + k, piv * m + k);
                inv.swap(col * m + k, piv * m + k);
            }
        }
        let p = a[col * m + col];
        for k in 0..m {
            a[col * m + k] /= p;
            inv[col * m + k] /= p;
        }
        for r in 0..m {
            if r == col {
                continue;
            }
            let f = a[r * m + col];
            if f == 0.0 {
                continue;
            }
            for k in 0..m {
                a[r * m + k] -= f * a[col * m + k];
                inv[r * m + k] -= f * inv[col * m + k];
            }
        }
    }
    Ok(inv)
}
