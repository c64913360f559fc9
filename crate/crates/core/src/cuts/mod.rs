//! Root-node cutting planes for the disjunctions `y_i ≤ 0 ∨ w_i ≤ 0`, and the
//! pool that tracks them as rows of the root LP.
//!
//! Cuts live in `[x | y | w]` space (the relaxation's column layout) with
//! sense `≥`, so they survive re-solves and basis changes.

mod cglp;
mod root;

use std::collections::HashSet;

use crate::lp::{
    solve_lp_robust, Basis, LpError, LpModel, LpSolution, LpStatus, NonbasicAt, RowSense,
};
use crate::model::{build_relaxation, objective_row, BoundBox, LpccInstance};

pub use cglp::{gen_disjunctive_cut, solve_cglp, CglpCertificate};
pub use root::{run_preprocessor, CutCounts, PreprocessParams, PreprocessTimings, Preprocessed};

/// A complementarity counts as violated when both sides exceed this.
pub const VIOLATION_TOL: f64 = 1e-6;
/// Minimum violation at the spawning point for a cut to be kept.
pub const MIN_CUT_VIOLATION: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum CutError {
    #[error("complementarity {0} is not violated with both sides basic")]
    NotApplicable(usize),
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CutKind {
    Simple,
    Disjunctive,
    Bound,
}

/// `coeff_xᵀx + coeff_yᵀy + coeff_wᵀw ≥ rhs`, derived from complementarity `source`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub coeff_x: Vec<f64>,
    pub coeff_y: Vec<f64>,
    pub coeff_w: Vec<f64>,
    pub rhs: f64,
    pub kind: CutKind,
    pub source: usize,
}

impl Cut {
    /// Splits a coefficient vector over `[x | y | w]`.
    pub fn from_vars(
        inst: &LpccInstance,
        coeffs: &[f64],
        rhs: f64,
        kind: CutKind,
        source: usize,
    ) -> Self {
        let (n, m) = (inst.n, inst.m);
        assert_eq!(coeffs.len(), n + 2 * m, "cut coefficient length");
        Self {
            coeff_x: coeffs[..n].to_vec(),
            coeff_y: coeffs[n..n + m].to_vec(),
            coeff_w: coeffs[n + m..].to_vec(),
            rhs,
            kind,
            source,
        }
    }

    /// Nonzero coefficients keyed by `[x | y | w]` column.
    pub fn entries(&self) -> Vec<(usize, f64)> {
        self.coeff_x
            .iter()
            .chain(&self.coeff_y)
            .chain(&self.coeff_w)
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, v)| (j, *v))
            .collect()
    }

    pub fn lhs(&self, v: &[f64]) -> f64 {
        self.coeff_x
            .iter()
            .chain(&self.coeff_y)
            .chain(&self.coeff_w)
            .zip(v)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// `rhs − lhs(v)`; positive when `v` violates the cut.
    pub fn violation(&self, v: &[f64]) -> f64 {
        self.rhs - self.lhs(v)
    }

    pub fn is_finite(&self) -> bool {
        self.rhs.is_finite()
            && self
                .coeff_x
                .iter()
                .chain(&self.coeff_y)
                .chain(&self.coeff_w)
                .all(|v| v.is_finite())
    }

    /// Hash key: every coefficient and the rhs rounded to 12 significant digits.
    fn key(&self) -> String {
        let mut s = String::new();
        for (j, v) in self.entries() {
            s.push_str(&format!("{j}:{v:.11e};"));
        }
        s.push_str(&format!("{:.11e}", self.rhs));
        s
    }
}

/// Active cuts and the LP rows they occupy.
#[derive(Debug, Clone, Default)]
pub struct CutPool {
    cuts: Vec<Cut>,
    rows: Vec<usize>,
    keys: HashSet<String>,
}

impl CutPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    pub fn cuts(&self) -> &[Cut] {
        &self.cuts
    }

    /// Row index of each cut in the working LP (parallel to [`cuts`](Self::cuts)).
    pub fn slack_rows(&self) -> &[usize] {
        &self.rows
    }

    /// Appends `cut` as a row of `model`; returns false (and changes nothing)
    /// for duplicates and non-finite cuts.
    pub fn add(&mut self, model: &mut LpModel, cut: Cut) -> bool {
        if !cut.is_finite() {
            return false;
        }
        let key = cut.key();
        if self.keys.contains(&key) {
            return false;
        }
        let row = model.add_row(&cut.entries(), RowSense::Ge, cut.rhs);
        self.keys.insert(key);
        self.cuts.push(cut);
        self.rows.push(row);
        true
    }
}

/// Drops every cut whose slack is basic in `sol` from both the pool and
/// `model`, and returns `sol`'s basis restricted to the remaining rows.
pub fn purge_slack_basic(pool: &mut CutPool, model: &mut LpModel, sol: &LpSolution) -> Basis {
    let basis = &sol.basis;
    let drop: Vec<usize> = pool
        .rows
        .iter()
        .copied()
        .filter(|&r| basis.is_basic(basis.slack_of(r)))
        .collect();
    if drop.is_empty() {
        return basis.clone();
    }
    let reduced = basis
        .remove_rows(&drop)
        .expect("dropped rows have basic slacks");
    model.remove_rows(&drop);
    let mut keep_cuts = Vec::with_capacity(pool.cuts.len());
    let mut keep_rows = Vec::with_capacity(pool.cuts.len());
    for (cut, &r) in pool.cuts.iter().zip(&pool.rows) {
        if drop.contains(&r) {
            pool.keys.remove(&cut.key());
        } else {
            let shift = drop.iter().filter(|&&d| d < r).count();
            keep_cuts.push(cut.clone());
            keep_rows.push(r - shift);
        }
    }
    pool.cuts = keep_cuts;
    pool.rows = keep_rows;
    reduced
}

/// Indices of the `limit` largest products `y_i·w_i` among violated pairs,
/// ties broken by lower index.
pub fn rank_by_product(y: &[f64], w: &[f64], limit: usize) -> Vec<usize> {
    let mut cands: Vec<(f64, usize)> = y
        .iter()
        .zip(w)
        .enumerate()
        .filter(|(_, (y, w))| **y > VIOLATION_TOL && **w > VIOLATION_TOL)
        .map(|(i, (y, w))| (y * w, i))
        .collect();
    cands.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    cands.into_iter().take(limit).map(|c| c.1).collect()
}

pub fn select_disjunction_candidates(
    inst: &LpccInstance,
    sol: &LpSolution,
    limit: usize,
) -> Vec<usize> {
    let y = &sol.x[inst.y_var(0)..inst.y_var(0) + inst.m];
    let w = &sol.x[inst.w_var(0)..inst.w_var(0) + inst.m];
    rank_by_product(y, w, limit)
}

/// Rewrites `Σ g_j ξ_j ≥ 1` over displacement variables as a cut in the
/// structural variables: structurals map to `±(v_j − bound)`, logicals to
/// `±(a_rᵀv − bound)`.
pub(crate) fn displacement_cut(
    inst: &LpccInstance,
    rows: &[Vec<(usize, f64)>],
    terms: &[(usize, f64, NonbasicAt)],
    kind: CutKind,
    source: usize,
) -> Cut {
    let nv = inst.num_vars();
    let mut coeff = vec![0.0; nv];
    let mut constant = 0.0;
    for &(var, g, at) in terms {
        let (sign, bound) = match at {
            NonbasicAt::Lower(l) => (1.0, l),
            NonbasicAt::Upper(u) => (-1.0, u),
            NonbasicAt::Fixed(_) | NonbasicAt::Free => continue,
        };
        constant -= sign * g * bound;
        if var < nv {
            coeff[var] += sign * g;
        } else {
            for &(c, a) in &rows[var - nv] {
                coeff[c] += sign * g * a;
            }
        }
    }
    Cut::from_vars(inst, &coeff, 1.0 - constant, kind, source)
}

/// Tableau intersection cut `Σ max(a^y_j/y*, a^w_j/w*)·ξ_j ≥ 1` for pair `i`.
pub fn gen_simple_cut(inst: &LpccInstance, sol: &LpSolution, i: usize) -> Result<Cut, CutError> {
    let (yv, wv) = (inst.y_var(i), inst.w_var(i));
    if sol.status != LpStatus::Optimal
        || !sol.basis.is_basic(yv)
        || !sol.basis.is_basic(wv)
        || sol.x[yv] <= VIOLATION_TOL
        || sol.x[wv] <= VIOLATION_TOL
    {
        return Err(CutError::NotApplicable(i));
    }
    let ry = sol
        .tableau_row(yv)?
        .shifted()
        .ok_or(CutError::NotApplicable(i))?;
    let rw = sol
        .tableau_row(wv)?
        .shifted()
        .ok_or(CutError::NotApplicable(i))?;
    let (ys, ws) = (sol.x[yv], sol.x[wv]);
    let mut terms: Vec<(usize, f64, NonbasicAt)> = Vec::with_capacity(ry.len() + rw.len());
    for &(var, a, at) in &ry {
        let aw = rw.iter().find(|e| e.0 == var).map_or(0.0, |e| e.1);
        terms.push((var, (a / ys).max(aw / ws), at));
    }
    for &(var, a, at) in &rw {
        if !ry.iter().any(|e| e.0 == var) {
            terms.push((var, (a / ws).max(0.0), at));
        }
    }
    terms.retain(|t| t.1 != 0.0);
    let rows = sol.constraint_rows();
    Ok(displacement_cut(inst, &rows, &terms, CutKind::Simple, i))
}

/// `u_w·y_i + u_y·w_i ≤ u_w·u_y`, stored as `−u_w·y_i − u_y·w_i ≥ −u_w·u_y`.
pub fn gen_bound_cut(inst: &LpccInstance, i: usize, u_y: f64, u_w: f64) -> Cut {
    assert!(
        u_y > 0.0 && u_w > 0.0 && u_y.is_finite() && u_w.is_finite(),
        "bound cut needs finite positive bounds"
    );
    let mut coeff = vec![0.0; inst.num_vars()];
    coeff[inst.y_var(i)] = -u_w;
    coeff[inst.w_var(i)] = -u_y;
    Cut::from_vars(inst, &coeff, -u_w * u_y, CutKind::Bound, i)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundTarget {
    Y(usize),
    W(usize),
}

impl BoundTarget {
    pub fn var(self, inst: &LpccInstance) -> usize {
        match self {
            BoundTarget::Y(i) => inst.y_var(i),
            BoundTarget::W(i) => inst.w_var(i),
        }
    }
}

/// The bound-strengthening LP: the relaxation with the known bounds as column
/// caps, a bound cut for every pair with both bounds, and `cᵀx + dᵀy ≤ ub`.
pub(crate) struct BoundLp<'a> {
    inst: &'a LpccInstance,
    model: LpModel,
    cut_pairs: Vec<usize>,
    warm: Option<Basis>,
}

impl<'a> BoundLp<'a> {
    pub(crate) fn new(inst: &'a LpccInstance, bounds: &BoundBox) -> Self {
        let mut model = build_relaxation(inst);
        if let Some(ub) = bounds.ub_obj {
            model.add_row(&objective_row(inst), RowSense::Le, ub);
        }
        let mut lp = Self {
            inst,
            model,
            cut_pairs: Vec::new(),
            warm: None,
        };
        for i in 0..inst.m {
            lp.apply(bounds, i);
        }
        lp
    }

    /// Brings pair `i`'s caps and bound cut up to date with `bounds`.
    pub(crate) fn apply(&mut self, bounds: &BoundBox, i: usize) {
        let inst = self.inst;
        if let Some(u) = bounds.u_y[i] {
            self.model.set_upper(inst.y_var(i), u);
        }
        if let Some(u) = bounds.u_w[i] {
            self.model.set_upper(inst.w_var(i), u);
        }
        if let (Some(uy), Some(uw)) = (bounds.u_y[i], bounds.u_w[i]) {
            if uy > 0.0 && uw > 0.0 && !self.cut_pairs.contains(&i) {
                let cut = gen_bound_cut(inst, i, uy, uw);
                self.model.add_row(&cut.entries(), RowSense::Ge, cut.rhs);
                self.cut_pairs.push(i);
                self.warm = self.warm.take().map(|b| b.extend_rows(self.model.nrows()));
            }
        }
    }

    /// Maximum of `target` over the bound LP; `+∞` when unbounded or when the
    /// solve gives no usable answer.
    pub(crate) fn maximize(&mut self, target: BoundTarget) -> Result<f64, LpError> {
        let mut obj = vec![0.0; self.model.ncols()];
        obj[target.var(self.inst)] = -1.0;
        self.model.set_objective(obj);
        let sol = solve_lp_robust(&self.model, self.warm.as_ref())?;
        Ok(match sol.status {
            LpStatus::Optimal => {
                let v = (-sol.objective).max(0.0);
                self.warm = Some(sol.basis);
                v
            }
            _ => f64::INFINITY,
        })
    }
}

/// Largest value of `target` over the relaxation intersected with `bounds`
/// (caps, bound cuts of fully bounded pairs, objective cutoff).
pub fn compute_bound(
    inst: &LpccInstance,
    target: BoundTarget,
    bounds: &BoundBox,
) -> Result<f64, LpError> {
    BoundLp::new(inst, bounds).maximize(target)
}
