//! Branch and bound over the disjunctions `y_i = 0 ∨ w_i = 0`: node lists,
//! node presolve, branching scores and the search driver.

mod search;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::lp::{Basis, LpModel, LpSolution, NonbasicAt, VarStatus};
use crate::model::{LpccInstance, LpccPoint};

pub use search::{solve, BnbError, SearchTimings, SolveParams, SolveReport, SolveStatus};

/// Stand-in for the infinite gain of an infeasible strong-branching child.
pub const INFEASIBLE_GAIN: f64 = 1e12;

/// Which variable of a complementarity a child forces to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Y,
    W,
}

impl Side {
    pub fn var(self, inst: &LpccInstance, i: usize) -> usize {
        match self {
            Side::Y => inst.y_var(i),
            Side::W => inst.w_var(i),
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::Y => Side::W,
            Side::W => Side::Y,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    pub id: usize,
    pub parent: Option<usize>,
    /// Sorted indices with `y_i = 0` enforced.
    pub fixed_y: Vec<usize>,
    /// Sorted indices with `w_i = 0` enforced.
    pub fixed_w: Vec<usize>,
    /// `−∞` for nodes whose LP is unbounded.
    pub lb: f64,
    pub depth: usize,
    pub warm: Option<Basis>,
}

impl Node {
    pub fn root(lb: f64, warm: Option<Basis>) -> Self {
        Self {
            id: 0,
            parent: None,
            fixed_y: Vec::new(),
            fixed_w: Vec::new(),
            lb,
            depth: 0,
            warm,
        }
    }

    pub fn is_fixed(&self, i: usize) -> bool {
        self.fixed_y.binary_search(&i).is_ok() || self.fixed_w.binary_search(&i).is_ok()
    }

    /// Adds `side_i = 0`. Returns false if the other side is already fixed.
    pub fn fix(&mut self, i: usize, side: Side) -> bool {
        let (mine, theirs) = match side {
            Side::Y => (&mut self.fixed_y, &self.fixed_w),
            Side::W => (&mut self.fixed_w, &self.fixed_y),
        };
        if theirs.binary_search(&i).is_ok() {
            return false;
        }
        if let Err(pos) = mine.binary_search(&i) {
            mine.insert(pos, i);
        }
        true
    }

    pub fn child(&self, id: usize, i: usize, side: Side, lb: f64, warm: Option<Basis>) -> Self {
        let mut c = Self {
            id,
            parent: Some(self.id),
            fixed_y: self.fixed_y.clone(),
            fixed_w: self.fixed_w.clone(),
            lb,
            depth: self.depth + 1,
            warm,
        };
        c.fix(i, side);
        c
    }

    /// `base` with every fixed variable capped at zero.
    pub fn model(&self, inst: &LpccInstance, base: &LpModel) -> LpModel {
        let mut m = base.clone();
        for &i in &self.fixed_y {
            m.set_upper(inst.y_var(i), 0.0);
        }
        for &i in &self.fixed_w {
            m.set_upper(inst.w_var(i), 0.0);
        }
        m
    }
}

/// Pseudocost and satisfaction-level history per complementarity side.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BranchStats {
    pub sigma_y: Vec<f64>,
    pub eta_y: Vec<usize>,
    pub sigma_w: Vec<f64>,
    pub eta_w: Vec<usize>,
    pub phi_y: Vec<f64>,
    pub phi_w: Vec<f64>,
}

impl BranchStats {
    pub fn new(m: usize) -> Self {
        Self {
            sigma_y: vec![0.0; m],
            eta_y: vec![0; m],
            sigma_w: vec![0.0; m],
            eta_w: vec![0; m],
            phi_y: vec![0.0; m],
            phi_w: vec![0.0; m],
        }
    }

    /// Records a solved, feasible child: objective gain `gain` after forcing
    /// a side whose parent value was `violation`, leaving a fraction
    /// `satisfied` of the complementarities satisfied.
    pub fn record(&mut self, i: usize, side: Side, gain: f64, violation: f64, satisfied: f64) {
        let unit = gain.max(0.0) / violation;
        let (sigma, eta, phi) = match side {
            Side::Y => (&mut self.sigma_y, &mut self.eta_y, &mut self.phi_y),
            Side::W => (&mut self.sigma_w, &mut self.eta_w, &mut self.phi_w),
        };
        sigma[i] += unit;
        eta[i] += 1;
        phi[i] += satisfied.clamp(0.0, 1.0);
    }

    pub fn pseudocost(&self, i: usize, side: Side) -> Option<f64> {
        match side {
            Side::Y => (self.eta_y[i] > 0).then(|| self.sigma_y[i] / self.eta_y[i] as f64),
            Side::W => (self.eta_w[i] > 0).then(|| self.sigma_w[i] / self.eta_w[i] as f64),
        }
    }

    pub fn satisfaction(&self, i: usize, side: Side) -> Option<f64> {
        match side {
            Side::Y => (self.eta_y[i] > 0).then(|| self.phi_y[i] / self.eta_y[i] as f64),
            Side::W => (self.eta_w[i] > 0).then(|| self.phi_w[i] / self.eta_w[i] as f64),
        }
    }

    /// Mean over every initialized side, or 1 when none is.
    fn pooled_mean(&self, f: impl Fn(usize, Side) -> Option<f64>) -> f64 {
        let vals: Vec<f64> = (0..self.eta_y.len())
            .flat_map(|i| [f(i, Side::Y), f(i, Side::W)])
            .flatten()
            .collect();
        if vals.is_empty() {
            1.0
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchWeights {
    pub vl: f64,
    pub ed: f64,
    pub pc: f64,
    pub sl: f64,
    /// Strong branching at nodes of depth `≤ strong_depth`; `None` disables it.
    pub strong_depth: Option<usize>,
    pub epsilon: f64,
}

impl Default for BranchWeights {
    fn default() -> Self {
        Self {
            vl: 1.0,
            ed: 0.5,
            pc: 0.25,
            sl: 0.5,
            strong_depth: Some(7),
            epsilon: 1e-6,
        }
    }
}

impl BranchWeights {
    /// Violation level only, no strong branching.
    pub fn violation_only() -> Self {
        Self {
            vl: 1.0,
            ed: 0.0,
            pc: 0.0,
            sl: 0.0,
            strong_depth: None,
            epsilon: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let w = [self.vl, self.ed, self.pc, self.sl];
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(format!("weights must be finite and nonnegative, got {w:?}"));
        }
        if w.iter().all(|v| *v == 0.0) {
            return Err("at least one weight must be positive".into());
        }
        if !(self.epsilon > 0.0) {
            return Err(format!("epsilon must be positive, got {}", self.epsilon));
        }
        Ok(())
    }

    fn strong_at(&self, depth: usize) -> bool {
        self.strong_depth.is_some_and(|d| depth <= d)
    }
}

struct Queued(Node);

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    /// Max-heap order: smaller bound first, then the more recent node.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .lb
            .total_cmp(&self.0.lb)
            .then(self.0.id.cmp(&other.0.id))
    }
}

/// Open nodes, bounds and branching history.
pub struct SearchState {
    pub ub: f64,
    pub lb: f64,
    bounded: BinaryHeap<Queued>,
    unbounded: Vec<Node>,
    pub incumbent: Option<LpccPoint>,
    pub stats: BranchStats,
    next_id: usize,
    pub nodes: usize,
    pub lp_solves: usize,
}

impl SearchState {
    pub fn new(m: usize) -> Self {
        Self {
            ub: f64::INFINITY,
            lb: f64::NEG_INFINITY,
            bounded: BinaryHeap::new(),
            unbounded: Vec::new(),
            incumbent: None,
            stats: BranchStats::new(m),
            next_id: 1,
            nodes: 0,
            lp_solves: 0,
        }
    }

    pub fn fresh_id(&mut self) -> usize {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    pub fn push_bounded(&mut self, node: Node) {
        self.bounded.push(Queued(node));
    }

    pub fn push_unbounded(&mut self, node: Node) {
        self.unbounded.push(node);
    }

    pub fn open_nodes(&self) -> usize {
        self.bounded.len() + self.unbounded.len()
    }

    /// Takes `p` as the incumbent if it beats the current one.
    pub fn offer(&mut self, p: LpccPoint) -> bool {
        if p.objective < self.ub {
            self.ub = p.objective;
            self.incumbent = Some(p);
            true
        } else {
            false
        }
    }

    /// Smallest bound over the bounded list (`−∞` while unbounded nodes remain,
    /// `ub` once everything is closed).
    pub fn open_bound(&self) -> f64 {
        if !self.unbounded.is_empty() {
            return f64::NEG_INFINITY;
        }
        match self.bounded.peek() {
            Some(q) => q.0.lb.min(self.ub),
            None => self.ub,
        }
    }

    /// Median bound of the bounded list; `+∞` when it is empty.
    pub fn median_open_bound(&self) -> f64 {
        let mut lbs: Vec<f64> = self.bounded.iter().map(|q| q.0.lb).collect();
        if lbs.is_empty() {
            return f64::INFINITY;
        }
        lbs.sort_by(f64::total_cmp);
        let k = lbs.len();
        if k % 2 == 1 {
            lbs[k / 2]
        } else {
            0.5 * (lbs[k / 2 - 1] + lbs[k / 2])
        }
    }
}

/// Next node: the most recent unbounded node if any, else the best bound
/// (most recent among ties).
pub fn select_node(state: &mut SearchState) -> Option<Node> {
    if let Some(n) = state.unbounded.pop() {
        return Some(n);
    }
    state.bounded.pop().map(|q| q.0)
}

/// `min(y_i, w_i) > tol` with `i` unfixed.
pub fn violated(inst: &LpccInstance, sol: &LpSolution, node: &Node, tol: f64) -> Vec<usize> {
    (0..inst.m)
        .filter(|&i| !node.is_fixed(i))
        .filter(|&i| sol.x[inst.y_var(i)].min(sol.x[inst.w_var(i)]) > tol)
        .collect()
}

/// Fraction of complementarities with `min(y_i, w_i) ≤ tol`.
pub fn satisfaction(inst: &LpccInstance, v: &[f64], tol: f64) -> f64 {
    if inst.m == 0 {
        return 1.0;
    }
    let ok = (0..inst.m)
        .filter(|&i| v[inst.y_var(i)].min(v[inst.w_var(i)]) <= tol)
        .count();
    ok as f64 / inst.m as f64
}

/// Fixings implied by the optimal tableau: when every displacement coefficient
/// in `y_i`'s row is nonpositive, `y_i` can only grow from its current value,
/// so `w_i = 0` (and symmetrically). Both sides deduced for one `i` means the
/// node holds no complementary point.
pub fn node_presolve(
    inst: &LpccInstance,
    sol: &LpSolution,
    node: &Node,
    tol: f64,
) -> Vec<(usize, Side)> {
    let mut out = Vec::new();
    for i in violated(inst, sol, node, tol) {
        let (yv, wv) = (inst.y_var(i), inst.w_var(i));
        if !sol.basis.is_basic(yv) || !sol.basis.is_basic(wv) {
            continue;
        }
        let grows = |var: usize| -> bool {
            match sol.tableau_row(var).ok().and_then(|r| r.shifted()) {
                Some(g) => g.iter().all(|&(_, a, _)| a <= 0.0),
                None => false,
            }
        };
        if grows(yv) {
            out.push((i, Side::W));
        }
        if grows(wv) {
            out.push((i, Side::Y));
        }
    }
    out
}

/// Euclidean norm of basic `var`'s tableau row over the movable nonbasics;
/// 1 for a nonbasic `var` (its own displacement).
fn row_norm(sol: &LpSolution, var: usize) -> f64 {
    if sol.basis.status()[var] != VarStatus::Basic {
        return 1.0;
    }
    match sol.tableau_row(var) {
        Ok(r) => r
            .entries
            .iter()
            .filter(|e| !matches!(e.at, NonbasicAt::Fixed(_)))
            .map(|e| e.coeff * e.coeff)
            .sum::<f64>()
            .sqrt(),
        Err(_) => 1.0,
    }
}

fn scale_by_norm(v: &mut [f64]) {
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm > 0.0 && norm.is_finite() {
        v.iter_mut().for_each(|a| *a /= norm);
    } else {
        v.iter_mut().for_each(|a| *a = 0.0);
    }
}

/// Unscaled violation-level, distance, pseudocost and satisfaction terms of
/// each candidate; a term whose weight is zero is left at zero.
pub fn score_terms(
    inst: &LpccInstance,
    sol: &LpSolution,
    stats: &BranchStats,
    weights: &BranchWeights,
    cands: &[usize],
) -> [Vec<f64>; 4] {
    let k = cands.len();
    let yw = |i: usize| (sol.x[inst.y_var(i)], sol.x[inst.w_var(i)]);
    let eps = weights.epsilon;
    let vl = cands
        .iter()
        .map(|&i| {
            let (y, w) = yw(i);
            (y * w).sqrt()
        })
        .collect();
    let mut ed = vec![0.0; k];
    if weights.ed != 0.0 {
        for (s, &i) in ed.iter_mut().zip(cands) {
            let (y, w) = yw(i);
            let d = (row_norm(sol, inst.y_var(i)) * row_norm(sol, inst.w_var(i)))
                .sqrt()
                .max(1e-12);
            *s = (y * w / d).sqrt();
        }
    }
    let mut pc = vec![0.0; k];
    if weights.pc != 0.0 {
        let mean = stats.pooled_mean(|i, s| stats.pseudocost(i, s));
        for (s, &i) in pc.iter_mut().zip(cands) {
            let (y, w) = yw(i);
            let py = stats.pseudocost(i, Side::Y).unwrap_or(mean);
            let pw = stats.pseudocost(i, Side::W).unwrap_or(mean);
            *s = ((py * y).max(eps) * (pw * w).max(eps)).sqrt();
        }
    }
    let mut sl = vec![0.0; k];
    if weights.sl != 0.0 {
        let mean = stats.pooled_mean(|i, s| stats.satisfaction(i, s));
        for (s, &i) in sl.iter_mut().zip(cands) {
            let fy = stats.satisfaction(i, Side::Y).unwrap_or(mean);
            let fw = stats.satisfaction(i, Side::W).unwrap_or(mean);
            *s = (fy * fw).sqrt();
        }
    }
    [vl, ed, pc, sl]
}

/// The weighted hybrid score of each candidate in `cands`, each term scaled
/// by its 2-norm over the candidates.
pub fn branch_scores(
    inst: &LpccInstance,
    sol: &LpSolution,
    stats: &BranchStats,
    weights: &BranchWeights,
    cands: &[usize],
) -> Vec<f64> {
    let terms = score_terms(inst, sol, stats, weights, cands);
    let mut total = vec![0.0; cands.len()];
    for (w, mut s) in [weights.vl, weights.ed, weights.pc, weights.sl]
        .into_iter()
        .zip(terms)
    {
        if w == 0.0 {
            continue;
        }
        scale_by_norm(&mut s);
        total.iter_mut().zip(&s).for_each(|(t, v)| *t += w * v);
    }
    total
}

/// Position of the largest score, first among ties.
pub fn argmax(scores: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (p, &s) in scores.iter().enumerate() {
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((p, s));
        }
    }
    best.map(|(p, _)| p)
}

/// `max(Δʸ, ε) · max(Δʷ, ε)`.
pub fn product_score(dy: f64, dw: f64, eps: f64) -> f64 {
    dy.max(eps) * dw.max(eps)
}
