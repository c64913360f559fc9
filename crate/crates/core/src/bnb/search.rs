//! The search loop: root triage, preprocessing, then unbounded nodes before
//! bounded ones until the gap closes or the lists run dry.

use std::time::{Duration, Instant};

use log::{debug, info};

use crate::cuts::{run_preprocessor, CutCounts, PreprocessParams};
use crate::lp::{solve_lp_robust, Basis, LpError, LpModel, LpSolution, LpStatus};
use crate::model::{
    apply_assignment, build_relaxation, check_feasible, relative_gap, Assignment, LpccInstance,
    LpccPoint, Outcome,
};
use crate::oracle::verify_ray;
use crate::par::{self, Exec};

use super::{
    argmax, branch_scores, node_presolve, product_score, satisfaction, select_node, violated,
    BranchWeights, Node, SearchState, Side, INFEASIBLE_GAIN,
};

/// Ray components at or below this count as zero.
const RAY_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum BnbError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone)]
pub struct SolveParams {
    /// Stop once `relative_gap(ub, lb)` drops below this.
    pub gap: f64,
    /// `min(y_i, w_i)` at or below this counts as complementary.
    pub comp_tol: f64,
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
    pub weights: BranchWeights,
    /// Recovery and cut settings; with `recovery: None` and `cuts: false`
    /// the root goes straight into the tree.
    pub preprocess: PreprocessParams,
    /// Used for the two child LPs of each strong-branching candidate.
    pub exec: Exec,
    /// Record `(ub, lb)` after every node into [`SolveReport::trace`].
    pub trace: bool,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            gap: 1e-6,
            comp_tol: 1e-6,
            time_limit: None,
            node_limit: None,
            weights: BranchWeights::default(),
            preprocess: PreprocessParams::default(),
            exec: Exec::default(),
            trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    TimeLimit,
    NodeLimit,
}

impl SolveStatus {
    pub fn label(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "OPTIMAL",
            SolveStatus::Infeasible => "INFEASIBLE",
            SolveStatus::Unbounded => "UNBOUNDED",
            SolveStatus::TimeLimit => "TIME_LIMIT",
            SolveStatus::NodeLimit => "NODE_LIMIT",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SearchTimings {
    pub preprocess: Duration,
    pub search: Duration,
    pub total: Duration,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Present for the three certified states.
    pub outcome: Option<Outcome>,
    pub incumbent: Option<LpccPoint>,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// Nodes whose LP was solved in the tree.
    pub nodes: usize,
    /// LPs solved by the tree search, root relaxation included.
    pub lp_solves: usize,
    pub relaxation_value: f64,
    /// Root bound after preprocessing.
    pub root_lb: f64,
    pub cuts: CutCounts,
    pub recovery_value: Option<f64>,
    pub recovery_evaluations: usize,
    pub timings: SearchTimings,
    /// `(ub, lb)` at the top of every search iteration, when requested.
    pub trace: Vec<(f64, f64)>,
}

impl SolveReport {
    pub fn rel_gap(&self) -> f64 {
        relative_gap(self.upper_bound, self.lower_bound.min(self.upper_bound))
    }

    pub fn objective(&self) -> Option<f64> {
        self.incumbent.as_ref().map(|p| p.objective)
    }
}

struct Search<'a> {
    inst: &'a LpccInstance,
    params: &'a SolveParams,
    deadline: Option<Instant>,
    base: LpModel,
    state: SearchState,
    trace: Vec<(f64, f64)>,
}

type Certificate = (LpccPoint, Vec<f64>);

/// Solves the LPCC to global optimality (or proves it infeasible or unbounded).
pub fn solve(inst: &LpccInstance, params: &SolveParams) -> Result<SolveReport, BnbError> {
    params.weights.validate().map_err(BnbError::InvalidParams)?;
    if !(params.gap >= 0.0) || !(params.comp_tol >= 0.0) {
        return Err(BnbError::InvalidParams(format!(
            "gap {} and comp_tol {} must be nonnegative",
            params.gap, params.comp_tol
        )));
    }
    let start = Instant::now();
    let deadline = params.time_limit.map(|t| start + t);
    let relax_model = build_relaxation(inst);
    let relax = solve_lp_robust(&relax_model, None)?;
    let mut s = Search {
        inst,
        params,
        deadline,
        base: relax_model,
        state: SearchState::new(inst.m),
        trace: Vec::new(),
    };
    s.state.lp_solves = 1;

    let mut root_lb = relax.objective;
    let mut cuts = CutCounts::default();
    let mut recovery_value = None;
    let mut recovery_evaluations = 0;
    let t = Instant::now();
    match relax.status {
        LpStatus::Infeasible => {}
        LpStatus::UnboundedBelow => {
            s.state.push_unbounded(Node::root(
                f64::NEG_INFINITY,
                Some(relax.basis.without_factor()),
            ));
        }
        LpStatus::Optimal => {
            let pp = PreprocessParams {
                deadline: params.preprocess.deadline.or(deadline),
                ..params.preprocess.clone()
            };
            let pre = run_preprocessor(inst, &relax, &pp)?;
            cuts = pre.counts;
            recovery_evaluations = pre.recovery_evaluations;
            if let Some(p) = pre.incumbent {
                recovery_value = Some(p.objective);
                s.state.offer(p);
            }
            root_lb = pre.root_lb;
            s.base = pre.model;
            match pre.root.status {
                LpStatus::Optimal => s.state.push_bounded(Node::root(
                    pre.root_lb,
                    Some(pre.root.basis.without_factor()),
                )),
                LpStatus::UnboundedBelow => {
                    s.state.push_unbounded(Node::root(f64::NEG_INFINITY, None))
                }
                LpStatus::Infeasible => {}
            }
        }
    }
    let t_pre = t.elapsed();

    let t = Instant::now();
    let (status, cert) = s.run()?;
    let st = &s.state;
    let upper_bound = st.ub;
    let lower_bound = match status {
        SolveStatus::Unbounded => f64::NEG_INFINITY,
        _ => st.lb.min(st.ub),
    };
    let nodes = st.nodes;
    let outcome = match (status, cert) {
        (SolveStatus::Unbounded, Some((base, ray))) => Some(Outcome::Unbounded { base, ray }),
        (SolveStatus::Optimal, _) => Some(Outcome::Optimal {
            point: st
                .incumbent
                .clone()
                .expect("optimal status has an incumbent"),
            lower_bound,
            nodes,
        }),
        (SolveStatus::Infeasible, _) => Some(Outcome::Infeasible),
        _ => None,
    };
    let report = SolveReport {
        status,
        outcome,
        incumbent: st.incumbent.clone(),
        lower_bound,
        upper_bound,
        nodes,
        lp_solves: st.lp_solves,
        relaxation_value: relax.objective,
        root_lb,
        cuts,
        recovery_value,
        recovery_evaluations,
        timings: SearchTimings {
            preprocess: t_pre,
            search: t.elapsed(),
            total: start.elapsed(),
        },
        trace: std::mem::take(&mut s.trace),
    };
    info!(
        "{} ub {} lb {} nodes {} lps {}",
        report.status.label(),
        report.upper_bound,
        report.lower_bound,
        report.nodes,
        report.lp_solves
    );
    Ok(report)
}

impl Search<'_> {
    fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn lp(&mut self, model: &LpModel, warm: Option<&Basis>) -> Result<LpSolution, LpError> {
        self.state.lp_solves += 1;
        solve_lp_robust(model, warm)
    }

    /// A node or child with bound `z` cannot improve the incumbent by more
    /// than the target gap.
    fn prunable(&self, z: f64) -> bool {
        self.state.ub.is_finite() && z >= self.state.ub - self.params.gap * z.abs().max(1.0)
    }

    fn complementary(&self, sol: &LpSolution) -> bool {
        let inst = self.inst;
        (0..inst.m).all(|i| sol.x[inst.y_var(i)].min(sol.x[inst.w_var(i)]) <= self.params.comp_tol)
    }

    fn take(&mut self, sol: &LpSolution) {
        let p = LpccPoint::from_lp(self.inst, sol);
        if check_feasible(self.inst, &p, 1e-6_f64.max(self.params.comp_tol)) {
            if self.state.offer(p) {
                debug!(
                    "incumbent {:.9} at node count {}",
                    self.state.ub, self.state.nodes
                );
            }
        } else {
            debug!("complementary LP point failed the feasibility check");
        }
    }

    fn run(&mut self) -> Result<(SolveStatus, Option<Certificate>), LpError> {
        loop {
            let open = self.state.open_bound();
            self.state.lb = self.state.lb.max(open);
            if self.params.trace {
                self.trace.push((self.state.ub, self.state.lb));
            }
            if self.state.open_nodes() == 0 {
                break;
            }
            let (ub, lb) = (self.state.ub, self.state.lb);
            if ub.is_finite() && lb.is_finite() && relative_gap(ub, lb.min(ub)) < self.params.gap {
                break;
            }
            if self.expired() {
                return Ok((SolveStatus::TimeLimit, None));
            }
            if self
                .params
                .node_limit
                .is_some_and(|n| self.state.nodes >= n)
            {
                return Ok((SolveStatus::NodeLimit, None));
            }
            let node = select_node(&mut self.state).expect("open node");
            let cert = if node.lb == f64::NEG_INFINITY {
                self.process_unbounded(node)?
            } else {
                self.process_bounded(node)?;
                None
            };
            if let Some(c) = cert {
                return Ok((SolveStatus::Unbounded, Some(c)));
            }
        }
        let status = if self.state.incumbent.is_some() {
            SolveStatus::Optimal
        } else {
            SolveStatus::Infeasible
        };
        if status == SolveStatus::Infeasible {
            self.state.lb = f64::INFINITY;
        }
        Ok((status, None))
    }

    /// Both children of branching on `i`, warm-started from `parent`.
    fn children(
        &mut self,
        model: &LpModel,
        parent: &LpSolution,
        i: usize,
    ) -> Result<[LpSolution; 2], LpError> {
        let inst = self.inst;
        let sides = [Side::Y, Side::W];
        let sols = par::map(self.params.exec, &sides, |&side| {
            let mut m = model.clone();
            m.set_upper(side.var(inst, i), 0.0);
            solve_lp_robust(&m, Some(&parent.basis))
        });
        self.state.lp_solves += 2;
        let mut it = sols.into_iter();
        Ok([it.next().unwrap()?, it.next().unwrap()?])
    }

    fn record(&mut self, parent: &LpSolution, i: usize, kids: &[LpSolution; 2]) {
        let inst = self.inst;
        for (side, kid) in [Side::Y, Side::W].into_iter().zip(kids) {
            if kid.status != LpStatus::Optimal {
                continue;
            }
            let violation = parent.x[side.var(inst, i)];
            let sat = satisfaction(inst, &kid.x, self.params.comp_tol);
            self.state
                .stats
                .record(i, side, kid.objective - parent.objective, violation, sat);
        }
    }

    fn process_bounded(&mut self, mut node: Node) -> Result<(), LpError> {
        if self.prunable(node.lb) {
            return Ok(());
        }
        let inst = self.inst;
        let tol = self.params.comp_tol;
        let mut model = node.model(inst, &self.base);
        let mut sol = self.lp(&model, node.warm.as_ref())?;
        node.warm = None;
        self.state.nodes += 1;
        loop {
            match sol.status {
                LpStatus::Infeasible => return Ok(()),
                LpStatus::UnboundedBelow => {
                    node.lb = f64::NEG_INFINITY;
                    self.state.push_unbounded(node);
                    return Ok(());
                }
                LpStatus::Optimal => {}
            }
            if self.prunable(sol.objective) {
                return Ok(());
            }
            if self.complementary(&sol) {
                self.take(&sol);
                return Ok(());
            }
            let fixes = node_presolve(inst, &sol, &node, tol);
            if fixes.is_empty() {
                break;
            }
            for (i, side) in fixes {
                if !node.fix(i, side) {
                    return Ok(());
                }
            }
            model = node.model(inst, &self.base);
            sol = self.lp(&model, Some(&sol.basis))?;
        }
        node.lb = node.lb.max(sol.objective);
        let cands = violated(inst, &sol, &node, tol);
        if cands.is_empty() {
            return Ok(());
        }
        let (j, kids) = if self.params.weights.strong_at(node.depth) {
            match self.strong_branch(&model, &sol, &cands)? {
                Some(pick) => pick,
                None => return Ok(()),
            }
        } else {
            let scores = branch_scores(inst, &sol, &self.state.stats, &self.params.weights, &cands);
            let j = cands[argmax(&scores).expect("candidates")];
            let kids = self.children(&model, &sol, j)?;
            self.record(&sol, j, &kids);
            (j, kids)
        };
        let cert = self.fathom(&node, j, kids)?;
        debug_assert!(
            cert.is_none(),
            "bounded parent produced an unbounded certificate"
        );
        Ok(())
    }

    /// Solves both children of each candidate (largest violation first) and
    /// picks the best product score; stops early at the first candidate with
    /// a child reaching the median open bound. `None` when some candidate has
    /// two infeasible children, i.e. the node holds no complementary point.
    fn strong_branch(
        &mut self,
        model: &LpModel,
        sol: &LpSolution,
        cands: &[usize],
    ) -> Result<Option<(usize, [LpSolution; 2])>, LpError> {
        let inst = self.inst;
        let eps = self.params.weights.epsilon;
        let mut order: Vec<(f64, usize)> = cands
            .iter()
            .map(|&i| (sol.x[inst.y_var(i)] * sol.x[inst.w_var(i)], i))
            .collect();
        order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let threshold = self.state.median_open_bound();
        let mut best: Option<(f64, usize, [LpSolution; 2])> = None;
        for (_, i) in order {
            if best.is_some() && self.expired() {
                break;
            }
            let kids = self.children(model, sol, i)?;
            if kids.iter().all(|k| k.status == LpStatus::Infeasible) {
                return Ok(None);
            }
            self.record(sol, i, &kids);
            let gain = |k: &LpSolution| match k.status {
                LpStatus::Optimal => (k.objective - sol.objective).max(0.0),
                LpStatus::Infeasible => INFEASIBLE_GAIN,
                LpStatus::UnboundedBelow => 0.0,
            };
            let value = |k: &LpSolution| match k.status {
                LpStatus::Infeasible => f64::INFINITY,
                _ => k.objective,
            };
            let score = product_score(gain(&kids[0]), gain(&kids[1]), eps);
            let hit = threshold.is_finite() && kids.iter().any(|k| value(k) >= threshold);
            if hit {
                return Ok(Some((i, kids)));
            }
            if best.as_ref().is_none_or(|(b, _, _)| score > *b) {
                best = Some((score, i, kids));
            }
        }
        Ok(best.map(|(_, i, kids)| (i, kids)))
    }

    /// Applies the fathoming rules to the two children of branching on `j`.
    fn fathom(
        &mut self,
        node: &Node,
        j: usize,
        kids: [LpSolution; 2],
    ) -> Result<Option<Certificate>, LpError> {
        for (side, kid) in [Side::Y, Side::W].into_iter().zip(kids) {
            match kid.status {
                LpStatus::Infeasible => {}
                LpStatus::Optimal => {
                    if self.complementary(&kid) {
                        self.take(&kid);
                    } else if !self.prunable(kid.objective) {
                        let id = self.state.fresh_id();
                        let lb = kid.objective.max(node.lb);
                        let child = node.child(id, j, side, lb, Some(kid.basis.without_factor()));
                        self.state.push_bounded(child);
                    }
                }
                LpStatus::UnboundedBelow => {
                    let id = self.state.fresh_id();
                    let child = node.child(
                        id,
                        j,
                        side,
                        f64::NEG_INFINITY,
                        Some(kid.basis.without_factor()),
                    );
                    if let Some(c) = self.certify(&child, &kid)? {
                        return Ok(Some(c));
                    }
                    self.state.push_unbounded(child);
                }
            }
        }
        Ok(None)
    }

    fn process_unbounded(&mut self, mut node: Node) -> Result<Option<Certificate>, LpError> {
        let inst = self.inst;
        let model = node.model(inst, &self.base);
        let sol = self.lp(&model, node.warm.as_ref())?;
        node.warm = None;
        self.state.nodes += 1;
        match sol.status {
            LpStatus::Infeasible => return Ok(None),
            LpStatus::Optimal => {
                if self.complementary(&sol) {
                    self.take(&sol);
                } else if !self.prunable(sol.objective) {
                    node.lb = sol.objective;
                    node.warm = Some(sol.basis.without_factor());
                    self.state.push_bounded(node);
                }
                return Ok(None);
            }
            LpStatus::UnboundedBelow => {}
        }
        if let Some(c) = self.certify(&node, &sol)? {
            return Ok(Some(c));
        }
        let ray = sol.ray.as_ref().expect("unbounded solution carries a ray");
        let unfixed: Vec<usize> = (0..inst.m).filter(|&i| !node.is_fixed(i)).collect();
        let on_ray: Vec<(usize, f64)> = unfixed
            .iter()
            .map(|&i| (i, ray[inst.y_var(i)], ray[inst.w_var(i)]))
            .filter(|&(_, ry, rw)| ry > RAY_TOL && rw > RAY_TOL)
            .map(|(i, ry, rw)| (i, (ry * rw).sqrt()))
            .collect();
        // A complementary ray whose piece is empty: branch on the base point
        // plus ray instead.
        let scored = if on_ray.is_empty() {
            unfixed
                .iter()
                .map(|&i| {
                    let y = sol.x[inst.y_var(i)].max(0.0) + ray[inst.y_var(i)].max(0.0);
                    let w = sol.x[inst.w_var(i)].max(0.0) + ray[inst.w_var(i)].max(0.0);
                    (i, y, w)
                })
                .filter(|&(_, y, w)| y > self.params.comp_tol && w > self.params.comp_tol)
                .map(|(i, y, w)| (i, (y * w).sqrt()))
                .collect()
        } else {
            on_ray
        };
        let scores: Vec<f64> = scored.iter().map(|s| s.1).collect();
        let Some(p) = argmax(&scores) else {
            debug!("unbounded node {} has nothing to branch on", node.id);
            return Ok(None);
        };
        let j = scored[p].0;
        let kids = self.children(&model, &sol, j)?;
        self.fathom(&node, j, kids)
    }

    /// Certificate of unboundedness: the ray is complementary and the piece it
    /// selects (ties settled by the node's fixings, then the base point) has a
    /// feasible point from which the ray stays feasible.
    fn certify(&mut self, node: &Node, sol: &LpSolution) -> Result<Option<Certificate>, LpError> {
        let inst = self.inst;
        let Some(ray) = sol.ray.as_ref() else {
            return Ok(None);
        };
        let mut z = Assignment::zeros(inst.m);
        for i in 0..inst.m {
            let (ry, rw) = (ray[inst.y_var(i)], ray[inst.w_var(i)]);
            if ry > RAY_TOL && rw > RAY_TOL {
                return Ok(None);
            }
            let (by, bw) = (sol.x[inst.y_var(i)], sol.x[inst.w_var(i)]);
            z.0[i] = if ry > RAY_TOL {
                true
            } else if rw > RAY_TOL {
                false
            } else if node.fixed_y.binary_search(&i).is_ok() {
                false
            } else if node.fixed_w.binary_search(&i).is_ok() {
                true
            } else {
                by > bw
            };
        }
        let mut piece = build_relaxation(inst);
        piece.set_objective(vec![0.0; piece.ncols()]);
        apply_assignment(&mut piece, inst, &z);
        let s = self.lp(&piece, None)?;
        if s.status != LpStatus::Optimal {
            return Ok(None);
        }
        let base = LpccPoint::from_lp(inst, &s);
        Ok(verify_ray(inst, &base, ray).then(|| (base, ray.clone())))
    }
}

/// The strong-branching pick at the root of the plain relaxation.
#[cfg(test)]
pub(super) fn root_strong_pick(
    inst: &LpccInstance,
    params: &SolveParams,
) -> Result<Option<usize>, LpError> {
    let base = build_relaxation(inst);
    let sol = solve_lp_robust(&base, None)?;
    let cands = violated(
        inst,
        &sol,
        &Node::root(sol.objective, None),
        params.comp_tol,
    );
    let mut s = Search {
        inst,
        params,
        deadline: None,
        base: base.clone(),
        state: SearchState::new(inst.m),
        trace: Vec::new(),
    };
    Ok(s.strong_branch(&base, &sol, &cands)?.map(|(i, _)| i))
}
