//! Feasibility recovery: round the relaxation point to an assignment, then
//! walk adjacent assignments downhill in feasibility gap until a piece turns
//! out feasible. The refined variant bisects an objective window around the
//! search to push the recovered value down.

use std::collections::HashMap;
use std::time::Instant;

use crate::lp::{solve_lp_robust, Basis, LpError, LpModel, LpSolution, LpStatus};
use crate::model::{
    add_objective_window, build_piece_lp, build_relaxation, check_feasible, set_gap_objective,
    Assignment, LpccInstance, LpccPoint,
};
use crate::par::{self, Exec};

/// Gap values at or below this count as zero.
pub const GAP_ZERO: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct RecoveryParams {
    pub depth: usize,
    /// `None` means `m`.
    pub breadth: Option<usize>,
    /// `None` means `1e-6 · max(1, |lb|)`.
    pub search_gap_min: Option<f64>,
    pub exec: Exec,
    /// Give up (reporting what was found so far) once this passes.
    pub deadline: Option<Instant>,
}

impl RecoveryParams {
    fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

impl Default for RecoveryParams {
    fn default() -> Self {
        Self {
            depth: 5,
            breadth: None,
            search_gap_min: None,
            exec: Exec::default(),
            deadline: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RecoveryStatus {
    Recovered { point: LpccPoint, z: Assignment },
    Failed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub status: RecoveryStatus,
    pub gap_evaluations: usize,
}

impl RecoveryResult {
    pub fn point(&self) -> Option<&LpccPoint> {
        match &self.status {
            RecoveryStatus::Recovered { point, .. } => Some(point),
            RecoveryStatus::Failed => None,
        }
    }
}

/// `z_i = 0` iff `y*_i < w*_i`.
pub fn round_assignment(inst: &LpccInstance, sol: &LpSolution) -> Assignment {
    let p = LpccPoint::from_lp(inst, sol);
    round_point(&p.y, &p.w)
}

pub fn round_point(y: &[f64], w: &[f64]) -> Assignment {
    Assignment(y.iter().zip(w).map(|(y, w)| y >= w).collect())
}

/// Feasibility gap of `z`, `+∞` when the (windowed) relaxation is empty.
pub fn feasibility_gap(
    inst: &LpccInstance,
    z: &Assignment,
    window: Option<(f64, f64)>,
) -> Result<(f64, LpSolution), LpError> {
    let mut model = gap_base(inst, window);
    set_gap_objective(&mut model, inst, z);
    let sol = solve_lp_robust(&model, None)?;
    Ok((gap_value(&sol), sol))
}

fn gap_base(inst: &LpccInstance, window: Option<(f64, f64)>) -> LpModel {
    let mut model = build_relaxation(inst);
    if let Some((lb, ub)) = window {
        add_objective_window(&mut model, inst, lb, ub);
    }
    model
}

fn gap_value(sol: &LpSolution) -> f64 {
    match sol.status {
        LpStatus::Optimal => sol.objective.max(0.0),
        // the gap objective is bounded below by zero, so only emptiness remains
        _ => f64::INFINITY,
    }
}

/// Memoized gap evaluations over one fixed feasible region. All LPs share the
/// constraint matrix, so each starts from the current basis and its factor.
struct GapOracle<'a> {
    inst: &'a LpccInstance,
    base: LpModel,
    cache: HashMap<Assignment, f64>,
    warm: Option<Basis>,
    evaluations: usize,
    exec: Exec,
}

impl<'a> GapOracle<'a> {
    fn new(inst: &'a LpccInstance, window: Option<(f64, f64)>, exec: Exec) -> Self {
        let base = gap_base(inst, window);
        // build the shared column copy once; every candidate clones it
        base.csc();
        Self {
            inst,
            base,
            cache: HashMap::new(),
            warm: None,
            evaluations: 0,
            exec,
        }
    }

    fn solve(&self, z: &Assignment) -> Result<LpSolution, LpError> {
        let mut model = self.base.clone();
        set_gap_objective(&mut model, self.inst, z);
        solve_lp_robust(&model, self.warm.as_ref())
    }

    /// Gap of `z`, adopting its basis as the new warm start.
    fn eval_and_move(&mut self, z: &Assignment) -> Result<f64, LpError> {
        let sol = self.solve(z)?;
        self.evaluations += 1;
        let v = gap_value(&sol);
        if sol.status == LpStatus::Optimal {
            self.warm = Some(sol.basis);
        }
        self.cache.insert(z.clone(), v);
        Ok(v)
    }

    /// Gaps of all `zs`, each warm-started from the same basis.
    fn eval_many(&mut self, zs: &[Assignment]) -> Result<Vec<(f64, Option<Basis>)>, LpError> {
        let todo: Vec<&Assignment> = zs.iter().filter(|z| !self.cache.contains_key(*z)).collect();
        if !todo.is_empty() {
            self.warm = self.warm.as_ref().map(|b| b.refreshed(&self.base));
        }
        let this = &*self;
        let solved = par::map(self.exec, &todo, |z| {
            this.solve(z).map(|s| {
                let v = gap_value(&s);
                (v, (s.status == LpStatus::Optimal).then_some(s.basis))
            })
        });
        let mut fresh: HashMap<&Assignment, (f64, Option<Basis>)> = HashMap::new();
        for (z, r) in todo.iter().zip(solved) {
            fresh.insert(z, r?);
        }
        self.evaluations += fresh.len();
        let out = zs
            .iter()
            .map(|z| match fresh.get(z) {
                Some((v, b)) => (*v, b.clone()),
                None => (self.cache[z], None),
            })
            .collect();
        for (z, (v, _)) in fresh {
            self.cache.insert(z.clone(), v);
        }
        Ok(out)
    }
}

/// Solves the piece LP of a zero-gap assignment and returns its optimum.
fn solve_piece(inst: &LpccInstance, z: &Assignment) -> Result<Option<LpccPoint>, LpError> {
    let sol = solve_lp_robust(&build_piece_lp(inst, z), None)?;
    if sol.status != LpStatus::Optimal {
        return Ok(None);
    }
    let point = LpccPoint::from_lp(inst, &sol);
    Ok(check_feasible(inst, &point, 1e-6).then_some(point))
}

fn local_search(
    inst: &LpccInstance,
    start: &LpSolution,
    window: Option<(f64, f64)>,
    params: &RecoveryParams,
) -> Result<RecoveryResult, LpError> {
    let mut oracle = GapOracle::new(inst, window, params.exec);
    let done = |oracle: &GapOracle, status| RecoveryResult {
        status,
        gap_evaluations: oracle.evaluations,
    };
    let z0 = round_assignment(inst, start);
    let g0 = oracle.eval_and_move(&z0)?;
    if g0 <= GAP_ZERO {
        if let Some(point) = solve_piece(inst, &z0)? {
            return Ok(done(&oracle, RecoveryStatus::Recovered { point, z: z0 }));
        }
    }
    let root_warm = oracle.warm.clone();
    let adjacent: Vec<Assignment> = z0.adjacent().collect();
    let gaps = oracle.eval_many(&adjacent)?;
    let mut queue: Vec<(f64, usize, Option<Basis>)> = gaps
        .into_iter()
        .enumerate()
        .map(|(i, (g, b))| (g, i, b))
        .collect();
    queue.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let breadth = params.breadth.unwrap_or(inst.m).max(1);
    for (g_start, idx, basis) in queue.into_iter().take(breadth) {
        if !g_start.is_finite() || params.expired() {
            break;
        }
        let mut z = adjacent[idx].clone();
        let mut g = g_start;
        oracle.warm = basis.or_else(|| root_warm.clone());
        let mut steps = 0;
        while g > GAP_ZERO && steps < params.depth {
            let nbrs: Vec<Assignment> = z.adjacent().collect();
            let gaps = oracle.eval_many(&nbrs)?;
            let mut pick: Option<(f64, usize)> = None;
            for (i, (gi, _)) in gaps.iter().enumerate() {
                if *gi < g && pick.is_none_or(|(best, _)| *gi < best) {
                    pick = Some((*gi, i));
                }
            }
            let Some((gi, i)) = pick else { break };
            if let Some(b) = gaps[i].1.clone() {
                oracle.warm = Some(b);
            }
            z = nbrs[i].clone();
            g = gi;
            steps += 1;
        }
        if g <= GAP_ZERO {
            if let Some(point) = solve_piece(inst, &z)? {
                return Ok(done(&oracle, RecoveryStatus::Recovered { point, z }));
            }
        }
    }
    Ok(done(&oracle, RecoveryStatus::Failed))
}

/// Local search from the rounded relaxation point.
pub fn local_search_recovery(
    inst: &LpccInstance,
    relax_sol: &LpSolution,
    params: &RecoveryParams,
) -> Result<RecoveryResult, LpError> {
    local_search(inst, relax_sol, None, params)
}

/// Bisects `[lb, ub]` on the objective: each round restricts the relaxation to
/// the window, runs the local search there, and on success moves the upper
/// end to the midpoint between `lb` and the (possibly lower) new value; on
/// failure it raises the lower end to the midpoint. Returns the best point
/// found, or `Failed` if nothing beat `ub_initial`.
pub fn refined_recovery(
    inst: &LpccInstance,
    ub_initial: f64,
    lb_initial: f64,
    params: &RecoveryParams,
) -> Result<RecoveryResult, LpError> {
    let gap_min = params
        .search_gap_min
        .unwrap_or(1e-6 * lb_initial.abs().max(1.0));
    let (mut lb, mut ub) = (lb_initial, ub_initial);
    let mut best: Option<(LpccPoint, Assignment)> = None;
    let mut evaluations = 0;
    let relax = build_relaxation(inst);
    let mut warm: Option<Basis> = None;
    while ub - lb > gap_min && !params.expired() {
        let mut model = relax.clone();
        add_objective_window(&mut model, inst, lb, ub);
        let sol = solve_lp_robust(&model, warm.as_ref())?;
        let found = if sol.status == LpStatus::Optimal {
            warm = Some(sol.basis.clone());
            let r = local_search(inst, &sol, Some((lb, ub)), params)?;
            evaluations += r.gap_evaluations;
            match r.status {
                RecoveryStatus::Recovered { point, z } => Some((point, z)),
                RecoveryStatus::Failed => None,
            }
        } else {
            None
        };
        match found {
            Some((point, z)) => {
                ub = ub.min(point.objective);
                ub = 0.5 * (lb + ub);
                if best
                    .as_ref()
                    .is_none_or(|(p, _)| point.objective < p.objective)
                {
                    best = Some((point, z));
                }
            }
            None => lb = 0.5 * (lb + ub),
        }
    }
    let status = match best {
        Some((point, z)) if point.objective < ub_initial => RecoveryStatus::Recovered { point, z },
        _ => RecoveryStatus::Failed,
    };
    Ok(RecoveryResult {
        status,
        gap_evaluations: evaluations,
    })
}

#[cfg(test)]
mod tests;
