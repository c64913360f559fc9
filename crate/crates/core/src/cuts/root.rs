//! The root preprocessor: feasibility recovery, disjunctive and simple cut
//! rounds with purging, then bound refinement with bound cuts.

use std::time::{Duration, Instant};

use log::debug;

use crate::lp::{solve_lp_robust, Basis, LpError, LpModel, LpSolution, LpStatus};
use crate::model::{build_relaxation, BoundBox, LpccInstance, LpccPoint};
use crate::par::{self, Exec};
use crate::preprocess::{local_search_recovery, refined_recovery, RecoveryParams};

use super::{
    gen_bound_cut, gen_disjunctive_cut, gen_simple_cut, purge_slack_basic,
    select_disjunction_candidates, BoundLp, BoundTarget, Cut, CutError, CutPool, MIN_CUT_VIOLATION,
};

#[derive(Debug, Clone)]
pub struct PreprocessParams {
    /// `None` skips feasibility recovery.
    pub recovery: Option<RecoveryParams>,
    /// Follow a successful local search with the objective-bisecting refinement.
    pub refine: bool,
    /// Master switch for all cut and bound work.
    pub cuts: bool,
    /// Disjunctive rounds are `⌊factor·m/100⌋`.
    pub disjunctive_round_factor: f64,
    /// Simple rounds are `⌊factor·m/10⌋`.
    pub simple_round_factor: f64,
    pub disjunctive_per_round: usize,
    pub bound_passes: usize,
    pub bound_pairs: usize,
    pub exec: Exec,
    /// Stop starting new rounds or passes once this passes.
    pub deadline: Option<Instant>,
}

impl Default for PreprocessParams {
    fn default() -> Self {
        Self {
            recovery: Some(RecoveryParams::default()),
            refine: true,
            cuts: true,
            disjunctive_round_factor: 1.0,
            simple_round_factor: 1.0,
            disjunctive_per_round: 3,
            bound_passes: 4,
            bound_pairs: 5,
            exec: Exec::default(),
            deadline: None,
        }
    }
}

impl PreprocessParams {
    pub fn disjunctive_rounds(&self, m: usize) -> usize {
        (self.disjunctive_round_factor * m as f64 / 100.0)
            .floor()
            .max(0.0) as usize
    }

    pub fn simple_rounds(&self, m: usize) -> usize {
        (self.simple_round_factor * m as f64 / 10.0)
            .floor()
            .max(0.0) as usize
    }

    fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// Cuts added to the root LP, by kind (purged ones included).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CutCounts {
    pub simple: usize,
    pub disjunctive: usize,
    pub bound: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PreprocessTimings {
    pub recovery: Duration,
    pub cuts: Duration,
    pub bounds: Duration,
}

#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub incumbent: Option<LpccPoint>,
    pub recovery_evaluations: usize,
    /// Relaxation with the bound box as column caps and the pool's rows.
    pub model: LpModel,
    pub pool: CutPool,
    /// Solution of `model`.
    pub root: LpSolution,
    pub relaxation_value: f64,
    /// `root`'s objective (`+∞` when the caps left no point).
    pub root_lb: f64,
    pub bounds: BoundBox,
    pub counts: CutCounts,
    pub cut_history: Vec<Cut>,
    pub timings: PreprocessTimings,
}

struct RootLp {
    model: LpModel,
    pool: CutPool,
    sol: LpSolution,
    counts: CutCounts,
    history: Vec<Cut>,
}

impl RootLp {
    fn optimal(&self) -> bool {
        self.sol.status == LpStatus::Optimal
    }

    fn resolve(&mut self, warm: Basis) -> Result<(), LpError> {
        let warm = if warm.nrows() == self.model.nrows() {
            warm
        } else {
            warm.extend_rows(self.model.nrows())
        };
        self.sol = solve_lp_robust(&self.model, Some(&warm))?;
        Ok(())
    }

    /// Adds the cuts violated at the current point; returns how many went in.
    fn add_all(&mut self, cuts: Vec<Cut>) -> usize {
        let mut added = 0;
        for cut in cuts {
            if cut.violation(&self.sol.x) <= MIN_CUT_VIOLATION {
                continue;
            }
            let kind = cut.kind;
            if self.pool.add(&mut self.model, cut.clone()) {
                added += 1;
                self.history.push(cut);
                match kind {
                    super::CutKind::Simple => self.counts.simple += 1,
                    super::CutKind::Disjunctive => self.counts.disjunctive += 1,
                    super::CutKind::Bound => self.counts.bound += 1,
                }
            }
        }
        added
    }

    /// Re-solves after additions, then purges slack-basic cuts.
    fn close_round(&mut self) -> Result<(), LpError> {
        let before = self.sol.objective;
        self.resolve(self.sol.basis.clone())?;
        if !self.optimal() {
            return Ok(());
        }
        let basis = purge_slack_basic(&mut self.pool, &mut self.model, &self.sol);
        self.resolve(basis)?;
        debug!(
            "cut round: lp {before:.6} -> {:.6}, pool {}",
            self.sol.objective,
            self.pool.len()
        );
        Ok(())
    }
}

fn keep_applicable(r: Result<Option<Cut>, CutError>) -> Result<Option<Cut>, LpError> {
    match r {
        Ok(c) => Ok(c),
        Err(CutError::NotApplicable(_)) => Ok(None),
        Err(CutError::Lp(e)) => Err(e),
    }
}

/// Runs recovery, cut rounds and bound refinement at the root. `relax` must be
/// the solution of the plain relaxation; when it is not optimal the result
/// carries it through unchanged.
pub fn run_preprocessor(
    inst: &LpccInstance,
    relax: &LpSolution,
    params: &PreprocessParams,
) -> Result<Preprocessed, LpError> {
    let mut timings = PreprocessTimings::default();
    let mut incumbent: Option<LpccPoint> = None;
    let mut evaluations = 0;
    let relaxation_value = relax.objective;
    let optimal = relax.status == LpStatus::Optimal;

    let t = Instant::now();
    if let (true, Some(rp), false) = (optimal, &params.recovery, params.expired()) {
        let rp = &RecoveryParams {
            deadline: rp.deadline.or(params.deadline),
            ..rp.clone()
        };
        let local = local_search_recovery(inst, relax, rp)?;
        evaluations += local.gap_evaluations;
        if let Some(p) = local.point() {
            incumbent = Some(p.clone());
            if params.refine {
                let refined = refined_recovery(inst, p.objective, relaxation_value, rp)?;
                evaluations += refined.gap_evaluations;
                if let Some(q) = refined.point() {
                    if q.objective < p.objective {
                        incumbent = Some(q.clone());
                    }
                }
            }
        }
        debug!(
            "recovery: {:?} after {evaluations} gap LPs",
            incumbent.as_ref().map(|p| p.objective)
        );
    }
    timings.recovery = t.elapsed();

    let mut bounds = BoundBox::empty(inst.m);
    bounds.ub_obj = incumbent.as_ref().map(|p| p.objective);
    let mut root = RootLp {
        model: build_relaxation(inst),
        pool: CutPool::new(),
        sol: relax.clone(),
        counts: CutCounts::default(),
        history: Vec::new(),
    };

    if optimal && params.cuts {
        let t = Instant::now();
        for _ in 0..params.disjunctive_rounds(inst.m) {
            if params.expired() {
                break;
            }
            let cands =
                select_disjunction_candidates(inst, &root.sol, params.disjunctive_per_round);
            if cands.is_empty() {
                break;
            }
            let sol = &root.sol;
            let cuts = par::map(params.exec, &cands, |&i| {
                keep_applicable(gen_disjunctive_cut(inst, sol, i))
            });
            let cuts: Vec<Cut> = cuts
                .into_iter()
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .flatten()
                .collect();
            if root.add_all(cuts) == 0 {
                break;
            }
            root.close_round()?;
            if !root.optimal() {
                break;
            }
        }
        for _ in 0..params.simple_rounds(inst.m) {
            if !root.optimal() || params.expired() {
                break;
            }
            let cands = select_disjunction_candidates(inst, &root.sol, inst.m);
            let sol = &root.sol;
            let cuts = par::map(params.exec, &cands, |&i| {
                keep_applicable(gen_simple_cut(inst, sol, i).map(Some))
            });
            let cuts: Vec<Cut> = cuts
                .into_iter()
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .flatten()
                .collect();
            if root.add_all(cuts) == 0 {
                break;
            }
            root.close_round()?;
        }
        timings.cuts = t.elapsed();

        let t = Instant::now();
        for _ in 0..params.bound_passes {
            if !root.optimal() || params.expired() {
                break;
            }
            let pairs = select_disjunction_candidates(inst, &root.sol, params.bound_pairs);
            if pairs.is_empty() {
                break;
            }
            let mut blp = BoundLp::new(inst, &bounds);
            for &i in &pairs {
                let uy = blp.maximize(BoundTarget::Y(i))?;
                BoundBox::tighten(&mut bounds.u_y[i], uy);
                blp.apply(&bounds, i);
                let uw = blp.maximize(BoundTarget::W(i))?;
                BoundBox::tighten(&mut bounds.u_w[i], uw);
                blp.apply(&bounds, i);
            }
            let mut cuts = Vec::new();
            for &i in &pairs {
                if let Some(u) = bounds.u_y[i] {
                    root.model.set_upper(inst.y_var(i), u);
                }
                if let Some(u) = bounds.u_w[i] {
                    root.model.set_upper(inst.w_var(i), u);
                }
                if let (Some(uy), Some(uw)) = (bounds.u_y[i], bounds.u_w[i]) {
                    if uy > 0.0 && uw > 0.0 {
                        cuts.push(gen_bound_cut(inst, i, uy, uw));
                    }
                }
            }
            root.add_all(cuts);
            root.resolve(root.sol.basis.clone())?;
            debug!("bound pass on {pairs:?}: lp {:.6}", root.sol.objective);
        }
        timings.bounds = t.elapsed();
    }

    let root_lb = match root.sol.status {
        LpStatus::Optimal => root.sol.objective,
        LpStatus::Infeasible => f64::INFINITY,
        LpStatus::UnboundedBelow => f64::NEG_INFINITY,
    };
    Ok(Preprocessed {
        incumbent,
        recovery_evaluations: evaluations,
        model: root.model,
        pool: root.pool,
        root: root.sol,
        relaxation_value,
        root_lb,
        bounds,
        counts: root.counts,
        cut_history: root.history,
        timings,
    })
}
