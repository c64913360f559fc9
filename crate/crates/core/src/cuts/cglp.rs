//! Cut-generating LP for the two-term disjunction of one complementarity.
//!
//! The LP point's feasible region is `P = {v : Gv ≥ h, Ev = e}` (rows and
//! column bounds of the solved model). A cut `αᵀv ≥ β` is valid for
//! `P ∩ {y_i ≤ 0}` and `P ∩ {w_i ≤ 0}` when, for each side `s`,
//! `α = Gᵀu_s + Eᵀμ_s + u_s0·d_s` and `β ≤ hᵀu_s + eᵀμ_s` with `u_s ≥ 0`
//! (`d_s` is the side's branch row `−y_i ≥ 0` or `−w_i ≥ 0`). Maximizing
//! `β − αᵀv*` subject to `Σ u + Σ |μ| ≤ 1` gives the deepest such cut.

use crate::lp::{solve_lp_robust, LpModel, LpSolution, LpStatus, RowSense};
use crate::model::LpccInstance;

use super::{Cut, CutError, CutKind, MIN_CUT_VIOLATION, VIOLATION_TOL};

/// `gᵀv ≥ h`.
struct Piece {
    g: Vec<(usize, f64)>,
    h: f64,
}

/// What each side's multipliers prove: `alpha[s]ᵀv ≥ beta[s]` on side `s`.
#[derive(Debug, Clone)]
pub struct CglpCertificate {
    pub alpha: [Vec<f64>; 2],
    pub beta: [f64; 2],
    /// `min(beta) − alpha[0]ᵀv*`.
    pub violation: f64,
}

fn region(sol: &LpSolution) -> Vec<Piece> {
    let nv = sol.ncols();
    let (lo, up) = sol.var_bounds();
    let rows = sol.constraint_rows();
    let mut out = Vec::new();
    // Equalities enter as two inequalities so that every multiplier sits in
    // the normalization; free multipliers leave near-zero-cost rays.
    let mut push = |g: &[(usize, f64)], l: f64, u: f64| {
        if l.is_finite() {
            out.push(Piece {
                g: g.to_vec(),
                h: l,
            });
        }
        if u.is_finite() {
            out.push(Piece {
                g: g.iter().map(|&(j, a)| (j, -a)).collect(),
                h: -u,
            });
        }
    };
    for (r, row) in rows.iter().enumerate() {
        push(row, lo[nv + r], up[nv + r]);
    }
    for j in 0..nv {
        push(&[(j, 1.0)], lo[j], up[j]);
    }
    out
}

/// Solves the cut-generating LP of pair `i` at `sol`; `None` when the deepest
/// cut is violated by at most [`MIN_CUT_VIOLATION`].
pub fn solve_cglp(
    inst: &LpccInstance,
    sol: &LpSolution,
    i: usize,
) -> Result<Option<CglpCertificate>, CutError> {
    let (yv, wv) = (inst.y_var(i), inst.w_var(i));
    if sol.status != LpStatus::Optimal || sol.x[yv] <= VIOLATION_TOL || sol.x[wv] <= VIOLATION_TOL {
        return Err(CutError::NotApplicable(i));
    }
    let nv = sol.ncols();
    let base = region(sol);
    let branch = [
        Piece {
            g: vec![(yv, -1.0)],
            h: 0.0,
        },
        Piece {
            g: vec![(wv, -1.0)],
            h: 0.0,
        },
    ];
    let per_side = base.len() + 1;
    // columns: β, then each side's multipliers (region pieces, branch row)
    let ncols = 1 + 2 * per_side;
    let col = |s: usize, t: usize| 1 + s * per_side + t;
    let piece = |s: usize, t: usize| if t < base.len() { &base[t] } else { &branch[s] };

    let mut model = LpModel::nonnegative(ncols);
    model.set_bounds(0, f64::NEG_INFINITY, f64::INFINITY);
    let mut obj = vec![0.0; ncols];
    obj[0] = -1.0;
    let mut alpha_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nv];
    let mut beta_rows: [Vec<(usize, f64)>; 2] = [vec![(0, 1.0)], vec![(0, 1.0)]];
    let mut norm_row = Vec::new();
    for s in 0..2 {
        let sign = if s == 0 { 1.0 } else { -1.0 };
        for t in 0..per_side {
            let p = piece(s, t);
            let c = col(s, t);
            norm_row.push((c, 1.0));
            for &(j, a) in &p.g {
                alpha_rows[j].push((c, sign * a));
            }
            if p.h != 0.0 {
                beta_rows[s].push((c, -p.h));
            }
            if s == 0 {
                obj[c] = p.g.iter().map(|&(j, a)| a * sol.x[j]).sum();
            }
        }
    }
    model.set_objective(obj);
    for row in &alpha_rows {
        model.add_row(row, RowSense::Eq, 0.0);
    }
    for row in &beta_rows {
        model.add_row(row, RowSense::Le, 0.0);
    }
    model.add_row(&norm_row, RowSense::Le, 1.0);

    let cg = solve_lp_robust(&model, None)?;
    if cg.status != LpStatus::Optimal || -cg.objective <= MIN_CUT_VIOLATION {
        return Ok(None);
    }
    let mut alpha = [vec![0.0; nv], vec![0.0; nv]];
    let mut beta = [0.0; 2];
    for s in 0..2 {
        for t in 0..per_side {
            let u = cg.x[col(s, t)];
            if u == 0.0 {
                continue;
            }
            let p = piece(s, t);
            for &(j, a) in &p.g {
                alpha[s][j] += u * a;
            }
            beta[s] += u * p.h;
        }
    }
    let lhs: f64 = alpha[0].iter().zip(&sol.x).map(|(a, v)| a * v).sum();
    let violation = beta[0].min(beta[1]) - lhs;
    if violation <= MIN_CUT_VIOLATION {
        return Ok(None);
    }
    Ok(Some(CglpCertificate {
        alpha,
        beta,
        violation,
    }))
}

/// The deepest disjunctive cut for pair `i`, if it is violated at `sol`.
pub fn gen_disjunctive_cut(
    inst: &LpccInstance,
    sol: &LpSolution,
    i: usize,
) -> Result<Option<Cut>, CutError> {
    Ok(solve_cglp(inst, sol, i)?.map(|c| {
        let rhs = c.beta[0].min(c.beta[1]);
        Cut::from_vars(inst, &c.alpha[0], rhs, CutKind::Disjunctive, i)
    }))
}
