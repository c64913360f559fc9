//! Ground truth by brute force: solve the piece LP of every assignment.

use crate::lp::{solve_lp_robust, LpError, LpStatus};
use crate::model::{build_piece_lp, check_feasible, Assignment, LpccInstance, LpccPoint, Outcome};
use crate::par::{self, Exec};

pub const DEFAULT_MAX_M: usize = 20;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("{m} complementarities exceed the enumeration guard of {max}")]
    TooLarge { m: usize, max: usize },
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PieceRecord {
    pub z: Assignment,
    pub status: LpStatus,
    /// `+∞` if infeasible, `−∞` if unbounded.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub outcome: Outcome,
    pub pieces: Vec<PieceRecord>,
}

struct Solved {
    record: PieceRecord,
    point: Option<LpccPoint>,
    ray: Option<Vec<f64>>,
}

/// Solves all `2^m` pieces in lexicographic order of `z`.
///
/// The reported optimum is the first piece attaining the minimum value; an
/// unbounded outcome carries the first unbounded piece's base and ray.
pub fn enumerate_pieces(
    inst: &LpccInstance,
    max_m: usize,
    exec: Exec,
) -> Result<OracleResult, OracleError> {
    if inst.m > max_m {
        return Err(OracleError::TooLarge {
            m: inst.m,
            max: max_m,
        });
    }
    let count = 1usize << inst.m;
    let solved = par::map_range(exec, count, |idx| -> Result<Solved, LpError> {
        let z = Assignment::from_index(inst.m, idx as u64);
        let sol = solve_lp_robust(&build_piece_lp(inst, &z), None)?;
        let point = (sol.status != LpStatus::Infeasible).then(|| LpccPoint::from_lp(inst, &sol));
        Ok(Solved {
            record: PieceRecord {
                z,
                status: sol.status,
                value: sol.objective,
            },
            point,
            ray: sol.ray,
        })
    });
    let mut pieces = Vec::with_capacity(count);
    let mut best: Option<(f64, LpccPoint)> = None;
    let mut unbounded: Option<(LpccPoint, Vec<f64>)> = None;
    for s in solved {
        let s = s?;
        match s.record.status {
            LpStatus::UnboundedBelow if unbounded.is_none() => {
                unbounded = Some((
                    s.point.clone().expect("unbounded piece has a point"),
                    s.ray.clone().unwrap(),
                ));
            }
            LpStatus::Optimal => {
                if best.as_ref().is_none_or(|(v, _)| s.record.value < *v) {
                    best = Some((s.record.value, s.point.clone().unwrap()));
                }
            }
            _ => {}
        }
        pieces.push(s.record);
    }
    let outcome = if let Some((base, ray)) = unbounded {
        Outcome::Unbounded { base, ray }
    } else if let Some((value, point)) = best {
        Outcome::Optimal {
            point,
            lower_bound: value,
            nodes: count,
        }
    } else {
        Outcome::Infeasible
    };
    Ok(OracleResult { outcome, pieces })
}

/// Checks that `base + t·ray` stays feasible and complementary for every
/// `t ≥ 0` while the objective strictly decreases. `ray` is over `[x | y | w]`.
pub fn verify_ray(inst: &LpccInstance, base: &LpccPoint, ray: &[f64]) -> bool {
    const TOL: f64 = 1e-7;
    let (n, m) = (inst.n, inst.m);
    if ray.len() != n + 2 * m || !ray.iter().all(|v| v.is_finite()) {
        return false;
    }
    if !check_feasible(inst, base, 1e-6) {
        return false;
    }
    let scale = ray.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return false;
    }
    let tol = TOL * scale;
    let (rx, rest) = ray.split_at(n);
    let (ry, rw) = rest.split_at(m);
    if ray.iter().any(|&v| v < -tol) {
        return false;
    }
    let ax = inst.a.mul_vec(rx);
    let by = inst.b_mat.mul_vec(ry);
    if (0..inst.k).any(|r| ax[r] + by[r] < -tol) {
        return false;
    }
    let nx = inst.n_mat.mul_vec(rx);
    let my = inst.m_mat.mul_vec(ry);
    if (0..m).any(|i| (rw[i] - nx[i] - my[i]).abs() > tol) {
        return false;
    }
    for i in 0..m {
        let y_side = base.y[i] <= 1e-6 && ry[i] <= tol;
        let w_side = base.w[i] <= 1e-6 && rw[i] <= tol;
        if !y_side && !w_side {
            return false;
        }
    }
    let slope = inst.objective_of(rx, ry);
    slope < -tol
}
