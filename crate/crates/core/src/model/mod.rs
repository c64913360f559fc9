//! LPCC instances and the linear programs derived from them.
//!
//! The instance is
//!
//! ```text
//! min  cᵀx + dᵀy
//! s.t. Ax + By ≥ b,  x ≥ 0,
//!      0 ≤ y ⊥ w := q + Nx + My ≥ 0.
//! ```
//!
//! Every LP built here uses the column layout `[x (n) | y (m) | w (m)]`, with
//! the `k` linking rows first and the `m` rows `w − Nx − My = q` after them.

mod bigm;
mod io;

pub use bigm::{export_bigm_mip, write_bigm_mip};
pub use io::{format_instance, parse_instance, read_instance, write_instance};

use crate::lp::{LpError, LpModel, LpSolution, RowSense, SparseMatrix};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("complementarity {0} lacks a finite upper bound on y or w")]
    MissingBounds(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpccInstance {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub b: Vec<f64>,
    pub q: Vec<f64>,
    /// `k × n`
    pub a: SparseMatrix,
    /// `k × m`
    pub b_mat: SparseMatrix,
    /// `m × n`
    pub n_mat: SparseMatrix,
    /// `m × m`
    pub m_mat: SparseMatrix,
}

impl LpccInstance {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        c: Vec<f64>,
        d: Vec<f64>,
        b: Vec<f64>,
        q: Vec<f64>,
        a: SparseMatrix,
        b_mat: SparseMatrix,
        n_mat: SparseMatrix,
        m_mat: SparseMatrix,
    ) -> Result<Self, ModelError> {
        let inst = Self {
            n: c.len(),
            m: d.len(),
            k: b.len(),
            c,
            d,
            b,
            q,
            a,
            b_mat,
            n_mat,
            m_mat,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let (n, m, k) = (self.n, self.m, self.k);
        let dims = [
            ("c", self.c.len(), n),
            ("d", self.d.len(), m),
            ("b", self.b.len(), k),
            ("q", self.q.len(), m),
            ("A rows", self.a.nrows(), k),
            ("A cols", self.a.ncols(), n),
            ("B rows", self.b_mat.nrows(), k),
            ("B cols", self.b_mat.ncols(), m),
            ("N rows", self.n_mat.nrows(), m),
            ("N cols", self.n_mat.ncols(), n),
            ("M rows", self.m_mat.nrows(), m),
            ("M cols", self.m_mat.ncols(), m),
        ];
        for (name, got, want) in dims {
            if got != want {
                return Err(ModelError::DimensionMismatch(format!(
                    "{name}: {got} != {want}"
                )));
            }
        }
        if self
            .c
            .iter()
            .chain(&self.d)
            .chain(&self.b)
            .chain(&self.q)
            .any(|v| !v.is_finite())
        {
            return Err(ModelError::DimensionMismatch(
                "non-finite vector entry".into(),
            ));
        }
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.n + 2 * self.m
    }

    #[inline]
    pub fn x_var(&self, j: usize) -> usize {
        j
    }

    #[inline]
    pub fn y_var(&self, i: usize) -> usize {
        self.n + i
    }

    #[inline]
    pub fn w_var(&self, i: usize) -> usize {
        self.n + self.m + i
    }

    /// `q + Nx + My`.
    pub fn w_of(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let nx = self.n_mat.mul_vec(x);
        let my = self.m_mat.mul_vec(y);
        (0..self.m).map(|i| self.q[i] + nx[i] + my[i]).collect()
    }

    pub fn objective_of(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(&self.c, x) + dot(&self.d, y)
    }

    /// Objective vector over the `[x | y | w]` layout.
    pub fn full_objective(&self) -> Vec<f64> {
        let mut obj = self.c.clone();
        obj.extend_from_slice(&self.d);
        obj.extend(std::iter::repeat(0.0).take(self.m));
        obj
    }

    /// Splits an `[x | y | w]` vector into a point, recomputing the objective.
    pub fn point_from_vars(&self, v: &[f64]) -> LpccPoint {
        let (n, m) = (self.n, self.m);
        let x = v[..n].to_vec();
        let y = v[n..n + m].to_vec();
        let w = v[n + m..n + 2 * m].to_vec();
        let objective = self.objective_of(&x, &y);
        LpccPoint { x, y, w, objective }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A piece selector: `z_i = false` forces `y_i = 0`, `z_i = true` forces `w_i = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(pub Vec<bool>);

impl Assignment {
    pub fn zeros(m: usize) -> Self {
        Self(vec![false; m])
    }

    /// The `index`-th assignment in lexicographic order (bit `m−1−i` is `z_i`).
    pub fn from_index(m: usize, index: u64) -> Self {
        Self((0..m).map(|i| (index >> (m - 1 - i)) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn flipped(&self, i: usize) -> Self {
        let mut z = self.clone();
        z.0[i] = !z.0[i];
        z
    }

    /// All assignments differing from `self` in exactly one component, by index.
    pub fn adjacent(&self) -> impl Iterator<Item = Assignment> + '_ {
        (0..self.len()).map(move |i| self.flipped(i))
    }

    pub fn as_bits(&self) -> String {
        self.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpccPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub w: Vec<f64>,
    pub objective: f64,
}

impl LpccPoint {
    pub fn from_xy(inst: &LpccInstance, x: Vec<f64>, y: Vec<f64>) -> Self {
        let w = inst.w_of(&x, &y);
        let objective = inst.objective_of(&x, &y);
        Self { x, y, w, objective }
    }

    pub fn from_lp(inst: &LpccInstance, sol: &LpSolution) -> Self {
        inst.point_from_vars(&sol.x)
    }

    pub fn to_vars(&self) -> Vec<f64> {
        let mut v = self.x.clone();
        v.extend_from_slice(&self.y);
        v.extend_from_slice(&self.w);
        v
    }
}

/// Known upper bounds on the complementary variables and on the LPCC value.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundBox {
    pub u_y: Vec<Option<f64>>,
    pub u_w: Vec<Option<f64>>,
    pub ub_obj: Option<f64>,
}

impl BoundBox {
    pub fn empty(m: usize) -> Self {
        Self {
            u_y: vec![None; m],
            u_w: vec![None; m],
            ub_obj: None,
        }
    }

    pub fn uniform(m: usize, uy: f64, uw: f64) -> Self {
        Self {
            u_y: vec![Some(uy); m],
            u_w: vec![Some(uw); m],
            ub_obj: None,
        }
    }

    /// Tightens `slot` to `value` if that is smaller; never loosens.
    pub(crate) fn tighten(slot: &mut Option<f64>, value: f64) {
        if !value.is_finite() {
            return;
        }
        let v = value.max(0.0);
        *slot = Some(match *slot {
            Some(old) => old.min(v),
            None => v,
        });
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Infeasible,
    /// `base + t·ray` is feasible and complementary for all `t ≥ 0` with
    /// strictly decreasing objective; `ray` is over `[x | y | w]`.
    Unbounded {
        base: LpccPoint,
        ray: Vec<f64>,
    },
    Optimal {
        point: LpccPoint,
        lower_bound: f64,
        nodes: usize,
    },
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Infeasible => "INFEASIBLE",
            Outcome::Unbounded { .. } => "UNBOUNDED",
            Outcome::Optimal { .. } => "OPTIMAL",
        }
    }

    pub fn objective(&self) -> Option<f64> {
        match self {
            Outcome::Optimal { point, .. } => Some(point.objective),
            _ => None,
        }
    }
}

/// The LP obtained by dropping orthogonality.
pub fn build_relaxation(inst: &LpccInstance) -> LpModel {
    let (n, m) = (inst.n, inst.m);
    let mut model = LpModel::nonnegative(inst.num_vars());
    model.set_objective(inst.full_objective());
    let a_rows = inst.a.rows();
    let b_rows = inst.b_mat.rows();
    for r in 0..inst.k {
        let mut entries: Vec<(usize, f64)> = a_rows[r].clone();
        entries.extend(b_rows[r].iter().map(|&(c, v)| (n + c, v)));
        model.add_row(&entries, RowSense::Ge, inst.b[r]);
    }
    let n_rows = inst.n_mat.rows();
    let m_rows = inst.m_mat.rows();
    for i in 0..m {
        let mut entries = vec![(inst.w_var(i), 1.0)];
        entries.extend(n_rows[i].iter().map(|&(c, v)| (c, -v)));
        entries.extend(m_rows[i].iter().map(|&(c, v)| (n + c, -v)));
        model.add_row(&entries, RowSense::Eq, inst.q[i]);
    }
    model
}

/// Caps `y_i` (z_i = 0) or `w_i` (z_i = 1) at zero in an `[x | y | w]` model.
pub fn apply_assignment(model: &mut LpModel, inst: &LpccInstance, z: &Assignment) {
    assert_eq!(z.len(), inst.m, "assignment length");
    for (i, &zi) in z.0.iter().enumerate() {
        let var = if zi { inst.w_var(i) } else { inst.y_var(i) };
        model.set_upper(var, 0.0);
    }
}

/// The piece LP for assignment `z`.
pub fn build_piece_lp(inst: &LpccInstance, z: &Assignment) -> LpModel {
    let mut model = build_relaxation(inst);
    apply_assignment(&mut model, inst, z);
    model
}

/// The feasibility-gap LP: `min (1−z)ᵀy + zᵀw` over the relaxation, optionally
/// with `lb ≤ cᵀx + dᵀy ≤ ub` appended as two rows.
pub fn build_feasibility_gap_lp(
    inst: &LpccInstance,
    z: &Assignment,
    window: Option<(f64, f64)>,
) -> LpModel {
    let mut model = build_relaxation(inst);
    set_gap_objective(&mut model, inst, z);
    if let Some((lb, ub)) = window {
        add_objective_window(&mut model, inst, lb, ub);
    }
    model
}

pub(crate) fn set_gap_objective(model: &mut LpModel, inst: &LpccInstance, z: &Assignment) {
    let mut obj = vec![0.0; model.ncols()];
    for (i, &zi) in z.0.iter().enumerate() {
        let var = if zi { inst.w_var(i) } else { inst.y_var(i) };
        obj[var] = 1.0;
    }
    model.set_objective(obj);
}

pub(crate) fn objective_row(inst: &LpccInstance) -> Vec<(usize, f64)> {
    let mut row: Vec<(usize, f64)> = Vec::new();
    for (j, &v) in inst.c.iter().enumerate() {
        if v != 0.0 {
            row.push((inst.x_var(j), v));
        }
    }
    for (i, &v) in inst.d.iter().enumerate() {
        if v != 0.0 {
            row.push((inst.y_var(i), v));
        }
    }
    row
}

pub(crate) fn add_objective_window(model: &mut LpModel, inst: &LpccInstance, lb: f64, ub: f64) {
    let row = objective_row(inst);
    model.add_row(&row, RowSense::Ge, lb);
    model.add_row(&row, RowSense::Le, ub);
}

/// `Ax+By ≥ b − tol`, `x,y,w ≥ −tol`, `|w − (q+Nx+My)| ≤ tol`, `min(y_i,w_i) ≤ tol`.
pub fn check_feasible(inst: &LpccInstance, p: &LpccPoint, tol: f64) -> bool {
    if p.x.len() != inst.n || p.y.len() != inst.m || p.w.len() != inst.m {
        return false;
    }
    let ax = inst.a.mul_vec(&p.x);
    let by = inst.b_mat.mul_vec(&p.y);
    if (0..inst.k).any(|r| ax[r] + by[r] < inst.b[r] - tol) {
        return false;
    }
    if p.x.iter().chain(&p.y).chain(&p.w).any(|&v| v < -tol) {
        return false;
    }
    let w = inst.w_of(&p.x, &p.y);
    if (0..inst.m).any(|i| (w[i] - p.w[i]).abs() > tol) {
        return false;
    }
    (0..inst.m).all(|i| p.y[i].min(p.w[i]) <= tol)
}

/// Relative gap `(ub − lb) / max(1, |lb|)`.
pub fn relative_gap(ub: f64, lb: f64) -> f64 {
    debug_assert!(
        ub >= lb - 1e-12 || ub.is_nan() || lb.is_nan(),
        "ub {ub} < lb {lb}"
    );
    if ub == lb {
        return 0.0;
    }
    if !ub.is_finite() || !lb.is_finite() {
        return f64::INFINITY;
    }
    (ub - lb) / lb.abs().max(1.0)
}

#[cfg(test)]
mod tests;
