use std::sync::{Arc, OnceLock};

use super::sparse::Csc;
use super::{LpError, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowSense {
    Ge,
    Le,
    Eq,
}

/// A minimization LP: `min cᵀv` subject to `row_i(v) {≥,≤,=} rhs_i` and
/// `lower ≤ v ≤ upper` (bounds may be infinite).
#[derive(Debug, Clone)]
pub struct LpModel {
    objective: Vec<f64>,
    matrix: SparseMatrix,
    senses: Vec<RowSense>,
    rhs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    // column copy shared by clones until the matrix changes
    csc: OnceLock<Arc<Csc>>,
}

impl PartialEq for LpModel {
    fn eq(&self, o: &Self) -> bool {
        self.objective == o.objective
            && self.matrix == o.matrix
            && self.senses == o.senses
            && self.rhs == o.rhs
            && self.lower == o.lower
            && self.upper == o.upper
    }
}

impl LpModel {
    /// A model with `ncols` variables bounded below by zero, no rows and a zero objective.
    pub fn nonnegative(ncols: usize) -> Self {
        Self {
            objective: vec![0.0; ncols],
            matrix: SparseMatrix::zeros(0, ncols),
            senses: Vec::new(),
            rhs: Vec::new(),
            lower: vec![0.0; ncols],
            upper: vec![f64::INFINITY; ncols],
            csc: OnceLock::new(),
        }
    }

    pub fn new(
        objective: Vec<f64>,
        matrix: SparseMatrix,
        senses: Vec<RowSense>,
        rhs: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self, LpError> {
        let model = Self {
            objective,
            matrix,
            senses,
            rhs,
            lower,
            upper,
            csc: OnceLock::new(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.matrix.ncols();
        let m = self.matrix.nrows();
        if self.objective.len() != n || self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::InvalidModel("column dimension mismatch".into()));
        }
        if self.senses.len() != m || self.rhs.len() != m {
            return Err(LpError::InvalidModel("row dimension mismatch".into()));
        }
        if self
            .objective
            .iter()
            .chain(&self.rhs)
            .any(|v| !v.is_finite())
        {
            return Err(LpError::InvalidModel("non-finite objective or rhs".into()));
        }
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            if l.is_nan() || u.is_nan() || l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(LpError::InvalidModel(format!(
                    "bad bounds [{l}, {u}] on column {j}"
                )));
            }
        }
        Ok(())
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub(crate) fn csc(&self) -> Arc<Csc> {
        self.csc
            .get_or_init(|| Arc::new(self.matrix.to_csc()))
            .clone()
    }

    pub fn senses(&self) -> &[RowSense] {
        &self.senses
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn set_objective(&mut self, objective: Vec<f64>) {
        assert_eq!(objective.len(), self.ncols());
        self.objective = objective;
    }

    pub fn set_bounds(&mut self, col: usize, lower: f64, upper: f64) {
        assert!(lower <= upper, "empty bound interval on column {col}");
        self.lower[col] = lower;
        self.upper[col] = upper;
    }

    pub fn set_upper(&mut self, col: usize, upper: f64) {
        self.upper[col] = upper;
    }

    /// Appends `Σ coeff·v_col  sense  rhs` and returns its row index.
    pub fn add_row(&mut self, entries: &[(usize, f64)], sense: RowSense, rhs: f64) -> usize {
        self.csc = OnceLock::new();
        let r = self.matrix.push_row(entries);
        self.senses.push(sense);
        self.rhs.push(rhs);
        r
    }

    pub fn remove_rows(&mut self, rows: &[usize]) {
        self.csc = OnceLock::new();
        let mut drop = vec![false; self.nrows()];
        for &r in rows {
            drop[r] = true;
        }
        let mut k = 0;
        self.senses.retain(|_| {
            k += 1;
            !drop[k - 1]
        });
        k = 0;
        self.rhs.retain(|_| {
            k += 1;
            !drop[k - 1]
        });
        self.matrix.remove_rows(rows);
    }

    /// Largest violation of any row or bound at `v` (0 when feasible).
    pub fn max_violation(&self, v: &[f64]) -> f64 {
        let act = self.matrix.mul_vec(v);
        let mut worst: f64 = 0.0;
        for (i, &a) in act.iter().enumerate() {
            let r = self.rhs[i];
            let viol = match self.senses[i] {
                RowSense::Ge => r - a,
                RowSense::Le => a - r,
                RowSense::Eq => (a - r).abs(),
            };
            worst = worst.max(viol);
        }
        for j in 0..v.len() {
            worst = worst.max(self.lower[j] - v[j]).max(v[j] - self.upper[j]);
        }
        worst
    }

    pub fn objective_value(&self, v: &[f64]) -> f64 {
        self.objective.iter().zip(v).map(|(c, x)| c * x).sum()
    }
}

/// Returns a copy of `model` with column `col` forced to zero from above.
pub fn fix_to_zero(model: &LpModel, col: usize) -> LpModel {
    assert_eq!(
        model.lower()[col],
        0.0,
        "fix_to_zero needs a zero lower bound"
    );
    let mut m = model.clone();
    m.set_upper(col, 0.0);
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remove_rows_keeps_sense_alignment() {
        let mut m = LpModel::nonnegative(2);
        m.add_row(&[(0, 1.0)], RowSense::Ge, 1.0);
        m.add_row(&[(1, 1.0)], RowSense::Le, 2.0);
        m.add_row(&[(0, 1.0), (1, 1.0)], RowSense::Eq, 3.0);
        m.remove_rows(&[0]);
        assert_eq!(m.senses(), &[RowSense::Le, RowSense::Eq]);
        assert_eq!(m.rhs(), &[2.0, 3.0]);
        assert!(m.validate().is_ok());
    }

    #[test]
    fn fix_to_zero_only_touches_upper() {
        let mut m = LpModel::nonnegative(3);
        m.add_row(&[(0, 1.0)], RowSense::Ge, 0.0);
        let f = fix_to_zero(&m, 1);
        assert_eq!(f.upper()[1], 0.0);
        assert_eq!(f.lower(), m.lower());
        assert_eq!(f.matrix(), m.matrix());
        assert_eq!(fix_to_zero(&f, 1), f);
    }

    #[test]
    fn validate_rejects_crossed_bounds() {
        let r = LpModel::new(
            vec![0.0],
            SparseMatrix::zeros(0, 1),
            vec![],
            vec![],
            vec![1.0],
            vec![0.0],
        );
        assert!(r.is_err());
    }
}
