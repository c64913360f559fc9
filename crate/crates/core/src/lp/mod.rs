//! Sparse LP models and the simplex kernel every other module builds on.

mod model;
mod simplex;
mod sparse;

pub use model::{fix_to_zero, LpModel, RowSense};
pub use simplex::{
    solve_lp, solve_lp_robust, solve_lp_with, Basis, LpSolution, LpStatus, NonbasicAt,
    SimplexOptions, TableauEntry, TableauRow, VarStatus,
};
pub use sparse::SparseMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("invalid LP model: {0}")]
    InvalidModel(String),
    #[error("numerical failure in simplex: {0}")]
    NumericalFailure(String),
    #[error("variable {0} is not basic")]
    NotBasic(usize),
    #[error("tableau requested from a non-optimal solution")]
    NotOptimal,
}

#[cfg(test)]
mod tests;
