//! Solving `Q_s(T) u = F`, the S-resolvents, and operator-norm scans along
//! a slice.

mod krylov;
mod norms;
mod solve;

use thiserror::Error;

pub use krylov::{cg, gmres, KrylovOutcome, LinOp};
pub use norms::{norm_scan, power_norm, NormScan, PowerEstimate, ScanOptions, ScanRow};
pub use solve::{
    dense_solve, solve_qs, symmetry_defect, MethodUsed, Resolvent, SolveMethod, SolveOptions,
    SolveReport, SYMMETRY_TOL,
};

use crate::operator::{OperatorError, OperatorLabel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResolventError {
    #[error("s = 0 is excluded: Q_0(T) = T^2 need not be invertible")]
    ZeroShift,
    #[error("Re(s) = {0} but solves are only supported for purely imaginary s")]
    NonImaginaryShift(f64),
    #[error("expected a Q_s operator, got {0:?}")]
    Label(OperatorLabel),
    #[error(
        "solver did not converge in {iterations} iterations (best residual {best_residual:e})"
    )]
    NotConverged {
        best_residual: f64,
        iterations: usize,
    },
    #[error("operator has dimension {expected}, right-hand side has {got}")]
    Shape { expected: usize, got: usize },
    #[error("right-hand side is not finite")]
    NonFinite,
    #[error("dense oracle refused: 8N = {dim} exceeds the cap {cap}")]
    DenseCap { dim: usize, cap: usize },
    #[error("dense matrix is singular")]
    Singular,
    #[error("hypothesis check failed: {0}")]
    HypothesisFailed(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Algebra(#[from] crate::qalgebra::AlgebraError),
}
