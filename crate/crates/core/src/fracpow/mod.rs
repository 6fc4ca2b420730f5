//! Fractional powers `P_alpha(T) v` by quadrature of the Balakrishnan-type
//! integrals along `-j R`.

mod balakrishnan;
pub mod quadrature;

use thiserror::Error;

pub use balakrishnan::{
    frac_power, homogeneity_check, left_right_agreement, node_table, FracPowDiagnostics,
    FracPowOutput, PanelRow, QuadratureSpec, Variant,
};

use crate::operator::OperatorError;
use crate::qalgebra::AlgebraError;
use crate::resolvent::ResolventError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FracPowError {
    #[error("alpha = {0} is outside (0, 1)")]
    Alpha(f64),
    #[error("invalid quadrature spec: {0}")]
    Spec(String),
    #[error("node solve failed at t = {t}: {source}")]
    NodeSolve { t: f64, source: ResolventError },
    #[error(
        "tail bound {bound:e} exceeds the tolerance {tol:e} at t_max = {t_max:e}; increase t_max"
    )]
    TailUnmet { t_max: f64, bound: f64, tol: f64 },
    #[error(
        "the tail estimate without correction needs Theta; set it or enable the tail correction"
    )]
    MissingTheta,
    #[error("vector has length {got}, operator has dimension {expected}")]
    Shape { expected: usize, got: usize },
    #[error(transparent)]
    Resolvent(#[from] ResolventError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}
