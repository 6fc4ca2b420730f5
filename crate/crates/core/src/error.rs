use thiserror::Error;

use crate::domain::DomainError;
use crate::forms::FormsError;
use crate::fracpow::FracPowError;
use crate::operator::OperatorError;
use crate::qalgebra::AlgebraError;
use crate::resolvent::ResolventError;
use crate::stencil::StencilError;

/// Any error raised by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Stencil(#[from] StencilError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Resolvent(#[from] ResolventError),
    #[error(transparent)]
    FracPow(#[from] FracPowError),
}
