//! Domains, grids, grid functions, coefficient fields and weights.

mod bumps;
mod coeffs;
mod grid;
pub mod jet;
mod spec;
mod weight;

use thiserror::Error;

pub use bumps::{bump_profile, bump_suite, Bump};
pub use coeffs::{Coefficient, CoefficientFamily, CoefficientField, JetFn, PointFn, Provenance};
pub use grid::{Grid, GridFunction};
pub use jet::Jet;
pub use spec::{BoxBounds, DomainKind, DomainSpec};
pub use weight::{
    hill_radial_condition, ridge_condition, weighted_poincare_check, DecayCheck, PoincareCheck,
    WeightFamily, WeightFunction,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("invalid domain: {0}")]
    InvalidSpec(String),
    #[error("degenerate grid: no interior nodes")]
    DegenerateGrid,
    #[error("grid needs at least 3 nodes per axis (got {0:?})")]
    Resolution([usize; 3]),
    #[error("coefficient a{coefficient} is not finite at x = {x:?}")]
    NonFinite { coefficient: usize, x: [f64; 3] },
    #[error("derivatives of order {0} exceed the supported maximum of 8")]
    OrderTooHigh(usize),
    #[error("{family:?} weight is not defined for a {domain} domain")]
    IncompatibleWeight {
        family: WeightFamily,
        domain: &'static str,
    },
    #[error("grid function has {got} values, grid has {expected} interior nodes")]
    Shape { expected: usize, got: usize },
    #[error("could not place a bump inside the domain")]
    NoRoomForBump,
}
