//! Fractional powers of quaternionic vector differential operators.
//!
//! The operator `T = i^{m-1} (a1 e1 d1^m + a2 e2 d2^m + a3 e3 d3^m)` acts on
//! functions with values in the complexified quaternions. This crate
//! discretizes `T` on uniform grids, builds `Q_s(T) = T^2 - 2 Re(s) T + |s|^2`,
//! solves with it, checks the coercivity and resolvent estimates that make
//! the S-functional calculus applicable, and evaluates the fractional powers
//! `P_alpha(T) v` by quadrature along the imaginary axis of a slice.
//!
//! Module map:
//!
//! * [`qalgebra`]: quaternions, `C (x) H`, slice powers.
//! * [`domain`]: domains, grids, coefficients, weights, test bumps.
//! * [`operator`]: block-sparse assembly of `T` and `Q_s(T)`.
//! * [`forms`]: the bilinear form `b_s` and all derived constants.
//! * [`resolvent`]: solvers, S-resolvents, operator-norm scans.
//! * [`fracpow`]: Balakrishnan-type quadrature for `P_alpha(T)`.

pub mod domain;
pub mod error;
pub mod forms;
pub mod fracpow;
pub mod operator;
pub mod qalgebra;
pub mod resolvent;
pub mod stencil;
pub mod vecops;

pub use domain::{
    BoxBounds, Coefficient, CoefficientFamily, CoefficientField, DomainKind, DomainSpec, Grid,
    GridFunction, WeightFamily, WeightFunction,
};
pub use error::Error;
pub use forms::{compute_constants, hypothesis_check, ConstantsReport};
pub use fracpow::{
    frac_power, homogeneity_check, left_right_agreement, FracPowOutput, QuadratureSpec, Variant,
};
pub use operator::{assemble_qs, assemble_t, OperatorLabel, QOperator};
pub use qalgebra::{CQuaternion, Quaternion, SlicePoint};
pub use resolvent::{norm_scan, solve_qs, NormScan, SolveOptions, SolveReport};
