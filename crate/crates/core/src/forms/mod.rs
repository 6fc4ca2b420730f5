//! The bilinear form `b_s`, coercivity and continuity constants, and the
//! hypothesis checks that gate the resolvent and fractional-power modules.

mod bilinear;
mod constants;

use thiserror::Error;

pub use bilinear::{
    bilinear_form, coercivity_probe, dm_norm_sq, holds_at_least, t_norm_sq, CoercivityProbe,
};
pub use constants::{
    compute_constants, hypothesis_check, k_repetition_count, k_symbol, weight_sum, ConstantsReport,
    Continuity, Hypotheses, Verdict,
};

use crate::domain::CoefficientField;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormsError {
    #[error("coefficient derivatives are sampled to order {have}, order {need} is required")]
    MissingDerivatives { have: usize, need: usize },
    #[error("grid function has {got} values, grid has {expected} interior nodes")]
    Shape { expected: usize, got: usize },
    #[error("unbounded domain requires a weight function")]
    WeightRequired,
    #[error(transparent)]
    Stencil(#[from] crate::stencil::StencilError),
    #[error(transparent)]
    Domain(#[from] crate::domain::DomainError),
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

pub(crate) fn multinomial(n: usize, parts: &[usize]) -> f64 {
    debug_assert_eq!(parts.iter().sum::<usize>(), n);
    factorial(n) / parts.iter().map(|&p| factorial(p)).product::<f64>()
}

/// `d^t (a_l^2) / dx_l^t` at one slot, by Leibniz.
pub(crate) fn leibniz_square(field: &CoefficientField, l: usize, t: usize, slot: usize) -> f64 {
    (0..=t)
        .map(|r| binomial(t, r) * field.deriv(l, l, r)[slot] * field.deriv(l, l, t - r)[slot])
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinatorics() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(multinomial(4, &[2, 1, 1]), 12.0);
        assert_eq!(multinomial(0, &[0, 0, 0]), 1.0);
    }
}
