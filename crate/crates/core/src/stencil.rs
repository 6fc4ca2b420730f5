//! Centered finite-difference weights.
//!
//! Weights are generated with Fornberg's recursion on the integer offsets
//! `-r..=r` (unit spacing); callers divide by `h^order`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StencilError {
    #[error("stencil accuracy must be a positive even integer (got {0})")]
    BadAccuracy(usize),
}

/// Finite-difference weights for derivative orders `0..=max_order` at `z`
/// using the nodes `x`. Entry `[k][j]` multiplies `f(x[j])` in the
/// approximation of the `k`-th derivative.
pub fn fornberg(z: f64, x: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    if n == 0 {
        return c;
    }
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Half-width `r` of the centered stencil for a derivative of `order` with
/// formal accuracy `accuracy`.
pub fn half_width(order: usize, accuracy: usize) -> usize {
    if order == 0 {
        0
    } else {
        order.div_ceil(2) - 1 + accuracy / 2
    }
}

/// A centered stencil on unit spacing.
#[derive(Clone, Debug, PartialEq)]
pub struct Stencil {
    pub order: usize,
    pub accuracy: usize,
    /// Offsets `-r..=r`, paired with `weights`.
    pub offsets: Vec<isize>,
    pub weights: Vec<f64>,
}

impl Stencil {
    pub fn half_width(&self) -> usize {
        (self.offsets.len() - 1) / 2
    }

    /// Nonzero taps only.
    pub fn taps(&self) -> impl Iterator<Item = (isize, f64)> + '_ {
        self.offsets
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
            .filter(|(_, w)| *w != 0.0)
    }
}

pub fn centered(order: usize, accuracy: usize) -> Result<Stencil, StencilError> {
    if accuracy == 0 || accuracy % 2 != 0 {
        return Err(StencilError::BadAccuracy(accuracy));
    }
    let r = half_width(order, accuracy) as isize;
    let offsets: Vec<isize> = (-r..=r).collect();
    let nodes: Vec<f64> = offsets.iter().map(|&k| k as f64).collect();
    let mut weights = fornberg(0.0, &nodes, order).swap_remove(order);
    // Symmetry makes every other weight vanish exactly; clean up roundoff.
    for (k, w) in offsets.iter().zip(weights.iter_mut()) {
        if order % 2 == 1 && *k == 0 {
            *w = 0.0;
        }
    }
    Ok(Stencil {
        order,
        accuracy,
        offsets,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_weights(s: &Stencil, expect: &[f64]) {
        assert_eq!(s.weights.len(), expect.len());
        for (a, b) in s.weights.iter().zip(expect) {
            assert!((a - b).abs() < 1e-13, "{:?} vs {:?}", s.weights, expect);
        }
    }

    #[test]
    fn classical_stencils() {
        assert_weights(&centered(1, 2).unwrap(), &[-0.5, 0.0, 0.5]);
        assert_weights(&centered(2, 2).unwrap(), &[1.0, -2.0, 1.0]);
        assert_weights(
            &centered(1, 4).unwrap(),
            &[1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0],
        );
        assert_weights(
            &centered(2, 4).unwrap(),
            &[-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0],
        );
        assert_weights(&centered(3, 2).unwrap(), &[-0.5, 1.0, 0.0, -1.0, 0.5]);
        assert_weights(&centered(4, 2).unwrap(), &[1.0, -4.0, 6.0, -4.0, 1.0]);
        assert_weights(&centered(0, 2).unwrap(), &[1.0]);
    }

    #[test]
    fn rejects_odd_accuracy() {
        assert_eq!(centered(1, 3), Err(StencilError::BadAccuracy(3)));
        assert_eq!(centered(1, 0), Err(StencilError::BadAccuracy(0)));
    }

    #[test]
    fn moments_match_derivative_order() {
        // sum_k w_k k^q = q! delta_{q,order} for q below order + accuracy.
        for order in 1..=5 {
            for accuracy in [2, 4] {
                let s = centered(order, accuracy).unwrap();
                for q in 0..order + accuracy {
                    let moment: f64 = s
                        .offsets
                        .iter()
                        .zip(&s.weights)
                        .map(|(&k, w)| w * (k as f64).powi(q as i32))
                        .sum();
                    let expect = if q == order {
                        (1..=order).map(|v| v as f64).product()
                    } else {
                        0.0
                    };
                    assert!(
                        (moment - expect).abs() < 1e-9 * expect.max(1.0),
                        "order {order} acc {accuracy} q {q}: {moment}"
                    );
                }
            }
        }
    }
}
