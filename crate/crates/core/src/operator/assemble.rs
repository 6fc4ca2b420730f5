use super::{OperatorError, OperatorLabel, QOperator};
use crate::domain::{CoefficientField, Grid};
use crate::qalgebra::{cqmul, CQuaternion, Quaternion};
use crate::stencil::{centered, Stencil};

/// Discrete `T = i^{m-1} sum_l a_l e_l D_l^m` with centered stencils of the
/// given accuracy. Taps landing outside the interior are dropped, which is
/// zero extension.
pub fn assemble_t(
    grid: &Grid,
    coeffs: &CoefficientField,
    m: usize,
    accuracy: usize,
) -> Result<QOperator, OperatorError> {
    if m == 0 {
        return Err(OperatorError::ZeroOrder);
    }
    let stencil = centered(m, accuracy)?;
    let needed = 2 * stencil.half_width() + 1;
    for (axis, &nodes) in grid.n().iter().enumerate() {
        if nodes < needed {
            return Err(OperatorError::GridTooSmall {
                axis,
                nodes,
                needed,
            });
        }
    }
    let n = grid.len();
    if coeffs.len() != n {
        return Err(OperatorError::Shape {
            expected: n,
            got: coeffs.len(),
        });
    }
    let h = grid.h();
    let twist = CQuaternion::i_pow(m as i64 - 1);
    let units: [CQuaternion; 3] =
        std::array::from_fn(|l| cqmul(twist, CQuaternion::from_quaternion(Quaternion::unit(l))));
    let rows = (0..n)
        .map(|slot| {
            let mut row = Vec::with_capacity(3 * stencil.offsets.len());
            for l in 0..3 {
                let a = coeffs.values(l)[slot] / h[l].powi(m as i32);
                for (k, w) in stencil.taps() {
                    if let Some(c) = grid.neighbor(slot, l, k) {
                        row.push((c, units[l].scale(a * w)));
                    }
                }
            }
            row
        })
        .collect();
    Ok(QOperator::from_rows(n, rows, OperatorLabel::T, m).with_meta(OperatorLabel::T, m, None))
}

/// `T = lambda I`, the scalar surrogate used to test quadratures.
pub fn scalar_surrogate(n: usize, lambda: f64) -> QOperator {
    QOperator::scaled_identity(n, CQuaternion::real(lambda), OperatorLabel::T).with_meta(
        OperatorLabel::T,
        1,
        None,
    )
}

/// `Q_s(T) = T T - 2 Re(s) T + |s|^2 I` by explicit sparse product.
pub fn assemble_qs(top: &QOperator, s: Quaternion) -> Result<QOperator, OperatorError> {
    if top.label() != OperatorLabel::T {
        return Err(OperatorError::Label {
            expected: OperatorLabel::T,
            got: top.label(),
        });
    }
    let tt = top.matmul(top);
    let mut q = if s.re() != 0.0 {
        tt.lincomb(1.0, top, -2.0 * s.re())
    } else {
        tt
    };
    q = q.lincomb(1.0, &QOperator::identity(top.dim()), s.norm_sqr());
    Ok(q.with_meta(OperatorLabel::Qs, 2 * top.order(), Some(s)))
}

/// `D_axis^order u` on interior slots with zero extension; no coefficient or
/// unit factor.
pub fn fd_derivative(
    grid: &Grid,
    u: &[CQuaternion],
    axis: usize,
    stencil: &Stencil,
) -> Vec<CQuaternion> {
    let scale = grid.h()[axis].powi(stencil.order as i32).recip();
    (0..grid.len())
        .map(|slot| {
            let mut acc = CQuaternion::ZERO;
            for (k, w) in stencil.taps() {
                if let Some(c) = grid.neighbor(slot, axis, k) {
                    acc += u[c].scale(w);
                }
            }
            acc.scale(scale)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Coefficient, DomainSpec, GridFunction};
    use crate::vecops;

    fn constant_t(n: usize, m: usize, c: f64) -> (Grid, QOperator) {
        let g = Grid::build(&DomainSpec::unit_box(), [n; 3]).unwrap();
        let f = CoefficientField::sample(
            &g,
            &[
                Coefficient::Constant(c),
                Coefficient::Constant(c),
                Coefficient::Constant(c),
            ],
            m,
        )
        .unwrap();
        let t = assemble_t(&g, &f, m, 2).unwrap();
        (g, t)
    }

    fn bump(x: [f64; 3]) -> f64 {
        let mut p = 1.0;
        for xi in x {
            p *= (std::f64::consts::PI * xi).sin().powi(4);
        }
        p
    }

    #[test]
    fn zero_input_gives_zero() {
        let (g, t) = constant_t(6, 1, 1.0);
        let u = GridFunction::zeros(g.len());
        assert_eq!(t.apply(&u).unwrap(), u);
    }

    #[test]
    fn second_order_maps_real_into_i_part() {
        let (g, t) = constant_t(7, 2, 1.0);
        let u = GridFunction::from_fn(&g, |x| CQuaternion::real(bump(x)));
        let tu = t.apply(&u).unwrap();
        assert!(tu.as_slice().iter().all(|v| v.q1 == Quaternion::ZERO));
        assert!(tu.norm() > 0.0);
    }

    #[test]
    fn first_order_approximates_e1_derivative() {
        let mut errs = Vec::new();
        for n in [17, 33] {
            let g = Grid::build(&DomainSpec::unit_box(), [n; 3]).unwrap();
            let ones = [
                Coefficient::Constant(1.0),
                Coefficient::Constant(0.0),
                Coefficient::Constant(0.0),
            ];
            let f = CoefficientField::sample(&g, &ones, 1).unwrap();
            let t = assemble_t(&g, &f, 1, 2).unwrap();
            let u = GridFunction::from_fn(&g, |x| CQuaternion::real(x[0] * bump(x)));
            let tu = t.apply(&u).unwrap();
            let exact = GridFunction::from_fn(&g, |x| {
                let pi = std::f64::consts::PI;
                let s = |y: f64| (pi * y).sin();
                let d = s(x[0]).powi(4) + x[0] * 4.0 * pi * s(x[0]).powi(3) * (pi * x[0]).cos();
                CQuaternion::from_quaternion(
                    Quaternion::E1.scale(d * s(x[1]).powi(4) * s(x[2]).powi(4)),
                )
            });
            errs.push(vecops::rel_diff(tu.as_slice(), exact.as_slice()));
        }
        let rate = (errs[0] / errs[1]).log2();
        assert!(rate > 1.8, "rate {rate}, errors {errs:?}");
    }

    #[test]
    fn too_small_grid_is_rejected() {
        let g = Grid::build(&DomainSpec::unit_box(), [3, 5, 5]).unwrap();
        let f = CoefficientField::sample(
            &g,
            &[
                Coefficient::Constant(1.0),
                Coefficient::Constant(1.0),
                Coefficient::Constant(1.0),
            ],
            3,
        )
        .unwrap();
        assert!(matches!(
            assemble_t(&g, &f, 3, 2),
            Err(OperatorError::GridTooSmall { axis: 0, .. })
        ));
    }

    #[test]
    fn qs_structure() {
        let (g, t) = constant_t(6, 1, 1.0);
        let s = Quaternion::new(0.0, 0.0, 2.0, 0.0);
        let q = assemble_qs(&t, s).unwrap();
        let u = GridFunction::from_fn(&g, |x| {
            CQuaternion::from_array([x[0], x[1], 1.0, 0.0, x[2], 0.0, 0.5, x[0] * x[1]])
        });
        let lhs = q.apply(&u).unwrap();
        let ttu = t.apply(&t.apply(&u).unwrap()).unwrap();
        let rhs: Vec<CQuaternion> = ttu
            .as_slice()
            .iter()
            .zip(u.as_slice())
            .map(|(a, b)| *a + b.scale(4.0))
            .collect();
        assert!(vecops::rel_diff(lhs.as_slice(), &rhs) < 1e-13);
        let qc = assemble_qs(&t, s.conj()).unwrap();
        assert_eq!(q.to_dense(), qc.to_dense());
        assert!(assemble_qs(&q, s).is_err());
    }

    #[test]
    fn zero_operator_gives_scaled_identity() {
        let (_, t) = constant_t(5, 1, 0.0);
        let q = assemble_qs(&t, Quaternion::new(0.0, 2.0, 0.0, 0.0)).unwrap();
        let d = q.to_dense();
        assert!(
            (d - nalgebra::DMatrix::<f64>::identity(8 * 27, 8 * 27) * 4.0)
                .abs()
                .max()
                == 0.0
        );
    }
}
