use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::constants::ConstantsReport;
use super::{binomial, leibniz_square, multinomial, FormsError};
use crate::domain::{CoefficientField, Grid, GridFunction};
use crate::operator::fd_derivative;
use crate::qalgebra::{cqmul, inner, CQuaternion, Quaternion, SlicePoint};
use crate::stencil::centered;

/// `D_l^t w` for `l` in `0..3` and `t` in `0..=m`; `t = 0` is `w` itself.
struct Derivatives {
    by_axis: [Vec<Vec<CQuaternion>>; 3],
}

impl Derivatives {
    fn new(grid: &Grid, w: &GridFunction, m: usize, accuracy: usize) -> Result<Self, FormsError> {
        let stencils = (1..=m)
            .map(|t| centered(t, accuracy))
            .collect::<Result<Vec<_>, _>>()?;
        let by_axis = std::array::from_fn(|l| {
            let mut d = Vec::with_capacity(m + 1);
            d.push(w.as_slice().to_vec());
            for st in &stencils {
                d.push(fd_derivative(grid, w.as_slice(), l, st));
            }
            d
        });
        Ok(Self { by_axis })
    }

    fn get(&self, l: usize, t: usize) -> &[CQuaternion] {
        &self.by_axis[l][t]
    }
}

/// `sum_x f(x) <x_u(x), y_v(x)>` without the volume factor.
fn weighted_inner<F: Fn(usize) -> f64>(f: F, xu: &[CQuaternion], yv: &[CQuaternion]) -> Quaternion {
    xu.iter()
        .zip(yv)
        .enumerate()
        .fold(Quaternion::ZERO, |acc, (k, (a, b))| {
            acc + inner(*a, *b).scale(f(k))
        })
}

fn check_inputs(
    field: &CoefficientField,
    grid: &Grid,
    m: usize,
    fs: &[&GridFunction],
) -> Result<(), FormsError> {
    if field.order() < m {
        return Err(FormsError::MissingDerivatives {
            have: field.order(),
            need: m,
        });
    }
    for f in fs {
        if f.len() != grid.len() {
            return Err(FormsError::Shape {
                expected: grid.len(),
                got: f.len(),
            });
        }
    }
    Ok(())
}

/// `T u` from its defining formula, sharing nothing with the assembled
/// operator except the stencil routine.
fn apply_t_direct(
    field: &CoefficientField,
    du_m: [&[CQuaternion]; 3],
    m: usize,
) -> Vec<CQuaternion> {
    let twist = CQuaternion::i_pow(m as i64 - 1);
    (0..field.len())
        .map(|k| {
            let mut acc = CQuaternion::ZERO;
            for (l, d) in du_m.iter().enumerate() {
                acc += d[k].left_mul(Quaternion::unit(l)).scale(field.values(l)[k]);
            }
            cqmul(twist, acc)
        })
        .collect()
}

/// The bilinear form `b_s(u, v)` summed term by term over interior nodes
/// with the node weight `h1 h2 h3`.
///
/// For constant coefficients on a box grid this equals `<Q_s(T) u, v>`
/// exactly; for variable coefficients the two agree to the stencil order.
pub fn bilinear_form(
    field: &CoefficientField,
    grid: &Grid,
    s: Quaternion,
    u: &GridFunction,
    v: &GridFunction,
    m: usize,
    accuracy: usize,
) -> Result<Quaternion, FormsError> {
    check_inputs(field, grid, m, &[u, v])?;
    let du = Derivatives::new(grid, u, m, accuracy)?;
    let dv = Derivatives::new(grid, v, m, accuracy)?;
    let mut total = Quaternion::ZERO;

    for l in 0..3 {
        let a = field.values(l);
        total += weighted_inner(|k| a[k] * a[k], du.get(l, m), dv.get(l, m));
    }

    total += weighted_inner(|_| 1.0, u.as_slice(), v.as_slice()).scale(s.norm_sqr());

    for l in 0..3 {
        for t1 in 1..=m {
            let c = binomial(m, t1);
            total += weighted_inner(
                |k| c * leibniz_square(field, l, t1, k),
                du.get(l, m),
                dv.get(l, m - t1),
            );
        }
    }

    for l in 0..3 {
        for k in 1..=m {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            for (t1, t2, t3) in compositions(m - k) {
                let c = sign * binomial(m, k) * multinomial(m - k, &[t1, t2, t3]);
                let d1 = field.deriv(l, l, t1);
                let d2 = field.deriv(l, l, t2 + k);
                total += weighted_inner(|x| c * d1[x] * d2[x], du.get(l, m), dv.get(l, t3));
            }
        }
    }

    for l in 0..3 {
        for j in (l + 1)..3 {
            let elej = Quaternion::unit(l) * Quaternion::unit(j);
            for k in 1..=m {
                // Integrating the cross terms of T^2 by parts gives -(-1)^k.
                let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
                for (t1, t2, t3) in compositions(m - k) {
                    let c = sign * binomial(m, k) * multinomial(m - k, &[t1, t2, t3]);
                    let first: Vec<CQuaternion> = {
                        let (f1, f2) = (field.deriv(l, l, t1), field.deriv(j, l, t2 + k));
                        du.get(j, m)
                            .iter()
                            .enumerate()
                            .map(|(x, w)| w.left_mul(elej).scale(f1[x] * f2[x]))
                            .collect()
                    };
                    let second: Vec<CQuaternion> = {
                        let (f1, f2) = (field.deriv(j, j, t1), field.deriv(l, j, t2 + k));
                        du.get(l, m)
                            .iter()
                            .enumerate()
                            .map(|(x, w)| w.left_mul(elej).scale(f1[x] * f2[x]))
                            .collect()
                    };
                    total += weighted_inner(|_| c, &first, dv.get(l, t3));
                    total -= weighted_inner(|_| c, &second, dv.get(j, t3));
                }
            }
        }
    }

    if s.re() != 0.0 {
        let tu = apply_t_direct(field, [du.get(0, m), du.get(1, m), du.get(2, m)], m);
        total -= weighted_inner(|_| 1.0, &tu, v.as_slice()).scale(2.0 * s.re());
    }

    Ok(total.scale(grid.cell_volume()))
}

/// All `(t1, t2, t3)` with `t1 + t2 + t3 = n`.
fn compositions(n: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..=n).flat_map(move |t1| (0..=n - t1).map(move |t2| (t1, t2, n - t1 - t2)))
}

/// `||u||_{D^m}^2 = sum_l ||D_l^m u||^2`.
pub fn dm_norm_sq(
    grid: &Grid,
    u: &GridFunction,
    m: usize,
    accuracy: usize,
) -> Result<f64, FormsError> {
    let st = centered(m, accuracy)?;
    let mut s = 0.0;
    for l in 0..3 {
        let d = fd_derivative(grid, u.as_slice(), l, &st);
        s += d.iter().map(|x| x.norm_sqr()).sum::<f64>();
    }
    Ok(s * grid.cell_volume())
}

/// `||T u||^2` via the defining formula.
pub fn t_norm_sq(
    field: &CoefficientField,
    grid: &Grid,
    u: &GridFunction,
    m: usize,
    accuracy: usize,
) -> Result<f64, FormsError> {
    let st = centered(m, accuracy)?;
    let d: Vec<Vec<CQuaternion>> = (0..3)
        .map(|l| fd_derivative(grid, u.as_slice(), l, &st))
        .collect();
    let tu = apply_t_direct(field, [&d[0], &d[1], &d[2]], m);
    Ok(tu.iter().map(|x| x.norm_sqr()).sum::<f64>() * grid.cell_volume())
}

/// `lhs >= rhs` up to `1e-9` absolute plus `1e-6` relative.
pub fn holds_at_least(lhs: f64, rhs: f64) -> bool {
    lhs >= rhs - (1e-9 + 1e-6 * rhs.abs())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoercivityProbe {
    pub t: f64,
    /// `min Re b(u,u) / ||u||^2` over the suite.
    pub ratio_l2: f64,
    /// `min Re b(u,u) / ||u||_{D^m}^2` over the suite.
    pub ratio_dm: f64,
    /// `max ||T u||^2 / Re b(u,u)` over the suite.
    pub ratio_t: f64,
    /// Worst `|b(u,u)| / (||u||_{D^m}^2)` over the suite.
    pub ratio_cont: f64,
    pub bound_l2: f64,
    pub bound_dm: f64,
    pub bound_t: Option<f64>,
    pub bound_cont: f64,
    pub pass_l2: bool,
    pub pass_dm: bool,
    pub pass_t: bool,
    pub pass_cont: bool,
}

impl CoercivityProbe {
    pub fn pass(&self) -> bool {
        self.pass_l2 && self.pass_dm && self.pass_t && self.pass_cont
    }
}

struct Sample {
    re_b: f64,
    abs_b: f64,
    l2: f64,
    dm: f64,
    t: f64,
}

/// Empirical coercivity and continuity ratios of `b_{jt}` over a suite of
/// test functions. Each inequality is checked per function in the absolute
/// form `lhs >= bound * rhs - tol`.
pub fn coercivity_probe(
    field: &CoefficientField,
    grid: &Grid,
    s: SlicePoint,
    suite: &[GridFunction],
    m: usize,
    accuracy: usize,
    report: &ConstantsReport,
) -> Result<CoercivityProbe, FormsError> {
    let q = s.value();
    let samples: Vec<Sample> = suite
        .par_iter()
        .map(|u| {
            let b = bilinear_form(field, grid, q, u, u, m, accuracy)?;
            Ok(Sample {
                re_b: b.re(),
                abs_b: b.norm(),
                l2: u.l2_norm(grid).powi(2),
                dm: dm_norm_sq(grid, u, m, accuracy)?,
                t: t_norm_sq(field, grid, u, m, accuracy)?,
            })
        })
        .collect::<Result<_, FormsError>>()?;

    let t2 = s.t() * s.t();
    let bound_dm = report.c_t / 2.0 - report.m;
    let bound_t = (report.c1 > 0.0).then(|| 1.0 / report.c1);
    let bound_cont = report.continuity_constant(q);

    let mut probe = CoercivityProbe {
        t: s.t(),
        ratio_l2: f64::INFINITY,
        ratio_dm: f64::INFINITY,
        ratio_t: 0.0,
        ratio_cont: 0.0,
        bound_l2: t2,
        bound_dm,
        bound_t,
        bound_cont,
        pass_l2: true,
        pass_dm: true,
        pass_t: true,
        pass_cont: true,
    };
    for x in &samples {
        if x.l2 > 0.0 {
            probe.ratio_l2 = probe.ratio_l2.min(x.re_b / x.l2);
        }
        if x.dm > 0.0 {
            probe.ratio_dm = probe.ratio_dm.min(x.re_b / x.dm);
            probe.ratio_cont = probe.ratio_cont.max(x.abs_b / x.dm);
        }
        if x.re_b > 0.0 {
            probe.ratio_t = probe.ratio_t.max(x.t / x.re_b);
        }
        probe.pass_l2 &= holds_at_least(x.re_b, t2 * x.l2);
        probe.pass_dm &= holds_at_least(x.re_b, bound_dm * x.dm);
        probe.pass_cont &= holds_at_least(bound_cont * x.dm, x.abs_b);
        probe.pass_t &= match bound_t {
            Some(c) => holds_at_least(c * x.re_b, x.t),
            None => false,
        };
    }
    Ok(probe)
}
