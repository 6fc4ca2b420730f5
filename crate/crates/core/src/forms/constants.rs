use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{leibniz_square, FormsError};
use crate::domain::{CoefficientField, DomainSpec, Grid, WeightFunction};
use crate::qalgebra::Quaternion;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypotheses {
    pub c_t_positive: bool,
    pub gap_positive: bool,
}

/// Bounds on the pieces of `|b_s(u, v)|` in units of
/// `||u||_{D^m} ||v||_{D^m}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Continuity {
    /// Sum of the multinomial weights in the derivative-of-coefficient terms.
    pub weight_sum: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
    /// `C4` at `Re(s) = 0`.
    #[serde(rename = "C4")]
    pub c4: f64,
    /// Growth of `C4` per unit `|Re(s)|`.
    pub c4_re_slope: f64,
}

/// Every derived constant, with the hypothesis flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub order: usize,
    pub bounded_case: bool,
    #[serde(rename = "C_T")]
    pub c_t: f64,
    #[serde(rename = "M")]
    pub m: f64,
    /// `(C_T - 2M) / (2 C_T)`; meaningful only when `gap_positive`.
    #[serde(rename = "C1")]
    pub c1: f64,
    /// `2 max(1, 1/sqrt(C1))`, absent when the gap hypothesis fails.
    #[serde(rename = "Theta")]
    pub theta: Option<f64>,
    #[serde(rename = "C_Omega")]
    pub c_omega: f64,
    #[serde(rename = "C_Omega_analytic")]
    pub c_omega_analytic: f64,
    #[serde(rename = "C_Omega_discrete")]
    pub c_omega_discrete: f64,
    #[serde(rename = "K_Omega")]
    pub k_omega: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "K_m")]
    pub k_m: f64,
    #[serde(rename = "K_m_Omega")]
    pub k_m_omega: f64,
    #[serde(rename = "C_phi")]
    pub c_phi: Option<f64>,
    #[serde(rename = "K_m_phi_lambda")]
    pub k_m_phi_lambda: Option<f64>,
    /// `sup |d^t a_l / dx_l^t|` over `t = 1..=m`, all `l`.
    pub sup_own_derivative: f64,
    pub hypotheses: Hypotheses,
    pub continuity: Continuity,
    pub warnings: Vec<String>,
}

impl ConstantsReport {
    /// `C(s) = C1 + C2 + C3 + C4(s) + |s|^2 K(m,Omega)^2`.
    pub fn continuity_constant(&self, s: Quaternion) -> f64 {
        let c = &self.continuity;
        c.c1 + c.c2
            + c.c3
            + c.c4
            + c.c4_re_slope * s.re().abs()
            + s.norm_sqr() * self.k_m_omega.powi(2)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `h_m(x) = sum_{|b| = m} x^b`, the complete homogeneous polynomial.
fn complete_homogeneous(x: [f64; 3], m: usize) -> f64 {
    let mut s = 0.0;
    for b1 in 0..=m {
        for b2 in 0..=m - b1 {
            let b3 = m - b1 - b2;
            s += x[0].powi(b1 as i32) * x[1].powi(b2 as i32) * x[2].powi(b3 as i32);
        }
    }
    s
}

fn symbol_ratio(x: [f64; 3], m: usize) -> f64 {
    complete_homogeneous(x, m) / x.iter().map(|v| v.powi(m as i32)).sum::<f64>()
}

/// The smallest `K` with `sum_{|b|=m} xi^{2b} <= K sum_l xi_l^{2m}`.
///
/// With `x_l = xi_l^2` this is the maximum of `h_m(x) / sum x_l^m` over the
/// simplex, found by a lattice scan followed by pattern search.
pub fn k_symbol(m: usize) -> f64 {
    const LATTICE: usize = 60;
    let mut best = ([1.0 / 3.0; 3], symbol_ratio([1.0 / 3.0; 3], m));
    for i in 0..=LATTICE {
        for j in 0..=LATTICE - i {
            let x = [i as f64, j as f64, (LATTICE - i - j) as f64].map(|v| v / LATTICE as f64);
            let r = symbol_ratio(x, m);
            if r > best.1 {
                best = (x, r);
            }
        }
    }
    let mut step = 1.0 / LATTICE as f64;
    while step > 1e-13 {
        let mut moved = false;
        for a in 0..3 {
            for b in 0..3 {
                if a == b {
                    continue;
                }
                let mut x = best.0;
                let d = step.min(x[b]);
                x[a] += d;
                x[b] -= d;
                let r = symbol_ratio(x, m);
                if r > best.1 {
                    best = (x, r);
                    moved = true;
                }
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    best.1
}

/// `K(m)`: run the iterated Poincare expansion on multi-indices and count
/// the largest number of times one order-`m` index is reached.
///
/// Every `|b| < m` is raised along the first axis until `|b| = m`.
pub fn k_repetition_count(m: usize) -> usize {
    use std::collections::BTreeMap;
    let mut hits: BTreeMap<[usize; 3], usize> = BTreeMap::new();
    for total in 0..=m {
        for b1 in 0..=total {
            for b2 in 0..=total - b1 {
                let mut b = [b1, b2, total - b1 - b2];
                while b.iter().sum::<usize>() < m {
                    b[0] += 1;
                }
                *hits.entry(b).or_default() += 1;
            }
        }
    }
    hits.into_values().max().unwrap_or(0)
}

/// Sum of the multinomial weights of the derivative-of-coefficient terms of
/// `b_s`: `(2^m - 1) + (4^m - 3^m) + 6 (4^m - 3^m)`.
pub fn weight_sum(m: usize) -> f64 {
    let p = |b: f64| b.powi(m as i32);
    (p(2.0) - 1.0) + 7.0 * (p(4.0) - p(3.0))
}

/// Poincare constants of the box, continuum and discrete Dirichlet.
fn poincare_constants(domain: &DomainSpec, grid: &Grid) -> (f64, f64) {
    let lengths = domain.bounds.lengths;
    let h = grid.h();
    let analytic = lengths.iter().map(|l| l / PI).fold(0.0, f64::max);
    let discrete = (0..3)
        .map(|k| h[k] / (2.0 * (PI * h[k] / (2.0 * lengths[k])).sin()))
        .fold(0.0, f64::max);
    (analytic, discrete)
}

/// Fills a [`ConstantsReport`]. Unbounded domains need `weight`.
pub fn compute_constants(
    field: &CoefficientField,
    grid: &Grid,
    domain: &DomainSpec,
    m: usize,
    weight: Option<&WeightFunction>,
) -> Result<ConstantsReport, FormsError> {
    if field.order() < m {
        return Err(FormsError::MissingDerivatives {
            have: field.order(),
            need: m,
        });
    }
    let bounded = domain.is_bounded();
    if !bounded && weight.is_none() {
        return Err(FormsError::WeightRequired);
    }
    let mut warnings = Vec::new();

    let c_t = (0..3)
        .map(|l| field.inf_sq(l))
        .fold(f64::INFINITY, f64::min);
    let own = |t0: usize| {
        (0..3)
            .flat_map(|l| (t0..=m).map(move |t| (l, t)))
            .map(|(l, t)| field.sup_abs(l, l, t))
            .fold(0.0, f64::max)
    };
    let sup_own = own(1);
    let sup_own_all = own(0);
    let sup_cross = (0..3)
        .flat_map(|l| (0..3).flat_map(move |j| (1..=m).map(move |t| (l, j, t))))
        .map(|(l, j, t)| field.sup_abs(j, l, t))
        .fold(0.0, f64::max);
    let sup_a = (0..3).map(|l| field.sup_sq(l).sqrt()).fold(0.0, f64::max);
    let sup_a_sq_deriv = (0..3)
        .flat_map(|l| (1..=m).map(move |t| (l, t)))
        .map(|(l, t)| {
            (0..field.len())
                .map(|k| leibniz_square(field, l, t, k).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);

    let (c_an, c_disc) = poincare_constants(domain, grid);
    if (c_disc - c_an).abs() > 0.05 * c_an {
        warnings.push(format!(
            "discrete Poincare constant {c_disc:.6} differs from L/pi = {c_an:.6} by more than 5%; grid is under-resolved"
        ));
    }
    let c_omega = c_an.min(c_disc);
    let k_omega = c_omega.max(c_omega.powi(m as i32));
    let k = k_symbol(m);
    let k_m = k_repetition_count(m) as f64;
    let k_m_omega = k * k_m * k_omega;

    let (m_const, c_phi, k_phi) = if bounded {
        (k_m_omega.powi(2) * sup_own.powi(2), None, None)
    } else {
        let phi = weight.expect("checked above");
        let mut c_phi: f64 = 0.0;
        for slot in 0..field.len() {
            let w = phi.eval(grid.slot_position(slot));
            for l in 0..3 {
                for j in 0..3 {
                    for t in 1..=m {
                        c_phi = c_phi.max(field.deriv(j, l, t)[slot].powi(2) / w);
                    }
                }
            }
        }
        let r = 2.0 / phi.lambda;
        let k_phi = k_m * c_phi * r.powi(2 * m as i32).max(r * r);
        (k_m * sup_own.powi(2) + k_phi, Some(c_phi), Some(k_phi))
    };

    let gap = c_t / 2.0 - m_const;
    let hypotheses = Hypotheses {
        c_t_positive: c_t > 0.0,
        gap_positive: c_t > 0.0 && gap > 0.0,
    };
    let c1 = (c_t - 2.0 * m_const) / (2.0 * c_t);
    let theta = hypotheses
        .gap_positive
        .then(|| 2.0 * 1f64.max(1.0 / c1.sqrt()));

    let ws = weight_sum(m);
    let continuity = Continuity {
        weight_sum: ws,
        c1: (0..3).map(|l| field.sup_sq(l)).fold(0.0, f64::max),
        c2: ws * k_m_omega * sup_a_sq_deriv,
        c3: ws * k_m_omega * sup_own_all.powi(2),
        c4: ws * k_m_omega * sup_cross.powi(2),
        c4_re_slope: ws * k_m_omega * sup_a,
    };

    Ok(ConstantsReport {
        order: m,
        bounded_case: bounded,
        c_t,
        m: m_const,
        c1,
        theta,
        c_omega,
        c_omega_analytic: c_an,
        c_omega_discrete: c_disc,
        k_omega,
        k,
        k_m,
        k_m_omega,
        c_phi,
        k_m_phi_lambda: k_phi,
        sup_own_derivative: sup_own,
        hypotheses,
        continuity,
        warnings,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    pub explanation: String,
}

/// Rounds away representation noise for messages: `0.5 - 0.6` prints as
/// `-0.1`.
fn tidy(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powi(12 - x.abs().log10().ceil() as i32);
    (x * scale).round() / scale
}

/// Passes iff `C_T > 0` and `C_T/2 - M > 0`.
pub fn hypothesis_check(report: &ConstantsReport) -> Verdict {
    let gap = report.c_t / 2.0 - report.m;
    if report.c_t <= 0.0 {
        return Verdict {
            pass: false,
            explanation: format!("C_T = {} is not positive", tidy(report.c_t)),
        };
    }
    if gap <= 0.0 {
        return Verdict {
            pass: false,
            explanation: format!(
                "C_T/2 − M = {} is not positive (C_T/2 = {}, M = {})",
                tidy(gap),
                tidy(report.c_t / 2.0),
                tidy(report.m)
            ),
        };
    }
    Verdict {
        pass: true,
        explanation: format!(
            "C_T = {} > 0 and C_T/2 − M = {} > 0",
            tidy(report.c_t),
            tidy(gap)
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Coefficient;

    fn constant_report(c: f64, m: usize) -> ConstantsReport {
        let d = DomainSpec::unit_box();
        let g = Grid::build(&d, [9; 3]).unwrap();
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
        compute_constants(&f, &g, &d, m, None).unwrap()
    }

    #[test]
    fn constant_coefficients() {
        let r = constant_report(1.0, 1);
        assert_eq!(r.m, 0.0);
        assert_eq!(r.c_t, 1.0);
        assert_eq!(r.c1, 0.5);
        assert!((r.theta.unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        assert!(hypothesis_check(&r).pass);
        assert_eq!(constant_report(3.0, 2).c_t, 9.0);
    }

    #[test]
    fn symbol_constant_small_orders() {
        assert!((k_symbol(1) - 1.0).abs() < 1e-14);
        assert!((k_symbol(2) - 2.0).abs() < 1e-10);
        // the centroid gives C(m+2, 2) / 3 and is the maximizer
        assert!((k_symbol(3) - 10.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn repetition_count() {
        assert_eq!(k_repetition_count(1), 2);
        assert_eq!(k_repetition_count(3), 4);
    }

    #[test]
    fn gap_failure_message() {
        let mut r = constant_report(1.0, 1);
        r.m = 0.6;
        let v = hypothesis_check(&r);
        assert!(!v.pass);
        assert!(
            v.explanation.contains("C_T/2 − M = -0.1"),
            "{}",
            v.explanation
        );
    }

    #[test]
    fn unbounded_needs_weight() {
        let b = crate::domain::BoxBounds::new([-3.0; 3], [6.0; 3]);
        let d = DomainSpec::exterior_ball([0.0; 3], 1.0, b);
        let g = Grid::build(&d, [9; 3]).unwrap();
        let f = CoefficientField::sample(
            &g,
            &[
                Coefficient::Constant(1.0),
                Coefficient::Constant(1.0),
                Coefficient::Constant(1.0),
            ],
            1,
        )
        .unwrap();
        assert_eq!(
            compute_constants(&f, &g, &d, 1, None),
            Err(FormsError::WeightRequired)
        );
    }

    #[test]
    fn report_serializes_with_short_names() {
        let j = constant_report(1.0, 1).to_json();
        for key in [
            "\"C_T\"",
            "\"M\"",
            "\"C1\"",
            "\"Theta\"",
            "\"K_Omega\"",
            "\"K_m_Omega\"",
        ] {
            assert!(j.contains(key), "{key} missing");
        }
    }
}
