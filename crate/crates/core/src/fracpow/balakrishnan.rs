use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quadrature::{gauss_legendre, layout, mapped, Panel, PanelKind};
use super::FracPowError;
use crate::domain::{CoefficientField, Grid, GridFunction};
use crate::operator::{assemble_qs, assemble_t, QOperator};
use crate::qalgebra::{slice_power, CQuaternion, Quaternion, SlicePoint};
use crate::resolvent::{symmetry_defect, Resolvent, ResolventError, SolveOptions, SYMMETRY_TOL};
use crate::vecops::{axpy, norm, rel_diff, right_mul};

/// Largest automatic truncation point.
const T_MAX_CAP: f64 = 1e15;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub alpha: f64,
    /// Truncation point; chosen from the tail bound when absent.
    pub t_max: Option<f64>,
    pub panels_per_decade: usize,
    pub nodes_per_panel: usize,
    /// Dyadic levels of the graded panels below `tau = 1/8`.
    pub graded_levels: usize,
    /// Tail tolerance relative to `||T v||`.
    pub tail_tol: f64,
    /// Adds the two leading terms of the large-`|t|` expansion beyond `t_max`.
    pub tail_correction: bool,
    /// `Theta` from the constants report; needed without tail correction.
    pub theta: Option<f64>,
    pub solve: SolveOptions,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            t_max: None,
            panels_per_decade: 6,
            nodes_per_panel: 8,
            graded_levels: 30,
            tail_tol: 1e-8,
            tail_correction: true,
            theta: None,
            solve: SolveOptions::default(),
        }
    }
}

impl QuadratureSpec {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), FracPowError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(FracPowError::Alpha(self.alpha));
        }
        if self.panels_per_decade < 4 {
            return Err(FracPowError::Spec(format!(
                "panels_per_decade = {} < 4",
                self.panels_per_decade
            )));
        }
        if self.nodes_per_panel == 0 {
            return Err(FracPowError::Spec("nodes_per_panel = 0".into()));
        }
        if !(self.tail_tol > 0.0) {
            return Err(FracPowError::Spec(format!("tail_tol = {}", self.tail_tol)));
        }
        if let Some(t) = self.t_max {
            if !(t > 1.0) || !t.is_finite() {
                return Err(FracPowError::Spec(format!("t_max = {t} must exceed 1")));
            }
        }
        Ok(())
    }
}

/// Which printed integral is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `S_L^{-1}(s,T) applied to (T v) s^(alpha-1)`.
    #[default]
    Left,
    /// `(S_R^{-1}(s,T) T v) s^(alpha-1)`.
    Right,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PanelRow {
    pub sign: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    /// `(1/2pi) sum |w_k| ||F(t_k)||` over the panel nodes.
    pub abs_sum: f64,
    pub contribution_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FracPowDiagnostics {
    pub alpha: f64,
    pub variant: Variant,
    pub t_max: f64,
    pub norm_t_bound: f64,
    pub panels: usize,
    pub solves: usize,
    pub max_residual: f64,
    pub max_iterations: usize,
    pub tail_correction: bool,
    /// Norm of the added tail terms.
    pub tail_norm: f64,
    /// Bound on what the quadrature leaves out beyond `t_max`, relative to
    /// `||T v||`.
    pub remainder_bound: f64,
    /// `Theta t_max^(alpha-1) / (pi (1-alpha))`, when `Theta` is known.
    pub theta_tail_bound: Option<f64>,
    /// Sum of all `abs_sum`; finite for an absolutely convergent integral.
    pub abs_integral: f64,
    pub rows: Vec<PanelRow>,
}

impl FracPowDiagnostics {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "alpha = {}  variant = {:?}", self.alpha, self.variant);
        let _ = writeln!(
            out,
            "t_max = {:.16e}  ||T|| <= {:.16e}",
            self.t_max, self.norm_t_bound
        );
        let _ = writeln!(out, "panels = {}  solves = {}", self.panels, self.solves);
        let _ = writeln!(
            out,
            "max residual = {:.16e}  max iterations = {}",
            self.max_residual, self.max_iterations
        );
        let _ = writeln!(
            out,
            "tail correction = {}  tail norm = {:.16e}  remainder bound = {:.16e}",
            self.tail_correction, self.tail_norm, self.remainder_bound
        );
        if let Some(b) = self.theta_tail_bound {
            let _ = writeln!(out, "Theta tail bound = {b:.16e}");
        }
        let _ = writeln!(out, "sum of |integrand| = {:.16e}", self.abs_integral);
        let _ = writeln!(out, "sign,t_lo,t_hi,abs_sum,contribution_norm");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.sign, r.t_lo, r.t_hi, r.abs_sum, r.contribution_norm
            );
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FracPowOutput {
    pub value: GridFunction,
    pub diagnostics: FracPowDiagnostics,
}

struct Plan {
    t_max: f64,
    remainder: f64,
    theta_tail: Option<f64>,
}

/// Remainder of the large-`|t|` series from `n = start` on, relative to
/// `||T v||`: `(1/pi) sum_n ||T||^n t^(alpha-1-n) / (n+1-alpha)`.
fn series_remainder(norm_t: f64, alpha: f64, t: f64, start: i32) -> f64 {
    if t <= norm_t {
        return f64::INFINITY;
    }
    let n = start as f64;
    norm_t.powi(start) * t.powf(alpha - 1.0 - n) / (PI * (n + 1.0 - alpha) * (1.0 - norm_t / t))
}

fn plan(spec: &QuadratureSpec, norm_t: f64) -> Result<Plan, FracPowError> {
    let a = spec.alpha;
    let theta_tail = |t: f64| spec.theta.map(|th| th * t.powf(a - 1.0) / (PI * (1.0 - a)));
    let bound = |t: f64| -> Result<f64, FracPowError> {
        if spec.tail_correction {
            Ok(series_remainder(norm_t, a, t, 2))
        } else {
            theta_tail(t).ok_or(FracPowError::MissingTheta)
        }
    };
    let t_max = match spec.t_max {
        Some(t) => t,
        None => {
            let floor = 10f64.max(2.0 * norm_t);
            let need = if spec.tail_correction {
                (2.0 * norm_t * norm_t / (PI * (3.0 - a) * spec.tail_tol)).powf(1.0 / (3.0 - a))
            } else {
                let th = spec.theta.ok_or(FracPowError::MissingTheta)?;
                (th / (PI * (1.0 - a) * spec.tail_tol)).powf(1.0 / (1.0 - a))
            };
            (floor.max(need) * (1.0 + 1e-9)).min(T_MAX_CAP)
        }
    };
    let remainder = bound(t_max)?;
    if !(remainder <= spec.tail_tol) {
        return Err(FracPowError::TailUnmet {
            t_max,
            bound: remainder,
            tol: spec.tail_tol,
        });
    }
    Ok(Plan {
        t_max,
        remainder,
        theta_tail: theta_tail(t_max),
    })
}

struct Ctx<'a> {
    top: &'a QOperator,
    v: &'a [CQuaternion],
    w: &'a [CQuaternion],
    j: Quaternion,
    alpha: f64,
    variant: Variant,
    symmetric: bool,
    opts: SolveOptions,
}

struct NodeValue {
    f: Vec<CQuaternion>,
    residual: f64,
    iterations: usize,
}

impl Ctx<'_> {
    /// Integrand at signed `t`, with `s = -j t`.
    ///
    /// On graded panels the factor `|t|^(alpha-1)` is left out (it cancels
    /// against the Jacobian) and the integrand is taken in the bounded form
    /// `-((S^{-1} v) s - v) s^(alpha-1)`.
    fn eval(&self, t: f64, graded: bool) -> Result<NodeValue, ResolventError> {
        let sp = SlicePoint::new(self.j, -t)?;
        let s = sp.value();
        let mut sigma = slice_power(sp, self.alpha - 1.0)?;
        if graded {
            sigma = sigma.scale(t.abs().powf(1.0 - self.alpha));
        }
        let r = Resolvent::with_symmetry(self.top, s, self.symmetric, self.opts)?;
        let (mut f, rep) = match (self.variant, graded) {
            (Variant::Left, false) => r.s_left_reported(&right_mul(self.w, sigma))?,
            (Variant::Right, false) => {
                let (x, rep) = r.s_right_reported(self.w)?;
                (right_mul(&x, sigma), rep)
            }
            (Variant::Left, true) => {
                let (mut x, rep) = r.s_left_reported(&right_mul(self.v, s * sigma))?;
                axpy(-1.0, &right_mul(self.v, sigma), &mut x);
                (x, rep)
            }
            (Variant::Right, true) => {
                let (x, rep) = r.s_right_reported(self.v)?;
                let mut y = right_mul(&x, s);
                axpy(-1.0, self.v, &mut y);
                (right_mul(&y, sigma), rep)
            }
        };
        f.iter_mut().for_each(|z| *z = -*z);
        Ok(NodeValue {
            f,
            residual: rep.residual,
            iterations: rep.iterations,
        })
    }
}

struct PanelSum {
    sum: Vec<CQuaternion>,
    abs_sum: f64,
    residual: f64,
    iterations: usize,
}

fn panel_sum(
    ctx: &Ctx,
    panel: &Panel,
    nodes: &[f64],
    weights: &[f64],
) -> Result<PanelSum, FracPowError> {
    let mut sum = vec![CQuaternion::ZERO; ctx.v.len()];
    let mut abs_sum = 0.0;
    let (mut residual, mut iterations) = (0.0f64, 0usize);
    for (x, wx) in mapped(nodes, weights, panel.a, panel.b) {
        let (t, weight) = match panel.kind {
            PanelKind::Graded => (x.powf(1.0 / ctx.alpha), wx / ctx.alpha),
            PanelKind::Log => (x.exp(), wx * x.exp()),
        };
        let t = panel.sign * t;
        let node = ctx
            .eval(t, panel.kind == PanelKind::Graded)
            .map_err(|source| FracPowError::NodeSolve { t, source })?;
        abs_sum += weight * norm(&node.f);
        axpy(weight, &node.f, &mut sum);
        residual = residual.max(node.residual);
        iterations = iterations.max(node.iterations);
    }
    Ok(PanelSum {
        sum,
        abs_sum,
        residual,
        iterations,
    })
}

/// Pairwise sum in list order.
fn pairwise(parts: &[Vec<CQuaternion>], n: usize) -> Vec<CQuaternion> {
    match parts.len() {
        0 => vec![CQuaternion::ZERO; n],
        1 => parts[0].clone(),
        len => {
            let (l, r) = parts.split_at(len / 2);
            let mut a = pairwise(l, n);
            let b = pairwise(r, n);
            a.iter_mut().zip(&b).for_each(|(x, y)| *x += *y);
            a
        }
    }
}

/// `P_alpha(T) v = (1/2pi) int_{-jR} ... ds_j s^(alpha-1) T v` with
/// `s = -j t`, `ds_j = -dt`.
///
/// On `|t| <= 1` the integrand uses the resolvent identity
/// `S^{-1}(s,T) T v = (S^{-1}(s,T) v) s - v`, so it stays bounded by
/// `|t|^(alpha-1)`; that factor is absorbed by the substitution
/// `|t| = tau^(1/alpha)`. Panels are evaluated in parallel and summed
/// pairwise in panel order, so the result does not depend on scheduling.
pub fn frac_power(
    top: &QOperator,
    v: &GridFunction,
    spec: &QuadratureSpec,
    j: Quaternion,
    variant: Variant,
) -> Result<FracPowOutput, FracPowError> {
    spec.validate()?;
    let j = SlicePoint::new(j, 1.0)?.j();
    if v.len() != top.dim() {
        return Err(FracPowError::Shape {
            expected: top.dim(),
            got: v.len(),
        });
    }
    let norm_t = top.norm_bound();
    let plan = plan(spec, norm_t)?;
    let w = top.apply_slice(v.as_slice());
    let mut diagnostics = FracPowDiagnostics {
        alpha: spec.alpha,
        variant,
        t_max: plan.t_max,
        norm_t_bound: norm_t,
        panels: 0,
        solves: 0,
        max_residual: 0.0,
        max_iterations: 0,
        tail_correction: spec.tail_correction,
        tail_norm: 0.0,
        remainder_bound: plan.remainder,
        theta_tail_bound: plan.theta_tail,
        abs_integral: 0.0,
        rows: Vec::new(),
    };
    if norm(&w) == 0.0 {
        return Ok(FracPowOutput {
            value: GridFunction::zeros(v.len()),
            diagnostics,
        });
    }

    let probe = assemble_qs(top, j)?;
    let symmetric = symmetry_defect(&probe, 10, spec.solve.seed) <= SYMMETRY_TOL;
    let ctx = Ctx {
        top,
        v: v.as_slice(),
        w: &w,
        j,
        alpha: spec.alpha,
        variant,
        symmetric,
        opts: spec.solve,
    };
    let (nodes, weights) = gauss_legendre(spec.nodes_per_panel);
    let panels = layout(plan.t_max, spec.panels_per_decade, spec.graded_levels);
    let sums: Vec<PanelSum> = panels
        .par_iter()
        .map(|p| panel_sum(&ctx, p, &nodes, &weights))
        .collect::<Result<_, _>>()?;

    let scale = 1.0 / (2.0 * PI);
    for (p, s) in panels.iter().zip(&sums) {
        let (t_lo, t_hi) = p.t_range(spec.alpha);
        diagnostics.rows.push(PanelRow {
            sign: p.sign,
            t_lo,
            t_hi,
            abs_sum: scale * s.abs_sum,
            contribution_norm: scale * norm(&s.sum),
        });
        diagnostics.max_residual = diagnostics.max_residual.max(s.residual);
        diagnostics.max_iterations = diagnostics.max_iterations.max(s.iterations);
    }
    diagnostics.panels = panels.len();
    diagnostics.solves = panels.len() * spec.nodes_per_panel;
    diagnostics.abs_integral = diagnostics.rows.iter().map(|r| r.abs_sum).sum();

    let parts: Vec<Vec<CQuaternion>> = sums.into_iter().map(|s| s.sum).collect();
    let mut out = pairwise(&parts, v.len());
    out.iter_mut().for_each(|z| *z = z.scale(scale));

    if spec.tail_correction {
        let (a, tm) = (spec.alpha, plan.t_max);
        let half = a * FRAC_PI_2;
        let tw = top.apply_slice(&w);
        let mut tail = vec![CQuaternion::ZERO; v.len()];
        axpy(
            half.cos() / PI * tm.powf(a - 1.0) / (1.0 - a),
            &w,
            &mut tail,
        );
        axpy(
            half.sin() / PI * tm.powf(a - 2.0) / (2.0 - a),
            &tw,
            &mut tail,
        );
        diagnostics.tail_norm = norm(&tail);
        axpy(1.0, &tail, &mut out);
    }
    Ok(FracPowOutput {
        value: GridFunction::from_vec(out),
        diagnostics,
    })
}

/// `||P_alpha(cT) v - c^alpha P_alpha(T) v|| / ||c^alpha P_alpha(T) v||`,
/// with `cT` assembled from the coefficients `c a_l`. Both coefficient sets
/// are expected to satisfy the coercivity hypotheses.
#[allow(clippy::too_many_arguments)]
pub fn homogeneity_check(
    grid: &Grid,
    field: &CoefficientField,
    m: usize,
    accuracy: usize,
    c: f64,
    v: &GridFunction,
    spec: &QuadratureSpec,
    j: Quaternion,
) -> Result<f64, FracPowError> {
    let top = assemble_t(grid, field, m, accuracy)?;
    let ctop = assemble_t(grid, &field.scaled(c), m, accuracy)?;
    let base = frac_power(&top, v, spec, j, Variant::Left)?.value;
    let scaled = frac_power(&ctop, v, spec, j, Variant::Left)?.value;
    let expect = base.scale(c.powf(spec.alpha));
    Ok(rel_diff(scaled.as_slice(), expect.as_slice()))
}

/// `||P^left v - P^right v|| / ||P^left v||`; `0` when both vanish.
pub fn left_right_agreement(
    top: &QOperator,
    v: &GridFunction,
    spec: &QuadratureSpec,
    j: Quaternion,
) -> Result<f64, FracPowError> {
    let left = frac_power(top, v, spec, j, Variant::Left)?.value;
    let right = frac_power(top, v, spec, j, Variant::Right)?.value;
    Ok(rel_diff(right.as_slice(), left.as_slice()))
}

/// CSV of a grid function over all nodes: index, coordinates, 8 reals.
pub fn node_table(grid: &Grid, f: &GridFunction) -> String {
    let mut out = String::from("node,x,y,z,q1_0,q1_1,q1_2,q1_3,q2_0,q2_1,q2_2,q2_3\n");
    for (node, val) in f.to_nodes(grid).iter().enumerate() {
        let [x, y, z] = grid.position(node);
        let _ = write!(out, "{node},{x:.16e},{y:.16e},{z:.16e}");
        for c in val.to_array() {
            let _ = write!(out, ",{c:.16e}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::scalar_surrogate;

    fn ones(n: usize) -> GridFunction {
        GridFunction::from_vec(
            (0..n)
                .map(|k| {
                    CQuaternion::from_array(std::array::from_fn(|c| {
                        1.0 + 0.1 * ((k * 8 + c) as f64).sin()
                    }))
                })
                .collect(),
        )
    }

    #[test]
    fn scalar_surrogate_gives_lambda_power() {
        for lambda in [0.5, 1.0, 4.0] {
            for alpha in [0.25, 0.5, 0.75] {
                let t = scalar_surrogate(3, lambda);
                let v = ones(3);
                let spec = QuadratureSpec {
                    tail_tol: 1e-12,
                    ..QuadratureSpec::new(alpha)
                };
                let out = frac_power(&t, &v, &spec, Quaternion::E1, Variant::Right).unwrap();
                let expect = v.scale(lambda.powf(alpha));
                let err = rel_diff(out.value.as_slice(), expect.as_slice());
                assert!(err < 1e-8, "lambda={lambda} alpha={alpha} err={err}");
            }
        }
    }

    #[test]
    fn zero_vector_maps_to_zero() {
        let t = scalar_surrogate(2, 1.0);
        let out = frac_power(
            &t,
            &GridFunction::zeros(2),
            &QuadratureSpec::new(0.5),
            Quaternion::E2,
            Variant::Left,
        )
        .unwrap();
        assert!(out.value.as_slice().iter().all(|z| *z == CQuaternion::ZERO));
        assert_eq!(
            left_right_agreement(
                &t,
                &GridFunction::zeros(2),
                &QuadratureSpec::new(0.5),
                Quaternion::E2
            )
            .unwrap(),
            0.0
        );
    }

    #[test]
    fn rejects_bad_alpha_and_short_tail() {
        let t = scalar_surrogate(2, 1.0);
        let v = ones(2);
        assert!(matches!(
            frac_power(
                &t,
                &v,
                &QuadratureSpec::new(1.0),
                Quaternion::E1,
                Variant::Left
            ),
            Err(FracPowError::Alpha(_))
        ));
        let spec = QuadratureSpec {
            t_max: Some(3.0),
            ..QuadratureSpec::new(0.5)
        };
        assert!(matches!(
            frac_power(&t, &v, &spec, Quaternion::E1, Variant::Left),
            Err(FracPowError::TailUnmet { .. })
        ));
        let spec = QuadratureSpec {
            tail_correction: false,
            ..QuadratureSpec::new(0.5)
        };
        assert!(matches!(
            frac_power(&t, &v, &spec, Quaternion::E1, Variant::Left),
            Err(FracPowError::MissingTheta)
        ));
    }

    #[test]
    fn uncorrected_tail_with_theta() {
        let t = scalar_surrogate(1, 2.0);
        let v = ones(1);
        let spec = QuadratureSpec {
            tail_correction: false,
            theta: Some(2.0),
            tail_tol: 1e-4,
            ..QuadratureSpec::new(0.25)
        };
        let out = frac_power(&t, &v, &spec, Quaternion::E3, Variant::Left).unwrap();
        let err = rel_diff(out.value.as_slice(), v.scale(2f64.powf(0.25)).as_slice());
        assert!(err < 1e-4, "{err}");
        assert!(out.diagnostics.theta_tail_bound.unwrap() <= 1e-4);
    }

    #[test]
    fn reproducible_bits() {
        let t = scalar_surrogate(4, 3.0);
        let v = ones(4);
        let spec = QuadratureSpec::new(0.3);
        let a = frac_power(&t, &v, &spec, Quaternion::E1, Variant::Left).unwrap();
        let b = frac_power(&t, &v, &spec, Quaternion::E1, Variant::Left).unwrap();
        assert_eq!(a.value, b.value);
    }
}
