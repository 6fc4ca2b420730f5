use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use quatfrac::fracpow::{QuadratureSpec, Variant};
use quatfrac::resolvent::{ScanOptions, SolveMethod, SolveOptions};
use quatfrac::{BoxBounds, Coefficient, CoefficientFamily, DomainSpec, Quaternion, WeightFamily};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub threads: Option<usize>,
    pub domain: DomainSection,
    pub grid: GridSection,
    pub coefficients: CoefficientSection,
    pub weight: Option<WeightSection>,
    pub operator: OperatorSection,
    #[serde(default)]
    pub check: CheckSection,
    #[serde(default)]
    pub solve: SolveSection,
    #[serde(default)]
    pub resolvent_scan: ScanSection,
    #[serde(default)]
    pub fracpow: FracPowSection,
    #[serde(default)]
    pub oracle_compare: OracleSection,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum DomainKindName {
    Box,
    ExteriorBall,
    HalfSpace,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub kind: DomainKindName,
    #[serde(default)]
    pub origin: [f64; 3],
    #[serde(default = "unit_lengths")]
    pub lengths: [f64; 3],
    pub center: Option<[f64; 3]>,
    pub radius: Option<f64>,
    pub point: Option<[f64; 3]>,
    pub normal: Option<[f64; 3]>,
}

fn unit_lengths() -> [f64; 3] {
    [1.0; 3]
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Nodes per axis, boundary nodes included.
    pub nodes: [usize; 3],
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSection {
    pub a1: CoefficientFamily,
    pub a2: CoefficientFamily,
    pub a3: CoefficientFamily,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSection {
    pub family: WeightFamily,
    pub lambda: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSection {
    pub m: usize,
    #[serde(default = "two")]
    pub stencil_order: usize,
}

fn two() -> usize {
    2
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckSection {
    /// Slice coordinates of the coercivity probe.
    pub t: Vec<f64>,
    pub bumps: usize,
}

impl Default for CheckSection {
    fn default() -> Self {
        Self {
            t: vec![0.5, 2.0],
            bumps: 50,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum RhsKind {
    /// `F = Q_s v` for a smooth `v`, so the error is known.
    #[default]
    Manufactured,
    /// A smooth field as `F`, no reference solution.
    Smooth,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSection {
    pub s: [f64; 4],
    pub rhs: RhsKind,
    pub tol: f64,
    pub max_iter: usize,
    pub method: SolveMethod,
}

impl Default for SolveSection {
    fn default() -> Self {
        let d = SolveOptions::default();
        Self {
            s: [0.0, 1.0, 0.0, 0.0],
            rhs: RhsKind::default(),
            tol: d.tol,
            max_iter: d.max_iter,
            method: d.method,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    pub j: [f64; 3],
    pub t: Option<Vec<f64>>,
    /// Log-spaced points, used when `t` is absent.
    pub t_range: Option<TRange>,
    pub power_tol: f64,
    pub power_max_iter: usize,
    pub slack: f64,
    pub tol: f64,
}

impl Default for ScanSection {
    fn default() -> Self {
        let d = ScanOptions::default();
        Self {
            j: [1.0, 0.0, 0.0],
            t: None,
            t_range: None,
            power_tol: d.power_tol,
            power_max_iter: d.power_max_iter,
            slack: d.slack,
            tol: d.solve.tol,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FracPowSection {
    pub alpha: f64,
    pub variant: Variant,
    pub j: [f64; 3],
    pub t_max: Option<f64>,
    pub panels_per_decade: usize,
    pub nodes_per_panel: usize,
    pub tail_tol: f64,
    pub tail_correction: bool,
    pub tol: f64,
    /// Replace `T` by `lambda I` and compare with `lambda^alpha v`.
    pub surrogate_lambda: Option<f64>,
}

impl Default for FracPowSection {
    fn default() -> Self {
        let d = QuadratureSpec::default();
        Self {
            alpha: d.alpha,
            variant: Variant::Left,
            j: [1.0, 0.0, 0.0],
            t_max: d.t_max,
            panels_per_decade: d.panels_per_decade,
            nodes_per_panel: d.nodes_per_panel,
            tail_tol: d.tail_tol,
            tail_correction: d.tail_correction,
            tol: d.solve.tol,
            surrogate_lambda: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub samples: usize,
    /// Largest real dimension `8N` the dense solve accepts.
    pub dense_cap: usize,
    pub tolerance: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            samples: 20,
            dense_cap: 4096,
            tolerance: 1e-8,
        }
    }
}

pub fn load(path: &Path) -> Result<RunConfig> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let cfg: RunConfig =
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn unit_direction(v: [f64; 3], key: &str) -> Result<Quaternion> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !(n > 0.0) || !n.is_finite() {
        bail!("{key}: direction must be nonzero and finite");
    }
    Ok(Quaternion::imaginary(v.map(|x| x / n)))
}

impl RunConfig {
    /// Checks every section up front so no command starts on a bad config.
    pub fn validate(&self) -> Result<()> {
        self.domain_spec()?.validate().context("domain")?;
        self.coefficients()?;
        if self.operator.m == 0 {
            bail!("operator.m: order must be at least 1");
        }
        if self.operator.stencil_order == 0 || self.operator.stencil_order % 2 == 1 {
            bail!("operator.stencil_order: must be a positive even number");
        }
        if self.grid.nodes.iter().any(|&n| n < 3) {
            bail!("grid.nodes: at least 3 nodes per axis");
        }
        if let Some(w) = &self.weight {
            if !(w.lambda > 0.0) {
                bail!("weight.lambda: must be positive");
            }
        }
        if self.threads == Some(0) {
            bail!("threads: must be positive");
        }
        self.scan_ts()?;
        self.scan_j()?;
        self.fracpow_j()?;
        let a = self.fracpow.alpha;
        if !(a > 0.0 && a < 1.0) {
            bail!("fracpow.alpha: must lie in (0, 1)");
        }
        if self.fracpow.panels_per_decade < 4 {
            bail!("fracpow.panels_per_decade: at least 4");
        }
        if self.check.t.iter().any(|t| !(t.is_finite() && *t != 0.0)) {
            bail!("check.t: entries must be finite and nonzero");
        }
        Ok(())
    }

    pub fn domain_spec(&self) -> Result<DomainSpec> {
        let d = &self.domain;
        let bounds = BoxBounds::new(d.origin, d.lengths);
        let need = |v: Option<[f64; 3]>, key: &str| {
            v.with_context(|| format!("domain.{key} is required for this kind"))
        };
        Ok(match d.kind {
            DomainKindName::Box => DomainSpec::boxed(bounds),
            DomainKindName::ExteriorBall => DomainSpec::exterior_ball(
                need(d.center, "center")?,
                d.radius
                    .context("domain.radius is required for this kind")?,
                bounds,
            ),
            DomainKindName::HalfSpace => {
                DomainSpec::half_space(need(d.point, "point")?, need(d.normal, "normal")?, bounds)
            }
        })
    }

    pub fn coefficients(&self) -> Result<[Coefficient; 3]> {
        let c = &self.coefficients;
        Ok([
            c.a1.clone().into_coefficient().context("coefficients.a1")?,
            c.a2.clone().into_coefficient().context("coefficients.a2")?,
            c.a3.clone().into_coefficient().context("coefficients.a3")?,
        ])
    }

    pub fn solve_options(&self, tol: f64) -> SolveOptions {
        SolveOptions {
            tol,
            seed: self.seed,
            ..SolveOptions::default()
        }
    }

    pub fn scan_ts(&self) -> Result<Vec<f64>> {
        let s = &self.resolvent_scan;
        let ts = match (&s.t, &s.t_range) {
            (Some(t), None) => t.clone(),
            (None, Some(r)) => {
                if !(r.start > 0.0 && r.stop > r.start) || r.count < 2 {
                    bail!("resolvent_scan.t_range: need 0 < start < stop and count >= 2");
                }
                let (a, b) = (r.start.ln(), r.stop.ln());
                (0..r.count)
                    .map(|k| match k {
                        0 => r.start,
                        k if k == r.count - 1 => r.stop,
                        k => (a + (b - a) * k as f64 / (r.count - 1) as f64).exp(),
                    })
                    .collect()
            }
            (None, None) => vec![0.1, 1.0, 10.0, 100.0],
            (Some(_), Some(_)) => bail!("resolvent_scan: give either t or t_range, not both"),
        };
        Ok(ts)
    }

    pub fn scan_j(&self) -> Result<Quaternion> {
        unit_direction(self.resolvent_scan.j, "resolvent_scan.j")
    }

    pub fn fracpow_j(&self) -> Result<Quaternion> {
        unit_direction(self.fracpow.j, "fracpow.j")
    }
}
