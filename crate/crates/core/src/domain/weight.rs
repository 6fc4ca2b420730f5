use serde::{Deserialize, Serialize};

use super::grid::{Grid, GridFunction};
use super::jet::Jet;
use super::spec::{unit, DomainKind, DomainSpec};
use super::DomainError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightFamily {
    /// `exp(-lambda |x - P|) / |x - P|^2`, for exterior balls.
    Hill,
    /// `exp(-lambda <x - P, v/|v|>)`, for half-spaces.
    Ridge,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightFunction {
    pub family: WeightFamily,
    pub lambda: f64,
    pub p: [f64; 3],
    /// Unit direction, ridge only.
    pub v: [f64; 3],
}

impl WeightFunction {
    /// The weight of `family` anchored at the exterior point of `domain`.
    pub fn for_domain(
        family: WeightFamily,
        lambda: f64,
        domain: &DomainSpec,
    ) -> Result<Self, DomainError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(DomainError::InvalidSpec(format!(
                "weight decay rate must be positive (got {lambda})"
            )));
        }
        match (family, domain.kind) {
            (WeightFamily::Hill, DomainKind::ExteriorBall { center, .. }) => Ok(Self {
                family,
                lambda,
                p: center,
                v: [0.0; 3],
            }),
            (WeightFamily::Ridge, DomainKind::HalfSpace { point, normal }) => Ok(Self {
                family,
                lambda,
                p: point,
                v: unit(normal),
            }),
            _ => Err(DomainError::IncompatibleWeight {
                family,
                domain: kind_name(&domain.kind),
            }),
        }
    }

    /// Generic evaluation so the same formula serves values and derivatives.
    pub fn eval_jet(&self, x: &[Jet; 3]) -> Jet {
        let d: [Jet; 3] = std::array::from_fn(|k| x[k] - self.p[k]);
        match self.family {
            WeightFamily::Hill => {
                let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                (r2.sqrt() * (-self.lambda)).exp() / r2
            }
            WeightFamily::Ridge => {
                let s = d[0] * self.v[0] + d[1] * self.v[1] + d[2] * self.v[2];
                (s * (-self.lambda)).exp()
            }
        }
    }

    pub fn eval(&self, x: [f64; 3]) -> f64 {
        let r: [f64; 3] = std::array::from_fn(|k| x[k] - self.p[k]);
        match self.family {
            WeightFamily::Hill => {
                let r2: f64 = r.iter().map(|v: &f64| v * v).sum();
                (-self.lambda * r2.sqrt()).exp() / r2
            }
            WeightFamily::Ridge => {
                let s: f64 = (0..3).map(|k| r[k] * self.v[k]).sum();
                (-self.lambda * s).exp()
            }
        }
    }
}

fn kind_name(k: &DomainKind) -> &'static str {
    match k {
        DomainKind::Box => "box",
        DomainKind::ExteriorBall { .. } => "exterior_ball",
        DomainKind::HalfSpace { .. } => "half_space",
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoincareCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// Relative slack granted to `rhs`.
    pub tol: f64,
    pub pass: bool,
}

/// Compares `sum |u|^p phi h^3` with `(p/lambda)^p sum |grad_h u|^p phi h^3`,
/// using forward differences of the zero-extended `u`.
pub fn weighted_poincare_check(
    grid: &Grid,
    phi: &WeightFunction,
    p: f64,
    u: &GridFunction,
) -> Result<PoincareCheck, DomainError> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(DomainError::InvalidSpec(format!(
            "exponent p must be >= 1 (got {p})"
        )));
    }
    if u.len() != grid.len() {
        return Err(DomainError::Shape {
            expected: grid.len(),
            got: u.len(),
        });
    }
    let h = grid.h();
    let mut lhs = 0.0;
    let mut grad_sum = 0.0;
    for node in 0..grid.len_nodes() {
        let here = u.at_node(grid, node);
        let mut g2 = 0.0;
        for (axis, hk) in h.iter().enumerate() {
            let next = grid
                .shift(node, axis, 1)
                .map_or(crate::qalgebra::CQuaternion::ZERO, |n| u.at_node(grid, n));
            g2 += (next - here).norm_sqr() / (hk * hk);
        }
        let u2 = here.norm_sqr();
        if u2 == 0.0 && g2 == 0.0 {
            continue;
        }
        let w = phi.eval(grid.position(node));
        lhs += u2.powf(0.5 * p) * w;
        grad_sum += g2.powf(0.5 * p) * w;
    }
    let vol = grid.cell_volume();
    let lhs = lhs * vol;
    let rhs = (p / phi.lambda).powf(p) * grad_sum * vol;
    let tol = 1e-9 + p * phi.lambda * grid.h_max();
    Ok(PoincareCheck {
        lhs,
        rhs,
        tol,
        pass: lhs <= rhs * (1.0 + tol),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayCheck {
    /// Largest `(lhs - rhs) / |rhs|` over the samples; `<= 0` means satisfied.
    pub worst: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Samples `d/dr [r^2 phi(P + r w)] <= -lambda r^2 phi(P + r w)` along the
/// given unit directions and radii. Hill weights only.
pub fn hill_radial_condition(
    phi: &WeightFunction,
    dirs: &[[f64; 3]],
    radii: &[f64],
) -> Result<DecayCheck, DomainError> {
    if phi.family != WeightFamily::Hill {
        return Err(DomainError::InvalidSpec(
            "radial condition applies to hill weights".into(),
        ));
    }
    let mut worst = f64::NEG_INFINITY;
    let mut samples = 0;
    for w in dirs {
        let w = unit(*w);
        for &r in radii {
            let rj = Jet::variable(r, 2);
            let x: [Jet; 3] = std::array::from_fn(|k| rj * w[k] + phi.p[k]);
            let g = phi.eval_jet(&x) * rj * rj;
            let lhs = g.derivative(1);
            let rhs = -phi.lambda * g.value();
            worst = worst.max((lhs - rhs) / rhs.abs());
            samples += 1;
        }
    }
    Ok(DecayCheck {
        worst,
        samples,
        pass: worst <= 1e-12,
    })
}

/// Checks `d phi / dv <= -lambda phi` at every interior node. Ridge only.
pub fn ridge_condition(phi: &WeightFunction, grid: &Grid) -> Result<DecayCheck, DomainError> {
    if phi.family != WeightFamily::Ridge {
        return Err(DomainError::InvalidSpec(
            "directional condition applies to ridge weights".into(),
        ));
    }
    let mut worst = f64::NEG_INFINITY;
    for s in 0..grid.len() {
        let x = grid.slot_position(s);
        let t = Jet::variable(0.0, 2);
        let xj: [Jet; 3] = std::array::from_fn(|k| t * phi.v[k] + x[k]);
        let g = phi.eval_jet(&xj);
        let rhs = -phi.lambda * g.value();
        worst = worst.max((g.derivative(1) - rhs) / rhs.abs());
    }
    Ok(DecayCheck {
        worst,
        samples: grid.len(),
        pass: worst <= 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::spec::BoxBounds;

    #[test]
    fn zero_function_passes_trivially() {
        let b = BoxBounds::new([0.0; 3], [2.0; 3]);
        let d = DomainSpec::half_space([0.0; 3], [1.0, 0.0, 0.0], b);
        let g = Grid::build(&d, [6, 6, 6]).unwrap();
        let phi = WeightFunction::for_domain(WeightFamily::Ridge, 1.0, &d).unwrap();
        let c = weighted_poincare_check(&g, &phi, 2.0, &GridFunction::zeros(g.len())).unwrap();
        assert_eq!(c.lhs, 0.0);
        assert_eq!(c.rhs, 0.0);
        assert!(c.pass);
    }

    #[test]
    fn family_domain_compatibility() {
        let b = BoxBounds::unit();
        let hs = DomainSpec::half_space([0.0; 3], [1.0, 0.0, 0.0], b);
        assert!(matches!(
            WeightFunction::for_domain(WeightFamily::Hill, 1.0, &hs),
            Err(DomainError::IncompatibleWeight { .. })
        ));
        assert!(WeightFunction::for_domain(WeightFamily::Ridge, 0.0, &hs).is_err());
        assert!(
            WeightFunction::for_domain(WeightFamily::Ridge, 1.0, &DomainSpec::unit_box()).is_err()
        );
    }

    #[test]
    fn hill_value() {
        let b = BoxBounds::new([-3.0; 3], [6.0; 3]);
        let d = DomainSpec::exterior_ball([0.0; 3], 1.0, b);
        let phi = WeightFunction::for_domain(WeightFamily::Hill, 2.0, &d).unwrap();
        assert!((phi.eval([2.0, 0.0, 0.0]) - (-4.0f64).exp() / 4.0).abs() < 1e-16);
        let j = phi.eval_jet(&std::array::from_fn(|k| {
            Jet::constant([0.0, 2.0, 0.0][k], 1)
        }));
        assert!((j.value() - phi.eval([0.0, 2.0, 0.0])).abs() < 1e-16);
    }
}
