use serde::{Deserialize, Serialize};

use super::DomainError;

/// Axis-aligned box `origin + [0, L1] x [0, L2] x [0, L3]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxBounds {
    pub origin: [f64; 3],
    pub lengths: [f64; 3],
}

impl BoxBounds {
    pub fn new(origin: [f64; 3], lengths: [f64; 3]) -> Self {
        Self { origin, lengths }
    }

    pub fn unit() -> Self {
        Self::new([0.0; 3], [1.0; 3])
    }

    pub fn center(&self) -> [f64; 3] {
        std::array::from_fn(|k| self.origin[k] + 0.5 * self.lengths[k])
    }

    pub fn contains_open(&self, x: [f64; 3]) -> bool {
        (0..3).all(|k| x[k] > self.origin[k] && x[k] < self.origin[k] + self.lengths[k])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    Box,
    /// `|x - center| > radius`, truncated to the box.
    ExteriorBall {
        center: [f64; 3],
        radius: f64,
    },
    /// `<x - point, normal> > 0`, truncated to the box.
    HalfSpace {
        point: [f64; 3],
        normal: [f64; 3],
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    /// The box itself for `Box`; the truncation box otherwise.
    pub bounds: BoxBounds,
}

impl DomainSpec {
    pub fn boxed(bounds: BoxBounds) -> Self {
        Self {
            kind: DomainKind::Box,
            bounds,
        }
    }

    pub fn unit_box() -> Self {
        Self::boxed(BoxBounds::unit())
    }

    pub fn exterior_ball(center: [f64; 3], radius: f64, bounds: BoxBounds) -> Self {
        Self {
            kind: DomainKind::ExteriorBall { center, radius },
            bounds,
        }
    }

    pub fn half_space(point: [f64; 3], normal: [f64; 3], bounds: BoxBounds) -> Self {
        Self {
            kind: DomainKind::HalfSpace { point, normal },
            bounds,
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self.kind, DomainKind::Box)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        let b = &self.bounds;
        if b.lengths.iter().any(|l| !(l.is_finite() && *l > 0.0))
            || b.origin.iter().any(|o| !o.is_finite())
        {
            return Err(DomainError::InvalidSpec(format!(
                "box lengths must be positive and finite (got {:?})",
                b.lengths
            )));
        }
        match self.kind {
            DomainKind::Box => {}
            DomainKind::ExteriorBall { center, radius } => {
                if !(radius.is_finite() && radius > 0.0) || center.iter().any(|c| !c.is_finite()) {
                    return Err(DomainError::InvalidSpec(format!(
                        "exterior ball needs a finite center and positive radius (got {radius})"
                    )));
                }
            }
            DomainKind::HalfSpace { point, normal } => {
                let n2: f64 = normal.iter().map(|v| v * v).sum();
                if !(n2 > 0.0 && n2.is_finite()) || point.iter().any(|c| !c.is_finite()) {
                    return Err(DomainError::InvalidSpec(
                        "half-space normal must be a nonzero finite vector".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Membership of the (truncated) open domain.
    pub fn contains(&self, x: [f64; 3]) -> bool {
        if !self.bounds.contains_open(x) {
            return false;
        }
        match self.kind {
            DomainKind::Box => true,
            DomainKind::ExteriorBall { center, radius } => dist(x, center) > radius,
            DomainKind::HalfSpace { point, normal } => {
                (0..3).map(|k| (x[k] - point[k]) * normal[k]).sum::<f64>() > 0.0
            }
        }
    }

    /// Signed clearance of the ball `B(c, rho)` from the non-box part of the
    /// boundary; positive when the ball avoids the excluded region.
    pub fn clearance(&self, c: [f64; 3], rho: f64) -> f64 {
        match self.kind {
            DomainKind::Box => f64::INFINITY,
            DomainKind::ExteriorBall { center, radius } => dist(c, center) - rho - radius,
            DomainKind::HalfSpace { point, normal } => {
                let n = unit(normal);
                (0..3).map(|k| (c[k] - point[k]) * n[k]).sum::<f64>() - rho
            }
        }
    }

    /// The exterior point `P` of the property-(R) families.
    pub fn anchor(&self) -> Option<[f64; 3]> {
        match self.kind {
            DomainKind::Box => None,
            DomainKind::ExteriorBall { center, .. } => Some(center),
            DomainKind::HalfSpace { point, .. } => Some(point),
        }
    }
}

pub(crate) fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>().sqrt()
}

pub(crate) fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    std::array::from_fn(|k| v[k] / n)
}
