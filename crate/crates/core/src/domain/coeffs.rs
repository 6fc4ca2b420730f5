use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::Grid;
use super::jet::{seed, Jet, JET_CAP};
use super::spec::unit;
use super::DomainError;
use crate::stencil;

pub type JetFn = Arc<dyn Fn(&[Jet; 3]) -> Jet + Send + Sync>;
pub type PointFn = Arc<dyn Fn([f64; 3]) -> f64 + Send + Sync>;

/// One real coefficient `a_l`.
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    /// Differentiated exactly through Taylor arithmetic.
    Analytic(JetFn),
    /// Point values only; derivatives by centered second-order differences.
    Sampled(PointFn),
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::Analytic(_) => f.write_str("Analytic(..)"),
            Self::Sampled(_) => f.write_str("Sampled(..)"),
        }
    }
}

impl Coefficient {
    pub fn analytic<F>(f: F) -> Self
    where
        F: Fn(&[Jet; 3]) -> Jet + Send + Sync + 'static,
    {
        Self::Analytic(Arc::new(f))
    }

    pub fn sampled<F>(f: F) -> Self
    where
        F: Fn([f64; 3]) -> f64 + Send + Sync + 'static,
    {
        Self::Sampled(Arc::new(f))
    }

    pub fn eval(&self, x: [f64; 3]) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Analytic(f) => f(&std::array::from_fn(|k| Jet::constant(x[k], 1))).value(),
            Self::Sampled(f) => f(x),
        }
    }

    pub fn provenance(&self) -> Provenance {
        match self {
            Self::Constant(_) | Self::Analytic(_) => Provenance::Analytic,
            Self::Sampled(_) => Provenance::FiniteDifference,
        }
    }
}

/// Built-in coefficient families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientFamily {
    Constant {
        value: f64,
    },
    /// `K + A exp(-lambda |x - P|) exp(-|x - P|^2 / width^2)`.
    Hill {
        #[serde(rename = "K")]
        k: f64,
        #[serde(default = "one")]
        amplitude: f64,
        lambda: f64,
        #[serde(rename = "P")]
        p: [f64; 3],
        #[serde(default = "one")]
        width: f64,
    },
    /// `K + A exp(-lambda <x - P, v/|v|>)`.
    Ridge {
        #[serde(rename = "K")]
        k: f64,
        #[serde(default = "one")]
        amplitude: f64,
        lambda: f64,
        #[serde(rename = "P")]
        p: [f64; 3],
        #[serde(default = "unit_x")]
        direction: [f64; 3],
    },
}

fn one() -> f64 {
    1.0
}

fn unit_x() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

impl CoefficientFamily {
    pub fn into_coefficient(self) -> Result<Coefficient, DomainError> {
        match self {
            Self::Constant { value } => Ok(Coefficient::Constant(value)),
            Self::Hill {
                k,
                amplitude,
                lambda,
                p,
                width,
            } => {
                if !(width > 0.0) {
                    return Err(DomainError::InvalidSpec(
                        "hill width must be positive".into(),
                    ));
                }
                let inv_w2 = 1.0 / (width * width);
                Ok(Coefficient::analytic(move |x| {
                    let d: [Jet; 3] = std::array::from_fn(|i| x[i] - p[i]);
                    let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                    let r = r2.sqrt();
                    (r * (-lambda) - r2 * inv_w2).exp() * amplitude + k
                }))
            }
            Self::Ridge {
                k,
                amplitude,
                lambda,
                p,
                direction,
            } => {
                let n2: f64 = direction.iter().map(|v| v * v).sum();
                if !(n2 > 0.0) {
                    return Err(DomainError::InvalidSpec(
                        "ridge direction must be nonzero".into(),
                    ));
                }
                let v = unit(direction);
                Ok(Coefficient::analytic(move |x| {
                    let s = (x[0] - p[0]) * v[0] + (x[1] - p[1]) * v[1] + (x[2] - p[2]) * v[2];
                    (s * (-lambda)).exp() * amplitude + k
                }))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    FiniteDifference,
}

/// Nodal samples of `a_l` and of the one-directional derivatives
/// `d^t a_l / dx_d^t` for `t <= order`, on interior slots.
#[derive(Clone, Debug)]
pub struct CoefficientField {
    order: usize,
    len: usize,
    provenance: [Provenance; 3],
    // index ((l * 3 + d) * (order + 1) + t) * len + slot
    data: Vec<f64>,
    inf_sq: [f64; 3],
    sup_sq: [f64; 3],
    // index (l * 3 + d) * (order + 1) + t
    sup_abs: Vec<f64>,
}

impl CoefficientField {
    /// Samples all coefficients and derivatives up to `order`.
    pub fn sample(
        grid: &Grid,
        coeffs: &[Coefficient; 3],
        order: usize,
    ) -> Result<Self, DomainError> {
        if order + 1 > JET_CAP {
            return Err(DomainError::OrderTooHigh(order));
        }
        let len = grid.len();
        let mut field = Self {
            order,
            len,
            provenance: std::array::from_fn(|l| coeffs[l].provenance()),
            data: vec![0.0; 9 * (order + 1) * len],
            inf_sq: [0.0; 3],
            sup_sq: [0.0; 3],
            sup_abs: vec![0.0; 9 * (order + 1)],
        };
        let h = grid.h();
        for (l, coeff) in coeffs.iter().enumerate() {
            for slot in 0..len {
                let x = grid.slot_position(slot);
                for d in 0..3 {
                    let derivs = directional(coeff, x, d, order, h[d]);
                    for (t, v) in derivs.iter().enumerate() {
                        if !v.is_finite() {
                            return Err(DomainError::NonFinite {
                                coefficient: l + 1,
                                x,
                            });
                        }
                        let i = field.index(l, d, t) * len + slot;
                        field.data[i] = *v;
                    }
                }
            }
        }
        field.refresh_bounds();
        Ok(field)
    }

    fn index(&self, l: usize, d: usize, t: usize) -> usize {
        (l * 3 + d) * (self.order + 1) + t
    }

    fn refresh_bounds(&mut self) {
        for l in 0..3 {
            let vals = self.values(l);
            let inf = vals.iter().map(|a| a * a).fold(f64::INFINITY, f64::min);
            let sup = vals.iter().map(|a| a * a).fold(0.0, f64::max);
            self.inf_sq[l] = inf;
            self.sup_sq[l] = sup;
            for d in 0..3 {
                for t in 0..=self.order {
                    let i = self.index(l, d, t);
                    self.sup_abs[i] = self
                        .deriv(l, d, t)
                        .iter()
                        .map(|v| v.abs())
                        .fold(0.0, f64::max);
                }
            }
        }
    }

    /// Field with every coefficient multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= c);
        out.refresh_bounds();
        out
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn provenance(&self, l: usize) -> Provenance {
        self.provenance[l]
    }

    /// Values of `a_l` on interior slots.
    pub fn values(&self, l: usize) -> &[f64] {
        self.deriv(l, 0, 0)
    }

    /// `d^t a_l / dx_d^t` on interior slots.
    pub fn deriv(&self, l: usize, d: usize, t: usize) -> &[f64] {
        assert!(t <= self.order, "derivative order {t} not sampled");
        let i = self.index(l, d, t) * self.len;
        &self.data[i..i + self.len]
    }

    /// `inf_x a_l(x)^2` over interior nodes.
    pub fn inf_sq(&self, l: usize) -> f64 {
        self.inf_sq[l]
    }

    pub fn sup_sq(&self, l: usize) -> f64 {
        self.sup_sq[l]
    }

    /// `sup_x |d^t a_l / dx_d^t|` over interior nodes.
    pub fn sup_abs(&self, l: usize, d: usize, t: usize) -> f64 {
        self.sup_abs[self.index(l, d, t)]
    }

    pub fn is_constant(&self) -> bool {
        (0..3).all(|l| (0..3).all(|d| (1..=self.order).all(|t| self.sup_abs(l, d, t) == 0.0)))
    }
}

/// Derivatives `0..=order` of one coefficient along axis `d` at `x`.
fn directional(c: &Coefficient, x: [f64; 3], d: usize, order: usize, h: f64) -> Vec<f64> {
    match c {
        Coefficient::Constant(v) => {
            let mut out = vec![0.0; order + 1];
            out[0] = *v;
            out
        }
        Coefficient::Analytic(f) => {
            let jet = f(&seed(x, d, order + 1));
            (0..=order).map(|t| jet.derivative(t)).collect()
        }
        Coefficient::Sampled(f) => (0..=order)
            .map(|t| {
                let s = stencil::centered(t, 2).expect("accuracy 2 is valid");
                s.taps()
                    .map(|(k, w)| {
                        let mut y = x;
                        y[d] += k as f64 * h;
                        w * f(y)
                    })
                    .sum::<f64>()
                    / h.powi(t as i32)
            })
            .collect(),
    }
}
