//! Truncated univariate Taylor series for exact derivatives of closures.
//!
//! A coefficient closure written against [`Jet`] is evaluated at
//! `x + tau * e_d`; the `t`-th Taylor coefficient times `t!` is the `t`-th
//! directional derivative along `e_d`.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Maximum number of stored Taylor coefficients (derivatives up to order 8).
pub const JET_CAP: usize = 9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    c: [f64; JET_CAP],
    len: usize,
}

impl Jet {
    /// A constant carrying `len` coefficients.
    pub fn constant(v: f64, len: usize) -> Self {
        assert!(
            (1..=JET_CAP).contains(&len),
            "jet length {len} out of range"
        );
        let mut c = [0.0; JET_CAP];
        c[0] = v;
        Self { c, len }
    }

    /// The independent variable `v + tau`.
    pub fn variable(v: f64, len: usize) -> Self {
        let mut j = Self::constant(v, len);
        if len > 1 {
            j.c[1] = 1.0;
        }
        j
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    #[inline]
    pub fn coeff(&self, k: usize) -> f64 {
        if k < self.len {
            self.c[k]
        } else {
            0.0
        }
    }

    /// `k`-th derivative, `k! c_k`.
    pub fn derivative(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|v| v as f64).product();
        self.coeff(k) * fact
    }

    pub fn is_finite(&self) -> bool {
        self.c[..self.len].iter().all(|v| v.is_finite())
    }

    fn lift(&self, v: f64) -> Self {
        Self::constant(v, self.len)
    }

    fn zip(self, o: Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let len = self.len.min(o.len);
        let mut c = [0.0; JET_CAP];
        for (k, ck) in c.iter_mut().enumerate().take(len) {
            *ck = f(self.c[k], o.c[k]);
        }
        Self { c, len }
    }

    pub fn scale(self, a: f64) -> Self {
        let mut r = self;
        for v in r.c[..r.len].iter_mut() {
            *v *= a;
        }
        r
    }

    pub fn exp(self) -> Self {
        let mut e = [0.0; JET_CAP];
        e[0] = self.c[0].exp();
        for k in 1..self.len {
            let s: f64 = (1..=k).map(|j| j as f64 * self.c[j] * e[k - j]).sum();
            e[k] = s / k as f64;
        }
        Self {
            c: e,
            len: self.len,
        }
    }

    pub fn sqrt(self) -> Self {
        let mut s = [0.0; JET_CAP];
        s[0] = self.c[0].sqrt();
        for k in 1..self.len {
            let cross: f64 = (1..k).map(|j| s[j] * s[k - j]).sum();
            s[k] = (self.c[k] - cross) / (2.0 * s[0]);
        }
        Self {
            c: s,
            len: self.len,
        }
    }

    pub fn recip(self) -> Self {
        let mut r = [0.0; JET_CAP];
        r[0] = 1.0 / self.c[0];
        for k in 1..self.len {
            let s: f64 = (1..=k).map(|j| self.c[j] * r[k - j]).sum();
            r[k] = -s * r[0];
        }
        Self {
            c: r,
            len: self.len,
        }
    }

    /// `(sin, cos)` of the series.
    pub fn sin_cos(self) -> (Self, Self) {
        let mut s = [0.0; JET_CAP];
        let mut c = [0.0; JET_CAP];
        (s[0], c[0]) = self.c[0].sin_cos();
        for k in 1..self.len {
            let mut ds = 0.0;
            let mut dc = 0.0;
            for j in 1..=k {
                let a = j as f64 * self.c[j];
                ds += a * c[k - j];
                dc -= a * s[k - j];
            }
            s[k] = ds / k as f64;
            c[k] = dc / k as f64;
        }
        (
            Self {
                c: s,
                len: self.len,
            },
            Self { c, len: self.len },
        )
    }

    pub fn sin(self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(self) -> Self {
        self.sin_cos().1
    }

    pub fn powi(self, n: u32) -> Self {
        let mut acc = self.lift(1.0);
        for _ in 0..n {
            acc = acc * self;
        }
        acc
    }
}

impl Add for Jet {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        self.zip(o, |a, b| a + b)
    }
}

impl Sub for Jet {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self.zip(o, |a, b| a - b)
    }
}

impl Mul for Jet {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let len = self.len.min(o.len);
        let mut c = [0.0; JET_CAP];
        for k in 0..len {
            c[k] = (0..=k).map(|j| self.c[j] * o.c[k - j]).sum();
        }
        Self { c, len }
    }
}

impl Div for Jet {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl Neg for Jet {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Add<f64> for Jet {
    type Output = Self;
    fn add(self, a: f64) -> Self {
        let mut r = self;
        r.c[0] += a;
        r
    }
}

impl Sub<f64> for Jet {
    type Output = Self;
    fn sub(self, a: f64) -> Self {
        self + (-a)
    }
}

impl Mul<f64> for Jet {
    type Output = Self;
    fn mul(self, a: f64) -> Self {
        self.scale(a)
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, j: Jet) -> Jet {
        j + self
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, j: Jet) -> Jet {
        j.scale(self)
    }
}

/// The point `x` seeded along direction `dir` with `len` coefficients.
pub fn seed(x: [f64; 3], dir: usize, len: usize) -> [Jet; 3] {
    std::array::from_fn(|k| {
        if k == dir {
            Jet::variable(x[k], len)
        } else {
            Jet::constant(x[k], len)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_derivatives() {
        // f = x^3 at x = 2: 8, 12, 12, 6, 0
        let x = Jet::variable(2.0, 5);
        let f = x.powi(3);
        let expect = [8.0, 12.0, 12.0, 6.0, 0.0];
        for (k, e) in expect.iter().enumerate() {
            assert!((f.derivative(k) - e).abs() < 1e-12);
        }
    }

    #[test]
    fn elementary_functions_match_closed_forms() {
        let x0 = 0.7;
        let x = Jet::variable(x0, 6);
        let e = x.exp();
        for k in 0..6 {
            assert!((e.derivative(k) - x0.exp()).abs() < 1e-12);
        }
        let (s, c) = x.sin_cos();
        let sin_d = [x0.sin(), x0.cos(), -x0.sin(), -x0.cos()];
        for k in 0..6 {
            assert!((s.derivative(k) - sin_d[k % 4]).abs() < 1e-12);
            assert!((c.derivative(k) - sin_d[(k + 1) % 4]).abs() < 1e-12);
        }
        // sqrt: d/dx x^{1/2} = 1/2 x^{-1/2}, d2 = -1/4 x^{-3/2}
        let r = x.sqrt();
        assert!((r.derivative(1) - 0.5 * x0.powf(-0.5)).abs() < 1e-12);
        assert!((r.derivative(2) + 0.25 * x0.powf(-1.5)).abs() < 1e-12);
        // 1/x: k-th derivative (-1)^k k! x^{-k-1}
        let q = x.recip();
        for k in 0..6 {
            let fact: f64 = (1..=k).map(|v| v as f64).product();
            let expect = (-1f64).powi(k as i32) * fact * x0.powi(-(k as i32) - 1);
            assert!((q.derivative(k) - expect).abs() < 1e-9 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn composite_matches_finite_difference() {
        let f = |x: Jet| (x * x * (-0.3)).exp() * x.sin() + 2.0;
        let fx = |x: f64| (-0.3 * x * x).exp() * x.sin() + 2.0;
        let x0 = 0.4;
        let j = f(Jet::variable(x0, 3));
        let h = 1e-4;
        let d1 = (fx(x0 + h) - fx(x0 - h)) / (2.0 * h);
        let d2 = (fx(x0 + h) - 2.0 * fx(x0) + fx(x0 - h)) / (h * h);
        assert!((j.derivative(1) - d1).abs() < 1e-7);
        assert!((j.derivative(2) - d2).abs() < 1e-5);
    }

    #[test]
    fn seed_marks_one_direction() {
        let p = seed([1.0, 2.0, 3.0], 1, 3);
        assert_eq!(p[0].coeff(1), 0.0);
        assert_eq!(p[1].coeff(1), 1.0);
        assert_eq!(p[2].value(), 3.0);
    }
}
