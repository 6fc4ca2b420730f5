//! Quaternions, complexified quaternions and the slice structure.
//!
//! A [`Quaternion`] is `s0 + s1 e1 + s2 e2 + s3 e3` with
//! `e1^2 = e2^2 = e3^2 = e1 e2 e3 = -1`. A [`CQuaternion`] is an element
//! `q1 + i q2` of the complexified algebra, where `i` is a central complex
//! unit commuting with `e1`, `e2`, `e3`. Grid functions take values in
//! [`CQuaternion`], stored as eight contiguous reals (`q1` then `q2`).

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("slice power is undefined at the branch point s = 0")]
    BranchPoint,
    #[error(
        "imaginary unit must be purely imaginary with modulus 1 (got re = {re}, |j| = {norm})"
    )]
    NotAUnit { re: f64, norm: f64 },
}

/// Real quaternion `s0 + s1 e1 + s2 e2 + s3 e3`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[repr(C)]
pub struct Quaternion {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl Quaternion {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Self = Self::new(1.0, 0.0, 0.0, 0.0);
    pub const E1: Self = Self::new(0.0, 1.0, 0.0, 0.0);
    pub const E2: Self = Self::new(0.0, 0.0, 1.0, 0.0);
    pub const E3: Self = Self::new(0.0, 0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(s0: f64, s1: f64, s2: f64, s3: f64) -> Self {
        Self { s0, s1, s2, s3 }
    }

    #[inline]
    pub const fn real(s0: f64) -> Self {
        Self::new(s0, 0.0, 0.0, 0.0)
    }

    /// Pure imaginary quaternion from a vector in R^3.
    #[inline]
    pub const fn imaginary(v: [f64; 3]) -> Self {
        Self::new(0.0, v[0], v[1], v[2])
    }

    /// Imaginary unit `e_l` for `l` in `0..3`.
    pub fn unit(l: usize) -> Self {
        match l {
            0 => Self::E1,
            1 => Self::E2,
            2 => Self::E3,
            _ => panic!("quaternion unit index {l} out of range"),
        }
    }

    #[inline]
    pub fn re(&self) -> f64 {
        self.s0
    }

    #[inline]
    pub fn im(&self) -> [f64; 3] {
        [self.s1, self.s2, self.s3]
    }

    #[inline]
    pub fn conj(&self) -> Self {
        Self::new(self.s0, -self.s1, -self.s2, -self.s3)
    }

    #[inline]
    pub fn norm_sqr(&self) -> f64 {
        self.s0 * self.s0 + self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    #[inline]
    pub fn scale(&self, a: f64) -> Self {
        Self::new(a * self.s0, a * self.s1, a * self.s2, a * self.s3)
    }

    /// Multiplicative inverse `conj(s) / |s|^2`; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        let n = self.norm_sqr();
        (n > 0.0).then(|| self.conj().scale(1.0 / n))
    }

    #[inline]
    pub fn to_array(self) -> [f64; 4] {
        [self.s0, self.s1, self.s2, self.s3]
    }

    #[inline]
    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }
}

/// Hamilton product.
#[inline]
pub fn qmul(a: Quaternion, b: Quaternion) -> Quaternion {
    Quaternion {
        s0: a.s0 * b.s0 - a.s1 * b.s1 - a.s2 * b.s2 - a.s3 * b.s3,
        s1: a.s0 * b.s1 + a.s1 * b.s0 + a.s2 * b.s3 - a.s3 * b.s2,
        s2: a.s0 * b.s2 - a.s1 * b.s3 + a.s2 * b.s0 + a.s3 * b.s1,
        s3: a.s0 * b.s3 + a.s1 * b.s2 - a.s2 * b.s1 + a.s3 * b.s0,
    }
}

impl Add for Quaternion {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(
            self.s0 + o.s0,
            self.s1 + o.s1,
            self.s2 + o.s2,
            self.s3 + o.s3,
        )
    }
}

impl Sub for Quaternion {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(
            self.s0 - o.s0,
            self.s1 - o.s1,
            self.s2 - o.s2,
            self.s3 - o.s3,
        )
    }
}

impl Neg for Quaternion {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.s0, -self.s1, -self.s2, -self.s3)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        qmul(self, o)
    }
}

impl Mul<f64> for Quaternion {
    type Output = Self;
    #[inline]
    fn mul(self, a: f64) -> Self {
        self.scale(a)
    }
}

impl AddAssign for Quaternion {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl SubAssign for Quaternion {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:+}e1 {:+}e2 {:+}e3",
            self.s0, self.s1, self.s2, self.s3
        )
    }
}

/// Complexified quaternion `q1 + i q2`, `i` central.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[repr(C)]
pub struct CQuaternion {
    pub q1: Quaternion,
    pub q2: Quaternion,
}

impl CQuaternion {
    pub const ZERO: Self = Self::new(Quaternion::ZERO, Quaternion::ZERO);
    pub const ONE: Self = Self::new(Quaternion::ONE, Quaternion::ZERO);
    /// The central complex unit `i`.
    pub const I: Self = Self::new(Quaternion::ZERO, Quaternion::ONE);

    #[inline]
    pub const fn new(q1: Quaternion, q2: Quaternion) -> Self {
        Self { q1, q2 }
    }

    #[inline]
    pub const fn from_quaternion(q: Quaternion) -> Self {
        Self::new(q, Quaternion::ZERO)
    }

    #[inline]
    pub const fn real(a: f64) -> Self {
        Self::from_quaternion(Quaternion::real(a))
    }

    /// `i^k` for any integer power.
    pub fn i_pow(k: i64) -> Self {
        match k.rem_euclid(4) {
            0 => Self::ONE,
            1 => Self::I,
            2 => Self::real(-1.0),
            _ => -Self::I,
        }
    }

    /// `|u|^2 = |q1|^2 + |q2|^2`.
    #[inline]
    pub fn norm_sqr(&self) -> f64 {
        self.q1.norm_sqr() + self.q2.norm_sqr()
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    #[inline]
    pub fn scale(&self, a: f64) -> Self {
        Self::new(self.q1.scale(a), self.q2.scale(a))
    }

    /// Right scalar multiplication `u q = q1 q + i q2 q`.
    #[inline]
    pub fn right_mul(&self, q: Quaternion) -> Self {
        Self::new(self.q1 * q, self.q2 * q)
    }

    /// Left scalar multiplication `q u = q q1 + i q q2`.
    #[inline]
    pub fn left_mul(&self, q: Quaternion) -> Self {
        Self::new(q * self.q1, q * self.q2)
    }

    /// The anti-automorphism `q1 + i q2 -> conj(q1) - i conj(q2)`.
    ///
    /// Left multiplication by `u.star()` is the transpose of left
    /// multiplication by `u` in the real 8-dimensional representation.
    #[inline]
    pub fn star(&self) -> Self {
        Self::new(self.q1.conj(), -self.q2.conj())
    }

    #[inline]
    pub fn to_array(self) -> [f64; 8] {
        let a = self.q1.to_array();
        let b = self.q2.to_array();
        [a[0], a[1], a[2], a[3], b[0], b[1], b[2], b[3]]
    }

    #[inline]
    pub fn from_array(a: [f64; 8]) -> Self {
        Self::new(
            Quaternion::new(a[0], a[1], a[2], a[3]),
            Quaternion::new(a[4], a[5], a[6], a[7]),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.q1.is_finite() && self.q2.is_finite()
    }

    /// The 8x8 real matrix of `w -> self * w` acting on `to_array` coordinates.
    pub fn left_matrix(&self) -> [[f64; 8]; 8] {
        let mut m = [[0.0; 8]; 8];
        for (col, basis) in (0..8).map(|k| {
            let mut e = [0.0; 8];
            e[k] = 1.0;
            (k, CQuaternion::from_array(e))
        }) {
            let image = cqmul(*self, basis).to_array();
            for (row, v) in image.iter().enumerate() {
                m[row][col] = *v;
            }
        }
        m
    }
}

/// `(q1 + i q2)(w1 + i w2) = (q1 w1 - q2 w2) + i (q1 w2 + q2 w1)`.
#[inline]
pub fn cqmul(u: CQuaternion, v: CQuaternion) -> CQuaternion {
    CQuaternion::new(u.q1 * v.q1 - u.q2 * v.q2, u.q1 * v.q2 + u.q2 * v.q1)
}

/// Quaternion-valued inner product `conj(q1) w1 + conj(q2) w2`.
///
/// Conjugate-linear on the left and right-linear on the right:
/// `inner(u, v q) = inner(u, v) q`.
#[inline]
pub fn inner(u: CQuaternion, v: CQuaternion) -> Quaternion {
    u.q1.conj() * v.q1 + u.q2.conj() * v.q2
}

/// Real part of [`inner`], i.e. the Euclidean dot product of the eight
/// real components.
#[inline]
pub fn inner_re(u: CQuaternion, v: CQuaternion) -> f64 {
    let a = u.to_array();
    let b = v.to_array();
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

impl Add for CQuaternion {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.q1 + o.q1, self.q2 + o.q2)
    }
}

impl Sub for CQuaternion {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.q1 - o.q1, self.q2 - o.q2)
    }
}

impl Neg for CQuaternion {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.q1, -self.q2)
    }
}

impl Mul for CQuaternion {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        cqmul(self, o)
    }
}

impl Mul<f64> for CQuaternion {
    type Output = Self;
    #[inline]
    fn mul(self, a: f64) -> Self {
        self.scale(a)
    }
}

impl AddAssign for CQuaternion {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        self.q1 += o.q1;
        self.q2 += o.q2;
    }
}

impl SubAssign for CQuaternion {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        self.q1 -= o.q1;
        self.q2 -= o.q2;
    }
}

impl MulAssign<f64> for CQuaternion {
    #[inline]
    fn mul_assign(&mut self, a: f64) {
        *self = self.scale(a);
    }
}

impl From<Quaternion> for CQuaternion {
    fn from(q: Quaternion) -> Self {
        Self::from_quaternion(q)
    }
}

/// A point `s = j t` on the imaginary axis of the slice `C_j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlicePoint {
    j: Quaternion,
    t: f64,
}

impl SlicePoint {
    /// `j` must be purely imaginary with `|j| = 1` up to a few ulp; it is
    /// renormalized on construction.
    pub fn new(j: Quaternion, t: f64) -> Result<Self, AlgebraError> {
        let norm = j.norm();
        if j.s0 != 0.0 || (norm - 1.0).abs() > 1e-12 {
            return Err(AlgebraError::NotAUnit { re: j.s0, norm });
        }
        Ok(Self {
            j: j.scale(1.0 / norm),
            t,
        })
    }

    /// Normalizes an arbitrary nonzero direction in R^3 to a unit `j`.
    pub fn from_direction(dir: [f64; 3], t: f64) -> Result<Self, AlgebraError> {
        let q = Quaternion::imaginary(dir);
        let norm = q.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(AlgebraError::NotAUnit { re: 0.0, norm });
        }
        Self::new(q.scale(1.0 / norm), t)
    }

    #[inline]
    pub fn j(&self) -> Quaternion {
        self.j
    }

    #[inline]
    pub fn t(&self) -> f64 {
        self.t
    }

    /// The quaternion `s = j t`.
    #[inline]
    pub fn value(&self) -> Quaternion {
        self.j.scale(self.t)
    }

    /// Same slice, different coordinate.
    pub fn with_t(&self, t: f64) -> Self {
        Self { j: self.j, t }
    }
}

/// Principal power `s^beta` of `s = j t` on the slice plane `C_j`.
///
/// The argument of `s` is taken in `(-pi, pi]`, so `arg(j t) = pi/2` for
/// `t > 0` and `-pi/2` for `t < 0`.
pub fn slice_power(s: SlicePoint, beta: f64) -> Result<Quaternion, AlgebraError> {
    let t = s.t();
    if t == 0.0 {
        return Err(AlgebraError::BranchPoint);
    }
    let arg = if t > 0.0 { FRAC_PI_2 } else { -FRAC_PI_2 };
    let modulus = t.abs().powf(beta);
    let (sin, cos) = (beta * arg).sin_cos();
    Ok(Quaternion::real(modulus * cos) + s.j().scale(modulus * sin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EPS: f64 = f64::EPSILON;

    fn close(a: Quaternion, b: Quaternion, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn quat() -> impl Strategy<Value = Quaternion> {
        prop::array::uniform4(-10.0f64..10.0).prop_map(Quaternion::from_array)
    }

    fn cquat() -> impl Strategy<Value = CQuaternion> {
        prop::array::uniform8(-10.0f64..10.0).prop_map(CQuaternion::from_array)
    }

    #[test]
    fn unit_relations() {
        assert_eq!(Quaternion::E1 * Quaternion::E2, Quaternion::E3);
        assert_eq!(Quaternion::E2 * Quaternion::E3, Quaternion::E1);
        assert_eq!(Quaternion::E3 * Quaternion::E1, Quaternion::E2);
        let minus_one = Quaternion::real(-1.0);
        for l in 0..3 {
            assert_eq!(Quaternion::unit(l) * Quaternion::unit(l), minus_one);
        }
        assert_eq!(Quaternion::E1 * Quaternion::E2 * Quaternion::E3, minus_one);
    }

    #[test]
    fn difference_of_squares() {
        let a = Quaternion::ONE + Quaternion::E1;
        let b = Quaternion::ONE - Quaternion::E1;
        assert_eq!(a * b, Quaternion::real(2.0));
    }

    #[test]
    fn complex_unit_squares_to_minus_one() {
        assert_eq!(CQuaternion::I * CQuaternion::I, CQuaternion::real(-1.0));
        let ie1 = CQuaternion::new(Quaternion::ZERO, Quaternion::E1);
        let e2 = CQuaternion::from_quaternion(Quaternion::E2);
        assert_eq!(ie1 * e2, CQuaternion::new(Quaternion::ZERO, Quaternion::E3));
    }

    #[test]
    fn i_powers_cycle() {
        assert_eq!(CQuaternion::i_pow(0), CQuaternion::ONE);
        assert_eq!(CQuaternion::i_pow(1), CQuaternion::I);
        assert_eq!(CQuaternion::i_pow(5), CQuaternion::I);
        assert_eq!(CQuaternion::i_pow(-1), -CQuaternion::I);
        assert_eq!(CQuaternion::i_pow(2), CQuaternion::real(-1.0));
    }

    #[test]
    fn inner_examples() {
        let u = CQuaternion::new(Quaternion::ONE, Quaternion::E1);
        assert_eq!(inner(u, u), Quaternion::real(2.0));
        let e1 = CQuaternion::from_quaternion(Quaternion::E1);
        let e2 = CQuaternion::from_quaternion(Quaternion::E2);
        assert_eq!(inner(e1, e2), -Quaternion::E3);
    }

    #[test]
    fn star_is_transpose_of_left_multiplication() {
        let u = CQuaternion::from_array([0.3, -1.2, 0.7, 2.0, -0.4, 0.9, 1.1, -0.5]);
        let m = u.left_matrix();
        let mt = u.star().left_matrix();
        for r in 0..8 {
            for c in 0..8 {
                assert!((m[r][c] - mt[c][r]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn slice_power_examples() {
        let j = SlicePoint::new(Quaternion::E2, 1.0).unwrap();
        let p = slice_power(j, 2.0).unwrap();
        assert!(close(p, Quaternion::real(-1.0), 4.0 * EPS));

        let s = SlicePoint::new(Quaternion::E1, 4.0).unwrap();
        let p = slice_power(s, 0.5).unwrap();
        let r2 = std::f64::consts::SQRT_2;
        assert!(close(p, Quaternion::new(r2, r2, 0.0, 0.0), 8.0 * EPS));
    }

    #[test]
    fn slice_power_matches_complex_principal_power() {
        // Under span{1, j} ~ C the point s = -j t (t > 0) is -i t with
        // principal argument -pi/2; compare against the complex polar form.
        let alpha: f64 = 0.5;
        let beta = alpha - 1.0;
        let t: f64 = 1.0;
        let (re, im) = {
            let (r, theta) = (t, -std::f64::consts::FRAC_PI_2);
            let m = r.powf(beta);
            (m * (beta * theta).cos(), m * (beta * theta).sin())
        };
        let j = Quaternion::imaginary([1.0, 2.0, -2.0]).scale(1.0 / 3.0);
        let s = SlicePoint::new(j, -t).unwrap();
        let p = slice_power(s, beta).unwrap();
        assert!(close(p, Quaternion::real(re) + j.scale(im), 4.0 * EPS));
        // cos(pi/4) + j sin(pi/4): the argument of -j is -pi/2 and beta < 0
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(p, Quaternion::real(h) + j.scale(h), 4.0 * EPS));
    }

    #[test]
    fn slice_power_rejects_branch_point() {
        let s = SlicePoint::new(Quaternion::E1, 0.0).unwrap();
        assert_eq!(slice_power(s, 0.3), Err(AlgebraError::BranchPoint));
    }

    #[test]
    fn slice_point_rejects_non_units() {
        assert!(SlicePoint::new(Quaternion::new(0.1, 1.0, 0.0, 0.0), 1.0).is_err());
        assert!(SlicePoint::new(Quaternion::imaginary([2.0, 0.0, 0.0]), 1.0).is_err());
        assert!(SlicePoint::from_direction([0.0, 0.0, 0.0], 1.0).is_err());
        let s = SlicePoint::from_direction([1.0, 1.0, 0.0], 2.0).unwrap();
        let j2 = s.j() * s.j();
        assert!(close(j2, Quaternion::real(-1.0), 4.0 * EPS));
        assert_eq!(s.value().re(), 0.0);
    }

    proptest! {
        #[test]
        fn qmul_associative(a in quat(), b in quat(), c in quat()) {
            let lhs = (a * b) * c;
            let rhs = a * (b * c);
            let scale = a.norm() * b.norm() * c.norm();
            prop_assert!((lhs - rhs).norm() <= 8.0 * EPS * scale.max(1.0) * 4.0);
        }

        #[test]
        fn cqmul_associative(a in cquat(), b in cquat(), c in cquat()) {
            let lhs = (a * b) * c;
            let rhs = a * (b * c);
            let scale = a.norm() * b.norm() * c.norm();
            prop_assert!((lhs - rhs).norm() <= 8.0 * EPS * scale.max(1.0) * 8.0);
        }

        #[test]
        fn conj_is_anti_homomorphism(a in quat(), b in quat()) {
            let lhs = (a * b).conj();
            let rhs = b.conj() * a.conj();
            prop_assert!((lhs - rhs).norm() <= 8.0 * EPS * (a.norm() * b.norm()).max(1.0));
        }

        #[test]
        fn norm_is_multiplicative(a in quat(), b in quat()) {
            let lhs = (a * b).norm();
            let rhs = a.norm() * b.norm();
            prop_assert!((lhs - rhs).abs() <= 8.0 * EPS * rhs.max(1.0));
        }

        #[test]
        fn conj_times_self_is_real(a in quat()) {
            let p = a.conj() * a;
            prop_assert!(p.im().iter().all(|x| x.abs() <= 4.0 * EPS * a.norm_sqr().max(1.0)));
            prop_assert!((p.re() - a.norm_sqr()).abs() <= 4.0 * EPS * a.norm_sqr().max(1.0));
        }

        #[test]
        fn i_is_central(u in cquat(), v in cquat()) {
            let lhs = (CQuaternion::I * u) * v;
            let rhs = CQuaternion::I * (u * v);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn inner_is_right_linear(u in cquat(), v in cquat(), q in quat()) {
            let lhs = inner(u, v.right_mul(q));
            let rhs = inner(u, v) * q;
            let scale = u.norm() * v.norm() * q.norm();
            prop_assert!((lhs - rhs).norm() <= 4.0 * EPS * 16.0 * scale.max(1.0));
        }

        #[test]
        fn inner_self_is_modulus(u in cquat()) {
            let p = inner(u, u);
            prop_assert!((p.re() - u.norm_sqr()).abs() <= 4.0 * EPS * u.norm_sqr().max(1.0));
            prop_assert!(p.im().iter().all(|x| x.abs() <= 4.0 * EPS * u.norm_sqr().max(1.0)));
        }

        #[test]
        fn slice_powers_add(
            dir in prop::array::uniform3(-1.0f64..1.0),
            t in prop_oneof![-50.0f64..-0.01, 0.01f64..50.0],
            b1 in -2.0f64..2.0,
            b2 in -2.0f64..2.0,
        ) {
            prop_assume!(dir.iter().map(|x| x * x).sum::<f64>() > 1e-4);
            let s = SlicePoint::from_direction(dir, t).unwrap();
            let lhs = slice_power(s, b1).unwrap() * slice_power(s, b2).unwrap();
            let rhs = slice_power(s, b1 + b2).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
        }
    }
}
