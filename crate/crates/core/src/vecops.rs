//! Level-1 kernels on `CQuaternion` slices viewed as vectors in `R^{8N}`.

use crate::qalgebra::{inner_re, CQuaternion, Quaternion};

#[inline]
pub fn dot(x: &[CQuaternion], y: &[CQuaternion]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| inner_re(*a, *b)).sum()
}

#[inline]
pub fn norm(x: &[CQuaternion]) -> f64 {
    x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// `y += a x`
#[inline]
pub fn axpy(a: f64, x: &[CQuaternion], y: &mut [CQuaternion]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += xi.scale(a);
    }
}

/// `y = x + b y`
#[inline]
pub fn xpby(x: &[CQuaternion], b: f64, y: &mut [CQuaternion]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = *xi + yi.scale(b);
    }
}

#[inline]
pub fn scale(a: f64, x: &mut [CQuaternion]) {
    x.iter_mut().for_each(|v| *v *= a);
}

pub fn sub(x: &[CQuaternion], y: &[CQuaternion]) -> Vec<CQuaternion> {
    x.iter().zip(y).map(|(a, b)| *a - *b).collect()
}

pub fn right_mul(x: &[CQuaternion], q: Quaternion) -> Vec<CQuaternion> {
    x.iter().map(|a| a.right_mul(q)).collect()
}

/// `||x - y|| / ||y||`, with `0/0 = 0`.
pub fn rel_diff(x: &[CQuaternion], y: &[CQuaternion]) -> f64 {
    let d = norm(&sub(x, y));
    let n = norm(y);
    if n == 0.0 {
        if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        d / n
    }
}

/// Flattens to `8N` reals in storage order.
pub fn to_reals(x: &[CQuaternion]) -> Vec<f64> {
    x.iter().flat_map(|a| a.to_array()).collect()
}

pub fn from_reals(r: &[f64]) -> Vec<CQuaternion> {
    r.chunks_exact(8)
        .map(|c| CQuaternion::from_array(c.try_into().expect("chunk of 8")))
        .collect()
}
