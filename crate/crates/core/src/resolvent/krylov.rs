//! Conjugate gradients and restarted GMRES on `R^{8N}`, with vectors stored
//! as `CQuaternion` slices.

use crate::operator::QOperator;
use crate::qalgebra::CQuaternion;
use crate::vecops::{axpy, dot, norm, scale, xpby};

/// A real linear map on `R^{8N}`.
pub trait LinOp: Sync {
    fn dim(&self) -> usize;
    fn apply_into(&self, x: &[CQuaternion], y: &mut [CQuaternion]);
}

impl LinOp for QOperator {
    fn dim(&self) -> usize {
        QOperator::dim(self)
    }

    fn apply_into(&self, x: &[CQuaternion], y: &mut [CQuaternion]) {
        QOperator::apply_into(self, x, y)
    }
}

#[derive(Clone, Debug)]
pub struct KrylovOutcome {
    pub x: Vec<CQuaternion>,
    pub iterations: usize,
    /// `||b - A x|| / ||b||`, recomputed from scratch at exit.
    pub residual: f64,
    pub converged: bool,
}

fn true_residual<A: LinOp + ?Sized>(
    a: &A,
    b: &[CQuaternion],
    x: &[CQuaternion],
    bnorm: f64,
) -> f64 {
    let mut ax = vec![CQuaternion::ZERO; b.len()];
    a.apply_into(x, &mut ax);
    let r: Vec<CQuaternion> = b.iter().zip(&ax).map(|(p, q)| *p - *q).collect();
    norm(&r) / bnorm
}

fn zero_rhs(n: usize) -> KrylovOutcome {
    KrylovOutcome {
        x: vec![CQuaternion::ZERO; n],
        iterations: 0,
        residual: 0.0,
        converged: true,
    }
}

/// Conjugate gradients for symmetric positive-definite `a`.
pub fn cg<A: LinOp + ?Sized>(a: &A, b: &[CQuaternion], tol: f64, max_iter: usize) -> KrylovOutcome {
    let n = a.dim();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return zero_rhs(n);
    }
    let mut x = vec![CQuaternion::ZERO; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![CQuaternion::ZERO; n];
    let mut rr = dot(&r, &r);
    let mut it = 0;
    while it < max_iter {
        a.apply_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            break;
        }
        let alpha = rr / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        it += 1;
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() / bnorm <= tol {
            // guard against drift between recursive and true residuals
            let true_rel = true_residual(a, b, &x, bnorm);
            if true_rel <= tol {
                return KrylovOutcome {
                    x,
                    iterations: it,
                    residual: true_rel,
                    converged: true,
                };
            }
            r = b.to_vec();
            let mut ax = vec![CQuaternion::ZERO; n];
            a.apply_into(&x, &mut ax);
            axpy(-1.0, &ax, &mut r);
            p = r.clone();
            rr = dot(&r, &r);
            continue;
        }
        xpby(&r, rr_new / rr, &mut p);
        rr = rr_new;
    }
    let residual = true_residual(a, b, &x, bnorm);
    KrylovOutcome {
        x,
        iterations: it,
        residual,
        converged: residual <= tol,
    }
}

/// Restarted GMRES(`restart`) with modified Gram-Schmidt and Givens
/// rotations.
pub fn gmres<A: LinOp + ?Sized>(
    a: &A,
    b: &[CQuaternion],
    tol: f64,
    max_iter: usize,
    restart: usize,
) -> KrylovOutcome {
    let n = a.dim();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return zero_rhs(n);
    }
    let restart = restart.max(1);
    let mut x = vec![CQuaternion::ZERO; n];
    let mut w = vec![CQuaternion::ZERO; n];
    let mut it = 0;
    while it < max_iter {
        a.apply_into(&x, &mut w);
        let r: Vec<CQuaternion> = b.iter().zip(&w).map(|(p, q)| *p - *q).collect();
        let beta = norm(&r);
        if beta / bnorm <= tol {
            break;
        }
        let mut basis: Vec<Vec<CQuaternion>> = Vec::with_capacity(restart + 1);
        let mut v0 = r;
        scale(1.0 / beta, &mut v0);
        basis.push(v0);
        let mut h = vec![vec![0.0; restart]; restart + 1];
        let (mut cs, mut sn) = (vec![0.0; restart], vec![0.0; restart]);
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..restart {
            if it >= max_iter {
                break;
            }
            a.apply_into(&basis[k], &mut w);
            for (i, vi) in basis.iter().enumerate() {
                h[i][k] = dot(&w, vi);
                axpy(-h[i][k], vi, &mut w);
            }
            let hnext = norm(&w);
            h[k + 1][k] = hnext;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let d = h[k][k].hypot(h[k + 1][k]);
            if d == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = h[k][k] / d;
            sn[k] = h[k + 1][k] / d;
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            it += 1;
            k_used = k + 1;
            if g[k + 1].abs() / bnorm <= tol || hnext == 0.0 {
                break;
            }
            let mut next = w.clone();
            scale(1.0 / hnext, &mut next);
            basis.push(next);
        }
        // back substitution
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in (i + 1)..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (yi, vi) in y.iter().zip(&basis) {
            axpy(*yi, vi, &mut x);
        }
        if k_used == 0 {
            break;
        }
    }
    let residual = true_residual(a, b, &x, bnorm);
    KrylovOutcome {
        x,
        iterations: it,
        residual,
        converged: residual <= tol,
    }
}
