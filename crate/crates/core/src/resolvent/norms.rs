use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::solve::{Resolvent, SolveOptions};
use super::ResolventError;
use crate::forms::{hypothesis_check, ConstantsReport};
use crate::operator::QOperator;
use crate::qalgebra::{CQuaternion, Quaternion, SlicePoint};
use crate::vecops::{norm, scale, sub};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerEstimate {
    /// `||A x_k||` for the final unit iterate; a lower bound on `||A||`.
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration on `A^T A`. Stops when successive estimates agree to
/// `tol` relative.
pub fn power_norm<F, G>(
    n: usize,
    apply: F,
    apply_transpose: G,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<PowerEstimate, ResolventError>
where
    F: Fn(&[CQuaternion]) -> Result<Vec<CQuaternion>, ResolventError>,
    G: Fn(&[CQuaternion]) -> Result<Vec<CQuaternion>, ResolventError>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<CQuaternion> = (0..n)
        .map(|_| CQuaternion::from_array(std::array::from_fn(|_| rng.random_range(-1.0..1.0))))
        .collect();
    let nx = norm(&x);
    scale(1.0 / nx, &mut x);
    let mut prev = 0.0;
    let mut best: f64 = 0.0;
    for it in 1..=max_iter {
        let y = apply(&x)?;
        let sigma = norm(&y);
        best = best.max(sigma);
        if sigma == 0.0 {
            return Ok(PowerEstimate {
                value: 0.0,
                iterations: it,
                converged: true,
            });
        }
        if (sigma - prev).abs() <= tol * sigma {
            return Ok(PowerEstimate {
                value: best,
                iterations: it,
                converged: true,
            });
        }
        prev = sigma;
        let mut z = apply_transpose(&y)?;
        let nz = norm(&z);
        if nz == 0.0 {
            break;
        }
        scale(1.0 / nz, &mut z);
        x = z;
    }
    Ok(PowerEstimate {
        value: best,
        iterations: max_iter,
        converged: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanOptions {
    pub power_tol: f64,
    pub power_max_iter: usize,
    /// Relative slack on every bound comparison.
    pub slack: f64,
    pub seed: u64,
    pub solve: SolveOptions,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            power_tol: 1e-3,
            power_max_iter: 500,
            slack: 1e-3,
            seed: 0,
            solve: SolveOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub t: f64,
    pub q_inv_norm: f64,
    pub sl_norm: f64,
    pub sr_norm: f64,
    /// `||T Q_s^{-1}||`.
    pub tq_inv_norm: f64,
    pub bound_q: f64,
    pub bound_s: f64,
    pub bound_tq: f64,
    pub pass_q: bool,
    pub pass_s: bool,
    pub pass_tq: bool,
    /// Largest `||Q_s x - w|| / ||w||` over the solves of this row.
    pub max_residual: f64,
    pub power_iterations: usize,
    pub error: Option<String>,
}

impl ScanRow {
    fn failed(t: f64, msg: String) -> Self {
        Self {
            t,
            q_inv_norm: f64::NAN,
            sl_norm: f64::NAN,
            sr_norm: f64::NAN,
            tq_inv_norm: f64::NAN,
            bound_q: f64::NAN,
            bound_s: f64::NAN,
            bound_tq: f64::NAN,
            pass_q: false,
            pass_s: false,
            pass_tq: false,
            max_residual: f64::NAN,
            power_iterations: 0,
            error: Some(msg),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormScan {
    pub j: [f64; 4],
    pub theta: f64,
    pub c1: f64,
    pub rows: Vec<ScanRow>,
}

impl NormScan {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass_q && r.pass_s && r.pass_tq)
    }

    pub fn any_error(&self) -> bool {
        self.rows.iter().any(|r| r.error.is_some())
    }

    /// CSV with columns `t, q_inv_norm, sl_norm, sr_norm, bound_q, bound_s,
    /// pass_q, pass_s`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,q_inv_norm,sl_norm,sr_norm,bound_q,bound_s,pass_q,pass_s\n");
        for r in &self.rows {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
                r.t, r.q_inv_norm, r.sl_norm, r.sr_norm, r.bound_q, r.bound_s, r.pass_q, r.pass_s
            )
            .expect("write to string");
        }
        out
    }
}

fn scan_row(
    top: &QOperator,
    j: Quaternion,
    t: f64,
    theta: f64,
    c1: f64,
    opts: &ScanOptions,
) -> Result<ScanRow, ResolventError> {
    if t == 0.0 {
        return Err(ResolventError::ZeroShift);
    }
    let s = j.scale(t);
    let r = Resolvent::new(top, s, opts.solve)?;
    let n = r.dim();
    let max_res = std::sync::Mutex::new(0.0f64);
    let q_inv = |w: &[CQuaternion]| -> Result<Vec<CQuaternion>, ResolventError> {
        let (x, rep) = r.solve(w)?;
        let mut m = max_res.lock().expect("not poisoned");
        *m = m.max(rep.residual);
        Ok(x)
    };
    let est =
        |f: &dyn Fn(&[CQuaternion]) -> Result<Vec<CQuaternion>, ResolventError>,
         g: &dyn Fn(&[CQuaternion]) -> Result<Vec<CQuaternion>, ResolventError>| {
            power_norm(n, f, g, opts.power_tol, opts.power_max_iter, opts.seed)
        };
    let q = est(&q_inv, &|w| r.q_inv_transpose(w))?;
    let sl = est(&|w| r.s_left(w), &|w| r.s_transpose(w))?;
    let sr = est(&|w| r.s_right(w), &|w| r.s_transpose(w))?;
    let tq = est(&|w| r.t_q_inv(w), &|w| r.t_q_inv_transpose(w))?;

    // Q_s Q_s^{-1} w = w on one more probe
    let w: Vec<CQuaternion> = (0..n)
        .map(|k| {
            CQuaternion::from_array(std::array::from_fn(|c| ((8 * k + c) as f64 * 0.618).sin()))
        })
        .collect();
    let x = q_inv(&w)?;
    let back = r.qs().apply_slice(&x);
    let roundtrip = norm(&sub(&back, &w)) / norm(&w);

    let at = t.abs();
    let (bound_q, bound_s, bound_tq) = (1.0 / (at * at), theta / at, 1.0 / (c1.sqrt() * at));
    let ok = |v: f64, b: f64| v <= b * (1.0 + opts.slack);
    let max_residual = max_res.into_inner().expect("not poisoned").max(roundtrip);
    Ok(ScanRow {
        t,
        q_inv_norm: q.value,
        sl_norm: sl.value,
        sr_norm: sr.value,
        tq_inv_norm: tq.value,
        bound_q,
        bound_s,
        bound_tq,
        pass_q: ok(q.value, bound_q),
        pass_s: ok(sl.value, bound_s) && ok(sr.value, bound_s),
        pass_tq: ok(tq.value, bound_tq),
        max_residual,
        power_iterations: q.iterations + sl.iterations + sr.iterations + tq.iterations,
        error: None,
    })
}

/// Resolvent norms along `s = j t`, compared with `1/t^2`, `Theta/|t|` and
/// `1/(sqrt(C1) |t|)`. Points run in parallel; a failing point is recorded
/// in its row and does not stop the scan.
pub fn norm_scan(
    top: &QOperator,
    report: &ConstantsReport,
    j: Quaternion,
    ts: &[f64],
    opts: &ScanOptions,
) -> Result<NormScan, ResolventError> {
    let verdict = hypothesis_check(report);
    if !verdict.pass {
        return Err(ResolventError::HypothesisFailed(verdict.explanation));
    }
    let j = SlicePoint::new(j, 1.0)?.j();
    let theta = report.theta.expect("gap hypothesis passed");
    let rows = ts
        .par_iter()
        .map(|&t| {
            scan_row(top, j, t, theta, report.c1, opts)
                .unwrap_or_else(|e| ScanRow::failed(t, e.to_string()))
        })
        .collect();
    Ok(NormScan {
        j: j.to_array(),
        theta,
        c1: report.c1,
        rows,
    })
}
