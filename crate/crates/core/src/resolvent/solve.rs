use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::krylov::{cg, gmres, KrylovOutcome, LinOp};
use super::ResolventError;
use crate::domain::GridFunction;
use crate::operator::{assemble_qs, OperatorLabel, QOperator};
use crate::qalgebra::{CQuaternion, Quaternion};
use crate::vecops::{dot, from_reals, norm, right_mul, to_reals};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    /// CG when the operator passes the symmetry probe, GMRES otherwise.
    #[default]
    Auto,
    Cg,
    Gmres,
    DenseLu,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodUsed {
    IterativeCgOnNormalStructure,
    IterativeGmres,
    DenseLuOracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub method: SolveMethod,
    pub restart: usize,
    /// Seed of the random pairs used by the symmetry probe.
    pub seed: u64,
    /// Largest real dimension `8N` the dense oracle accepts.
    pub dense_cap: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            max_iter: 20_000,
            method: SolveMethod::Auto,
            restart: 80,
            seed: 0,
            dense_cap: 4096,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// `||Q_s u - F|| / ||F||`.
    pub residual: f64,
    pub iterations: usize,
    pub method: MethodUsed,
    pub tolerance: f64,
}

/// Largest relative defect `|<Ax,y> - <x,Ay>|` over `pairs` random pairs.
pub fn symmetry_defect<A: LinOp + ?Sized>(a: &A, pairs: usize, seed: u64) -> f64 {
    let n = a.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut ax = vec![CQuaternion::ZERO; n];
    let mut ay = vec![CQuaternion::ZERO; n];
    for _ in 0..pairs {
        let mut draw = || -> Vec<CQuaternion> {
            (0..n)
                .map(|_| {
                    CQuaternion::from_array(std::array::from_fn(|_| rng.random_range(-1.0..1.0)))
                })
                .collect()
        };
        let x = draw();
        let y = draw();
        a.apply_into(&x, &mut ax);
        a.apply_into(&y, &mut ay);
        let scale = norm(&ax) * norm(&y) + norm(&x) * norm(&ay);
        if scale > 0.0 {
            worst = worst.max((dot(&ax, &y) - dot(&x, &ay)).abs() / scale);
        }
    }
    worst
}

/// Symmetry threshold for the solver switch.
pub const SYMMETRY_TOL: f64 = 1e-12;

fn check_rhs(n: usize, f: &[CQuaternion]) -> Result<(), ResolventError> {
    if f.len() != n {
        return Err(ResolventError::Shape {
            expected: n,
            got: f.len(),
        });
    }
    if !f.iter().all(|v| v.is_finite()) {
        return Err(ResolventError::NonFinite);
    }
    Ok(())
}

fn check_shift(s: Quaternion) -> Result<(), ResolventError> {
    if s.norm_sqr() == 0.0 {
        return Err(ResolventError::ZeroShift);
    }
    if s.re() != 0.0 {
        return Err(ResolventError::NonImaginaryShift(s.re()));
    }
    Ok(())
}

/// Dense LU of the `8N x 8N` real matrix; the oracle route.
pub fn dense_solve(
    op: &QOperator,
    f: &[CQuaternion],
    cap: usize,
) -> Result<Vec<CQuaternion>, ResolventError> {
    let dim = 8 * op.dim();
    if dim > cap {
        return Err(ResolventError::DenseCap { dim, cap });
    }
    let m: DMatrix<f64> = op.to_dense();
    let x = m
        .lu()
        .solve(&DVector::from_vec(to_reals(f)))
        .ok_or(ResolventError::Singular)?;
    Ok(from_reals(x.as_slice()))
}

fn iterate<A: LinOp + ?Sized>(
    a: &A,
    f: &[CQuaternion],
    symmetric: bool,
    opts: &SolveOptions,
) -> (KrylovOutcome, MethodUsed) {
    let use_cg = match opts.method {
        SolveMethod::Cg => true,
        SolveMethod::Gmres => false,
        _ => symmetric,
    };
    if use_cg {
        let out = cg(a, f, opts.tol, opts.max_iter);
        if out.converged || opts.method == SolveMethod::Cg {
            return (out, MethodUsed::IterativeCgOnNormalStructure);
        }
    }
    (
        gmres(a, f, opts.tol, opts.max_iter, opts.restart),
        MethodUsed::IterativeGmres,
    )
}

fn run(
    op: &QOperator,
    f: &[CQuaternion],
    symmetric: bool,
    opts: &SolveOptions,
) -> Result<(Vec<CQuaternion>, SolveReport), ResolventError> {
    check_rhs(op.dim(), f)?;
    if opts.method == SolveMethod::DenseLu {
        let x = dense_solve(op, f, opts.dense_cap)?;
        let mut r = op.apply_slice(&x);
        r.iter_mut().zip(f).for_each(|(a, b)| *a = *b - *a);
        let fnorm = norm(f);
        let residual = if fnorm == 0.0 { 0.0 } else { norm(&r) / fnorm };
        return Ok((
            x,
            SolveReport {
                residual,
                iterations: 0,
                method: MethodUsed::DenseLuOracle,
                tolerance: opts.tol,
            },
        ));
    }
    let (out, method) = iterate(op, f, symmetric, opts);
    if !out.converged {
        return Err(ResolventError::NotConverged {
            best_residual: out.residual,
            iterations: out.iterations,
        });
    }
    Ok((
        out.x,
        SolveReport {
            residual: out.residual,
            iterations: out.iterations,
            method,
            tolerance: opts.tol,
        },
    ))
}

/// Solves `Q_s(T) u = F` for an operator built by `assemble_qs` with a
/// nonzero, purely imaginary `s`.
pub fn solve_qs(
    qs: &QOperator,
    f: &GridFunction,
    opts: &SolveOptions,
) -> Result<(GridFunction, SolveReport), ResolventError> {
    if qs.label() != OperatorLabel::Qs {
        return Err(ResolventError::Label(qs.label()));
    }
    check_shift(qs.shift().expect("Qs operators carry their shift"))?;
    let symmetric =
        opts.method == SolveMethod::Auto && symmetry_defect(qs, 10, opts.seed) <= SYMMETRY_TOL;
    let (x, report) = run(qs, f.as_slice(), symmetric, opts)?;
    Ok((GridFunction::from_vec(x), report))
}

/// `Q_s(T)^{-1}`, the S-resolvents and their real transposes at one `s`.
///
/// Quaternionic scalars act on grid functions from the right, so
/// `Q_s^{-1} conj(s)` means "solve, then multiply values by `conj(s)`".
pub struct Resolvent<'a> {
    t: &'a QOperator,
    t_transpose: OnceLock<QOperator>,
    s: Quaternion,
    q: QOperator,
    q_transpose: OnceLock<QOperator>,
    symmetric: bool,
    opts: SolveOptions,
}

impl<'a> Resolvent<'a> {
    /// Builds `Q_s(T)` and probes it for symmetry.
    pub fn new(
        t: &'a QOperator,
        s: Quaternion,
        opts: SolveOptions,
    ) -> Result<Self, ResolventError> {
        check_shift(s)?;
        let q = assemble_qs(t, s)?;
        let symmetric = symmetry_defect(&q, 10, opts.seed) <= SYMMETRY_TOL;
        Ok(Self::from_parts(t, s, q, symmetric, opts))
    }

    /// Skips the symmetry probe. For purely imaginary `s`, `Q_s(T)` is
    /// symmetric exactly when `T^2` is, so one probe serves a whole slice.
    pub fn with_symmetry(
        t: &'a QOperator,
        s: Quaternion,
        symmetric: bool,
        opts: SolveOptions,
    ) -> Result<Self, ResolventError> {
        check_shift(s)?;
        let q = assemble_qs(t, s)?;
        Ok(Self::from_parts(t, s, q, symmetric, opts))
    }

    fn from_parts(
        t: &'a QOperator,
        s: Quaternion,
        q: QOperator,
        symmetric: bool,
        opts: SolveOptions,
    ) -> Self {
        Self {
            t,
            t_transpose: OnceLock::new(),
            s,
            q,
            q_transpose: OnceLock::new(),
            symmetric,
            opts,
        }
    }

    fn t_transpose(&self) -> &QOperator {
        self.t_transpose.get_or_init(|| self.t.transpose())
    }

    pub fn s(&self) -> Quaternion {
        self.s
    }

    pub fn qs(&self) -> &QOperator {
        &self.q
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    /// `Q_s^{-1} w` with its report.
    pub fn solve(
        &self,
        w: &[CQuaternion],
    ) -> Result<(Vec<CQuaternion>, SolveReport), ResolventError> {
        run(&self.q, w, self.symmetric, &self.opts)
    }

    pub fn q_inv(&self, w: &[CQuaternion]) -> Result<Vec<CQuaternion>, ResolventError> {
        Ok(self.solve(w)?.0)
    }

    /// `Q_s^{-T} w`.
    pub fn q_inv_transpose(&self, w: &[CQuaternion]) -> Result<Vec<CQuaternion>, ResolventError> {
        if self.symmetric {
            return self.q_inv(w);
        }
        let qt = self.q_transpose.get_or_init(|| self.q.transpose());
        Ok(run(qt, w, false, &self.opts)?.0)
    }

    /// `S_L^{-1}(s,T) w = (Q_s^{-1} w) conj(s) - T Q_s^{-1} w`.
    pub fn s_left(&self, w: &[CQuaternion]) -> Result<Vec<CQuaternion>, ResolventError> {
        Ok(self.s_left_reported(w)?.0)
    }

    pub fn s_left_reported(
        &self,
        w: &[CQuaternion],
    ) -> Result<(Vec<CQuaternion>, SolveReport), ResolventError> {
        let (v, rep) = self.solve(w)?;
        let tv = self.t.apply_slice(&v);
        let out = right_mul(&v, self.s.conj())
            .iter()
            .zip(&tv)
            .map(|(a, b)| *a - *b)
            .collect();
        Ok((out, rep))
    }

    /// `S_R^{-1}(s,T) w = -(T - I conj(s)) Q_s^{-1} w`.
    pub fn s_right(&self, w: &[CQuaternion]) -> Result<Vec<CQuaternion>, ResolventError> {
        Ok(self.s_right_reported(w)?.0)
    }

    pub fn s_right_reported(
        &self,
        w: &[CQuaternion],
    ) -> Result<(Vec<CQuaternion>, SolveReport), ResolventError> {
        let (v, rep) = self.solve(w)?;
        let mut out = self.t.apply_slice(&v);
        for (o, x) in out.iter_mut().zip(&v) {
            *o = -(*o - x.right_mul(self.s.conj()));
        }
        Ok((out, rep))
    }

    /// `S^{-T} y = Q_s^{-T} (y s - T^T y)`; both S-resolvents share it.
    pub fn s_transpose(&self, y: &[CQuaternion]) -> Result<Vec<CQuaternion>, ResolventError> {
        let tty = self.t_transpose().apply_slice(y);
        let rhs: Vec<CQuaternion> = y
            .iter()
            .zip(&tty)
            .map(|(a, b)| a.right_mul(self.s) - *b)
            .collect();
        self.q_inv_transpose(&rhs)
    }

    /// `T Q_s^{-1} w`.
    pub fn t_q_inv(&self, w: &[CQuaternion]) -> Result<Vec<CQuaternion>, ResolventError> {
        Ok(self.t.apply_slice(&self.q_inv(w)?))
    }

    /// `Q_s^{-T} T^T y`.
    pub fn t_q_inv_transpose(&self, y: &[CQuaternion]) -> Result<Vec<CQuaternion>, ResolventError> {
        self.q_inv_transpose(&self.t_transpose().apply_slice(y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Coefficient, CoefficientField, DomainSpec, Grid};
    use crate::operator::{assemble_t, scalar_surrogate};
    use crate::vecops::rel_diff;

    fn setup(n: usize, c: f64) -> (Grid, QOperator) {
        let g = Grid::build(&DomainSpec::unit_box(), [n; 3]).unwrap();
        let f = CoefficientField::sample(
            &g,
            &[
                Coefficient::Constant(c),
                Coefficient::Constant(c),
                Coefficient::Constant(c),
            ],
            1,
        )
        .unwrap();
        let t = assemble_t(&g, &f, 1, 2).unwrap();
        (g, t)
    }

    fn field(n: usize, seed: u64) -> Vec<CQuaternion> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| CQuaternion::from_array(std::array::from_fn(|_| rng.random_range(-1.0..1.0))))
            .collect()
    }

    #[test]
    fn zero_operator_divides_by_modulus() {
        let (_, t) = setup(6, 0.0);
        let s = Quaternion::new(0.0, 0.0, 2.0, 0.0);
        let q = assemble_qs(&t, s).unwrap();
        let f = GridFunction::from_vec(field(t.dim(), 1));
        let (u, rep) = solve_qs(&q, &f, &SolveOptions::default()).unwrap();
        assert!(rel_diff(u.as_slice(), f.scale(0.25).as_slice()) < 1e-14);
        assert_eq!(rep.method, MethodUsed::IterativeCgOnNormalStructure);
    }

    #[test]
    fn iterative_matches_dense() {
        let (_, t) = setup(8, 1.0);
        let s = Quaternion::new(0.0, 0.6, 0.0, 0.8);
        let q = assemble_qs(&t, s).unwrap();
        let f = GridFunction::from_vec(field(t.dim(), 2));
        let (u, _) = solve_qs(&q, &f, &SolveOptions::default()).unwrap();
        let dense = dense_solve(&q, f.as_slice(), 4096).unwrap();
        assert!(rel_diff(u.as_slice(), &dense) < 1e-9);
    }

    #[test]
    fn rejects_bad_shifts_and_labels() {
        let (_, t) = setup(6, 1.0);
        let q0 = assemble_qs(&t, Quaternion::ZERO).unwrap();
        let f = GridFunction::zeros(t.dim());
        assert!(matches!(
            solve_qs(&q0, &f, &SolveOptions::default()),
            Err(ResolventError::ZeroShift)
        ));
        let q1 = assemble_qs(&t, Quaternion::new(1.0, 1.0, 0.0, 0.0)).unwrap();
        assert!(matches!(
            solve_qs(&q1, &f, &SolveOptions::default()),
            Err(ResolventError::NonImaginaryShift(_))
        ));
        assert!(matches!(
            solve_qs(&t, &f, &SolveOptions::default()),
            Err(ResolventError::Label(_))
        ));
    }

    #[test]
    fn surrogate_resolvent_is_right_inverse() {
        let t = scalar_surrogate(4, 0.0);
        let s = Quaternion::new(0.0, 0.0, 0.0, 3.0);
        let r = Resolvent::new(&t, s, SolveOptions::default()).unwrap();
        let w = field(4, 3);
        let got = r.s_left(&w).unwrap();
        let want = right_mul(&w, s.inv().unwrap());
        assert!(rel_diff(&got, &want) < 1e-14);
    }

    #[test]
    fn resolvent_equation_holds() {
        let (g, t) = setup(8, 1.0);
        let s = Quaternion::new(0.0, 0.0, 1.3, 0.0);
        let r = Resolvent::new(&t, s, SolveOptions::default()).unwrap();
        let v = GridFunction::from_fn(&g, |x| {
            let b: f64 = x
                .iter()
                .map(|xi| (std::f64::consts::PI * xi).sin().powi(2))
                .product();
            CQuaternion::from_array([b, 0.5 * b, 0.0, -b, 0.2 * b, 0.0, b * x[0], 0.0])
        });
        let tv = t.apply_slice(v.as_slice());
        let lhs = r.s_right(&tv).unwrap();
        let srv = r.s_right(v.as_slice()).unwrap();
        let rhs: Vec<CQuaternion> = srv
            .iter()
            .zip(v.as_slice())
            .map(|(a, b)| a.right_mul(s) - *b)
            .collect();
        assert!(rel_diff(&lhs, &rhs) < 1e-9);
        assert!(rel_diff(&lhs, &r.s_left(&tv).unwrap()) < 1e-14);
    }

    #[test]
    fn transposes_are_adjoint() {
        let (_, t) = setup(6, 1.0);
        let r = Resolvent::new(
            &t,
            Quaternion::new(0.0, 0.0, 0.0, 0.7),
            SolveOptions::default(),
        )
        .unwrap();
        let (x, y) = (field(t.dim(), 4), field(t.dim(), 5));
        let a = dot(&r.s_left(&x).unwrap(), &y);
        let b = dot(&x, &r.s_transpose(&y).unwrap());
        assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
        let a = dot(&r.t_q_inv(&x).unwrap(), &y);
        let b = dot(&x, &r.t_q_inv_transpose(&y).unwrap());
        assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
    }
}
