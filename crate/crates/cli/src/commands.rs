use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use quatfrac::domain::bump_suite;
use quatfrac::forms::{coercivity_probe, Verdict};
use quatfrac::fracpow::{node_table, FracPowError, QuadratureSpec};
use quatfrac::operator::scalar_surrogate;
use quatfrac::resolvent::{dense_solve, ResolventError, ScanOptions, SolveOptions};
use quatfrac::vecops::rel_diff;
use quatfrac::{
    assemble_qs, assemble_t, compute_constants, frac_power, hypothesis_check, norm_scan, solve_qs,
    CQuaternion, CoefficientField, ConstantsReport, DomainSpec, Grid, GridFunction, QOperator,
    Quaternion, SlicePoint, WeightFunction,
};

use crate::config::{RhsKind, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Config(anyhow::Error),
    Hypothesis(String),
    Solver(String),
    Failed(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            Self::Config(_) => 1,
            Self::Hypothesis(_) => 2,
            Self::Solver(_) => 3,
            Self::Failed(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(e) => write!(f, "config: {e:#}"),
            Self::Hypothesis(m) => write!(f, "hypotheses fail: {m}"),
            Self::Solver(m) => write!(f, "solver: {m}"),
            Self::Failed(m) => write!(f, "check failed: {m}"),
        }
    }
}

fn config_err(e: impl fmt::Display) -> CliError {
    CliError::Config(anyhow::anyhow!("{e}"))
}

fn solver_err(e: ResolventError) -> CliError {
    match e {
        ResolventError::HypothesisFailed(m) => CliError::Hypothesis(m),
        ResolventError::DenseCap { .. }
        | ResolventError::NonImaginaryShift(_)
        | ResolventError::ZeroShift => config_err(e),
        e => CliError::Solver(e.to_string()),
    }
}

/// Everything the commands share: the config, the grid, the sampled
/// coefficients, `T` and the derived constants.
pub struct Context {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub domain: DomainSpec,
    pub grid: Grid,
    pub field: CoefficientField,
    pub top: QOperator,
    pub report: ConstantsReport,
    pub verdict: Verdict,
}

impl Context {
    pub fn new(cfg: RunConfig, out: PathBuf) -> Result<Self, CliError> {
        let domain = cfg.domain_spec().map_err(CliError::Config)?;
        let coeffs = cfg.coefficients().map_err(CliError::Config)?;
        let grid = Grid::build(&domain, cfg.grid.nodes).map_err(config_err)?;
        let m = cfg.operator.m;
        let field = CoefficientField::sample(&grid, &coeffs, m).map_err(config_err)?;
        let weight = cfg
            .weight
            .as_ref()
            .map(|w| WeightFunction::for_domain(w.family, w.lambda, &domain))
            .transpose()
            .map_err(config_err)?;
        let top = assemble_t(&grid, &field, m, cfg.operator.stencil_order).map_err(config_err)?;
        let report =
            compute_constants(&field, &grid, &domain, m, weight.as_ref()).map_err(config_err)?;
        let verdict = hypothesis_check(&report);
        Ok(Self {
            cfg,
            out,
            domain,
            grid,
            field,
            top,
            report,
            verdict,
        })
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.out.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| config_err(format!("cannot write {}: {e}", path.display())))
    }

    fn write_report(&self, command: &str, extra: serde_json::Value) -> Result<(), CliError> {
        let mut doc = json!({
            "command": command,
            "seed": self.cfg.seed,
            "grid": { "nodes": self.grid.n(), "unknowns": self.grid.len() },
            "constants": serde_json::to_value(&self.report).expect("report serializes"),
            "verdict": serde_json::to_value(&self.verdict).expect("verdict serializes"),
        });
        if let (Some(map), serde_json::Value::Object(extra)) = (doc.as_object_mut(), extra) {
            map.extend(extra);
        }
        let text = serde_json::to_string_pretty(&doc).expect("json serializes");
        self.write("report.json", &(text + "\n"))
    }

    fn require_hypotheses(&self) -> Result<(), CliError> {
        if self.verdict.pass {
            Ok(())
        } else {
            Err(CliError::Hypothesis(self.verdict.explanation.clone()))
        }
    }

    /// Smooth input field: a sine profile over the bounding box with
    /// slowly varying components. Vanishes outside the domain mask.
    fn probe_vector(&self) -> GridFunction {
        let b = self.domain.bounds;
        GridFunction::from_fn(&self.grid, |x| {
            let y: [f64; 3] = std::array::from_fn(|l| (x[l] - b.origin[l]) / b.lengths[l]);
            let p: f64 = y.iter().map(|v| (PI * v).sin()).product();
            CQuaternion::from_array(std::array::from_fn(|c| {
                p * (1.0 + 0.4 * c as f64 * y[c % 3] + 0.3 * c as f64).cos()
            }))
        })
    }

    fn print_constants(&self) {
        let r = &self.report;
        println!(
            "grid        {:?} ({} unknowns)",
            self.grid.n(),
            self.grid.len()
        );
        println!("C_T         {:.16e}", r.c_t);
        println!("M           {:.16e}", r.m);
        println!("C_T/2 - M   {:.16e}", r.c_t / 2.0 - r.m);
        println!("C1          {:.16e}", r.c1);
        match r.theta {
            Some(t) => println!("Theta       {t:.16e}"),
            None => println!("Theta       undefined"),
        }
        println!(
            "verdict     {} ({})",
            if self.verdict.pass { "pass" } else { "fail" },
            self.verdict.explanation
        );
        for w in &r.warnings {
            println!("warning     {w}");
        }
    }
}

pub fn check(ctx: &Context) -> Result<(), CliError> {
    ctx.print_constants();
    if !ctx.verdict.pass {
        ctx.write_report("check", json!({ "probes": [] }))?;
        return Err(CliError::Hypothesis(ctx.verdict.explanation.clone()));
    }
    let m = ctx.cfg.operator.m;
    let suite: Vec<GridFunction> =
        bump_suite(&ctx.domain, &ctx.grid, ctx.cfg.check.bumps, ctx.cfg.seed)
            .map_err(config_err)?
            .iter()
            .map(|b| b.sample(&ctx.grid))
            .collect();
    let mut probes = Vec::new();
    println!(
        "{:>24} {:>24} {:>24} {:>24} {:>24}  pass",
        "t", "min b/|u|^2", "t^2", "min b/|u|_m", "C_T/2-M"
    );
    for &t in &ctx.cfg.check.t {
        let s = SlicePoint::new(Quaternion::E1, t).map_err(config_err)?;
        let p = coercivity_probe(
            &ctx.field,
            &ctx.grid,
            s,
            &suite,
            m,
            ctx.cfg.operator.stencil_order,
            &ctx.report,
        )
        .map_err(config_err)?;
        println!(
            "{:>24.16e} {:>24.16e} {:>24.16e} {:>24.16e} {:>24.16e}  {}",
            t,
            p.ratio_l2,
            p.bound_l2,
            p.ratio_dm,
            p.bound_dm,
            p.pass()
        );
        probes.push(p);
    }
    let pass = probes.iter().all(|p| p.pass());
    ctx.write_report("check", json!({ "probes": probes, "probes_pass": pass }))?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Failed(
            "a coercivity or continuity inequality failed on the bump suite".into(),
        ))
    }
}

pub fn solve(ctx: &Context) -> Result<(), CliError> {
    ctx.print_constants();
    ctx.require_hypotheses()?;
    let c = &ctx.cfg.solve;
    let s = Quaternion::from_array(c.s);
    let qs = assemble_qs(&ctx.top, s).map_err(config_err)?;
    let opts = SolveOptions {
        tol: c.tol,
        max_iter: c.max_iter,
        method: c.method,
        seed: ctx.cfg.seed,
        ..SolveOptions::default()
    };
    let (f, exact) = match c.rhs {
        RhsKind::Manufactured => {
            let v = ctx
                .probe_vector()
                .right_mul(Quaternion::new(0.5, -0.25, 1.0, 0.75));
            (qs.apply(&v).map_err(config_err)?, Some(v))
        }
        RhsKind::Smooth => (ctx.probe_vector(), None),
    };
    let (u, rep) = solve_qs(&qs, &f, &opts).map_err(solver_err)?;
    let error = exact.as_ref().map(|v| rel_diff(u.as_slice(), v.as_slice()));
    println!("method      {:?}", rep.method);
    println!("iterations  {}", rep.iterations);
    println!("residual    {:.16e}", rep.residual);
    if let Some(e) = error {
        println!("error       {e:.16e}");
    }
    ctx.write("solution.csv", &node_table(&ctx.grid, &u))?;
    ctx.write_report("solve", json!({ "s": c.s, "solve": rep, "error": error }))?;
    if rep.residual > c.tol {
        return Err(CliError::Solver(format!(
            "residual {:e} above {:e}",
            rep.residual, c.tol
        )));
    }
    Ok(())
}

pub fn resolvent_scan(ctx: &Context) -> Result<(), CliError> {
    ctx.print_constants();
    ctx.require_hypotheses()?;
    let c = &ctx.cfg.resolvent_scan;
    let ts = ctx.cfg.scan_ts().map_err(CliError::Config)?;
    let opts = ScanOptions {
        power_tol: c.power_tol,
        power_max_iter: c.power_max_iter,
        slack: c.slack,
        seed: ctx.cfg.seed,
        solve: ctx.cfg.solve_options(c.tol),
    };
    let j = ctx.cfg.scan_j().map_err(CliError::Config)?;
    let scan = norm_scan(&ctx.top, &ctx.report, j, &ts, &opts).map_err(solver_err)?;
    let mut diag = String::from("t,q_inv_norm,sl_norm,sr_norm,tq_inv_norm,bound_q,bound_s,bound_tq,pass_q,pass_s,pass_tq,max_residual,power_iterations,error\n");
    println!(
        "{:>24} {:>24} {:>24} {:>24} {:>24}  pass",
        "t", "|Q^-1|", "1/t^2", "|S^-1|", "Theta/t"
    );
    for r in &scan.rows {
        writeln!(
            diag,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{},{:.16e},{},{}",
            r.t,
            r.q_inv_norm,
            r.sl_norm,
            r.sr_norm,
            r.tq_inv_norm,
            r.bound_q,
            r.bound_s,
            r.bound_tq,
            r.pass_q,
            r.pass_s,
            r.pass_tq,
            r.max_residual,
            r.power_iterations,
            r.error.as_deref().unwrap_or("")
        )
        .expect("write to string");
        println!(
            "{:>24.16e} {:>24.16e} {:>24.16e} {:>24.16e} {:>24.16e}  {}",
            r.t,
            r.q_inv_norm,
            r.bound_q,
            r.sl_norm.max(r.sr_norm),
            r.bound_s,
            r.pass_q && r.pass_s && r.pass_tq
        );
    }
    ctx.write("scan.csv", &scan.to_csv())?;
    ctx.write("diagnostics.txt", &diag)?;
    ctx.write_report("resolvent-scan", json!({ "scan": scan }))?;
    if let Some(r) = scan.rows.iter().find(|r| r.error.is_some()) {
        return Err(CliError::Solver(format!(
            "t = {}: {}",
            r.t,
            r.error.as_deref().unwrap_or("")
        )));
    }
    if !scan.all_pass() {
        return Err(CliError::Failed(
            "a resolvent norm exceeds its bound".into(),
        ));
    }
    Ok(())
}

fn fracpow_err(e: FracPowError) -> CliError {
    match e {
        FracPowError::NodeSolve { .. }
        | FracPowError::TailUnmet { .. }
        | FracPowError::Resolvent(_) => CliError::Solver(e.to_string()),
        e => config_err(e),
    }
}

pub fn fracpow(ctx: &Context) -> Result<(), CliError> {
    let c = &ctx.cfg.fracpow;
    let surrogate = c
        .surrogate_lambda
        .map(|l| scalar_surrogate(ctx.grid.len(), l));
    if surrogate.is_none() {
        ctx.print_constants();
        ctx.require_hypotheses()?;
    }
    let spec = QuadratureSpec {
        alpha: c.alpha,
        t_max: c.t_max,
        panels_per_decade: c.panels_per_decade,
        nodes_per_panel: c.nodes_per_panel,
        tail_tol: c.tail_tol,
        tail_correction: c.tail_correction,
        theta: if surrogate.is_some() {
            Some(2.0)
        } else {
            ctx.report.theta
        },
        solve: ctx.cfg.solve_options(c.tol),
        ..QuadratureSpec::default()
    };
    let j = ctx.cfg.fracpow_j().map_err(CliError::Config)?;
    let v = ctx.probe_vector();
    let top = surrogate.as_ref().unwrap_or(&ctx.top);
    let out = frac_power(top, &v, &spec, j, c.variant).map_err(fracpow_err)?;
    let deviation = c
        .surrogate_lambda
        .map(|l| rel_diff(out.value.as_slice(), v.scale(l.powf(c.alpha)).as_slice()));
    let d = &out.diagnostics;
    println!("alpha       {}", d.alpha);
    println!("variant     {:?}", d.variant);
    println!("t_max       {:.16e}", d.t_max);
    println!("panels      {}", d.panels);
    println!("solves      {}", d.solves);
    println!("residual    {:.16e}", d.max_residual);
    println!("tail bound  {:.16e}", d.remainder_bound);
    if let Some(dev) = deviation {
        println!("deviation   {dev:.16e}");
    }
    ctx.write("fracpow.csv", &node_table(&ctx.grid, &out.value))?;
    ctx.write("diagnostics.txt", &d.to_text())?;
    ctx.write_report(
        "fracpow",
        json!({ "diagnostics": d, "surrogate_deviation": deviation }),
    )?;
    if let Some(dev) = deviation {
        if dev > 1e-6 {
            return Err(CliError::Failed(format!(
                "surrogate deviation {dev:e} above 1e-6"
            )));
        }
    }
    Ok(())
}

pub fn oracle_compare(ctx: &Context) -> Result<(), CliError> {
    let c = &ctx.cfg.oracle_compare;
    let dim = 8 * ctx.grid.len();
    if dim > c.dense_cap {
        return Err(config_err(format!(
            "oracle_compare: 8N = {dim} exceeds dense_cap = {}; use a smaller grid",
            c.dense_cap
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
    let opts = ctx.cfg.solve_options(1e-13);
    let mut rows = Vec::new();
    let mut diag = String::from("sample,s0,s1,s2,s3,deviation,residual,iterations\n");
    let mut worst: f64 = 0.0;
    for k in 0..c.samples {
        let dir: [f64; 3] = loop {
            let d: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let n = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 0.1 {
                break d.map(|x| x / n);
            }
        };
        let t = rng.random_range(0.2..5.0);
        let s = Quaternion::imaginary(dir).scale(t);
        let f: Vec<CQuaternion> = (0..ctx.grid.len())
            .map(|_| CQuaternion::from_array(std::array::from_fn(|_| rng.random_range(-1.0..1.0))))
            .collect();
        let qs = assemble_qs(&ctx.top, s).map_err(config_err)?;
        let (x, rep) =
            solve_qs(&qs, &GridFunction::from_vec(f.clone()), &opts).map_err(solver_err)?;
        let dense = dense_solve(&qs, &f, c.dense_cap).map_err(solver_err)?;
        let dev = rel_diff(x.as_slice(), &dense);
        worst = worst.max(dev);
        let sa = s.to_array();
        writeln!(
            diag,
            "{k},{:.16e},{:.16e},{:.16e},{:.16e},{dev:.16e},{:.16e},{}",
            sa[0], sa[1], sa[2], sa[3], rep.residual, rep.iterations
        )
        .expect("write to string");
        rows.push(json!({ "s": sa, "deviation": dev, "solve": rep }));
    }
    println!("samples     {}", c.samples);
    println!("max dev     {worst:.16e}");
    ctx.write("diagnostics.txt", &diag)?;
    ctx.write_report(
        "oracle-compare",
        json!({ "samples": rows, "max_deviation": worst, "tolerance": c.tolerance }),
    )?;
    if worst > c.tolerance {
        return Err(CliError::Failed(format!(
            "iterative and dense solves differ by {worst:e}"
        )));
    }
    Ok(())
}
