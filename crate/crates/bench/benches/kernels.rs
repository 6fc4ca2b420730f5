use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use quatfrac::{
    assemble_qs, assemble_t, frac_power, solve_qs, CQuaternion, Coefficient, CoefficientField,
    DomainSpec, Grid, GridFunction, QOperator, QuadratureSpec, Quaternion, SolveOptions, Variant,
};

fn setup(n: usize) -> (Grid, CoefficientField) {
    let g = Grid::build(&DomainSpec::unit_box(), [n; 3]).unwrap();
    let a = Coefficient::analytic(|x| 1.5 + 0.2 * (2.0 * x[0] + x[1]).sin() * x[2].cos());
    let f = CoefficientField::sample(&g, &[a.clone(), a.clone(), a], 1).unwrap();
    (g, f)
}

fn field(g: &Grid) -> GridFunction {
    GridFunction::from_fn(g, |x| {
        let p: f64 = x.iter().map(|v| (std::f64::consts::PI * v).sin()).product();
        CQuaternion::from_array(std::array::from_fn(|c| {
            p * (1.0 + c as f64 * x[c % 3]).cos()
        }))
    })
}

fn operator(n: usize) -> (Grid, QOperator) {
    let (g, f) = setup(n);
    let t = assemble_t(&g, &f, 1, 2).unwrap();
    (g, t)
}

fn bench_assemble(c: &mut Criterion) {
    let (g, f) = setup(18);
    c.bench_function("assemble_t 16^3", |b| {
        b.iter(|| assemble_t(black_box(&g), &f, 1, 2).unwrap())
    });
}

fn bench_apply(c: &mut Criterion) {
    let (g, t) = operator(18);
    let q = assemble_qs(&t, Quaternion::new(0.0, 1.0, 0.0, 0.0)).unwrap();
    let u = field(&g);
    c.bench_function("apply T 16^3", |b| {
        b.iter(|| t.apply(black_box(&u)).unwrap())
    });
    c.bench_function("apply Q_s 16^3", |b| {
        b.iter(|| q.apply(black_box(&u)).unwrap())
    });
}

fn bench_solve(c: &mut Criterion) {
    let (g, t) = operator(14);
    let q = assemble_qs(&t, Quaternion::new(0.0, 0.0, 2.0, 0.0)).unwrap();
    let f = field(&g);
    let opts = SolveOptions::default();
    c.bench_function("solve Q_s 12^3", |b| {
        b.iter(|| solve_qs(&q, black_box(&f), &opts).unwrap())
    });
}

fn bench_frac_power(c: &mut Criterion) {
    let (g, t) = operator(8);
    let v = field(&g);
    let spec = QuadratureSpec::new(0.5);
    let mut group = c.benchmark_group("frac_power");
    group.sample_size(10);
    group.bench_function("6^3 alpha 0.5", |b| {
        b.iter(|| frac_power(&t, black_box(&v), &spec, Quaternion::E1, Variant::Left).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_assemble,
    bench_apply,
    bench_solve,
    bench_frac_power
);
criterion_main!(benches);
