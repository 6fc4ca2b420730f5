use proptest::prelude::*;

use quatfrac::forms::bilinear_form;
use quatfrac::fracpow::quadrature::gauss_legendre;
use quatfrac::qalgebra::{inner, slice_power};
use quatfrac::vecops::{norm, right_mul, sub};
use quatfrac::{
    assemble_qs, assemble_t, CQuaternion, Coefficient, CoefficientField, DomainSpec, Grid,
    GridFunction, Quaternion, SlicePoint,
};

fn quat() -> impl Strategy<Value = Quaternion> {
    prop::array::uniform4(-3.0f64..3.0).prop_map(Quaternion::from_array)
}

fn cquat() -> impl Strategy<Value = CQuaternion> {
    prop::array::uniform8(-3.0f64..3.0).prop_map(CQuaternion::from_array)
}

fn unit_dir() -> impl Strategy<Value = Quaternion> {
    prop::array::uniform3(-1.0f64..1.0)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-2)
        .prop_map(|v| {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            Quaternion::imaginary(v.map(|x| x / n))
        })
}

fn grid_field(len: usize) -> impl Strategy<Value = Vec<CQuaternion>> {
    prop::collection::vec(cquat(), len)
}

fn setup(m: usize, c: [f64; 3]) -> (Grid, CoefficientField) {
    let g = Grid::build(&DomainSpec::unit_box(), [7; 3]).unwrap();
    let f = CoefficientField::sample(&g, &c.map(Coefficient::Constant), m).unwrap();
    (g, f)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn inner_is_right_linear(u in cquat(), v in cquat(), q in quat()) {
        let lhs = inner(u, v.right_mul(q));
        let rhs = inner(u, v) * q;
        prop_assert!((lhs - rhs).norm() <= 1e-13 * (1.0 + u.norm() * v.norm() * q.norm()));
    }

    #[test]
    fn inner_of_self_is_real(u in cquat()) {
        let p = inner(u, u);
        prop_assert!((p - Quaternion::real(u.norm_sqr())).norm() <= 1e-13 * (1.0 + u.norm_sqr()));
    }

    #[test]
    fn slice_powers_add(j in unit_dir(), t in prop_oneof![-50.0f64..-0.01, 0.01f64..50.0], b1 in -2.0f64..2.0, b2 in -2.0f64..2.0) {
        let s = SlicePoint::new(j, t).unwrap();
        let lhs = slice_power(s, b1).unwrap() * slice_power(s, b2).unwrap();
        let rhs = slice_power(s, b1 + b2).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
    }

    #[test]
    fn operator_is_right_linear(u in grid_field(125), q in quat(), m in 1usize..=2) {
        let (g, f) = setup(m, [1.0, 0.4, 2.2]);
        let t = assemble_t(&g, &f, m, 2).unwrap();
        let tu = t.apply_slice(&u);
        let dev = norm(&sub(&t.apply_slice(&right_mul(&u, q)), &right_mul(&tu, q)));
        prop_assert!(dev <= 1e-13 * norm(&tu) * q.norm() + 1e-300);
    }

    #[test]
    fn form_is_hermitian_for_constant_coefficients(u in grid_field(125), v in grid_field(125), t in 0.1f64..5.0) {
        let (g, f) = setup(1, [1.3, 0.7, 1.0]);
        let s = Quaternion::new(0.0, 0.0, t, 0.0);
        let (u, v) = (GridFunction::from_vec(u), GridFunction::from_vec(v));
        let b_uv = bilinear_form(&f, &g, s, &u, &v, 1, 2).unwrap();
        let b_vu = bilinear_form(&f, &g, s, &v, &u, 1, 2).unwrap();
        prop_assert!((b_uv - b_vu.conj()).norm() <= 1e-10 * (1.0 + b_uv.norm()));
    }

    #[test]
    fn shifted_operator_dominates_shift(u in grid_field(125), t in 0.1f64..5.0) {
        let (g, f) = setup(1, [1.0, 1.0, 1.0]);
        let top = assemble_t(&g, &f, 1, 2).unwrap();
        let q = assemble_qs(&top, Quaternion::new(0.0, t, 0.0, 0.0)).unwrap();
        let qu = q.apply_slice(&u);
        let re: f64 = qu.iter().zip(&u).map(|(a, b)| inner(*a, *b).re()).sum();
        prop_assert!(re >= t * t * norm(&u).powi(2) * (1.0 - 1e-12));
    }

    #[test]
    fn grid_functions_vanish_outside(r in 0.5f64..1.2, n in 9usize..14) {
        let b = quatfrac::BoxBounds::new([-2.0; 3], [4.0; 3]);
        let d = DomainSpec::exterior_ball([0.1, -0.2, 0.0], r, b);
        let g = Grid::build(&d, [n; 3]).unwrap();
        let u = GridFunction::from_fn(&g, |_| CQuaternion::ONE);
        let nodes = u.to_nodes(&g);
        for (node, val) in nodes.iter().enumerate() {
            prop_assert_eq!(g.mask()[node], *val != CQuaternion::ZERO);
        }
    }

    #[test]
    fn gauss_rules_are_exact(n in 1usize..20, coeffs in prop::collection::vec(-1.0f64..1.0, 1..40)) {
        let (x, w) = gauss_legendre(n);
        let deg = coeffs.len().min(2 * n);
        let poly = |z: f64| coeffs[..deg].iter().rev().fold(0.0, |acc, c| acc * z + c);
        let exact: f64 = coeffs[..deg]
            .iter()
            .enumerate()
            .map(|(k, c)| if k % 2 == 0 { 2.0 * c / (k as f64 + 1.0) } else { 0.0 })
            .sum();
        let got: f64 = x.iter().zip(&w).map(|(x, w)| w * poly(*x)).sum();
        prop_assert!((got - exact).abs() <= 1e-12);
    }

    #[test]
    fn operator_is_self_adjoint_for_constant_coefficients(u in grid_field(125), v in grid_field(125), m in 1usize..=3) {
        let (g, f) = setup(m, [1.0, 0.4, 2.2]);
        let t = assemble_t(&g, &f, m, 2).unwrap();
        let re = |a: &[CQuaternion], b: &[CQuaternion]| -> f64 { a.iter().zip(b).map(|(x, y)| inner(*x, *y).re()).sum() };
        let (tu, tv) = (t.apply_slice(&u), t.apply_slice(&v));
        let scale = norm(&tu) * norm(&v) + norm(&u) * norm(&tv);
        prop_assert!((re(&tu, &v) - re(&u, &tv)).abs() <= 1e-12 * scale);
    }

    #[test]
    fn odd_order_form_vanishes_on_real_scalar_fields(vals in prop::collection::vec(-3.0f64..3.0, 125), m in prop_oneof![Just(1usize), Just(3usize)]) {
        let (g, f) = setup(m, [1.0, 0.4, 2.2]);
        let t = assemble_t(&g, &f, m, 2).unwrap();
        let u: Vec<CQuaternion> = vals.into_iter().map(CQuaternion::real).collect();
        let tu = t.apply_slice(&u);
        let re: f64 = tu.iter().zip(&u).map(|(a, b)| inner(*a, *b).re()).sum();
        prop_assert!(re.abs() <= 1e-12 * norm(&tu) * norm(&u));
    }
}
