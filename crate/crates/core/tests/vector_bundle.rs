use nframes_core::connection::curvature;
use nframes_core::corpus;
use nframes_core::vector_bundle::{
    covariant_derivative, fibre_probes, is_linear_form, transform_three, BaseMatrixField, Section, ThreeIndexField,
    TransformedThree,
};
use nframes_core::{
    check_vanishing_equivalence, normal_frame_along_base_path, two_from_three, BundleShape, ConnectionCoefficients,
    DomainBox, Error, ExprCurve, ExprMatrix, Mat, Scalar, ThreeIndexCoefficients,
};
use proptest::prelude::*;

fn n2r1(row: &[&str]) -> ConnectionCoefficients {
    ConnectionCoefficients::parse(BundleShape::new(2, 1).unwrap(), &[row.to_vec()], DomainBox::cube(3, -2.0, 2.0)).unwrap()
}

fn base_vars(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("u{i}")).collect()
}

#[test]
fn linear_form_detection() {
    let samples = DomainBox::cube(3, -1.0, 1.0).random(10, 2);
    assert!(!is_linear_form(&n2r1(&["u3^2", "0"]), &samples).unwrap().linear);
    assert!(is_linear_form(&n2r1(&["u1*u3", "sin(u2)"]), &samples).unwrap().linear);
    assert!(is_linear_form(&two_from_three(&corpus::varying_three()), &DomainBox::cube(4, -1.0, 1.0).random(10, 3))
        .unwrap()
        .linear);
}

#[test]
fn two_index_curvature_is_affine_in_the_fibre() {
    let g3 = ThreeIndexCoefficients::parse(
        BundleShape::new(2, 2).unwrap(),
        &[vec![vec!["u1", "0.3"], vec!["sin(u2)", "-u1*u2"]], vec![vec!["0", "cos(u1)"], vec!["1", "u2^2"]]],
        Some(&[vec!["u2", "1"], vec!["0", "u1^2"]]),
        DomainBox::cube(4, -2.0, 2.0),
    )
    .unwrap();
    let conn = two_from_three(&g3);
    let dom = DomainBox::cube(2, -0.5, 0.5);
    for (i, x) in DomainBox::cube(2, -1.0, 1.0).random(20, 4).into_iter().enumerate() {
        let ys = dom.random(2, i as u64);
        let at = |y: &[f64]| {
            let mut u = x.clone();
            u.extend_from_slice(y);
            curvature(&conn, &u).unwrap()
        };
        let sum: Vec<f64> = ys[0].iter().zip(&ys[1]).map(|(a, b)| a + b).collect();
        let (r1, r2, r12, r0) = (at(&ys[0]), at(&ys[1]), at(&sum), at(&[0.0, 0.0]));
        for a in 0..2 {
            let gap = r12.get(a, 0, 1) - r1.get(a, 0, 1) - r2.get(a, 0, 1) + r0.get(a, 0, 1);
            assert!(gap.abs() < 1e-9, "{gap}");
        }
    }
}

#[test]
fn covariant_derivative_examples() {
    let g3 = corpus::constant_three(0.5);
    let f = Section::parse(&["1"], 1).unwrap();
    let y = Section::parse(&["3"], 1).unwrap();
    assert_eq!(covariant_derivative(&g3, &f, &y, &[0.2]).unwrap(), vec![1.5]);
    let zero = ThreeIndexCoefficients::parse(BundleShape::new(1, 1).unwrap(), &[vec![vec!["0"]]], None, DomainBox::cube(2, -1.0, 1.0))
        .unwrap();
    let y = Section::parse(&["u1^2"], 1).unwrap();
    assert_eq!(covariant_derivative(&zero, &f, &y, &[0.7]).unwrap(), vec![1.4]);
}

fn sec(texts: &[String]) -> Section {
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    Section::parse(&refs, 2).unwrap()
}

#[test]
fn covariant_derivative_is_a_derivation() {
    let g3 = corpus::varying_three();
    let f = sec(&["1 + u2".into(), "u1*u2".into()]);
    let y = ["sin(u1)".to_string(), "u2^2 - u1".to_string()];
    let z = ["exp(0.3*u2)".to_string(), "2".to_string()];
    let phi = "cos(u1*u2) + u1";
    let dphi = |x: &[f64]| {
        let fv = f.eval(x).unwrap();
        let (a, b) = (x[0], x[1]);
        fv[0] * (-b * (a * b).sin() + 1.0) + fv[1] * (-a * (a * b).sin())
    };
    let phi_y = sec(&y.iter().map(|c| format!("({phi})*({c})")).collect::<Vec<_>>());
    let y_plus_z = sec(&y.iter().zip(&z).map(|(a, b)| format!("({a}) + ({b})")).collect::<Vec<_>>());
    let scaled_f = sec(&["(1 + u2)*(2 + u1)".into(), "(u1*u2)*(2 + u1)".into()]);
    let (y, z) = (sec(&y), sec(&z));
    for x in DomainBox::cube(2, -1.0, 1.0).random(50, 12) {
        let phi_v = (x[0] * x[1]).cos() + x[0];
        let dy = covariant_derivative(&g3, &f, &y, &x).unwrap();
        let dz = covariant_derivative(&g3, &f, &z, &x).unwrap();
        let lhs = covariant_derivative(&g3, &f, &phi_y, &x).unwrap();
        let yv = y.eval(&x).unwrap();
        let sum = covariant_derivative(&g3, &f, &y_plus_z, &x).unwrap();
        let scaled = covariant_derivative(&g3, &scaled_f, &y, &x).unwrap();
        for a in 0..2 {
            assert!((lhs[a] - (dphi(&x) * yv[a] + phi_v * dy[a])).abs() < 1e-9);
            assert!((sum[a] - dy[a] - dz[a]).abs() < 1e-9);
            assert!((scaled[a] - (2.0 + x[0]) * dy[a]).abs() < 1e-9);
        }
    }
}

#[test]
fn identity_change_leaves_coefficients_alone() {
    let g3 = corpus::varying_three();
    let id = ExprMatrix::identity(2);
    for x in DomainBox::cube(2, -1.0, 1.0).random(20, 5) {
        let t = transform_three(&g3, None, &id, &id, &x).unwrap();
        let orig = g3.gamma3(&x).unwrap();
        for (a, b) in t.gamma3.iter().zip(&orig) {
            assert!(a.sub(b).max_abs() < 1e-15);
        }
    }
}

struct Product<'a> {
    first: &'a ExprMatrix,
    second: Mat<f64>,
}

impl BaseMatrixField for Product<'_> {
    fn matrix<T: Scalar>(&self, x: &[T]) -> nframes_core::Result<Mat<T>> {
        Ok(self.first.eval(x)?.matmul(&self.second.map(T::from_f64)))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn fibre_changes_compose(c0 in 0.5..2.0f64, c1 in -0.5..0.5f64, c2 in -0.5..0.5f64, c3 in 0.5..2.0f64,
                             x0 in -1.0..1.0f64, x1 in -1.0..1.0f64) {
        let g3 = corpus::varying_three();
        let vars = base_vars(2);
        let b1 = ExprMatrix::parse(&[vec!["1 + 0.2*u1", "0.3*u2"], vec!["0.1*sin(u1)", "1.5 - 0.2*u2^2"]], &vars).unwrap();
        let b2 = Mat::from_rows(&[vec![c0, c1], vec![c2, c3]]);
        let id = ExprMatrix::identity(2);
        let x = [x0, x1];
        let step = TransformedThree { inner: &g3, b: &b1, bbase: &id };
        let twice = transform_three(&step, None, &ExprMatrix::constant(&b2), &id, &x).unwrap();
        let once = transform_three(&g3, None, &Product { first: &b1, second: b2 }, &id, &x).unwrap();
        for (a, b) in twice.gamma3.iter().zip(&once.gamma3) {
            prop_assert!(a.sub(b).max_abs() < 1e-10);
        }
    }
}

#[test]
fn vanishing_coefficients_keep_the_frame_constant() {
    let g3 = ThreeIndexCoefficients::parse(
        BundleShape::new(2, 2).unwrap(),
        &[vec![vec!["0", "0"], vec!["0", "0"]], vec![vec!["0", "0"], vec!["0", "0"]]],
        None,
        DomainBox::cube(4, -2.0, 2.0),
    )
    .unwrap();
    let curve = ExprCurve::parse(&["s1", "s1^2"], 0.0, 1.0).unwrap();
    let b0 = Mat::from_rows(&[vec![2.0, 1.0], vec![0.0, 1.0]]);
    let pf = normal_frame_along_base_path(g3, curve, b0.clone(), 200).unwrap();
    assert!(pf.b.iter().all(|b| b.sub(&b0).max_abs() == 0.0));
}

#[test]
fn parallel_frame_for_varying_coefficients() {
    let curve = ExprCurve::parse(&["0.8*s1", "0.5*sin(2*s1)"], 0.0, 1.0).unwrap();
    let pf = normal_frame_along_base_path(corpus::varying_three(), curve, Mat::identity(2), 1000).unwrap();
    assert!(pf.report.three_index_residual < 1e-9, "{:?}", pf.report);
    assert!(pf.report.two_index_residual < 1e-9, "{:?}", pf.report);
    assert!(pf.contracted_residual(0.37).unwrap().max_abs() < 1e-9);
}

#[test]
fn equivalence_needs_spanning_fibre_samples() {
    let g3 = corpus::varying_three();
    let id = ExprMatrix::identity(2);
    let bases = DomainBox::cube(2, -1.0, 1.0).random(3, 1);
    let err = check_vanishing_equivalence(&g3, &bases, &[vec![1.0, 2.0], vec![2.0, 4.0]], &id, &id, 1e-9).unwrap_err();
    assert!(matches!(err, Error::InsufficientFibreSamples { found: 1, needed: 2, .. }));
    let rep = check_vanishing_equivalence(&g3, &bases, &fibre_probes(2, 6), &id, &id, 1e-9).unwrap();
    assert!(rep.holds && rep.neither_vanishes == 3);
}

#[test]
fn equivalence_on_the_line() {
    let g3 = corpus::constant_three(0.5);
    let bases: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 / 9.0]).collect();
    let exact = ExprMatrix::parse(&[vec!["exp(-0.5*u1)"]], &base_vars(1)).unwrap();
    let id = ExprMatrix::identity(1);
    let rep = check_vanishing_equivalence(&g3, &bases, &fibre_probes(1, 5), &exact, &id, 1e-12).unwrap();
    assert!(rep.holds && rep.both_vanish == 10, "{rep:?}");
}
