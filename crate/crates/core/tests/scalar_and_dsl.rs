use nframes_core::expr::{bundle_vars, random_expr};
use nframes_core::{derive1, derive2, fd_check, parse, Dual, Error, HyperDual, Scalar};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn dual(re: f64, eps: f64) -> Dual<f64> {
    Dual::new(re, eps)
}

proptest! {
    #[test]
    fn dual_ring_axioms(a in -10.0..10.0f64, da in -10.0..10.0f64,
                        b in -10.0..10.0f64, db in -10.0..10.0f64,
                        c in -10.0..10.0f64, dc in -10.0..10.0f64) {
        let (x, y, z) = (dual(a, da), dual(b, db), dual(c, dc));
        let lhs = (x + y) + z;
        let rhs = x + (y + z);
        prop_assert!(close(lhs.re, rhs.re, 1e-12) && close(lhs.eps, rhs.eps, 1e-12));
        let lhs = (x * y) * z;
        let rhs = x * (y * z);
        prop_assert!(close(lhs.re, rhs.re, 1e-12) && close(lhs.eps, rhs.eps, 1e-12));
        let lhs = x * (y + z);
        let rhs = x * y + x * z;
        prop_assert!(close(lhs.re, rhs.re, 1e-12) && close(lhs.eps, rhs.eps, 1e-12));
        prop_assert_eq!(x * y, y * x);
        prop_assert_eq!(x + y, y + x);
        prop_assert_eq!(x * Dual::one(), x);
        prop_assert_eq!(x + Dual::zero(), x);
    }

    #[test]
    fn dual_quotient_rule(a in -5.0..5.0f64, b in 0.5..5.0f64) {
        let q = Dual::variable(a) / Dual::constant(b);
        prop_assert!(close(q.eps, 1.0 / b, 1e-14));
        let q = Dual::constant(a) / Dual::variable(b);
        prop_assert!(close(q.eps, -a / (b * b), 1e-14));
    }

    #[test]
    fn hyperdual_product_has_unit_mixed_part(x in -3.0..3.0f64, y in -3.0..3.0f64) {
        let p = HyperDual::seeded(x, true, false) * HyperDual::seeded(y, false, true);
        prop_assert_eq!(p.d12(), 1.0);
        prop_assert_eq!(p.d1(), y);
        prop_assert_eq!(p.d2(), x);
    }

    #[test]
    fn printed_expressions_reparse(seed in 0u64..5000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_expr(&mut rng, 4, 6);
        let back = parse(&e.to_string(), &bundle_vars(4)).unwrap();
        prop_assert_eq!(back, e);
    }

    #[test]
    fn derivatives_match_differences(seed in 0u64..5000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_expr(&mut rng, 3, 5);
        let x = [0.3 + (seed % 7) as f64 * 0.1, -0.4, 0.7];
        let f = e.bind(3);
        let Ok(v) = e.eval::<f64>(&x) else { return Ok(()) };
        prop_assume!(v.is_finite() && v.abs() < 1e4);
        for i in 0..3 {
            let (Ok(d), Ok(fd)) = (derive1(&f, &x, i), fd_check(&f, &x, i, 1e-5)) else { return Ok(()) };
            prop_assume!(d.is_finite() && fd.is_finite());
            prop_assert!((d - fd).abs() <= 1e-6 * (1.0 + v.abs() + fd.abs()), "{e}: {d} vs {fd}");
            let plain = e.eval::<f64>(&x).unwrap();
            let lifted = e.eval(&[dual(x[0], 1.0), dual(x[1], 0.0), dual(x[2], 0.0)]).unwrap();
            prop_assert_eq!(plain, lifted.re);
            for j in 0..3 {
                let (Ok(a), Ok(b)) = (derive2(&f, &x, i, j), derive2(&f, &x, j, i)) else { return Ok(()) };
                prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()), "{e}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn derivative_examples() {
    let vars = bundle_vars(2);
    let sq = parse("u1^2", &vars[..1]).unwrap();
    assert_eq!(derive1(&sq.bind(1), &[3.0], 0).unwrap(), 6.0);
    let st = parse("sin(u1)*u2", &vars).unwrap();
    assert_eq!(derive1(&st.bind(2), &[0.0, 2.0], 0).unwrap(), 2.0);
    let pr = parse("u1*u2", &vars).unwrap();
    assert_eq!(derive2(&pr.bind(2), &[0.3, -4.0], 0, 1).unwrap(), 1.0);
    let cube = parse("u1^3", &vars[..1]).unwrap();
    assert_eq!(derive2(&cube.bind(1), &[2.0], 0, 0).unwrap(), 12.0);
    let ex = parse("exp(u1)", &vars[..1]).unwrap();
    assert!((fd_check(&ex.bind(1), &[0.0], 0, 1e-5).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn parse_examples() {
    let vars = bundle_vars(3);
    let e = parse("u1*u3 + sin(u2)", &vars).unwrap();
    assert_eq!(e.eval::<f64>(&[2.0, 0.0, 5.0]).unwrap(), 10.0);
    assert!(matches!(parse("u1 +", &vars), Err(Error::Syntax { offset: 4, .. })));
    assert!(matches!(parse("u4", &vars), Err(Error::UnknownVariable { .. })));
    assert!(matches!(parse("foo(u1)", &vars), Err(Error::UnknownFunction { .. })));
    assert_eq!(parse("2^3^2", &vars).unwrap().eval::<f64>(&[0.0; 3]).unwrap(), 512.0);
    assert_eq!(parse("-u1^2", &vars).unwrap().eval::<f64>(&[3.0, 0.0, 0.0]).unwrap(), -9.0);
}

#[test]
fn evaluation_domain_errors() {
    let vars = bundle_vars(2);
    let e = parse("u1/(u2 - 1)", &vars).unwrap();
    match e.eval::<f64>(&[1.0, 1.0]) {
        Err(Error::Domain { point, .. }) => assert_eq!(point, vec![1.0, 1.0]),
        other => panic!("expected a domain error, got {other:?}"),
    }
    assert!(parse("log(u1)", &vars).unwrap().eval::<f64>(&[-1.0, 0.0]).is_err());
    assert!(parse("sqrt(u1)", &vars).unwrap().eval::<f64>(&[-1.0, 0.0]).is_err());
}
