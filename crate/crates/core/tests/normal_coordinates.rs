use nframes_core::corpus;
use nframes_core::normal_map::{adapt_chart_to_map, check_integrability, solve_frame_field, MapNormalSolution};
use nframes_core::normal_path::AdaptedChart;
use nframes_core::{
    normal_along_map, normal_along_path, normal_at_point, transform_coefficients, verify_normal, BundleShape,
    Connection, ConnectionCoefficients, CoordinateMap, DomainBox, Dual, Error, ExprMatrix, MapOptions, MapOutcome, Mat,
    ParamMap, PathOptions, PointNormalSpec,
};
use proptest::prelude::*;

fn interval(lo: f64, hi: f64) -> DomainBox {
    DomainBox::new(vec![lo], vec![hi]).unwrap()
}

#[test]
fn point_example_on_the_line() {
    let conn = corpus::line_exponential();
    let ch = normal_at_point(&conn, &PointNormalSpec::new(vec![0.0, 1.0], 1)).unwrap();
    assert_eq!(ch.to_strings(), vec!["u1", "u2 - 1.0 - u1"]);
    assert_eq!(verify_normal(&conn, &ch, &[vec![0.0, 1.0]], 1e-10).max_residual, 0.0);
}

#[test]
fn point_normality_is_only_local() {
    let conn = corpus::twisted();
    let ch = normal_at_point(&conn, &PointNormalSpec::new(vec![0.0, 0.0, 0.0], 1)).unwrap();
    assert!(verify_normal(&conn, &ch, &[vec![0.0; 3]], 1e-12).pass);
    let near = transform_coefficients(&conn, &ch, &[0.1, 0.1, 0.0]).unwrap();
    assert!(near.max_abs() > 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn every_corpus_point_is_normal(seed in 0u64..1000, g in -1.0..1.0f64, m in 0.5..2.0f64) {
        for (name, conn) in corpus::connections() {
            let r = conn.shape().r;
            let p = conn.domain.scaled(0.9).random(1, seed).remove(0);
            let gm = Mat::from_fn(r, r, |i, j| if i == j { m } else { 0.1 * g });
            let spec = PointNormalSpec::new(p.clone(), r).with_gauge(vec![g; r], gm);
            let ch = normal_at_point(&conn, &spec).unwrap();
            let rep = verify_normal(&conn, &ch, &[p.clone()], 1e-10);
            prop_assert!(rep.pass, "{name}: {rep:?}");
            let image = ch.apply(&p).unwrap();
            for (a, &gv) in image[conn.shape().n..].iter().zip(&vec![g; r]) {
                prop_assert!((a - gv).abs() < 1e-12, "{name}: fibre image {a} vs gauge {gv}");
            }
        }
    }
}

#[test]
fn cubic_path_is_inverted() {
    let s = BundleShape::new(1, 1).unwrap();
    let beta = ParamMap::parse(s, interval(-1.0, 1.0), &["s1 + s1^3", "0"]).unwrap();
    let chart = AdaptedChart::build(&beta, &[0.0]).unwrap();
    for i in 0..100 {
        let s = -1.0 + 2.0 * i as f64 / 99.0;
        let x = s + s * s * s;
        let back = chart.invert(&[x, 0.0]).unwrap()[0];
        assert!((back - s).abs() < 1e-12, "{s} -> {back}");
    }
}

#[test]
fn vertical_tangent_is_rejected() {
    let s = BundleShape::new(1, 1).unwrap();
    let beta = ParamMap::parse(s, interval(-1.0, 1.0), &["0", "s1"]).unwrap();
    assert!(matches!(AdaptedChart::build(&beta, &[0.0]), Err(Error::VerticalTangent { .. })));
}

fn test_path(conn: &ConnectionCoefficients) -> ParamMap {
    let s = conn.shape();
    let texts: Vec<String> = (0..s.dim())
        .map(|i| match i {
            0 => "0.5*s1".to_string(),
            i if i < s.n => format!("0.2*sin(s1 + {i})"),
            i => format!("0.1*s1^2 - 0.05*{i}"),
        })
        .collect();
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    ParamMap::parse(s, interval(-1.0, 1.0), &refs).unwrap()
}

#[test]
fn every_corpus_connection_is_normal_along_a_path() {
    for (name, conn) in corpus::connections() {
        let beta = test_path(&conn);
        let sol = normal_along_path(&conn, &beta, 0.0, None, None, PathOptions::default()).unwrap();
        assert!(sol.report.pass, "{name}: {:?}", sol.report);
        assert!(sol.coords.chart.invariant_residual < 1e-10, "{name}");
        for s in &sol.params {
            let u = beta.eval(s).unwrap();
            let image = sol.coords.apply(&u).unwrap();
            assert!((image[0] - u[0]).abs() < 1e-12);
        }
    }
}

#[test]
fn prescribed_frame_along_a_path() {
    let conn = corpus::linear_flat();
    let beta = ParamMap::parse(conn.shape(), interval(-1.0, 1.0), &["s1", "0.3*s1", "1 + s1^2"]).unwrap();
    let b = ExprMatrix::parse(&[vec!["2 + cos(s1)"]], &["s1".to_string()]).unwrap();
    let sol = normal_along_path(&conn, &beta, 0.0, Some(b), Some(-0.5), PathOptions::default()).unwrap();
    assert!(sol.report.pass, "{:?}", sol.report);
    let anchor = beta.eval(&[-0.5]).unwrap();
    let image = sol.coords.apply(&anchor).unwrap();
    assert!(image[2].abs() < 1e-12, "f vanishes at the anchor: {}", image[2]);
}

fn surface(conn: &ConnectionCoefficients, third: &str) -> ParamMap {
    ParamMap::parse(conn.shape(), DomainBox::cube(2, -1.0, 1.0), &["s1", "s2", third]).unwrap()
}

#[test]
fn cubic_map_is_inverted_on_a_grid() {
    let conn = corpus::zero();
    let beta = ParamMap::parse(conn.shape(), DomainBox::cube(2, -1.0, 1.0), &["s1 + s2^3", "s2", "0.4"]).unwrap();
    let chart = adapt_chart_to_map(&beta, &[0.0, 0.0]).unwrap();
    let mut worst = 0.0f64;
    for s in chart.window.grid(20) {
        let u = beta.eval(&s).unwrap();
        let back = chart.invert(&u).unwrap();
        let again = beta.eval(&back).unwrap();
        worst = worst.max((again[0] - u[0]).abs()).max((again[1] - u[1]).abs());
    }
    assert!(worst < 1e-12, "{worst}");
}

#[test]
fn integrability_of_flat_and_curved_surfaces() {
    let grid = DomainBox::cube(2, -1.0, 1.0).grid(9);
    let flat = corpus::linear_flat();
    let rep = check_integrability(&flat, &surface(&flat, "0.5"), &grid, 1e-8).unwrap();
    assert!(rep.pass(), "{rep:?}");
    let twisted = corpus::twisted();
    let rep = check_integrability(&twisted, &surface(&twisted, "0"), &grid, 1e-8).unwrap();
    assert!(!rep.pass_curvature);
    assert!((rep.curvature_residual - 1.0).abs() < 1e-12);
}

#[test]
fn zero_connection_keeps_the_frame_constant() {
    let conn = corpus::zero();
    let beta = surface(&conn, "s1*s2");
    let chart = adapt_chart_to_map(&beta, &[0.0, 0.0]).unwrap();
    let b1 = Mat::from_rows(&[vec![1.7]]);
    let (_, frame) = solve_frame_field(&conn, &chart, &[0.0, 0.0], b1.clone(), None, 7, 1e-2, 1e-8).unwrap();
    assert!(frame.b.iter().all(|b| b.sub(&b1).max_abs() < 1e-14));
    assert!(frame.path_independence < 1e-14);
}

fn constructed<C: Connection + Clone>(out: MapOutcome<C>) -> Box<MapNormalSolution<C>> {
    match out {
        MapOutcome::Constructed(sol) => sol,
        MapOutcome::Obstructed(rep) => panic!("unexpected obstruction: {rep:?}"),
    }
}

#[test]
fn flat_surface_frame_and_offset() {
    let conn = corpus::linear_flat();
    let beta = surface(&conn, "exp(-0.3*s1 + 0.7*s2)");
    let opts = MapOptions { grid: 7, ..MapOptions::default() };
    let sol = constructed(normal_along_map(&conn, &beta, &[0.0, 0.0], &opts).unwrap());
    assert!(sol.report.pass, "{:?}", sol.report);
    for (s, b) in sol.frame.nodes.iter().zip(&sol.frame.b) {
        assert!((b[(0, 0)] - (0.3 * s[0] - 0.7 * s[1]).exp()).abs() < 1e-8);
    }
    // f satisfies ∂_α f = −B Γ'_α at every node; checked by differentiating
    // through the transport.
    let coords = &sol.coords;
    for s in &sol.frame.nodes {
        for alpha in 0..2 {
            let sd: Vec<Dual<f64>> =
                s.iter().enumerate().map(|(i, &v)| Dual::new(v, if i == alpha { 1.0 } else { 0.0 })).collect();
            let (f, b) = coords.frame_at(&sd, &[0, 1]).unwrap();
            let (u, du) = beta.tangent(s, alpha).unwrap();
            let g = conn.gamma(&u).unwrap();
            let gp: f64 = g[(0, 0)] * du[0] + g[(0, 1)] * du[1] - du[2];
            let want = -b[(0, 0)].re * gp;
            assert!((f[0].eps - want).abs() < 1e-7, "{s:?} {alpha}: {} vs {want}", f[0].eps);
        }
    }
}

#[test]
fn one_parameter_map_agrees_with_the_path_construction() {
    let conn = corpus::nonlinear();
    let beta = ParamMap::parse(conn.shape(), interval(-1.0, 1.0), &["0.5*s1", "0.2*s1^2", "0.3*cos(s1)"]).unwrap();
    let path = normal_along_path(&conn, &beta, 0.0, None, None, PathOptions::default()).unwrap();
    let opts = MapOptions { grid: 21, ode_step: 1e-3, ..MapOptions::default() };
    let map = constructed(normal_along_map(&conn, &beta, &[0.0], &opts).unwrap());
    let pts = path.sample_points().unwrap();
    let a = verify_normal(&conn, &path.coords, &pts, 1e-6);
    let b = verify_normal(&conn, &map.coords, &pts, 1e-6);
    assert!(a.pass && b.pass, "{a:?} {b:?}");
    assert!((a.max_residual - b.max_residual).abs() < 1e-8);
}

#[test]
fn linear_form_connection_passes_the_frame_condition() {
    // Γ^a_μ = −c^a_{bμ}(x) u^b + g^a_μ(x) has fibre-constant ∂_bΓ, so the
    // second condition only sees the pulled-back coefficients.
    let s = BundleShape::new(2, 1).unwrap();
    let conn = ConnectionCoefficients::parse(s, &[vec!["-0.4*u3 + u2", "u1"]], DomainBox::cube(3, -2.0, 2.0))
        .unwrap();
    let grid = DomainBox::cube(2, -1.0, 1.0).grid(7);
    let rep = check_integrability(&conn, &surface(&conn, "0.5*s1*s2"), &grid, 1e-8).unwrap();
    assert!(rep.frame_residual < 1e-10, "{rep:?}");
}
