//! Named connections and changes used by the tests, benches and examples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::connection::ConnectionCoefficients;
use crate::expr::{Expr, Func};
use crate::geometry::{BundleShape, CoordinateChange, DomainBox, ExprMatrix};
use crate::vector_bundle::ThreeIndexCoefficients;

fn conn(n: usize, r: usize, rows: &[Vec<&str>], lo: f64, hi: f64) -> ConnectionCoefficients {
    let shape = BundleShape::new(n, r).expect("valid shape");
    ConnectionCoefficients::parse(shape, rows, DomainBox::cube(n + r, lo, hi)).expect("corpus entry parses")
}

/// `Γ ≡ 0` on a 2+1 bundle.
pub fn zero() -> ConnectionCoefficients {
    conn(2, 1, &[vec!["0", "0"]], -2.0, 2.0)
}

/// `Γ²_1 = u²` on a 1+1 bundle; flat, horizontal curves `u² = C e^{u¹}`.
pub fn line_exponential() -> ConnectionCoefficients {
    conn(1, 1, &[vec!["u2"]], -2.0, 2.0)
}

/// `Γ³_1 = 0`, `Γ³_2 = u¹` on a 2+1 bundle; curvature `R³_{12} = 1`.
pub fn twisted() -> ConnectionCoefficients {
    conn(2, 1, &[vec!["0", "u1"]], -2.0, 2.0)
}

/// `Γ³_α = −c_α u³` with `c = (0.3, −0.7)`; flat.
pub fn linear_flat() -> ConnectionCoefficients {
    conn(2, 1, &[vec!["-0.3*u3", "0.7*u3"]], -2.0, 2.0)
}

/// Nonlinear in both base and fibre on a 2+1 bundle.
pub fn nonlinear() -> ConnectionCoefficients {
    conn(2, 1, &[vec!["u1*u3", "sin(u2) - u3^2"]], -1.5, 1.5)
}

/// A generic 2+2 connection.
pub fn mixed_two_two() -> ConnectionCoefficients {
    conn(2, 2, &[vec!["u3*u4", "cos(u1)"], vec!["exp(0.2*u2)*u3", "u1 - u4^2"]], -1.0, 1.0)
}

/// A 3+2 connection with transcendental entries.
pub fn three_two() -> ConnectionCoefficients {
    conn(
        3,
        2,
        &[vec!["u1*u4", "sin(u2 + u5)", "0.5*u3^2"], vec!["u5 - u2", "exp(-u4^2)", "u1*u2*u5"]],
        -1.0,
        1.0,
    )
}

/// Every named connection.
pub fn connections() -> Vec<(&'static str, ConnectionCoefficients)> {
    vec![
        ("zero", zero()),
        ("line-exponential", line_exponential()),
        ("twisted", twisted()),
        ("linear-flat", linear_flat()),
        ("nonlinear", nonlinear()),
        ("mixed-2+2", mixed_two_two()),
        ("three-two", three_two()),
    ]
}

/// `Γ³_{31} = c` on a 1+1 vector bundle.
pub fn constant_three(c: f64) -> ThreeIndexCoefficients {
    let shape = BundleShape::new(1, 1).expect("valid shape");
    let m = ExprMatrix::new(1, 1, vec![Expr::num(c)]).expect("1x1");
    ThreeIndexCoefficients::new(shape, vec![m], None, DomainBox::cube(2, -3.0, 3.0)).expect("valid coefficients")
}

/// Base-dependent 3-index coefficients on a 2+2 vector bundle.
pub fn varying_three() -> ThreeIndexCoefficients {
    let shape = BundleShape::new(2, 2).expect("valid shape");
    ThreeIndexCoefficients::parse(
        shape,
        &[vec![vec!["u1", "0.3"], vec!["sin(u2)", "-u1*u2"]], vec![vec!["0", "cos(u1)"], vec!["1", "u2^2"]]],
        None,
        DomainBox::cube(4, -1.0, 1.0),
    )
    .expect("valid coefficients")
}

/// Every named set of 3-index coefficients.
pub fn three_index() -> Vec<(&'static str, ThreeIndexCoefficients)> {
    vec![("constant", constant_three(0.5)), ("varying", varying_three())]
}

fn coef(rng: &mut ChaCha8Rng, amp: f64) -> f64 {
    (rng.gen_range(-amp..amp) * 1000.0).round() / 1000.0
}

/// A random admissible change that stays close to the identity on
/// `[-0.5, 0.5]^{n+r}`: base components perturbed by small base-only
/// terms, fibre components affine in the fibre with small base-dependent
/// coefficients.
pub fn random_admissible_change(shape: BundleShape, seed: u64) -> CoordinateChange {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, r) = (shape.n, shape.r);
    let mut comps = Vec::with_capacity(n + r);
    for i in 0..n {
        let j = rng.gen_range(0..n);
        let k = rng.gen_range(0..n);
        let e = Expr::u(i)
            .add(Expr::num(coef(&mut rng, 0.1)).mul(Expr::call(Func::Sin, Expr::u(j))))
            .add(Expr::num(coef(&mut rng, 0.1)).mul(Expr::u(k).pow(Expr::num(2.0))));
        comps.push(e);
    }
    for a in 0..r {
        let j = rng.gen_range(0..n);
        let mut e = Expr::num(coef(&mut rng, 0.5)).mul(Expr::call(Func::Cos, Expr::u(j)));
        let scale = Expr::num(1.0).add(Expr::num(coef(&mut rng, 0.1)).mul(Expr::u(rng.gen_range(0..n))));
        e = e.add(scale.mul(Expr::u(n + a)));
        for b in (0..r).filter(|&b| b != a) {
            e = e.add(Expr::num(coef(&mut rng, 0.1)).mul(Expr::u(n + b)));
        }
        comps.push(e);
    }
    CoordinateChange::new(shape, comps).expect("admissible by construction")
}
