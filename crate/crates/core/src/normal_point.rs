//! Coordinates normal at a single point, and the residual check shared by
//! every normal-coordinate construction.

use crate::connection::{transform_coefficients, Connection};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{CoordinateChange, CoordinateMap, DET_TOL};
use crate::linalg::Mat;

/// Point and gauge constants `g^a`, `g^a_b` of a point-normal chart.
#[derive(Debug, Clone, PartialEq)]
pub struct PointNormalSpec {
    pub p: Vec<f64>,
    pub g: Vec<f64>,
    pub g_mat: Mat<f64>,
}

impl PointNormalSpec {
    /// Default gauge: `g^a = 0`, `g^a_b = δ^a_b`.
    pub fn new(p: Vec<f64>, r: usize) -> Self {
        PointNormalSpec { p, g: vec![0.0; r], g_mat: Mat::identity(r) }
    }

    pub fn with_gauge(mut self, g: Vec<f64>, g_mat: Mat<f64>) -> Self {
        self.g = g;
        self.g_mat = g_mat;
        self
    }
}

/// `c·(u_i − p_i)`, dropping unit coefficients and zero offsets.
fn scaled_offset(c: f64, i: usize, p: f64) -> Expr {
    let diff = match p {
        0.0 => Expr::u(i),
        p if p < 0.0 => Expr::u(i).add(Expr::num(-p)),
        p => Expr::u(i).sub(Expr::num(p)),
    };
    if c == 1.0 {
        diff
    } else {
        Expr::num(c).mul(diff)
    }
}

fn sum(terms: Vec<(f64, Expr)>) -> Expr {
    // (sign, magnitude-expression) pairs folded into a left-leaning sum
    let mut acc: Option<Expr> = None;
    for (sign, t) in terms {
        acc = Some(match acc {
            None if sign < 0.0 => Expr::neg(t),
            None => t,
            Some(a) if sign < 0.0 => a.sub(t),
            Some(a) => a.add(t),
        });
    }
    acc.unwrap_or_else(|| Expr::num(0.0))
}

/// `ũ^μ = u^μ`, `ũ^a = g^a + g^a_b{−Γ^b_μ(p)(u^μ − p^μ) + (u^b − p^b)}`.
pub fn normal_at_point<C: Connection>(conn: &C, spec: &PointNormalSpec) -> Result<CoordinateChange> {
    let shape = conn.shape();
    let (n, r) = (shape.n, shape.r);
    if spec.p.len() != shape.dim() || spec.g.len() != r || spec.g_mat.rows() != r || spec.g_mat.cols() != r {
        return Err(Error::Shape("point-normal spec does not match the bundle shape".into()));
    }
    let det = spec.g_mat.det();
    if det.abs() <= DET_TOL {
        return Err(Error::Singular { condition: f64::INFINITY });
    }
    spec.g_mat.inverse()?;
    let gamma = conn.gamma(&spec.p)?;
    let p = &spec.p;

    // inner[b] = (u^b − p^b) − Γ^b_μ(p)(u^μ − p^μ)
    let inner: Vec<Expr> = (0..r)
        .map(|b| {
            let mut terms = vec![(1.0, scaled_offset(1.0, n + b, p[n + b]))];
            for mu in 0..n {
                let c = gamma[(b, mu)];
                if c != 0.0 {
                    terms.push((-c.signum(), scaled_offset(c.abs(), mu, p[mu])));
                }
            }
            sum(terms)
        })
        .collect();

    let mut comps: Vec<Expr> = (0..n).map(Expr::u).collect();
    for a in 0..r {
        let mut terms = Vec::new();
        if spec.g[a] != 0.0 {
            terms.push((spec.g[a].signum(), Expr::num(spec.g[a].abs())));
        }
        for (b, e) in inner.iter().enumerate() {
            let c = spec.g_mat[(a, b)];
            if c == 0.0 {
                continue;
            }
            let t = if c.abs() == 1.0 { e.clone() } else { Expr::num(c.abs()).mul(e.clone()) };
            terms.push((c.signum(), t));
        }
        comps.push(sum(terms));
    }
    CoordinateChange::new(shape, comps)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    /// max over samples of max |Γ̃^a_μ|; infinite if any sample failed.
    pub max_residual: f64,
    pub worst_point: Vec<f64>,
    /// Samples at which the transformed coefficients could not be evaluated.
    pub failed: usize,
    pub samples: usize,
    pub pass: bool,
}

/// Largest transformed coefficient of `conn` in the coordinates given by
/// `change` over the sample points.
pub fn verify_normal<C: Connection, M: CoordinateMap>(
    conn: &C,
    change: &M,
    samples: &[Vec<f64>],
    tol: f64,
) -> VerifyReport {
    let mut rep =
        VerifyReport { max_residual: 0.0, worst_point: vec![], failed: 0, samples: samples.len(), pass: true };
    for p in samples {
        let m = match transform_coefficients(conn, change, p) {
            Ok(g) if g.as_slice().iter().all(|x| x.is_finite()) => g.max_abs(),
            _ => {
                rep.failed += 1;
                f64::INFINITY
            }
        };
        if m > rep.max_residual || rep.worst_point.is_empty() {
            rep.max_residual = rep.max_residual.max(m);
            rep.worst_point = p.clone();
        }
    }
    rep.pass = rep.failed == 0 && rep.max_residual < tol;
    rep
}
