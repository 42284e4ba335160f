//! Parameterized maps into the bundle, charts adapted to them, and
//! coordinates normal along them.
//!
//! A chart adapted to `β` reads `x(β(s)) = (s, t0)`: its first `k`
//! coordinates invert the pivot components `β^P`, the rest are
//! `u^K − β^K(σ(u)) + t0^K`. Normal coordinates are written directly in the
//! original coordinates:
//!
//! ```text
//! ũ^μ = u^μ
//! ũ^a = f^a(σ) + B^a_b(σ) { −Γ^b_μ(β(σ)) (u^μ − β^μ(σ)) + (u^b − β^b(σ)) }
//! ```
//!
//! with `σ(u)` the pivot inversion and `∂_α f = −B Γ'_α`, where
//! `Γ'_α = Γ_ν(β) ∂_α β^ν − ∂_α β^fibre` are the coefficients pulled back
//! to the adapted chart. Every piece, including the Newton inversion and the
//! quadratures, is evaluated generically so the Jacobian of the result is
//! exact up to discretization.

use crate::connection::Connection;
use crate::error::{Error, Result};
use crate::expr::{param_vars, parse, Expr};
use crate::geometry::{BundleShape, CoordinateMap, DomainBox, ExprMatrix, DET_TOL};
use crate::integrate::{even_panels, rk4_step, simpson};
use crate::linalg::Mat;
use crate::normal_point::{verify_normal, VerifyReport};
use crate::scalar::{lift, seed, value_and_jacobian, values, Dual, Scalar};

/// Base-row norms below this make a tangent vertical.
pub const VERTICAL_TOL: f64 = 1e-12;
/// Required accuracy of `x(β(s)) = (s, t0)`.
pub const CHART_TOL: f64 = 1e-10;

/// `β: J^k → E` given by `n+r` expressions in `s1..sk`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamMap {
    pub shape: BundleShape,
    pub domain: DomainBox,
    pub components: Vec<Expr>,
}

impl ParamMap {
    pub fn new(shape: BundleShape, domain: DomainBox, components: Vec<Expr>) -> Result<Self> {
        if components.len() != shape.dim() {
            return Err(Error::Shape(format!("map needs {} components, got {}", shape.dim(), components.len())));
        }
        if domain.dim() > shape.n {
            return Err(Error::Shape(format!("cannot map {} parameters into a base of dimension {}", domain.dim(), shape.n)));
        }
        if let Some(e) = components.iter().find(|e| e.min_arity() > domain.dim()) {
            return Err(Error::Shape(format!("component `{e}` uses parameters beyond s{}", domain.dim())));
        }
        Ok(ParamMap { shape, domain, components })
    }

    pub fn parse(shape: BundleShape, domain: DomainBox, texts: &[&str]) -> Result<Self> {
        let vars = param_vars(domain.dim());
        let comps = texts.iter().map(|t| parse(t, &vars)).collect::<Result<Vec<_>>>()?;
        Self::new(shape, domain, comps)
    }

    pub fn k(&self) -> usize {
        self.domain.dim()
    }

    pub fn eval<T: Scalar>(&self, s: &[T]) -> Result<Vec<T>> {
        self.components.iter().map(|c| c.eval(s)).collect()
    }

    /// `β(s)` and `[∂β^I/∂s^α]` (rows `I`, columns `α`).
    pub fn jet<T: Scalar>(&self, s: &[T]) -> Result<(Vec<T>, Mat<T>)> {
        value_and_jacobian(|x: &[Dual<T>]| self.eval(x), s)
    }

    /// `β(s)` and `∂_α β`.
    pub fn tangent<T: Scalar>(&self, s: &[T], alpha: usize) -> Result<(Vec<T>, Vec<T>)> {
        let out = self.eval(&seed(s, alpha))?;
        Ok((out.iter().map(|d| d.re).collect(), out.iter().map(|d| d.eps).collect()))
    }

    fn pivot_values<T: Scalar>(&self, pivots: &[usize], s: &[T]) -> Result<Vec<T>> {
        pivots.iter().map(|&p| self.components[p].eval(s)).collect()
    }
}

/// Greedy maximal-volume choice of `k` base rows of the parameter Jacobian.
/// Ties go to the lower index.
pub fn select_pivots(jac: &Mat<f64>, n: usize, s: &[f64]) -> Result<Vec<usize>> {
    let k = jac.cols();
    let mut rows: Vec<Vec<f64>> = (0..n).map(|mu| jac.row(mu).to_vec()).collect();
    let mut chosen = Vec::with_capacity(k);
    for step in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for (mu, row) in rows.iter().enumerate() {
            if chosen.contains(&mu) {
                continue;
            }
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if best.is_none_or(|(_, b)| norm > b) {
                best = Some((mu, norm));
            }
        }
        let (mu, norm) = best.ok_or_else(|| Error::RankDeficient { s: s.to_vec(), rank: step, k })?;
        if norm < VERTICAL_TOL {
            return Err(if k == 1 {
                Error::VerticalTangent { s: s.to_vec() }
            } else {
                Error::RankDeficient { s: s.to_vec(), rank: step, k }
            });
        }
        let e: Vec<f64> = rows[mu].iter().map(|x| x / norm).collect();
        for row in rows.iter_mut() {
            let d: f64 = row.iter().zip(&e).map(|(a, b)| a * b).sum();
            for (x, y) in row.iter_mut().zip(&e) {
                *x -= d * y;
            }
        }
        chosen.push(mu);
    }
    Ok(chosen)
}

/// Chart with `x(β(s)) = (s, t0)` on the validity window.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedChart {
    pub beta: ParamMap,
    pub s0: Vec<f64>,
    /// Base indices whose components of `β` are inverted.
    pub pivots: Vec<usize>,
    /// Remaining coordinate indices in chart order (base, then fibre).
    pub others: Vec<usize>,
    /// `β^K(s0)` for each index in `others`.
    pub t0: Vec<f64>,
    pub window: DomainBox,
    /// max |x(β(s)) − (s, t0)| over the verification samples.
    pub invariant_residual: f64,
}

impl AdaptedChart {
    pub fn build(beta: &ParamMap, s0: &[f64]) -> Result<AdaptedChart> {
        let k = beta.k();
        let n = beta.shape.n;
        if s0.len() != k || !beta.domain.contains(s0) {
            return Err(Error::OutOfDomain { point: s0.to_vec() });
        }
        let (b0, jac) = beta.jet(s0)?;
        let pivots = select_pivots(&jac, n, s0)?;
        let others: Vec<usize> = (0..beta.shape.dim()).filter(|i| !pivots.contains(i)).collect();
        let t0 = others.iter().map(|&i| b0[i]).collect();
        let window = validity_window(beta, &pivots, s0)?;
        let mut chart = AdaptedChart {
            beta: beta.clone(),
            s0: s0.to_vec(),
            pivots,
            others,
            t0,
            window,
            invariant_residual: 0.0,
        };
        let per_axis = if k == 1 { 100 } else { 11 };
        let mut worst = 0.0f64;
        for s in chart.window.grid(per_axis) {
            let x = chart.apply(&beta.eval(&s)?)?;
            for (i, xi) in x.iter().enumerate() {
                let want = if i < k { s[i] } else { chart.t0[i - k] };
                worst = worst.max((xi - want).abs());
            }
        }
        chart.invariant_residual = worst;
        if worst >= CHART_TOL {
            return Err(Error::Inversion { point: s0.to_vec(), residual: worst });
        }
        Ok(chart)
    }

    pub fn k(&self) -> usize {
        self.pivots.len()
    }

    /// `σ(u)`: parameters whose pivot components match those of `u`.
    pub fn invert<T: Scalar>(&self, u: &[T]) -> Result<Vec<T>> {
        let y: Vec<T> = self.pivots.iter().map(|&p| u[p]).collect();
        let s = self.invert_plain(&values(&y))?;
        // Two Newton steps in the generic scalar carry exact first and
        // second derivatives through the inversion.
        let mut s: Vec<T> = lift(&s);
        for _ in 0..2 {
            let (val, jac) = value_and_jacobian(|x: &[Dual<T>]| self.beta.pivot_values(&self.pivots, x), &s)?;
            let res: Vec<T> = val.iter().zip(&y).map(|(&a, &b)| a - b).collect();
            let delta = jac.solve(&res)?;
            for (si, di) in s.iter_mut().zip(delta) {
                *si -= di;
            }
        }
        Ok(s)
    }

    fn invert_plain(&self, y: &[f64]) -> Result<Vec<f64>> {
        let fail = |s: &[f64], res: f64| Error::Inversion { point: s.to_vec(), residual: res };
        if self.k() == 1 {
            return invert_monotone(&self.beta, self.pivots[0], &self.window, self.s0[0], y[0])
                .map(|s| vec![s])
                .ok_or_else(|| fail(y, f64::NAN));
        }
        if let Some(s) = damped_newton(&self.beta, &self.pivots, &self.s0, y) {
            return Ok(s);
        }
        // restart from the best node of a coarse grid over the window
        let mut best = (f64::INFINITY, self.s0.clone());
        for s in self.window.grid(11) {
            if let Ok(v) = self.beta.pivot_values(&self.pivots, &s) {
                let r = v.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                if r < best.0 {
                    best = (r, s);
                }
            }
        }
        damped_newton(&self.beta, &self.pivots, &best.1, y).ok_or_else(|| fail(y, best.0))
    }
}

impl CoordinateMap for AdaptedChart {
    fn dim(&self) -> usize {
        self.beta.shape.dim()
    }
    fn apply<T: Scalar>(&self, u: &[T]) -> Result<Vec<T>> {
        let s = self.invert(u)?;
        let b = self.beta.eval(&s)?;
        let mut x = s;
        for (&i, &t) in self.others.iter().zip(&self.t0) {
            x.push(u[i] - b[i] + T::from_f64(t));
        }
        Ok(x)
    }
}

fn pivot_jacobian_det(beta: &ParamMap, pivots: &[usize], s: &[f64]) -> Result<f64> {
    let (_, jac) = value_and_jacobian(|x: &[Dual<f64>]| beta.pivot_values(pivots, x), s)?;
    Ok(jac.det())
}

/// Largest box around `s0` (inside the parameter domain) on which the pivot
/// Jacobian keeps its sign. For `k = 1` this marches outward from `s0`.
fn validity_window(beta: &ParamMap, pivots: &[usize], s0: &[f64]) -> Result<DomainBox> {
    let dom = &beta.domain;
    let d0 = pivot_jacobian_det(beta, pivots, s0)?;
    let keeps_sign = |s: &[f64]| pivot_jacobian_det(beta, pivots, s).is_ok_and(|d| d * d0.signum() > VERTICAL_TOL);
    if pivots.len() == 1 {
        let steps = 1000;
        let h = (dom.hi[0] - dom.lo[0]) / steps as f64;
        let mut hi = s0[0];
        while hi < dom.hi[0] {
            let next = (hi + h).min(dom.hi[0]);
            if !keeps_sign(&[next]) {
                break;
            }
            hi = next;
        }
        let mut lo = s0[0];
        while lo > dom.lo[0] {
            let next = (lo - h).max(dom.lo[0]);
            if !keeps_sign(&[next]) {
                break;
            }
            lo = next;
        }
        if !(lo < hi) {
            return Err(Error::EmptyWindow);
        }
        return Ok(DomainBox { lo: vec![lo], hi: vec![hi] });
    }
    let mut f = 1.0;
    while f > 1e-3 {
        let lo: Vec<f64> = (0..s0.len()).map(|i| s0[i] - f * (s0[i] - dom.lo[i])).collect();
        let hi: Vec<f64> = (0..s0.len()).map(|i| s0[i] + f * (dom.hi[i] - s0[i])).collect();
        if lo.iter().zip(&hi).all(|(l, h)| l < h) {
            let b = DomainBox { lo, hi };
            if b.grid(11).iter().all(|s| keeps_sign(s)) {
                return Ok(b);
            }
        }
        f *= 0.5;
    }
    Err(Error::EmptyWindow)
}

/// Solve `β^P(s) = y` for monotone `β^P` on `window`: bracketed Newton
/// with bisection fallback, plain Newton from the nearer end when `y` lies
/// outside the window's image.
fn invert_monotone(beta: &ParamMap, p: usize, window: &DomainBox, s_start: f64, y: f64) -> Option<f64> {
    let g = |s: f64| -> Option<(f64, f64)> {
        let d = beta.components[p].eval(&[Dual::variable(s)]).ok()?;
        Some((d.re - y, d.eps))
    };
    let tol = 1e-15 * (1.0 + y.abs());
    let (mut a, mut b) = (window.lo[0], window.hi[0]);
    let (ga, _) = g(a)?;
    let (gb, _) = g(b)?;
    if ga == 0.0 {
        return Some(a);
    }
    if gb == 0.0 {
        return Some(b);
    }
    if ga.signum() != gb.signum() {
        let mut s = s_start.clamp(a, b);
        for _ in 0..200 {
            let (gs, ds) = g(s)?;
            if gs.abs() <= tol {
                return Some(s);
            }
            if gs.signum() == ga.signum() {
                a = s;
            } else {
                b = s;
            }
            let newton = s - gs / ds;
            s = if ds != 0.0 && newton > a && newton < b { newton } else { 0.5 * (a + b) };
            if (b - a).abs() <= 4.0 * f64::EPSILON * (1.0 + s.abs()) {
                return Some(s);
            }
        }
        return Some(s);
    }
    let mut s = if ga.abs() < gb.abs() { a } else { b };
    for _ in 0..50 {
        let (gs, ds) = g(s)?;
        if gs.abs() <= tol {
            return Some(s);
        }
        if ds == 0.0 {
            return None;
        }
        s -= gs / ds;
    }
    let (gs, _) = g(s)?;
    (gs.abs() < 1e-12 * (1.0 + y.abs())).then_some(s)
}

fn damped_newton(beta: &ParamMap, pivots: &[usize], start: &[f64], y: &[f64]) -> Option<Vec<f64>> {
    let resid = |s: &[f64]| -> Option<Vec<f64>> {
        let v = beta.pivot_values(pivots, s).ok()?;
        Some(v.iter().zip(y).map(|(a, b)| a - b).collect())
    };
    let norm = |r: &[f64]| r.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let scale = 1.0 + norm(y);
    let mut s = start.to_vec();
    let mut r = resid(&s)?;
    for _ in 0..100 {
        if norm(&r) <= 1e-15 * scale {
            return Some(s);
        }
        let (_, jac) = value_and_jacobian(|x: &[Dual<f64>]| beta.pivot_values(pivots, x), &s).ok()?;
        let delta = jac.solve(&r).ok()?;
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = s.iter().zip(&delta).map(|(a, d)| a - lambda * d).collect();
            if let Some(rt) = resid(&trial) {
                if norm(&rt) < norm(&r) || lambda < 1e-6 {
                    s = trial;
                    r = rt;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-9 {
                return None;
            }
        }
        if delta.iter().map(|d| d.abs()).fold(0.0, f64::max) * lambda <= 4.0 * f64::EPSILON * (1.0 + norm(&s)) {
            break;
        }
    }
    (norm(&r) < 1e-12 * scale).then_some(s)
}

/// How `B^a_b(s)` is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum FrameRule {
    /// Prescribed as expressions in the parameters (paths only).
    Given(ExprMatrix),
    /// Transported from `b1` at the anchor by
    /// `∂_α B = −B M_α + ∂_α D`, `(M_α)^c_b = ∂_b Γ^c_ν(β) ∂_α β^ν`.
    Transported { b1: Mat<f64>, d: Option<ExprMatrix> },
}

/// Normal coordinates along `chart.beta`, anchored at `anchor` where
/// `f = 0`.
#[derive(Debug, Clone)]
pub struct NormalCoordinates<C> {
    pub conn: C,
    pub chart: AdaptedChart,
    pub anchor: Vec<f64>,
    pub frame: FrameRule,
    /// Quadrature / ODE step in parameter units.
    pub step: f64,
}

impl<C: Connection> NormalCoordinates<C> {
    /// `Γ'_α(s)` and, when `with_m`, `M_α(s)`.
    fn pulled<T: Scalar>(&self, s: &[T], alpha: usize, with_m: bool) -> Result<(Vec<T>, Option<Mat<T>>)> {
        let BundleShape { n, r } = self.conn.shape();
        let (b, db) = self.chart.beta.tangent(s, alpha)?;
        let (gamma, m) = if with_m {
            let mut m = Mat::zeros(r, r);
            let mut gamma = None;
            for bi in 0..r {
                let g = self.conn.gamma(&seed(&b, n + bi))?;
                let dg = g.map(|d| d.eps);
                if gamma.is_none() {
                    gamma = Some(g.map(|d| d.re));
                }
                let col = dg.matvec(&db[..n]);
                for c in 0..r {
                    m[(c, bi)] = col[c];
                }
            }
            (gamma.expect("r >= 1"), Some(m))
        } else {
            (self.conn.gamma(&b)?, None)
        };
        let mut gp = gamma.matvec(&db[..n]);
        for (a, g) in gp.iter_mut().enumerate() {
            *g -= db[n + a];
        }
        Ok((gp, m))
    }

    /// `f(σ)` and `B(σ)`, integrating along axis-ordered legs from the
    /// anchor in the given axis order.
    pub fn frame_at<T: Scalar>(&self, sigma: &[T], order: &[usize]) -> Result<(Vec<T>, Mat<T>)> {
        let r = self.conn.shape().r;
        match &self.frame {
            FrameRule::Given(bexpr) => {
                let s1 = T::from_f64(self.anchor[0]);
                let len = sigma[0] - s1;
                let panels = even_panels(len.value(), self.step);
                let h = len / T::from_f64(panels as f64);
                let mut integrand: Vec<Vec<T>> = Vec::with_capacity(panels + 1);
                for i in 0..=panels {
                    let s = [s1 + h * T::from_f64(i as f64)];
                    let b = bexpr.eval(&s)?;
                    let (gp, _) = self.pulled(&s, 0, false)?;
                    integrand.push(b.matvec(&gp));
                }
                let f = (0..r)
                    .map(|a| -simpson(&integrand.iter().map(|v| v[a]).collect::<Vec<_>>(), h))
                    .collect();
                Ok((f, bexpr.eval(sigma)?))
            }
            FrameRule::Transported { b1, d } => {
                let mut cur: Vec<T> = lift(&self.anchor);
                let mut bmat: Mat<T> = b1.map(T::from_f64);
                let mut f = vec![T::zero(); r];
                for &alpha in order {
                    let start = cur[alpha];
                    let len = sigma[alpha] - start;
                    let panels = even_panels(len.value(), self.step);
                    let h = len / T::from_f64(panels as f64);
                    let at = |t: T| {
                        let mut s = cur.clone();
                        s[alpha] = t;
                        s
                    };
                    let rhs = |t: T, y: &[T]| -> Result<Vec<T>> {
                        let s = at(t);
                        let (_, m) = self.pulled(&s, alpha, true)?;
                        let bm = Mat::from_vec(r, r, y.to_vec());
                        let mut dy = bm.matmul(&m.expect("requested")).neg();
                        if let Some(dexpr) = d {
                            dy = dy.add(&dexpr.eval(&seed(&s, alpha))?.map(|x| x.eps));
                        }
                        Ok(dy.into_vec())
                    };
                    let mut integrand: Vec<Vec<T>> = Vec::with_capacity(panels + 1);
                    let mut y = bmat.clone().into_vec();
                    for i in 0..=panels {
                        let t = start + h * T::from_f64(i as f64);
                        let (gp, _) = self.pulled(&at(t), alpha, false)?;
                        integrand.push(Mat::from_vec(r, r, y.clone()).matvec(&gp));
                        if i < panels {
                            y = rk4_step(&rhs, t, &y, h)?;
                        }
                    }
                    for (a, fa) in f.iter_mut().enumerate() {
                        *fa -= simpson(&integrand.iter().map(|v| v[a]).collect::<Vec<_>>(), h);
                    }
                    bmat = Mat::from_vec(r, r, y);
                    cur[alpha] = sigma[alpha];
                }
                Ok((f, bmat))
            }
        }
    }

    pub fn axis_order(&self) -> Vec<usize> {
        (0..self.chart.k()).collect()
    }
}

impl<C: Connection> CoordinateMap for NormalCoordinates<C> {
    fn dim(&self) -> usize {
        self.conn.shape().dim()
    }
    fn apply<T: Scalar>(&self, u: &[T]) -> Result<Vec<T>> {
        let BundleShape { n, r } = self.conn.shape();
        let sigma = self.chart.invert(u)?;
        let (f, b) = self.frame_at(&sigma, &self.axis_order())?;
        let beta = self.chart.beta.eval(&sigma)?;
        let gamma = self.conn.gamma(&beta)?;
        let mut bracket = vec![T::zero(); r];
        for (bi, br) in bracket.iter_mut().enumerate() {
            *br = u[n + bi] - beta[n + bi];
            for mu in 0..n {
                *br -= gamma[(bi, mu)] * (u[mu] - beta[mu]);
            }
        }
        let mut out: Vec<T> = u[..n].to_vec();
        let fibre = b.matvec(&bracket);
        out.extend(f.iter().zip(fibre).map(|(&fa, v)| fa + v));
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOptions {
    pub quad_step: f64,
    /// Number of equally spaced window samples used for verification.
    pub samples: usize,
    pub tol: f64,
}

impl Default for PathOptions {
    fn default() -> Self {
        PathOptions { quad_step: 1e-3, samples: 51, tol: 1e-6 }
    }
}

#[derive(Debug, Clone)]
pub struct NormalSolution<C> {
    pub coords: NormalCoordinates<C>,
    /// Parameter values at which normality was verified.
    pub params: Vec<Vec<f64>>,
    pub report: VerifyReport,
}

impl<C: Connection> NormalSolution<C> {
    pub fn sample_points(&self) -> Result<Vec<Vec<f64>>> {
        self.params.iter().map(|s| self.coords.chart.beta.eval(s)).collect()
    }
}

pub(crate) fn check_frame_det(b: &Mat<f64>, s: &[f64]) -> Result<()> {
    let det = b.det();
    if det.abs() <= DET_TOL || !det.is_finite() {
        return Err(Error::DetCollapse { s: s.to_vec(), det });
    }
    Ok(())
}

/// Coordinates normal along a path (`k = 1`), with prescribed `B^a_b(s)`
/// (identity by default) and `f` anchored at `s1` (default `s0`).
pub fn normal_along_path<C: Connection>(
    conn: C,
    beta: &ParamMap,
    s0: f64,
    b: Option<ExprMatrix>,
    s1: Option<f64>,
    opts: PathOptions,
) -> Result<NormalSolution<C>> {
    if beta.k() != 1 {
        return Err(Error::Shape(format!("a path has one parameter, got {}", beta.k())));
    }
    if beta.shape != conn.shape() {
        return Err(Error::Shape("path and connection live on different bundles".into()));
    }
    let r = conn.shape().r;
    let chart = AdaptedChart::build(beta, &[s0])?;
    let (lo, hi) = (chart.window.lo[0], chart.window.hi[0]);
    let s1 = s1.unwrap_or(s0);
    if !(lo < hi) || s1 < lo || s1 > hi {
        return Err(Error::EmptyWindow);
    }
    let b = b.unwrap_or_else(|| ExprMatrix::identity(r));
    if (b.rows, b.cols) != (r, r) {
        return Err(Error::Shape("frame matrix must be r x r".into()));
    }
    let count = opts.samples.max(2);
    let params: Vec<Vec<f64>> = (0..count).map(|i| vec![lo + (hi - lo) * i as f64 / (count - 1) as f64]).collect();
    for s in &params {
        check_frame_det(&b.eval(s)?, s)?;
    }
    let coords = NormalCoordinates { conn, chart, anchor: vec![s1], frame: FrameRule::Given(b), step: opts.quad_step };
    let points = params.iter().map(|s| beta.eval(s)).collect::<Result<Vec<_>>>()?;
    let report = verify_normal(&coords.conn, &coords, &points, opts.tol);
    Ok(NormalSolution { coords, params, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::ConnectionCoefficients;

    fn shape11() -> BundleShape {
        BundleShape::new(1, 1).unwrap()
    }

    #[test]
    fn pivot_rule() {
        let jac = Mat::from_rows(&[vec![0.0], vec![2.0], vec![5.0]]);
        assert_eq!(select_pivots(&jac, 2, &[0.0]).unwrap(), vec![1]);
        let vertical = Mat::from_rows(&[vec![0.0], vec![0.0], vec![5.0]]);
        assert!(matches!(select_pivots(&vertical, 2, &[0.0]), Err(Error::VerticalTangent { .. })));
    }

    #[test]
    fn cubic_inversion() {
        let beta = ParamMap::parse(shape11(), DomainBox::new(vec![-1.0], vec![1.0]).unwrap(), &["s1^3 + s1", "7"]).unwrap();
        let chart = AdaptedChart::build(&beta, &[0.2]).unwrap();
        assert_eq!(chart.window, beta.domain);
        assert!(chart.invariant_residual < 1e-10);
        // derivative of the inverse: 1 / (3 s^2 + 1)
        let s = 0.6;
        let u = beta.eval(&[s]).unwrap();
        let x = chart.apply(&seed(&u, 0)).unwrap();
        assert!((x[0].eps - 1.0 / (3.0 * s * s + 1.0)).abs() < 1e-14);
    }

    #[test]
    fn window_stops_at_turning_point() {
        let beta = ParamMap::parse(shape11(), DomainBox::new(vec![-2.0], vec![2.0]).unwrap(), &["s1^2 - s1", "s1"]).unwrap();
        let chart = AdaptedChart::build(&beta, &[1.5]).unwrap();
        assert!(chart.window.lo[0] >= 0.5 && chart.window.lo[0] < 0.51);
        assert_eq!(chart.window.hi[0], 2.0);
    }

    #[test]
    fn lift_path_is_normal() {
        let c = ConnectionCoefficients::parse(shape11(), &[vec!["u2"]], DomainBox::cube(2, -5.0, 5.0)).unwrap();
        let beta = ParamMap::parse(shape11(), DomainBox::new(vec![-1.0], vec![1.0]).unwrap(), &["s1", "exp(s1)"]).unwrap();
        let sol = normal_along_path(&c, &beta, 0.0, None, None, PathOptions::default()).unwrap();
        assert!(sol.report.pass, "{:?}", sol.report);
        assert!(sol.report.max_residual < 1e-12);
    }

    #[test]
    fn non_horizontal_path_is_normal() {
        let c = ConnectionCoefficients::parse(shape11(), &[vec!["u1"]], DomainBox::cube(2, -5.0, 5.0)).unwrap();
        let beta = ParamMap::parse(shape11(), DomainBox::new(vec![-1.0], vec![1.0]).unwrap(), &["s1", "s1"]).unwrap();
        let sol = normal_along_path(&c, &beta, 0.0, None, None, PathOptions::default()).unwrap();
        assert!(sol.report.max_residual < 1e-6, "{:?}", sol.report);
    }
}
