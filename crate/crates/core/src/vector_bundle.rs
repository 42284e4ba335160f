//! Linear connections on vector bundles: 3-index coefficients
//! `Γ^a_{bμ}(x)`, their transformation under frame changes, covariant
//! derivatives of sections, and frames parallel along base curves.
//!
//! Fibre coordinates are the components with respect to the bundle frame,
//! so the 2-index coefficients are `Γ^a_μ(u) = −Γ^a_{bμ}(x) u^b + G^a_μ(x)`.
//! Frame changes are `ẽ_a = B^b_a e_b` on the fibres and
//! `Ẽ_μ = B^ν_μ ∂_ν` on the base, with matrices stored as `B[(b, a)] =
//! B^b_a`.

use crate::connection::{frame_transformed_gamma, BaseCurve, Connection, ConnectionCoefficients};
use crate::error::{Error, Result};
use crate::expr::{bundle_vars, parse, BinOp, Expr, Node};
use crate::geometry::{BlockField, BlockMatrix, BundleShape, DomainBox, ExprMatrix, DET_TOL};
use crate::integrate::rk4_step;
use crate::linalg::Mat;
use crate::scalar::{seed, value_and_jacobian, Dual, Scalar};

/// Fibre second derivatives below this count as vanishing.
pub const LINEAR_TOL: f64 = 1e-10;

/// Anything yielding the `n` matrices `Γ_μ = [Γ^a_{bμ}]` at a base point.
pub trait ThreeIndexField {
    fn shape(&self) -> BundleShape;
    fn gamma3<T: Scalar>(&self, x: &[T]) -> Result<Vec<Mat<T>>>;
}

impl<F: ThreeIndexField + ?Sized> ThreeIndexField for &F {
    fn shape(&self) -> BundleShape {
        (**self).shape()
    }
    fn gamma3<T: Scalar>(&self, x: &[T]) -> Result<Vec<Mat<T>>> {
        (**self).gamma3(x)
    }
}

/// A matrix-valued function of the base coordinates.
pub trait BaseMatrixField {
    fn matrix<T: Scalar>(&self, x: &[T]) -> Result<Mat<T>>;
}

impl BaseMatrixField for ExprMatrix {
    fn matrix<T: Scalar>(&self, x: &[T]) -> Result<Mat<T>> {
        self.eval(x)
    }
}

impl<F: BaseMatrixField + ?Sized> BaseMatrixField for &F {
    fn matrix<T: Scalar>(&self, x: &[T]) -> Result<Mat<T>> {
        (**self).matrix(x)
    }
}

/// 3-index coefficients written over the base variables `u1..un`, with an
/// optional affine term `G^a_μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeIndexCoefficients {
    pub shape: BundleShape,
    /// `gamma3[μ][(a, b)] = Γ^a_{bμ}`.
    pub gamma3: Vec<ExprMatrix>,
    /// `affine[(a, μ)] = G^a_μ`.
    pub affine: Option<ExprMatrix>,
    /// Bundle domain used for the derived 2-index coefficients.
    pub domain: DomainBox,
}

impl ThreeIndexCoefficients {
    pub fn new(shape: BundleShape, gamma3: Vec<ExprMatrix>, affine: Option<ExprMatrix>, domain: DomainBox) -> Result<Self> {
        let (n, r) = (shape.n, shape.r);
        if gamma3.len() != n || gamma3.iter().any(|m| (m.rows, m.cols) != (r, r)) {
            return Err(Error::Shape(format!("need {n} matrices of size {r}x{r}")));
        }
        if affine.as_ref().is_some_and(|g| (g.rows, g.cols) != (r, n)) {
            return Err(Error::Shape(format!("affine term must be {r}x{n}")));
        }
        let all = gamma3.iter().flat_map(|m| &m.entries).chain(affine.iter().flat_map(|g| &g.entries));
        if let Some(e) = all.into_iter().find(|e| e.min_arity() > n) {
            return Err(Error::Shape(format!("`{e}` depends on fibre coordinates")));
        }
        if domain.dim() != shape.dim() {
            return Err(Error::Shape("domain dimension does not match the bundle".into()));
        }
        Ok(ThreeIndexCoefficients { shape, gamma3, affine, domain })
    }

    /// `gamma3[μ][a][b]` is the text of `Γ^a_{bμ}`; only `u1..un` are allowed.
    pub fn parse(
        shape: BundleShape,
        gamma3: &[Vec<Vec<&str>>],
        affine: Option<&[Vec<&str>]>,
        domain: DomainBox,
    ) -> Result<Self> {
        let vars = bundle_vars(shape.n);
        let g3 = gamma3.iter().map(|m| ExprMatrix::parse(m, &vars)).collect::<Result<Vec<_>>>()?;
        let aff = affine.map(|g| ExprMatrix::parse(g, &vars)).transpose()?;
        Self::new(shape, g3, aff, domain)
    }

    pub fn affine_at<T: Scalar>(&self, x: &[T]) -> Result<Option<Mat<T>>> {
        self.affine.as_ref().map(|g| g.eval(x)).transpose()
    }
}

impl ThreeIndexField for ThreeIndexCoefficients {
    fn shape(&self) -> BundleShape {
        self.shape
    }
    fn gamma3<T: Scalar>(&self, x: &[T]) -> Result<Vec<Mat<T>>> {
        self.gamma3.iter().map(|m| m.eval(&x[..self.shape.n])).collect()
    }
}

fn signed_sum(terms: Vec<(bool, Expr)>) -> Expr {
    let mut acc: Option<Expr> = None;
    for (negative, t) in terms {
        acc = Some(match (acc, negative) {
            (None, true) => match &t.node {
                Node::Bin(BinOp::Mul, l, r) if matches!(l.node, Node::Lit(_)) => {
                    let Node::Lit(v) = l.node else { unreachable!() };
                    Expr::num(-v).mul((**r).clone())
                }
                _ => Expr::neg(t),
            },
            (None, false) => t,
            (Some(a), true) => a.sub(t),
            (Some(a), false) => a.add(t),
        });
    }
    acc.unwrap_or_else(|| Expr::num(0.0))
}

/// `Γ^a_μ = −Γ^a_{bμ}(x) u^b + G^a_μ(x)` as expressions.
pub fn two_from_three(g3: &ThreeIndexCoefficients) -> ConnectionCoefficients {
    let BundleShape { n, r } = g3.shape;
    let mut entries = Vec::with_capacity(r * n);
    for a in 0..r {
        for mu in 0..n {
            let mut terms = Vec::new();
            for b in 0..r {
                let c = g3.gamma3[mu].get(a, b);
                if c.is_zero_literal() {
                    continue;
                }
                let ub = Expr::u(n + b);
                let t = if matches!(c.node, Node::Lit(v) if v == 1.0) { ub } else { c.clone().mul(ub) };
                terms.push((true, t));
            }
            if let Some(g) = &g3.affine {
                let e = g.get(a, mu);
                if !e.is_zero_literal() {
                    terms.push((false, e.clone()));
                }
            }
            entries.push(signed_sum(terms));
        }
    }
    ConnectionCoefficients {
        shape: g3.shape,
        entries: ExprMatrix { rows: r, cols: n, entries },
        domain: g3.domain.clone(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFormReport {
    /// max |∂²Γ^a_μ/∂u^b∂u^c| over samples and fibre index pairs.
    pub max_fibre_second: f64,
    pub worst_point: Vec<f64>,
    pub linear: bool,
}

/// Whether `Γ` is affine in the fibre coordinates on the samples.
pub fn is_linear_form<C: Connection>(conn: &C, samples: &[Vec<f64>]) -> Result<LinearFormReport> {
    let BundleShape { n, r } = conn.shape();
    let mut rep = LinearFormReport { max_fibre_second: 0.0, worst_point: vec![], linear: true };
    for p in samples {
        for b in 0..r {
            for c in b..r {
                let m = crate::connection::gamma_second(conn, p, n + b, n + c)?.max_abs();
                if m > rep.max_fibre_second || rep.worst_point.is_empty() {
                    rep.max_fibre_second = rep.max_fibre_second.max(m);
                    rep.worst_point = p.clone();
                }
            }
        }
    }
    rep.linear = rep.max_fibre_second < LINEAR_TOL;
    Ok(rep)
}

/// Components of a section `Y^a(x)` (or of a base vector field) over the
/// base variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub components: Vec<Expr>,
}

impl Section {
    pub fn parse(texts: &[&str], n: usize) -> Result<Self> {
        let vars = bundle_vars(n);
        Ok(Section { components: texts.iter().map(|t| parse(t, &vars)).collect::<Result<_>>()? })
    }

    pub fn eval<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>> {
        self.components.iter().map(|c| c.eval(x)).collect()
    }
}

/// `F^μ (∂_μ Y^a + Γ^a_{bμ} Y^b)` at `x`.
pub fn covariant_derivative<G: ThreeIndexField>(g3: &G, f: &Section, y: &Section, x: &[f64]) -> Result<Vec<f64>> {
    let BundleShape { n, r } = g3.shape();
    if f.components.len() != n || y.components.len() != r || x.len() != n {
        return Err(Error::Shape("section or vector field does not match the bundle".into()));
    }
    let (yv, dy) = value_and_jacobian(|s: &[Dual<f64>]| y.eval(s), x)?;
    let fv = f.eval(x)?;
    let gam = g3.gamma3(x)?;
    let mut out = vec![0.0; r];
    for mu in 0..n {
        let gy = gam[mu].matvec(&yv);
        for a in 0..r {
            out[a] += fv[mu] * (dy[(a, mu)] + gy[a]);
        }
    }
    Ok(out)
}

/// Transformed 3-index values and affine term.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeIndexValues<T> {
    pub gamma3: Vec<Mat<T>>,
    pub affine: Option<Mat<T>>,
}

/// `Γ̃_μ = B^ν_μ B⁻¹(Γ_ν B + ∂_ν B)` and `G̃_μ = B^ν_μ B⁻¹ G_ν` at `x`.
pub fn transform_three<T, G, B, BB>(g3: &G, affine: Option<&Mat<T>>, b: &B, bbase: &BB, x: &[T]) -> Result<ThreeIndexValues<T>>
where
    T: Scalar,
    G: ThreeIndexField,
    B: BaseMatrixField,
    BB: BaseMatrixField,
{
    let n = g3.shape().n;
    let gam = g3.gamma3(x)?;
    let bm = b.matrix(x)?;
    let binv = bm.inverse()?;
    let bb = bbase.matrix(x)?;
    // inner[ν] = B⁻¹(Γ_ν B + ∂_ν B)
    let inner: Vec<Mat<T>> = (0..n)
        .map(|nu| {
            let db = b.matrix(&seed(x, nu))?.map(|d| d.eps);
            Ok(binv.matmul(&gam[nu].matmul(&bm).add(&db)))
        })
        .collect::<Result<_>>()?;
    let gamma3 = (0..n)
        .map(|mu| {
            let mut acc = Mat::zeros(bm.rows(), bm.cols());
            for (nu, m) in inner.iter().enumerate() {
                acc = acc.add(&m.scale(bb[(nu, mu)]));
            }
            acc
        })
        .collect();
    let affine = affine.map(|g| binv.matmul(g).matmul(&bb));
    Ok(ThreeIndexValues { gamma3, affine })
}

/// The 3-index field obtained by a frame change, evaluable anywhere on the
/// base. Only the 3-index part is transformed.
#[derive(Debug, Clone)]
pub struct TransformedThree<G, B, BB> {
    pub inner: G,
    pub b: B,
    pub bbase: BB,
}

impl<G: ThreeIndexField, B: BaseMatrixField, BB: BaseMatrixField> ThreeIndexField for TransformedThree<G, B, BB> {
    fn shape(&self) -> BundleShape {
        self.inner.shape()
    }
    fn gamma3<T: Scalar>(&self, x: &[T]) -> Result<Vec<Mat<T>>> {
        Ok(transform_three(&self.inner, None, &self.b, &self.bbase, x)?.gamma3)
    }
}

/// Frame-change blocks induced on the bundle by `(B, B_base)`: base
/// `B^ν_μ`, fibre `B`, mixed `A^b_μ = (B^ν_μ ∂_ν B B⁻¹ u)^b`.
#[derive(Debug, Clone)]
pub struct VectorBundleBlocks<B, BB> {
    pub shape: BundleShape,
    pub b: B,
    pub bbase: BB,
}

impl<B: BaseMatrixField, BB: BaseMatrixField> BlockField for VectorBundleBlocks<B, BB> {
    fn shape(&self) -> BundleShape {
        self.shape
    }
    fn blocks<T: Scalar>(&self, u: &[T]) -> Result<BlockMatrix<T>> {
        let BundleShape { n, r } = self.shape;
        let x = &u[..n];
        let bm = self.b.matrix(x)?;
        let binv = bm.inverse()?;
        let bb = self.bbase.matrix(x)?;
        let w = binv.matvec(&u[n..]);
        let mut mixed = Mat::zeros(r, n);
        for nu in 0..n {
            let col = self.b.matrix(&seed(x, nu))?.map(|d| d.eps).matvec(&w);
            for mu in 0..n {
                for (bi, &v) in col.iter().enumerate() {
                    mixed[(bi, mu)] += bb[(nu, mu)] * v;
                }
            }
        }
        BlockMatrix::new(bb, mixed, bm)
    }
}

/// Frame `B(s)` parallel along a base curve.
#[derive(Debug, Clone)]
pub struct ParallelFrame<G, C> {
    pub g3: G,
    pub curve: C,
    pub b_start: Mat<f64>,
    pub steps: usize,
    pub s: Vec<f64>,
    pub b: Vec<Mat<f64>>,
    pub report: ParallelFrameReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParallelFrameReport {
    /// max over nodes of |ẋ^μ Γ̃_μ|.
    pub three_index_residual: f64,
    /// max over nodes and fibre probes of |ẋ^μ Γ̃^a_μ(ũ)|.
    pub two_index_residual: f64,
    pub min_abs_det: f64,
}

impl<G: ThreeIndexField, C: BaseCurve> ParallelFrame<G, C> {
    /// `B(s)` by RK4 from the curve start with steps no longer than the
    /// construction step. Differentiable in `s`.
    pub fn frame_at<T: Scalar>(&self, s: T) -> Result<Mat<T>> {
        let r = self.g3.shape().r;
        let (begin, end) = self.curve.interval();
        let h0 = (end - begin) / self.steps as f64;
        let s0 = T::from_f64(begin);
        let panels = (((s.value() - begin).abs() / h0 - 1e-9).ceil() as usize).max(1);
        let h = (s - s0) / T::from_f64(panels as f64);
        let rhs = |t: T, y: &[T]| -> Result<Vec<T>> { Ok(parallel_rhs(&self.g3, &self.curve, t, y, r)?.into_vec()) };
        let mut y = self.b_start.map(T::from_f64).into_vec();
        for i in 0..panels {
            y = rk4_step(&rhs, s0 + h * T::from_f64(i as f64), &y, h)?;
        }
        Ok(Mat::from_vec(r, r, y))
    }

    /// `B⁻¹(ẋ^μ Γ_μ B + dB/ds)` at `s`: the transformed 3-index coefficients
    /// contracted with the tangent.
    pub fn contracted_residual(&self, s: f64) -> Result<Mat<f64>> {
        let bd = self.frame_at(Dual::variable(s))?;
        let b = bd.map(|d| d.re);
        let db = bd.map(|d| d.eps);
        let x = self.curve.point(s)?;
        let v = self.curve.velocity(s)?;
        let gam = self.g3.gamma3(&x)?;
        let mut gv = Mat::zeros(b.rows(), b.cols());
        for (mu, g) in gam.iter().enumerate() {
            gv = gv.add(&g.scale(v[mu]));
        }
        Ok(b.inverse()?.matmul(&gv.matmul(&b).add(&db)))
    }
}

fn parallel_rhs<T: Scalar, G: ThreeIndexField, C: BaseCurve>(g3: &G, curve: &C, t: T, y: &[T], r: usize) -> Result<Mat<T>> {
    let x = curve.point(t)?;
    let v = curve.velocity(t)?;
    let gam = g3.gamma3(&x)?;
    let mut gv = Mat::zeros(r, r);
    for (mu, g) in gam.iter().enumerate() {
        gv = gv.add(&g.scale(v[mu]));
    }
    Ok(gv.matmul(&Mat::from_vec(r, r, y.to_vec())).neg())
}

/// Integrate `dB/ds = −(ẋ^μ Γ_μ(x(s))) B` from `b_start` and verify that the
/// transformed coefficients contracted with the tangent vanish along the
/// curve, both as 3-index matrices and as 2-index coefficients at
/// `r + 1` fibre probes per node.
pub fn normal_frame_along_base_path<G: ThreeIndexField + Clone, C: BaseCurve + Clone>(
    g3: G,
    curve: C,
    b_start: Mat<f64>,
    steps: usize,
) -> Result<ParallelFrame<G, C>> {
    let BundleShape { n, r } = g3.shape();
    if curve.dim() != n || (b_start.rows(), b_start.cols()) != (r, r) {
        return Err(Error::Shape("curve or initial frame does not match the bundle".into()));
    }
    let (begin, end) = curve.interval();
    let h = (end - begin) / steps as f64;
    let rhs = |t: f64, y: &[f64]| -> Result<Vec<f64>> { Ok(parallel_rhs(&g3, &curve, t, y, r)?.into_vec()) };
    let mut s = vec![begin];
    let mut b = vec![b_start.clone()];
    let mut y = b_start.clone().into_vec();
    let mut min_abs_det = b_start.det().abs();
    for i in 0..steps {
        y = rk4_step(&rhs, begin + h * i as f64, &y, h)?;
        let m = Mat::from_vec(r, r, y.clone());
        let det = m.det();
        let si = if i + 1 == steps { end } else { begin + h * (i + 1) as f64 };
        if det.abs() <= DET_TOL || !det.is_finite() {
            return Err(Error::DetCollapse { s: vec![si], det });
        }
        min_abs_det = min_abs_det.min(det.abs());
        s.push(si);
        b.push(m);
    }
    let mut frame = ParallelFrame {
        g3,
        curve,
        b_start,
        steps,
        s,
        b,
        report: ParallelFrameReport { three_index_residual: 0.0, two_index_residual: 0.0, min_abs_det },
    };
    let probes = fibre_probes(r, r + 1);
    let stride = (steps / 50).max(1);
    for i in (0..=steps).step_by(stride) {
        let res = frame.contracted_residual(frame.s[i])?;
        frame.report.three_index_residual = frame.report.three_index_residual.max(res.max_abs());
        for p in &probes {
            let two = res.matvec(p);
            frame.report.two_index_residual =
                frame.report.two_index_residual.max(two.iter().map(|x| x.abs()).fold(0.0, f64::max));
        }
    }
    Ok(frame)
}

/// For one-dimensional bases the parallel frame is a function of `x`.
impl<G: ThreeIndexField, C: BaseCurve> BaseMatrixField for ParallelFrame<G, C> {
    fn matrix<T: Scalar>(&self, x: &[T]) -> Result<Mat<T>> {
        if self.curve.dim() != 1 || x.len() != 1 {
            return Err(Error::Shape("a parallel frame is a base field only over a one-dimensional base".into()));
        }
        let (begin, end) = self.curve.interval();
        let target = x[0].value();
        let g = |s: f64| -> Result<(f64, f64)> {
            let d = self.curve.point(Dual::variable(s))?[0];
            Ok((d.re - target, d.eps))
        };
        let (mut a, mut b) = (begin, end);
        let (ga, _) = g(a)?;
        let mut s = 0.5 * (a + b);
        for _ in 0..200 {
            let (gs, ds) = g(s)?;
            if gs == 0.0 {
                break;
            }
            if gs.signum() == ga.signum() {
                a = s;
            } else {
                b = s;
            }
            let newton = s - gs / ds;
            s = if ds != 0.0 && newton > a.min(b) && newton < a.max(b) { newton } else { 0.5 * (a + b) };
            if (b - a).abs() < 4.0 * f64::EPSILON * (1.0 + s.abs()) {
                break;
            }
        }
        let mut st = T::from_f64(s);
        for _ in 0..2 {
            let d = self.curve.point(Dual::variable(st))?[0];
            st -= (d.re - x[0]) / d.eps;
        }
        self.frame_at(st)
    }
}

/// `count` deterministic fibre points, the first `r` of them the standard
/// basis so that any `count ≥ r` spans the fibre.
pub fn fibre_probes(r: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| {
            if i < r {
                (0..r).map(|j| if j == i { 1.0 } else { 0.0 }).collect()
            } else {
                (0..r).map(|j| 0.5 + ((i * 7 + j * 3) % 11) as f64 / 11.0 - 0.5 * (j % 2) as f64).collect()
            }
        })
        .collect()
}

fn matrix_rank(rows: &[Vec<f64>], tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let cols = m[0].len();
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())) else {
            break;
        };
        if m[p][c].abs() <= tol {
            continue;
        }
        m.swap(rank, p);
        for i in 0..m.len() {
            if i != rank {
                let f = m[i][c] / m[rank][c];
                for k in c..cols {
                    m[i][k] -= f * m[rank][k];
                }
            }
        }
        rank += 1;
    }
    rank
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub base_points: usize,
    pub fibre_points: usize,
    /// max over base points of max |Γ̃^a_μ| over the fibre probes.
    pub max_two_index: f64,
    /// max over base points of max |Γ̃^a_{bμ}|.
    pub max_three_index: f64,
    /// Base points where both sides vanish / neither vanishes.
    pub both_vanish: usize,
    pub neither_vanishes: usize,
    /// Base points where exactly one side vanishes.
    pub violations: usize,
    pub holds: bool,
}

/// Sampled check that the transformed 2-index coefficients vanish on the
/// fibre probes over each base point exactly when the transformed 3-index
/// coefficients vanish there. The 2-index side is evaluated through the
/// bundle frame-change blocks, independently of the 3-index law.
pub fn check_vanishing_equivalence<B: BaseMatrixField, BB: BaseMatrixField>(
    g3: &ThreeIndexCoefficients,
    base_samples: &[Vec<f64>],
    fibre_samples: &[Vec<f64>],
    b: &B,
    bbase: &BB,
    tol: f64,
) -> Result<EquivalenceReport> {
    let r = g3.shape.r;
    if g3.affine.is_some() {
        return Err(Error::Shape("the equivalence concerns linear connections; drop the affine term".into()));
    }
    let rank = matrix_rank(fibre_samples, 1e-12);
    if rank < r {
        return Err(Error::InsufficientFibreSamples {
            base: base_samples.first().cloned().unwrap_or_default(),
            found: rank,
            needed: r,
        });
    }
    let conn = two_from_three(g3);
    let blocks = VectorBundleBlocks { shape: g3.shape, b, bbase };
    let mut rep = EquivalenceReport {
        base_points: base_samples.len(),
        fibre_points: base_samples.len() * fibre_samples.len(),
        max_two_index: 0.0,
        max_three_index: 0.0,
        both_vanish: 0,
        neither_vanishes: 0,
        violations: 0,
        holds: true,
    };
    for x in base_samples {
        let three = transform_three(g3, None, b, bbase, x)?;
        let rhs = three.gamma3.iter().map(Mat::max_abs).fold(0.0, f64::max);
        let bx = b.matrix(x)?;
        let mut lhs = 0.0f64;
        for w in fibre_samples {
            // the probe gives new-frame components; old components are B w
            let mut u = x.clone();
            u.extend(bx.matvec(w));
            let a = blocks.blocks(&u)?;
            lhs = lhs.max(frame_transformed_gamma(&conn.gamma(&u)?, &a)?.max_abs());
        }
        rep.max_two_index = rep.max_two_index.max(lhs);
        rep.max_three_index = rep.max_three_index.max(rhs);
        match (lhs < tol, rhs < tol) {
            (true, true) => rep.both_vanish += 1,
            (false, false) => rep.neither_vanishes += 1,
            _ => rep.violations += 1,
        }
    }
    rep.holds = rep.violations == 0;
    Ok(rep)
}

/// Lift base samples into the bundle with the given fibre part.
pub fn bundle_point(x: &[f64], fibre: &[f64]) -> Vec<f64> {
    let mut u = x.to_vec();
    u.extend_from_slice(fibre);
    u
}
