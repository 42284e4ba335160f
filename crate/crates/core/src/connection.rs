//! Connection coefficients `Γ^a_μ`, adapted frames, the transformation law,
//! curvature, horizontal lifts and general normal frames.
//!
//! Coefficient matrices are `r×n` with entry `(a, μ)` holding `Γ^a_μ`
//! (fibre index shifted to start at 0). The adapted frame has columns
//! `X_μ = ∂_μ + Γ^b_μ ∂_b` and `X_a = ∂_a`.

use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::geometry::{
    block_inverse, forward_jacobian, fibre_constancy_residual, BlockField, BlockMatrix, BundleShape, CoordinateMap,
    DomainBox, ExprMatrix, FIBRE_TOL,
};
use crate::integrate::rk4_step;
use crate::linalg::Mat;
use crate::scalar::{seed, Dual, Scalar};

/// Anything that yields the `r×n` coefficient matrix at a bundle point.
pub trait Connection {
    fn shape(&self) -> BundleShape;
    fn gamma<T: Scalar>(&self, u: &[T]) -> Result<Mat<T>>;
}

impl<C: Connection + ?Sized> Connection for &C {
    fn shape(&self) -> BundleShape {
        (**self).shape()
    }
    fn gamma<T: Scalar>(&self, u: &[T]) -> Result<Mat<T>> {
        (**self).gamma(u)
    }
}

/// Coefficients written as expressions over `u1..u{n+r}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionCoefficients {
    pub shape: BundleShape,
    pub entries: ExprMatrix,
    pub domain: DomainBox,
}

impl ConnectionCoefficients {
    pub fn new(shape: BundleShape, entries: ExprMatrix, domain: DomainBox) -> Result<Self> {
        if entries.rows != shape.r || entries.cols != shape.n {
            return Err(Error::Shape(format!(
                "coefficients must be {}x{}, got {}x{}",
                shape.r, shape.n, entries.rows, entries.cols
            )));
        }
        if domain.dim() != shape.dim() {
            return Err(Error::Shape(format!("domain has dimension {}, bundle has {}", domain.dim(), shape.dim())));
        }
        if let Some(e) = entries.entries.iter().find(|e| e.min_arity() > shape.dim()) {
            return Err(Error::Shape(format!("coefficient `{e}` uses variables beyond u{}", shape.dim())));
        }
        Ok(ConnectionCoefficients { shape, entries, domain })
    }

    /// `rows[a][μ]` is the text of `Γ^{n+1+a}_{μ+1}`.
    pub fn parse(shape: BundleShape, rows: &[Vec<&str>], domain: DomainBox) -> Result<Self> {
        let vars = shape.var_names();
        Self::new(shape, ExprMatrix::parse(rows, &vars)?, domain)
    }

    pub fn zero(shape: BundleShape, domain: DomainBox) -> Self {
        ConnectionCoefficients { shape, entries: ExprMatrix::zeros(shape.r, shape.n), domain }
    }

    pub fn entry(&self, a: usize, mu: usize) -> &Expr {
        self.entries.get(a, mu)
    }
}

impl Connection for ConnectionCoefficients {
    fn shape(&self) -> BundleShape {
        self.shape
    }
    fn gamma<T: Scalar>(&self, u: &[T]) -> Result<Mat<T>> {
        self.entries.eval(u)
    }
}

/// Parse a single coefficient-style expression over the bundle variables.
pub fn parse_bundle_expr(shape: BundleShape, text: &str) -> Result<Expr> {
    parse(text, &shape.var_names())
}

/// A frame field on the bundle: column `J` holds the components of `e_J`.
pub trait FrameField {
    fn dim(&self) -> usize;
    fn matrix<T: Scalar>(&self, u: &[T]) -> Result<Mat<T>>;
}

/// `[∂_μ Γ ...]`: the coefficient matrix and its partials along every
/// bundle coordinate.
fn gamma_and_partials<T: Scalar, C: Connection>(conn: &C, u: &[T]) -> Result<(Mat<T>, Vec<Mat<T>>)> {
    let mut parts = Vec::with_capacity(u.len());
    let mut value = None;
    for k in 0..u.len() {
        let g = conn.gamma(&seed(u, k))?;
        if value.is_none() {
            value = Some(g.map(|d| d.re));
        }
        parts.push(g.map(|d| d.eps));
    }
    Ok((value.expect("bundle has positive dimension"), parts))
}

/// Adapted frame matrix at `u`.
pub fn adapted_frame<T: Scalar, C: Connection>(conn: &C, u: &[T]) -> Result<Mat<T>> {
    let BundleShape { n, r } = conn.shape();
    let g = conn.gamma(u)?;
    let mut m = Mat::identity(n + r);
    m.set_block(n, 0, &g);
    Ok(m)
}

/// The adapted frame of a connection as a [`FrameField`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptedFrame<C>(pub C);

impl<C: Connection> FrameField for AdaptedFrame<C> {
    fn dim(&self) -> usize {
        self.0.shape().dim()
    }
    fn matrix<T: Scalar>(&self, u: &[T]) -> Result<Mat<T>> {
        adapted_frame(&self.0, u)
    }
}

/// Transformed coefficients from the value of `Γ` at a point and the
/// forward Jacobian `[∂ũ/∂u]` there:
/// `Γ̃^a_μ = (∂ũ^a/∂u^b Γ^b_ν + ∂ũ^a/∂u^ν) ∂u^ν/∂ũ^μ`.
pub fn transform_gamma_value<T: Scalar>(gamma: &Mat<T>, fwd: &Mat<T>, shape: BundleShape) -> Result<Mat<T>> {
    let BundleShape { n, r } = shape;
    let blocks = BlockMatrix::from_full(fwd, shape)?;
    let base_inv = blocks.base.inverse().map_err(|e| match e {
        Error::Singular { condition } => Error::DegenerateChange { point: vec![], condition },
        other => other,
    })?;
    debug_assert_eq!((gamma.rows(), gamma.cols()), (r, n));
    Ok(blocks.fibre.matmul(gamma).add(&blocks.mixed).matmul(&base_inv))
}

/// Coefficients at `p` (old coordinates) of the connection in the
/// coordinates `ũ = change(u)`.
pub fn transform_coefficients<T: Scalar, C: Connection, M: CoordinateMap>(conn: &C, change: &M, p: &[T]) -> Result<Mat<T>> {
    let fwd = forward_jacobian(change, p)?;
    let gamma = conn.gamma(p)?;
    transform_gamma_value(&gamma, &fwd, conn.shape()).map_err(|e| match e {
        Error::DegenerateChange { condition, .. } => {
            Error::DegenerateChange { point: p.iter().map(Scalar::value).collect(), condition }
        }
        other => other,
    })
}

/// `Γ̃ = [A_fibre]⁻¹ (Γ·A_base − A_mixed)` for given frame blocks, without
/// checking the blocks for fibre constancy.
pub fn frame_transformed_gamma<T: Scalar>(gamma: &Mat<T>, a: &BlockMatrix<T>) -> Result<Mat<T>> {
    Ok(a.fibre.inverse()?.matmul(&gamma.matmul(&a.base).sub(&a.mixed)))
}

/// Coefficients with respect to the frame obtained from the adapted one by
/// the block field `a`. The diagonal blocks must be constant along the
/// fibres at `p`.
pub fn transform_coefficients_frame<C: Connection, F: BlockField>(conn: &C, a: &F, p: &[f64]) -> Result<Mat<f64>> {
    let residual = fibre_constancy_residual(a, &[p.to_vec()])?;
    if residual >= FIBRE_TOL {
        return Err(Error::FibreConstancy { residual });
    }
    frame_transformed_gamma(&conn.gamma(p)?, &a.blocks(p)?)
}

/// A connection expressed in new coordinates: `Γ̃(ũ)` evaluated through an
/// explicit inverse map.
#[derive(Debug, Clone)]
pub struct TransformedConnection<C, M, I> {
    pub conn: C,
    pub change: M,
    pub inverse: I,
}

impl<C: Connection, M: CoordinateMap, I: CoordinateMap> Connection for TransformedConnection<C, M, I> {
    fn shape(&self) -> BundleShape {
        self.conn.shape()
    }
    fn gamma<T: Scalar>(&self, v: &[T]) -> Result<Mat<T>> {
        let u = self.inverse.apply(v)?;
        transform_coefficients(&self.conn, &self.change, &u)
    }
}

/// `R^a_{μν}` at a point, stored for `μ < ν` only.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureComponents<T = f64> {
    pub n: usize,
    pub r: usize,
    upper: Vec<T>,
}

impl<T: Scalar> CurvatureComponents<T> {
    fn pair(&self, mu: usize, nu: usize) -> usize {
        // index of (mu, nu), mu < nu, in row-major upper-triangle order
        mu * self.n - mu * (mu + 1) / 2 + (nu - mu - 1)
    }

    /// `R^{n+1+a}_{μ+1,ν+1}`, expanded by antisymmetry.
    pub fn get(&self, a: usize, mu: usize, nu: usize) -> T {
        let pairs = self.n * (self.n - 1) / 2;
        match mu.cmp(&nu) {
            std::cmp::Ordering::Equal => T::zero(),
            std::cmp::Ordering::Less => self.upper[a * pairs + self.pair(mu, nu)],
            std::cmp::Ordering::Greater => -self.upper[a * pairs + self.pair(nu, mu)],
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.upper.iter().map(|x| x.value().abs()).fold(0.0, f64::max)
    }

    /// Contraction `R^a_{μν} v^μ w^ν`.
    pub fn contract(&self, v: &[T], w: &[T]) -> Vec<T> {
        (0..self.r)
            .map(|a| {
                let mut acc = T::zero();
                for mu in 0..self.n {
                    for nu in 0..self.n {
                        if mu != nu {
                            acc += self.get(a, mu, nu) * v[mu] * w[nu];
                        }
                    }
                }
                acc
            })
            .collect()
    }
}

/// `R^a_{μν} = ∂_μΓ^a_ν − ∂_νΓ^a_μ + Γ^b_μ ∂_bΓ^a_ν − Γ^b_ν ∂_bΓ^a_μ`.
pub fn curvature<T: Scalar, C: Connection>(conn: &C, u: &[T]) -> Result<CurvatureComponents<T>> {
    let BundleShape { n, r } = conn.shape();
    let (g, d) = gamma_and_partials(conn, u)?;
    let mut upper = Vec::with_capacity(r * n * (n - 1) / 2);
    for a in 0..r {
        for mu in 0..n {
            for nu in (mu + 1)..n {
                let mut v = d[mu][(a, nu)] - d[nu][(a, mu)];
                for b in 0..r {
                    v += g[(b, mu)] * d[n + b][(a, nu)] - g[(b, nu)] * d[n + b][(a, mu)];
                }
                upper.push(v);
            }
        }
    }
    Ok(CurvatureComponents { n, r, upper })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatnessReport {
    pub max_residual: f64,
    pub worst_point: Vec<f64>,
    pub flat: bool,
}

pub fn check_flat<C: Connection>(conn: &C, samples: &[Vec<f64>], tol: f64) -> Result<FlatnessReport> {
    if samples.is_empty() {
        return Err(Error::Shape("flatness check needs at least one sample".into()));
    }
    let mut rep = FlatnessReport { max_residual: 0.0, worst_point: samples[0].clone(), flat: true };
    for p in samples {
        let m = curvature(conn, p)?.max_abs();
        if m > rep.max_residual {
            rep.max_residual = m;
            rep.worst_point = p.clone();
        }
    }
    rep.flat = rep.max_residual < tol;
    Ok(rep)
}

/// `C_{IJ}^K` with `[e_I, e_J] = C_{IJ}^K e_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnholonomyComponents {
    pub point: Vec<f64>,
    pub dim: usize,
    data: Vec<f64>,
}

impl AnholonomyComponents {
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.dim + j) * self.dim + k]
    }
}

/// Commutator coefficients of a frame field at `u`, by AD on its matrix.
pub fn anholonomy<F: FrameField>(frame: &F, u: &[f64]) -> Result<AnholonomyComponents> {
    let d = frame.dim();
    let f = frame.matrix(u)?;
    // df[m] = ∂_m F
    let df: Vec<Mat<f64>> =
        (0..d).map(|m| Ok(frame.matrix(&seed(u, m))?.map(|x: Dual<f64>| x.eps))).collect::<Result<_>>()?;
    let finv = f.inverse()?;
    let mut data = vec![0.0; d * d * d];
    for i in 0..d {
        for j in 0..d {
            // bracket^K = e_i(e_j^K) − e_j(e_i^K)
            let bracket: Vec<f64> = (0..d)
                .map(|k| (0..d).map(|m| f[(m, i)] * df[m][(k, j)] - f[(m, j)] * df[m][(k, i)]).sum())
                .collect();
            let c = finv.matvec(&bracket);
            data[(i * d + j) * d..(i * d + j + 1) * d].copy_from_slice(&c);
        }
    }
    Ok(AnholonomyComponents { point: u.to_vec(), dim: d, data })
}

pub fn anholonomy_adapted<C: Connection>(conn: &C, u: &[f64]) -> Result<AnholonomyComponents> {
    anholonomy(&AdaptedFrame(conn), u)
}

/// A curve in the base, parameterized on `[begin, end]`.
pub trait BaseCurve {
    fn dim(&self) -> usize;
    fn interval(&self) -> (f64, f64);
    fn point<T: Scalar>(&self, s: T) -> Result<Vec<T>>;

    fn velocity<T: Scalar>(&self, s: T) -> Result<Vec<T>> {
        Ok(self.point(Dual::variable(s))?.into_iter().map(|d| d.eps).collect())
    }
}

/// Curve `x^μ(s1)` given by expressions in `s1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprCurve {
    pub components: Vec<Expr>,
    pub begin: f64,
    pub end: f64,
}

impl ExprCurve {
    pub fn parse(components: &[&str], begin: f64, end: f64) -> Result<Self> {
        let vars = vec!["s1".to_string()];
        let components = components.iter().map(|t| parse(t, &vars)).collect::<Result<_>>()?;
        Ok(ExprCurve { components, begin, end })
    }
}

impl BaseCurve for ExprCurve {
    fn dim(&self) -> usize {
        self.components.len()
    }
    fn interval(&self) -> (f64, f64) {
        (self.begin, self.end)
    }
    fn point<T: Scalar>(&self, s: T) -> Result<Vec<T>> {
        self.components.iter().map(|c| c.eval(&[s])).collect()
    }
}

/// Straight segment from `a` to `b` on `s ∈ [0, 1]`. With `eased` set the
/// segment is run with speed profile `sin(π s / 2)` instead of uniformly.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub eased: bool,
}

impl BaseCurve for Segment {
    fn dim(&self) -> usize {
        self.a.len()
    }
    fn interval(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn point<T: Scalar>(&self, s: T) -> Result<Vec<T>> {
        let w = if self.eased { (s * T::from_f64(std::f64::consts::FRAC_PI_2)).sin() } else { s };
        Ok(self.a.iter().zip(&self.b).map(|(&x, &y)| T::from_f64(x) + w * T::from_f64(y - x)).collect())
    }
}

/// Polyline through `vertices`, lifted edge by edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub vertices: Vec<Vec<f64>>,
    pub eased: bool,
}

impl Polyline {
    pub fn unit_square() -> Self {
        Polyline {
            vertices: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![0.0, 0.0]],
            eased: false,
        }
    }

    pub fn segments(&self) -> Vec<Segment> {
        self.vertices
            .windows(2)
            .map(|w| Segment { a: w[0].clone(), b: w[1].clone(), eased: self.eased })
            .collect()
    }
}

/// Sampled horizontal lift. `exited` is set if the lift left the domain, in
/// which case the samples stop at the last point inside.
#[derive(Debug, Clone, PartialEq)]
pub struct Lift {
    pub s: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub exited: bool,
}

impl Lift {
    pub fn last(&self) -> &[f64] {
        self.points.last().expect("lift has at least its start point")
    }
}

/// Horizontal lift of `curve` starting at the fibre point `start_fibre`, by
/// fixed-step RK4 on `du^a/ds = Γ^a_μ(x(s), u) dx^μ/ds`.
pub fn horizontal_lift<C: Connection, B: BaseCurve>(
    conn: &C,
    curve: &B,
    start_fibre: &[f64],
    steps: usize,
    domain: Option<&DomainBox>,
) -> Result<Lift> {
    let BundleShape { n, r } = conn.shape();
    if curve.dim() != n || start_fibre.len() != r {
        return Err(Error::Shape("curve or start point does not match the bundle shape".into()));
    }
    let (s0, s1) = curve.interval();
    let h = (s1 - s0) / steps as f64;
    let rhs = |s: f64, y: &[f64]| -> Result<Vec<f64>> {
        let mut u = curve.point(s)?;
        u.extend_from_slice(y);
        let g = conn.gamma(&u)?;
        let v = curve.velocity(s)?;
        Ok(g.matvec(&v))
    };
    let full = |s: f64, y: &[f64]| -> Result<Vec<f64>> {
        let mut u = curve.point(s)?;
        u.extend_from_slice(y);
        Ok(u)
    };
    let mut lift = Lift { s: vec![s0], points: vec![full(s0, start_fibre)?], exited: false };
    let mut y = start_fibre.to_vec();
    for i in 0..steps {
        let s = s0 + h * i as f64;
        y = rk4_step(&rhs, s, &y, h)?;
        let next_s = if i + 1 == steps { s1 } else { s0 + h * (i + 1) as f64 };
        let p = full(next_s, &y)?;
        if let Some(dom) = domain {
            if !dom.contains(&p) || p.iter().any(|x| !x.is_finite()) {
                lift.exited = true;
                break;
            }
        }
        lift.s.push(next_s);
        lift.points.push(p);
    }
    Ok(lift)
}

/// Fibre displacement after lifting a closed loop: `u^a(end) − u^a(start)`.
pub fn holonomy_defect<C: Connection, B: BaseCurve>(
    conn: &C,
    curve: &B,
    start_fibre: &[f64],
    steps: usize,
) -> Result<Vec<f64>> {
    let lift = horizontal_lift(conn, curve, start_fibre, steps, None)?;
    let n = conn.shape().n;
    Ok(lift.last()[n..].iter().zip(start_fibre).map(|(a, b)| a - b).collect())
}

/// Lift of a polyline, one edge after another with `steps_per_edge` RK4
/// steps each. The parameter of edge `i` runs over `[i, i+1]`.
pub fn horizontal_lift_polyline<C: Connection>(
    conn: &C,
    poly: &Polyline,
    start_fibre: &[f64],
    steps_per_edge: usize,
    domain: Option<&DomainBox>,
) -> Result<Lift> {
    let n = conn.shape().n;
    let mut out = Lift { s: vec![], points: vec![], exited: false };
    let mut fibre = start_fibre.to_vec();
    for (i, seg) in poly.segments().iter().enumerate() {
        let lift = horizontal_lift(conn, seg, &fibre, steps_per_edge, domain)?;
        let skip = usize::from(i > 0);
        out.s.extend(lift.s.iter().skip(skip).map(|s| s + i as f64));
        out.points.extend(lift.points.iter().skip(skip).cloned());
        fibre = lift.last()[n..].to_vec();
        if lift.exited {
            out.exited = true;
            break;
        }
    }
    Ok(out)
}

/// Fibre displacement after lifting a closed polyline.
pub fn polyline_holonomy<C: Connection>(
    conn: &C,
    poly: &Polyline,
    start_fibre: &[f64],
    steps_per_edge: usize,
) -> Result<Vec<f64>> {
    let lift = horizontal_lift_polyline(conn, poly, start_fibre, steps_per_edge, None)?;
    let n = conn.shape().n;
    Ok(lift.last()[n..].iter().zip(start_fibre).map(|(a, b)| a - b).collect())
}

/// Blocks of the frame `ẽ_μ = A_μ^ν X_ν`, `ẽ_a = A_a^b ∂_b`, i.e. with the
/// mixed block forced to `Γ·A_base`.
#[derive(Debug, Clone)]
pub struct NormalFrameBlocks<C> {
    pub conn: C,
    pub base: ExprMatrix,
    pub fibre: ExprMatrix,
}

impl<C: Connection> BlockField for NormalFrameBlocks<C> {
    fn shape(&self) -> BundleShape {
        self.conn.shape()
    }
    fn blocks<T: Scalar>(&self, u: &[T]) -> Result<BlockMatrix<T>> {
        let base = self.base.eval(u)?;
        let mixed = self.conn.gamma(u)?.matmul(&base);
        BlockMatrix::new(base, mixed, self.fibre.eval(u)?)
    }
}

impl<C: Connection> FrameField for NormalFrameBlocks<C> {
    fn dim(&self) -> usize {
        self.conn.shape().dim()
    }
    fn matrix<T: Scalar>(&self, u: &[T]) -> Result<Mat<T>> {
        Ok(self.blocks(u)?.to_full())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameNormalityReport {
    pub max_residual: f64,
    pub worst_point: Vec<f64>,
    pub pass: bool,
}

/// Largest coefficient of the connection in the frame given by `blocks`
/// over `samples`.
pub fn verify_frame_normal<C: Connection, F: BlockField>(
    conn: &C,
    blocks: &F,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<FrameNormalityReport> {
    let mut rep = FrameNormalityReport { max_residual: 0.0, worst_point: vec![], pass: true };
    for p in samples {
        let g = frame_transformed_gamma(&conn.gamma(p)?, &blocks.blocks(p)?)?;
        let m = g.max_abs();
        if m > rep.max_residual || rep.worst_point.is_empty() {
            rep.max_residual = rep.max_residual.max(m);
            rep.worst_point = p.clone();
        }
    }
    rep.pass = rep.max_residual < tol;
    Ok(rep)
}

#[derive(Debug, Clone)]
pub struct GeneralNormalFrame<C> {
    pub blocks: NormalFrameBlocks<C>,
    pub report: FrameNormalityReport,
}

/// Frame normal on the sample set for arbitrary fibre-constant,
/// non-degenerate `A_base` (n×n) and `A_fibre` (r×r) over the bundle
/// variables.
pub fn general_normal_frame<C: Connection>(
    conn: C,
    a_base: ExprMatrix,
    a_fibre: ExprMatrix,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<GeneralNormalFrame<C>> {
    let BundleShape { n, r } = conn.shape();
    if (a_base.rows, a_base.cols, a_fibre.rows, a_fibre.cols) != (n, n, r, r) {
        return Err(Error::Shape("frame blocks do not match the bundle shape".into()));
    }
    let blocks = NormalFrameBlocks { conn, base: a_base, fibre: a_fibre };
    let residual = fibre_constancy_residual(&blocks, samples)?;
    if residual >= FIBRE_TOL {
        return Err(Error::FibreConstancy { residual });
    }
    for p in samples {
        block_inverse(&blocks.blocks(p)?)?;
    }
    let report = verify_frame_normal(&blocks.conn, &blocks, samples, tol)?;
    Ok(GeneralNormalFrame { blocks, report })
}

/// Coefficient partials helper exposed for the integrability conditions:
/// `∂Γ^a_μ/∂u^K` at `u` for every `K`.
pub fn gamma_partials<C: Connection>(conn: &C, u: &[f64]) -> Result<(Mat<f64>, Vec<Mat<f64>>)> {
    gamma_and_partials(conn, u)
}

/// Second partials `∂²Γ^a_μ/∂u^I∂u^J` at `u` for the index pair `(i, j)`.
pub fn gamma_second<C: Connection>(conn: &C, u: &[f64], i: usize, j: usize) -> Result<Mat<f64>> {
    let x: Vec<Dual<Dual<f64>>> = u
        .iter()
        .enumerate()
        .map(|(k, &v)| Dual::new(Dual::new(v, if k == j { 1.0 } else { 0.0 }), Dual::new(if k == i { 1.0 } else { 0.0 }, 0.0)))
        .collect();
    Ok(conn.gamma(&x)?.map(|d| d.eps.eps))
}
