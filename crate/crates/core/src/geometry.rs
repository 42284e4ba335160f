//! Bundle shapes, chart domains, admissible coordinate changes and the
//! block-triangular matrices relating their frames.
//!
//! Matrices follow the column convention: column `J` of a frame or
//! transformation matrix holds the components of the `J`-th new vector in
//! the old coordinate basis, so entry `(I, J)` is `A_J^I = ∂u^I/∂ũ^J`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::{bundle_vars, parse, Expr};
use crate::linalg::{Mat, CONDITION_LIMIT};
use crate::scalar::{seed, value_and_jacobian, Dual, Scalar};

/// Fibre derivatives of base components below this count as zero.
pub const FIBRE_TOL: f64 = 1e-10;
/// Diagonal blocks with |det| at or below this are degenerate.
pub const DET_TOL: f64 = 1e-12;

/// Base dimension `n` and fibre dimension `r`. Coordinates are ordered base
/// first (`0..n`, named `u1..un`), then fibre (`n..n+r`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BundleShape {
    pub n: usize,
    pub r: usize,
}

impl BundleShape {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if n == 0 || r == 0 {
            return Err(Error::Shape(format!("bundle needs n >= 1 and r >= 1, got n={n}, r={r}")));
        }
        Ok(BundleShape { n, r })
    }

    pub fn dim(&self) -> usize {
        self.n + self.r
    }

    pub fn base(&self) -> std::ops::Range<usize> {
        0..self.n
    }

    pub fn fibre(&self) -> std::ops::Range<usize> {
        self.n..self.n + self.r
    }

    pub fn var_names(&self) -> Vec<String> {
        bundle_vars(self.dim())
    }

    pub fn base_var_names(&self) -> Vec<String> {
        bundle_vars(self.n)
    }
}

/// Axis-aligned box `[lo, hi]` in some coordinate space.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl DomainBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::Shape("domain bounds must be non-empty and of equal length".into()));
        }
        if let Some(i) = (0..lo.len()).find(|&i| !(lo[i] < hi[i]) || !lo[i].is_finite() || !hi[i].is_finite()) {
            return Err(Error::Shape(format!("degenerate domain along axis {}: [{}, {}]", i + 1, lo[i], hi[i])));
        }
        Ok(DomainBox { lo, hi })
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        DomainBox { lo: vec![lo; dim], hi: vec![hi; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && p.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (l, h))| l <= x && x <= h)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    /// Uniform grid with `per_axis` nodes on every axis (endpoints included),
    /// last axis varying fastest.
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let d = self.dim();
        let axis = |i: usize, j: usize| {
            if per_axis == 1 {
                0.5 * (self.lo[i] + self.hi[i])
            } else {
                self.lo[i] + (self.hi[i] - self.lo[i]) * j as f64 / (per_axis - 1) as f64
            }
        };
        let total = per_axis.pow(d as u32);
        (0..total)
            .map(|mut idx| {
                let mut p = vec![0.0; d];
                for i in (0..d).rev() {
                    p[i] = axis(i, idx % per_axis);
                    idx /= per_axis;
                }
                p
            })
            .collect()
    }

    /// `count` points drawn uniformly from the box by a seeded generator.
    pub fn random(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| (0..self.dim()).map(|i| rng.gen_range(self.lo[i]..=self.hi[i])).collect())
            .collect()
    }

    /// Grid nodes followed by seeded random points.
    pub fn samples(&self, per_axis: usize, random: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut pts = self.grid(per_axis);
        pts.extend(self.random(random, seed));
        pts
    }

    /// Box with the same center and each side scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> DomainBox {
        let c = self.center();
        DomainBox {
            lo: self.lo.iter().zip(&c).map(|(l, c)| c + factor * (l - c)).collect(),
            hi: self.hi.iter().zip(&c).map(|(h, c)| c + factor * (h - c)).collect(),
        }
    }
}

/// A smooth map between coordinate systems of equal dimension, evaluable
/// over any scalar kind.
pub trait CoordinateMap {
    fn dim(&self) -> usize;
    fn apply<T: Scalar>(&self, u: &[T]) -> Result<Vec<T>>;
}

impl<M: CoordinateMap + ?Sized> CoordinateMap for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply<T: Scalar>(&self, u: &[T]) -> Result<Vec<T>> {
        (**self).apply(u)
    }
}

/// Forward coordinate change `ũ^I(u)` written in the expression language.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateChange {
    pub shape: BundleShape,
    pub components: Vec<Expr>,
}

impl CoordinateChange {
    pub fn new(shape: BundleShape, components: Vec<Expr>) -> Result<Self> {
        if components.len() != shape.dim() {
            return Err(Error::Shape(format!(
                "coordinate change needs {} components, got {}",
                shape.dim(),
                components.len()
            )));
        }
        if let Some(e) = components.iter().find(|e| e.min_arity() > shape.dim()) {
            return Err(Error::Shape(format!("component `{e}` uses variables beyond u{}", shape.dim())));
        }
        Ok(CoordinateChange { shape, components })
    }

    pub fn parse(shape: BundleShape, texts: &[&str]) -> Result<Self> {
        let vars = shape.var_names();
        let comps = texts.iter().map(|t| parse(t, &vars)).collect::<Result<Vec<_>>>()?;
        Self::new(shape, comps)
    }

    pub fn identity(shape: BundleShape) -> Self {
        CoordinateChange { shape, components: (0..shape.dim()).map(Expr::u).collect() }
    }

    /// `self ∘ inner`: apply `inner` first, then `self`, by substitution.
    pub fn compose(&self, inner: &CoordinateChange) -> Result<CoordinateChange> {
        if self.shape != inner.shape {
            return Err(Error::Shape("composing changes of different shapes".into()));
        }
        let comps = self.components.iter().map(|c| c.substitute(&inner.components)).collect();
        CoordinateChange::new(self.shape, comps)
    }

    /// Components as expression strings.
    pub fn to_strings(&self) -> Vec<String> {
        self.components.iter().map(ToString::to_string).collect()
    }
}

impl CoordinateMap for CoordinateChange {
    fn dim(&self) -> usize {
        self.shape.dim()
    }
    fn apply<T: Scalar>(&self, u: &[T]) -> Result<Vec<T>> {
        self.components.iter().map(|c| c.eval(u)).collect()
    }
}

/// `outer ∘ inner` for arbitrary coordinate maps.
#[derive(Debug, Clone)]
pub struct Compose<A, B> {
    pub outer: A,
    pub inner: B,
}

pub fn compose<A: CoordinateMap, B: CoordinateMap>(outer: A, inner: B) -> Compose<A, B> {
    Compose { outer, inner }
}

impl<A: CoordinateMap, B: CoordinateMap> CoordinateMap for Compose<A, B> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn apply<T: Scalar>(&self, u: &[T]) -> Result<Vec<T>> {
        self.outer.apply(&self.inner.apply(u)?)
    }
}

/// `[∂ũ^I/∂u^J]` of a map at `p`, rows indexed by the output.
pub fn forward_jacobian<T: Scalar, M: CoordinateMap>(map: &M, p: &[T]) -> Result<Mat<T>> {
    Ok(value_and_jacobian(|x: &[Dual<T>]| map.apply(x), p)?.1)
}

/// Lower block-triangular matrix
///
/// ```text
/// [ base   0     ]
/// [ mixed  fibre ]
/// ```
///
/// with `base[ν][μ] = A_μ^ν` (n×n), `mixed[b][μ] = A_μ^b` (r×n) and
/// `fibre[b][a] = A_a^b` (r×r).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix<T> {
    pub base: Mat<T>,
    pub mixed: Mat<T>,
    pub fibre: Mat<T>,
}

impl<T: Scalar> BlockMatrix<T> {
    pub fn new(base: Mat<T>, mixed: Mat<T>, fibre: Mat<T>) -> Result<Self> {
        let (n, r) = (base.rows(), fibre.rows());
        if base.cols() != n || fibre.cols() != r || mixed.rows() != r || mixed.cols() != n {
            return Err(Error::Shape("inconsistent block sizes".into()));
        }
        Ok(BlockMatrix { base, mixed, fibre })
    }

    pub fn identity(shape: BundleShape) -> Self {
        BlockMatrix {
            base: Mat::identity(shape.n),
            mixed: Mat::zeros(shape.r, shape.n),
            fibre: Mat::identity(shape.r),
        }
    }

    pub fn shape(&self) -> BundleShape {
        BundleShape { n: self.base.rows(), r: self.fibre.rows() }
    }

    /// Split a full `(n+r)×(n+r)` matrix, requiring the upper-right block to
    /// vanish to [`FIBRE_TOL`].
    pub fn from_full(full: &Mat<T>, shape: BundleShape) -> Result<Self> {
        let (n, r) = (shape.n, shape.r);
        for mu in 0..n {
            for a in n..n + r {
                let v = full[(mu, a)].value();
                if v.abs() > FIBRE_TOL {
                    return Err(Error::FibreStructure { mu: mu + 1, a: a + 1, value: v });
                }
            }
        }
        Ok(BlockMatrix {
            base: full.block(0, 0, n, n),
            mixed: full.block(n, 0, r, n),
            fibre: full.block(n, n, r, r),
        })
    }

    pub fn to_full(&self) -> Mat<T> {
        let BundleShape { n, r } = self.shape();
        let mut m = Mat::zeros(n + r, n + r);
        m.set_block(0, 0, &self.base);
        m.set_block(n, 0, &self.mixed);
        m.set_block(n, n, &self.fibre);
        m
    }

    pub fn matmul(&self, o: &BlockMatrix<T>) -> BlockMatrix<T> {
        BlockMatrix {
            base: self.base.matmul(&o.base),
            mixed: self.mixed.matmul(&o.base).add(&self.fibre.matmul(&o.mixed)),
            fibre: self.fibre.matmul(&o.fibre),
        }
    }

    pub fn values(&self) -> BlockMatrix<f64> {
        BlockMatrix { base: self.base.values(), mixed: self.mixed.values(), fibre: self.fibre.values() }
    }
}

/// Inverse of a block-triangular matrix. The lower-left block of the result
/// is `−fibre⁻¹ · mixed · base⁻¹`.
pub fn block_inverse<T: Scalar>(a: &BlockMatrix<T>) -> Result<BlockMatrix<T>> {
    let base_inv = a.base.inverse()?;
    let fibre_inv = a.fibre.inverse()?;
    let mixed = fibre_inv.matmul(&a.mixed).matmul(&base_inv).neg();
    Ok(BlockMatrix { base: base_inv, mixed, fibre: fibre_inv })
}

/// `[∂u^I/∂ũ^J]` of an admissible change at `p`: the AD forward Jacobian,
/// checked for the fibre structure and inverted blockwise.
pub fn jacobian<T: Scalar, M: CoordinateMap>(change: &M, shape: BundleShape, p: &[T]) -> Result<BlockMatrix<T>> {
    let fwd = BlockMatrix::from_full(&forward_jacobian(change, p)?, shape)?;
    block_inverse(&fwd).map_err(|e| match e {
        Error::Singular { condition } => Error::DegenerateChange { point: p.iter().map(Scalar::value).collect(), condition },
        other => other,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    /// max |∂ũ^μ/∂u^a| over samples.
    pub fibre_dependence: f64,
    /// 1-based `(μ, a)` of the worst offending pair, if any exceeds tolerance.
    pub worst_pair: Option<(usize, usize)>,
    pub min_base_det: f64,
    pub min_fibre_det: f64,
    pub max_condition: f64,
    pub pass: bool,
}

pub fn validate_admissible_change<M: CoordinateMap>(
    change: &M,
    shape: BundleShape,
    samples: &[Vec<f64>],
) -> Result<AdmissibilityReport> {
    if samples.is_empty() {
        return Err(Error::Shape("validation needs at least one sample point".into()));
    }
    let mut rep = AdmissibilityReport {
        fibre_dependence: 0.0,
        worst_pair: None,
        min_base_det: f64::INFINITY,
        min_fibre_det: f64::INFINITY,
        max_condition: 0.0,
        pass: true,
    };
    for p in samples {
        let j = match forward_jacobian(change, p) {
            Ok(j) => j,
            Err(_) => {
                rep.pass = false;
                continue;
            }
        };
        for mu in shape.base() {
            for a in shape.fibre() {
                let v = j[(mu, a)].abs();
                if v > rep.fibre_dependence {
                    rep.fibre_dependence = v;
                    if v >= FIBRE_TOL {
                        rep.worst_pair = Some((mu + 1, a + 1));
                    }
                }
            }
        }
        let base = j.block(0, 0, shape.n, shape.n);
        let fibre = j.block(shape.n, shape.n, shape.r, shape.r);
        rep.min_base_det = rep.min_base_det.min(base.det().abs());
        rep.min_fibre_det = rep.min_fibre_det.min(fibre.det().abs());
        for m in [&base, &fibre] {
            let cond = m.inverse_with_condition().map_or(f64::INFINITY, |(_, c)| c);
            rep.max_condition = rep.max_condition.max(cond);
        }
    }
    rep.pass &= rep.fibre_dependence < FIBRE_TOL
        && rep.min_base_det > DET_TOL
        && rep.min_fibre_det > DET_TOL
        && rep.max_condition < CONDITION_LIMIT;
    Ok(rep)
}

/// Matrix of expressions over a declared variable list.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Expr>,
}

impl ExprMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Expr>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!("{rows}x{cols} matrix needs {} entries, got {}", rows * cols, entries.len())));
        }
        Ok(ExprMatrix { rows, cols, entries })
    }

    pub fn parse(rows: &[Vec<&str>], vars: &[String]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged expression matrix".into()));
        }
        let entries = rows.iter().flatten().map(|t| parse(t, vars)).collect::<Result<Vec<_>>>()?;
        Self::new(r, c, entries)
    }

    pub fn constant(m: &Mat<f64>) -> Self {
        ExprMatrix { rows: m.rows(), cols: m.cols(), entries: m.as_slice().iter().map(|&v| Expr::num(v)).collect() }
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(&Mat::identity(n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::constant(&Mat::zeros(rows, cols))
    }

    pub fn eval<T: Scalar>(&self, vars: &[T]) -> Result<Mat<T>> {
        let data = self.entries.iter().map(|e| e.eval(vars)).collect::<Result<Vec<_>>>()?;
        Ok(Mat::from_vec(self.rows, self.cols, data))
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.cols + j]
    }
}

/// A block-matrix-valued function on the bundle.
pub trait BlockField {
    fn shape(&self) -> BundleShape;
    fn blocks<T: Scalar>(&self, u: &[T]) -> Result<BlockMatrix<T>>;
}

/// `[∂u/∂ũ]` of a coordinate change as a block field.
#[derive(Debug, Clone)]
pub struct ChangeBlocks<M> {
    pub change: M,
    pub shape: BundleShape,
}

impl<M: CoordinateMap> BlockField for ChangeBlocks<M> {
    fn shape(&self) -> BundleShape {
        self.shape
    }
    fn blocks<T: Scalar>(&self, u: &[T]) -> Result<BlockMatrix<T>> {
        jacobian(&self.change, self.shape, u)
    }
}

/// Blocks given directly as expressions in the bundle coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprBlocks {
    pub shape: BundleShape,
    pub base: ExprMatrix,
    pub mixed: ExprMatrix,
    pub fibre: ExprMatrix,
}

impl BlockField for ExprBlocks {
    fn shape(&self) -> BundleShape {
        self.shape
    }
    fn blocks<T: Scalar>(&self, u: &[T]) -> Result<BlockMatrix<T>> {
        BlockMatrix::new(self.base.eval(u)?, self.mixed.eval(u)?, self.fibre.eval(u)?)
    }
}

/// Largest fibre derivative of the diagonal blocks over `samples`.
pub fn fibre_constancy_residual<F: BlockField>(field: &F, samples: &[Vec<f64>]) -> Result<f64> {
    let shape = field.shape();
    let mut worst = 0.0f64;
    for p in samples {
        for a in shape.fibre() {
            let b = field.blocks(&seed(p, a))?;
            worst = worst.max(b.base.map(|d| d.eps).max_abs()).max(b.fibre.map(|d| d.eps).max_abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s11() -> BundleShape {
        BundleShape::new(1, 1).unwrap()
    }

    #[test]
    fn jacobian_of_linear_change() {
        let c = CoordinateChange::parse(s11(), &["2*u1", "u2 + 3*u1"]).unwrap();
        let a = jacobian(&c, s11(), &[0.3, -1.0]).unwrap();
        assert_eq!(a.to_full(), Mat::from_rows(&[vec![0.5, 0.0], vec![-1.5, 1.0]]));
        let fwd = forward_jacobian(&c, &[0.3, -1.0]).unwrap();
        assert_eq!(fwd.matmul(&a.to_full()), Mat::identity(2));
    }

    #[test]
    fn fibre_violation_is_an_error() {
        let c = CoordinateChange::parse(s11(), &["u1 + u2", "u2"]).unwrap();
        assert!(matches!(jacobian(&c, s11(), &[0.0, 0.0]), Err(Error::FibreStructure { mu: 1, a: 2, .. })));
    }

    #[test]
    fn small_block_inverse() {
        let a = BlockMatrix::new(
            Mat::from_rows(&[vec![2.0]]),
            Mat::from_rows(&[vec![3.0]]),
            Mat::from_rows(&[vec![4.0]]),
        )
        .unwrap();
        let inv = block_inverse(&a).unwrap();
        assert_eq!(inv.to_full(), Mat::from_rows(&[vec![0.5, 0.0], vec![-0.375, 0.25]]));
    }

    #[test]
    fn admissibility_reports() {
        let shape = BundleShape::new(2, 1).unwrap();
        let samples = DomainBox::cube(3, -1.0, 1.0).samples(3, 5, 1);
        let ok = CoordinateChange::parse(shape, &["u1", "u2", "u3 + u1^2"]).unwrap();
        let rep = validate_admissible_change(&ok, shape, &samples).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.fibre_dependence, 0.0);
        let bad = CoordinateChange::parse(shape, &["u1 + u3", "u2", "u3"]).unwrap();
        let rep = validate_admissible_change(&bad, shape, &samples).unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.worst_pair, Some((1, 3)));
    }

    #[test]
    fn grid_layout() {
        let b = DomainBox::new(vec![0.0, 10.0], vec![1.0, 20.0]).unwrap();
        let g = b.grid(3);
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], vec![0.0, 10.0]);
        assert_eq!(g[1], vec![0.0, 15.0]);
        assert_eq!(g[8], vec![1.0, 20.0]);
        assert!(DomainBox::new(vec![1.0], vec![1.0]).is_err());
        assert_eq!(b.random(4, 9), b.random(4, 9));
    }
}
