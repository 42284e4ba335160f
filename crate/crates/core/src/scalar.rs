//! Scalar arithmetic with exact first and second derivatives.
//!
//! [`Dual<T>`] carries one first-order perturbation on top of any [`Scalar`]
//! `T`. Because `Dual<T>` is itself a `Scalar`, nesting gives higher orders:
//! [`HyperDual`] (`Dual<Dual<f64>>`) seeds two directions and its
//! `eps.eps` component is the mixed second partial. Nesting is also what
//! lets derivatives flow through code that itself differentiates (adapted
//! charts, transformed coefficients) without any special casing.
//!
//! The value component of every operation is computed with exactly the same
//! floating-point operation as the plain `f64` path, so evaluating with zero
//! perturbations reproduces plain arithmetic bit for bit.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::error::Result;
use crate::linalg::Mat;

/// Real-valued scalar usable by every numerical routine in the crate.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn from_f64(v: f64) -> Self;
    /// The plain real part, stripped of all perturbations.
    fn value(&self) -> f64;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn tanh(self) -> Self;
    fn atan(self) -> Self;
    fn powi(self, n: i32) -> Self;
    /// `self^e` for a positive base.
    fn powf(self, e: Self) -> Self;
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn atan(self) -> Self {
        f64::atan(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, e: Self) -> Self {
        f64::powf(self, e)
    }
}

/// A scalar with one infinitesimal perturbation: `re + eps·ε`, `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

/// Two seeded directions; `eps.eps` holds the mixed second derivative.
pub type HyperDual = Dual<Dual<f64>>;

impl<T: Scalar> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Dual { re, eps }
    }

    pub fn constant(re: T) -> Self {
        Dual { re, eps: T::zero() }
    }

    pub fn variable(re: T) -> Self {
        Dual { re, eps: T::one() }
    }

    #[inline]
    fn chain(self, f: T, df: T) -> Self {
        Dual { re: f, eps: self.eps * df }
    }
}

impl HyperDual {
    /// A hyper-dual variable at `v` seeded in the first direction (`d1`)
    /// and/or the second direction (`d2`).
    pub fn seeded(v: f64, d1: bool, d2: bool) -> Self {
        let s1 = if d1 { 1.0 } else { 0.0 };
        let s2 = if d2 { 1.0 } else { 0.0 };
        Dual { re: Dual { re: v, eps: s2 }, eps: Dual { re: s1, eps: 0.0 } }
    }

    pub fn d1(&self) -> f64 {
        self.eps.re
    }

    pub fn d2(&self) -> f64 {
        self.re.eps
    }

    pub fn d12(&self) -> f64 {
        self.eps.eps
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Dual { re: self.re + o.re, eps: self.eps + o.eps }
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Dual { re: self.re - o.re, eps: self.eps - o.eps }
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Dual { re: self.re * o.re, eps: self.re * o.eps + self.eps * o.re }
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let q = self.re / o.re;
        Dual { re: q, eps: (self.eps - q * o.eps) / o.re }
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual { re: -self.re, eps: -self.eps }
    }
}

impl<T: Scalar> AddAssign for Dual<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Scalar> SubAssign for Dual<T> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Scalar> MulAssign for Dual<T> {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn from_f64(v: f64) -> Self {
        Dual::constant(T::from_f64(v))
    }
    fn value(&self) -> f64 {
        self.re.value()
    }
    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }
    fn tan(self) -> Self {
        let t = self.re.tan();
        self.chain(t, T::one() + t * t)
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.re.ln(), T::one() / self.re)
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, T::one() / (T::from_f64(2.0) * s))
    }
    fn sinh(self) -> Self {
        self.chain(self.re.sinh(), self.re.cosh())
    }
    fn cosh(self) -> Self {
        self.chain(self.re.cosh(), self.re.sinh())
    }
    fn tanh(self) -> Self {
        let t = self.re.tanh();
        self.chain(t, T::one() - t * t)
    }
    fn atan(self) -> Self {
        self.chain(self.re.atan(), T::one() / (T::one() + self.re * self.re))
    }
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Dual::constant(T::one());
        }
        self.chain(self.re.powi(n), T::from_f64(n as f64) * self.re.powi(n - 1))
    }
    fn powf(self, e: Self) -> Self {
        let v = self.re.powf(e.re);
        let eps = v * (e.eps * self.re.ln() + e.re * self.eps / self.re);
        Dual { re: v, eps }
    }
}

/// A real function of `arity` variables, evaluable over any scalar kind.
pub trait ScalarFn {
    fn arity(&self) -> usize;
    fn call<T: Scalar>(&self, x: &[T]) -> Result<T>;
}

/// Lift `x` to duals with the perturbation seeded on variable `i`.
pub fn seed<T: Scalar>(x: &[T], i: usize) -> Vec<Dual<T>> {
    x.iter()
        .enumerate()
        .map(|(k, &v)| if k == i { Dual::variable(v) } else { Dual::constant(v) })
        .collect()
}

/// `∂f/∂x^i` at `x` by dual-number propagation (0-based `i`).
pub fn derive1<F: ScalarFn>(f: &F, x: &[f64], i: usize) -> Result<f64> {
    assert!(i < x.len(), "derivative index {i} out of range for {} variables", x.len());
    Ok(f.call(&seed(x, i))?.eps)
}

/// `∂²f/∂x^i∂x^j` at `x` by hyper-dual propagation (0-based indices).
pub fn derive2<F: ScalarFn>(f: &F, x: &[f64], i: usize, j: usize) -> Result<f64> {
    assert!(i < x.len() && j < x.len(), "derivative index out of range");
    let hx: Vec<HyperDual> =
        x.iter().enumerate().map(|(k, &v)| HyperDual::seeded(v, k == i, k == j)).collect();
    Ok(f.call(&hx)?.d12())
}

/// Central difference `(f(x+h·e_i) − f(x−h·e_i)) / 2h`.
pub fn fd_check<F: ScalarFn>(f: &F, x: &[f64], i: usize, h: f64) -> Result<f64> {
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[i] += h;
    xm[i] -= h;
    Ok((f.call(&xp)? - f.call(&xm)?) / (2.0 * h))
}

/// Value and Jacobian of a vector function at `x`, one dual pass per input
/// direction. Row `k` of the Jacobian holds the partials of output `k`.
pub fn value_and_jacobian<T, G>(g: G, x: &[T]) -> Result<(Vec<T>, Mat<T>)>
where
    T: Scalar,
    G: Fn(&[Dual<T>]) -> Result<Vec<Dual<T>>>,
{
    let n = x.len();
    let mut value = Vec::new();
    let mut jac: Option<Mat<T>> = None;
    for i in 0..n {
        let out = g(&seed(x, i))?;
        let m = jac.get_or_insert_with(|| Mat::zeros(out.len(), n));
        for (k, d) in out.iter().enumerate() {
            m[(k, i)] = d.eps;
        }
        if i == 0 {
            value = out.iter().map(|d| d.re).collect();
        }
    }
    if n == 0 {
        let out = g(&[])?;
        value = out.iter().map(|d| d.re).collect();
        jac = Some(Mat::zeros(value.len(), 0));
    }
    Ok((value, jac.expect("jacobian allocated")))
}

/// Directional derivative of a vector function along `dir`.
pub fn directional<T, G>(g: G, x: &[T], dir: &[T]) -> Result<(Vec<T>, Vec<T>)>
where
    T: Scalar,
    G: Fn(&[Dual<T>]) -> Result<Vec<Dual<T>>>,
{
    let lifted: Vec<Dual<T>> = x.iter().zip(dir).map(|(&v, &d)| Dual::new(v, d)).collect();
    let out = g(&lifted)?;
    Ok((out.iter().map(|d| d.re).collect(), out.iter().map(|d| d.eps).collect()))
}

pub fn lift<T: Scalar>(x: &[f64]) -> Vec<T> {
    x.iter().map(|&v| T::from_f64(v)).collect()
}

pub fn values<T: Scalar>(x: &[T]) -> Vec<f64> {
    x.iter().map(Scalar::value).collect()
}
