//! Fixed-step integrators, generic over the scalar kind so derivatives can
//! be pushed through a whole integration.

use crate::error::Result;
use crate::scalar::Scalar;

/// One classical Runge–Kutta step of `y' = f(s, y)`.
pub fn rk4_step<T, F>(f: &F, s: T, y: &[T], h: T) -> Result<Vec<T>>
where
    T: Scalar,
    F: Fn(T, &[T]) -> Result<Vec<T>>,
{
    let half = T::from_f64(0.5);
    let axpy = |a: &[T], k: &[T], c: T| -> Vec<T> { a.iter().zip(k).map(|(&x, &d)| x + c * d).collect() };
    let k1 = f(s, y)?;
    let k2 = f(s + half * h, &axpy(y, &k1, half * h))?;
    let k3 = f(s + half * h, &axpy(y, &k2, half * h))?;
    let k4 = f(s + h, &axpy(y, &k3, h))?;
    let sixth = h / T::from_f64(6.0);
    let two = T::from_f64(2.0);
    Ok((0..y.len()).map(|i| y[i] + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i])).collect())
}

/// Integrate from `s0` to `s1` in `steps` equal steps; returns every node,
/// starting with `y0`.
pub fn rk4<T, F>(f: &F, s0: T, y0: Vec<T>, s1: T, steps: usize) -> Result<Vec<Vec<T>>>
where
    T: Scalar,
    F: Fn(T, &[T]) -> Result<Vec<T>>,
{
    assert!(steps > 0);
    let h = (s1 - s0) / T::from_f64(steps as f64);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(y0);
    for i in 0..steps {
        let s = s0 + h * T::from_f64(i as f64);
        let next = rk4_step(f, s, &out[i], h)?;
        out.push(next);
    }
    Ok(out)
}

/// Composite Simpson rule over equally spaced samples (odd count ≥ 3)
/// with spacing `h`.
pub fn simpson<T: Scalar>(samples: &[T], h: T) -> T {
    let m = samples.len();
    assert!(m >= 3 && m % 2 == 1, "Simpson needs an odd number of samples, got {m}");
    let mut acc = samples[0] + samples[m - 1];
    for (i, &v) in samples.iter().enumerate().take(m - 1).skip(1) {
        acc += v * T::from_f64(if i % 2 == 1 { 4.0 } else { 2.0 });
    }
    acc * h / T::from_f64(3.0)
}

/// Even number of panels (at least 2) so that each is no longer than `h`.
pub fn even_panels(length: f64, h: f64) -> usize {
    let n = (length.abs() / h - 1e-9).ceil().max(0.0) as usize;
    (n.max(2) + 1) & !1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rk4_exponential() {
        let f = |_s: f64, y: &[f64]| Ok(vec![y[0]]);
        let ys = rk4(&f, 0.0, vec![1.0], 1.0, 100).unwrap();
        assert!((ys[100][0] - 1f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn simpson_cubic_is_exact() {
        let h = 0.25;
        let v: Vec<f64> = (0..=4).map(|i| (i as f64 * h).powi(3)).collect();
        assert!((simpson(&v, h) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn panel_counts() {
        assert_eq!(even_panels(0.0, 0.1), 2);
        assert_eq!(even_panels(1.0, 0.1), 10);
        assert_eq!(even_panels(1.05, 0.1), 12);
        assert_eq!(even_panels(-0.3, 0.1), 4);
    }
}
