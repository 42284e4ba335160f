//! Fixtures shared by the benchmarks.

use nframes_core::corpus;
use nframes_core::{ConnectionCoefficients, DomainBox, ParamMap};

pub fn nonlinear() -> ConnectionCoefficients {
    corpus::nonlinear()
}

pub fn sample_points(conn: &ConnectionCoefficients, count: usize) -> Vec<Vec<f64>> {
    conn.domain.scaled(0.9).random(count, 1)
}

/// A path through the nonlinear connection's domain on `s1 ∈ [-1, 1]`.
pub fn path(conn: &ConnectionCoefficients) -> ParamMap {
    let dom = DomainBox::new(vec![-1.0], vec![1.0]).expect("interval");
    ParamMap::parse(conn.shape, dom, &["0.5*s1", "0.2*s1^2", "0.3*cos(s1)"]).expect("valid path")
}

/// The flat surface `(s1, s2, exp(-0.3 s1 + 0.7 s2))` for the linear flat connection.
pub fn flat_surface() -> (ConnectionCoefficients, ParamMap) {
    let conn = corpus::linear_flat();
    let beta = ParamMap::parse(conn.shape, DomainBox::cube(2, -1.0, 1.0), &["s1", "s2", "exp(-0.3*s1 + 0.7*s2)"])
        .expect("valid surface");
    (conn, beta)
}
