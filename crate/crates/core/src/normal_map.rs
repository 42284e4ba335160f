//! Normal coordinates along injective `k`-dimensional maps: integrability
//! conditions, the transported frame field, and the construct-or-obstruct
//! driver.

use crate::connection::{curvature, gamma_second, Connection};
use crate::error::{Error, Result};
use crate::geometry::ExprMatrix;
use crate::linalg::Mat;
use crate::normal_path::{check_frame_det, AdaptedChart, FrameRule, NormalCoordinates, ParamMap};
use crate::normal_point::{verify_normal, VerifyReport};

pub fn adapt_chart_to_map(beta: &ParamMap, s0: &[f64]) -> Result<AdaptedChart> {
    AdaptedChart::build(beta, s0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrabilityReport {
    pub nodes: usize,
    /// max |R^a_{μν} ∂_αβ^μ ∂_ββ^ν| over nodes and `α < β`.
    pub curvature_residual: f64,
    /// max |Γ'^d_α ∂_b∂_dΓ^c_ν ∂_ββ^ν − (α ↔ β)|.
    pub frame_residual: f64,
    pub worst_curvature: Vec<f64>,
    pub worst_frame: Vec<f64>,
    /// Coefficient magnitude the tolerance is scaled by (at least 1).
    pub scale: f64,
    pub tol: f64,
    pub pass_curvature: bool,
    pub pass_frame: bool,
}

impl IntegrabilityReport {
    pub fn pass(&self) -> bool {
        self.pass_curvature && self.pass_frame
    }
}

/// Evaluate both integrability conditions at the parameter nodes `grid`.
pub fn check_integrability<C: Connection>(
    conn: &C,
    beta: &ParamMap,
    grid: &[Vec<f64>],
    tol: f64,
) -> Result<IntegrabilityReport> {
    let (n, r) = (conn.shape().n, conn.shape().r);
    let k = beta.k();
    let mut rep = IntegrabilityReport {
        nodes: grid.len(),
        curvature_residual: 0.0,
        frame_residual: 0.0,
        worst_curvature: grid.first().cloned().unwrap_or_default(),
        worst_frame: grid.first().cloned().unwrap_or_default(),
        scale: 1.0,
        tol,
        pass_curvature: true,
        pass_frame: true,
    };
    for s in grid {
        let (b, jac) = beta.jet(s)?;
        let gamma = conn.gamma(&b)?;
        rep.scale = rep.scale.max(gamma.max_abs());
        let tangents: Vec<Vec<f64>> = (0..k).map(|al| jac.column(al)).collect();
        let pulled: Vec<Vec<f64>> = tangents
            .iter()
            .map(|t| {
                let mut g = gamma.matvec(&t[..n]);
                for (a, x) in g.iter_mut().enumerate() {
                    *x -= t[n + a];
                }
                g
            })
            .collect();
        if k < 2 {
            continue;
        }
        let curv = curvature(conn, &b)?;
        // second[bi][d] = ∂_{bi}∂_d Γ (r×n)
        let mut second = Vec::with_capacity(r);
        for bi in 0..r {
            let row = (0..r).map(|d| gamma_second(conn, &b, n + bi, n + d)).collect::<Result<Vec<_>>>()?;
            second.push(row);
        }
        for al in 0..k {
            for be in (al + 1)..k {
                let ra = curv.contract(&tangents[al][..n], &tangents[be][..n]);
                let m = ra.iter().map(|x| x.abs()).fold(0.0, f64::max);
                if m > rep.curvature_residual {
                    rep.curvature_residual = m;
                    rep.worst_curvature = s.clone();
                }
                for sec in &second {
                    for c in 0..r {
                        let mut v = 0.0;
                        for (d, sd) in sec.iter().enumerate() {
                            let along_be: f64 = (0..n).map(|nu| sd[(c, nu)] * tangents[be][nu]).sum();
                            let along_al: f64 = (0..n).map(|nu| sd[(c, nu)] * tangents[al][nu]).sum();
                            v += pulled[al][d] * along_be - pulled[be][d] * along_al;
                        }
                        if v.abs() > rep.frame_residual {
                            rep.frame_residual = v.abs();
                            rep.worst_frame = s.clone();
                        }
                    }
                }
            }
        }
    }
    rep.pass_curvature = rep.curvature_residual < tol * rep.scale;
    rep.pass_frame = rep.frame_residual < tol * rep.scale;
    Ok(rep)
}

/// `B` and `f` at every grid node of the chart window.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameAlongMap {
    pub nodes: Vec<Vec<f64>>,
    pub b: Vec<Mat<f64>>,
    pub f: Vec<Vec<f64>>,
    /// max node-wise |B| difference between forward and reversed axis order.
    pub path_independence: f64,
    /// Same for `f`.
    pub f_path_independence: f64,
}

/// Transport `B` from `b1` at `anchor` over the window grid and integrate
/// `f`. Fails if `det B` collapses or the two axis orders disagree by more
/// than `tol`.
#[allow(clippy::too_many_arguments)]
pub fn solve_frame_field<C: Connection + Clone>(
    conn: C,
    chart: &AdaptedChart,
    anchor: &[f64],
    b1: Mat<f64>,
    d: Option<ExprMatrix>,
    per_axis: usize,
    step: f64,
    tol: f64,
) -> Result<(NormalCoordinates<C>, FrameAlongMap)> {
    let r = conn.shape().r;
    if (b1.rows(), b1.cols()) != (r, r) {
        return Err(Error::Shape("initial frame must be r x r".into()));
    }
    check_frame_det(&b1, anchor)?;
    if !chart.window.contains(anchor) {
        return Err(Error::OutOfDomain { point: anchor.to_vec() });
    }
    let coords = NormalCoordinates {
        conn,
        chart: chart.clone(),
        anchor: anchor.to_vec(),
        frame: FrameRule::Transported { b1, d },
        step,
    };
    let fwd: Vec<usize> = (0..chart.k()).collect();
    let rev: Vec<usize> = fwd.iter().rev().copied().collect();
    let mut out = FrameAlongMap { nodes: vec![], b: vec![], f: vec![], path_independence: 0.0, f_path_independence: 0.0 };
    for s in chart.window.grid(per_axis) {
        let (f, b) = coords.frame_at(&s, &fwd)?;
        check_frame_det(&b, &s)?;
        if chart.k() > 1 {
            let (f2, b2) = coords.frame_at(&s, &rev)?;
            out.path_independence = out.path_independence.max(b.sub(&b2).max_abs());
            let df = f.iter().zip(&f2).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            out.f_path_independence = out.f_path_independence.max(df);
        }
        out.nodes.push(s);
        out.b.push(b);
        out.f.push(f);
    }
    if out.path_independence > tol {
        return Err(Error::PathDependence { residual: out.path_independence, tol });
    }
    Ok((coords, out))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapOptions {
    /// Grid nodes per parameter axis.
    pub grid: usize,
    pub ode_step: f64,
    pub integrability_tol: f64,
    pub normality_tol: f64,
    /// Anchor of the integration (default `s0`).
    pub anchor: Option<Vec<f64>>,
    /// `B` at the anchor (default identity).
    pub b1: Option<Mat<f64>>,
    pub d: Option<ExprMatrix>,
}

impl Default for MapOptions {
    fn default() -> Self {
        MapOptions {
            grid: 21,
            ode_step: 1e-2,
            integrability_tol: 1e-8,
            normality_tol: 1e-6,
            anchor: None,
            b1: None,
            d: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MapNormalSolution<C> {
    pub coords: NormalCoordinates<C>,
    pub integrability: IntegrabilityReport,
    pub frame: FrameAlongMap,
    pub report: VerifyReport,
}

#[derive(Debug, Clone)]
pub enum MapOutcome<C> {
    Constructed(Box<MapNormalSolution<C>>),
    Obstructed(IntegrabilityReport),
}

/// Build normal coordinates along `β` if the integrability conditions hold
/// on the window grid, otherwise return the failing report.
pub fn normal_along_map<C: Connection + Clone>(conn: C, beta: &ParamMap, s0: &[f64], opts: &MapOptions) -> Result<MapOutcome<C>> {
    if beta.shape != conn.shape() {
        return Err(Error::Shape("map and connection live on different bundles".into()));
    }
    let chart = adapt_chart_to_map(beta, s0)?;
    let grid = chart.window.grid(opts.grid);
    let integrability = check_integrability(&conn, beta, &grid, opts.integrability_tol)?;
    if !integrability.pass() {
        return Ok(MapOutcome::Obstructed(integrability));
    }
    let anchor = opts.anchor.clone().unwrap_or_else(|| s0.to_vec());
    let b1 = opts.b1.clone().unwrap_or_else(|| Mat::identity(conn.shape().r));
    let tol = opts.integrability_tol * integrability.scale;
    let (coords, frame) = solve_frame_field(conn, &chart, &anchor, b1, opts.d.clone(), opts.grid, opts.ode_step, tol)?;
    let points = grid.iter().map(|s| beta.eval(s)).collect::<Result<Vec<_>>>()?;
    let report = verify_normal(&coords.conn, &coords, &points, opts.normality_tol);
    Ok(MapOutcome::Constructed(Box::new(MapNormalSolution { coords, integrability, frame, report })))
}
