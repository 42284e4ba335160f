//! Command implementations. Each returns a finished [`Report`]; engine
//! failures become `error` reports, missing sections become input errors.

use serde_json::{json, Value};

use nframes_core::connection::{horizontal_lift, BaseCurve};
use nframes_core::geometry::ExprMatrix;
use nframes_core::normal_map::{normal_along_map, MapOptions, MapOutcome};
use nframes_core::normal_path::{normal_along_path, PathOptions};
use nframes_core::normal_point::{normal_at_point, verify_normal, PointNormalSpec};
use nframes_core::vector_bundle::{
    check_vanishing_equivalence, fibre_probes, normal_frame_along_base_path, ParallelFrame, ThreeIndexCoefficients,
};
use nframes_core::{check_flat, curvature, parse, CoordinateChange, Error, Mat};

use crate::config::{ConfigError, CurveConfig, EngineConfig};
use crate::{Cli, Command, Report, Status};

/// Upper bound on grid nodes used for whole-domain checks.
const GRID_BUDGET: f64 = 4096.0;

/// Nodes kept per emitted table (curves, frames).
const TABLE_ROWS: usize = 21;

pub fn execute(cli: &Cli, cfg: &EngineConfig) -> Report {
    let cmd = cli.command;
    let result = match cmd {
        Command::Curvature => curvature_cmd(cfg),
        Command::Flatness => flatness_cmd(cli, cfg),
        Command::NormalPoint => normal_point_cmd(cli, cfg),
        Command::NormalPath => normal_path_cmd(cli, cfg),
        Command::NormalMap => normal_map_cmd(cli, cfg),
        Command::VbNormal => vb_normal_cmd(cli, cfg),
        Command::Lift => lift_cmd(cli, cfg),
        Command::Verify => verify_cmd(cli, cfg),
    };
    match result {
        Ok(mut r) => {
            r.command = cmd.name().into();
            r
        }
        Err(Failure::Input(e)) => Report::input_error(cmd, &e),
        Err(Failure::Engine(e)) => {
            let mut r = Report::new(cmd, Status::Error);
            r.constructed = json!({ "error": e.to_string() });
            r
        }
    }
}

pub fn input_error_text(report: &Report) -> String {
    let field = report.constructed.get("field").and_then(Value::as_str).unwrap_or("?");
    let msg = report.constructed.get("message").and_then(Value::as_str).unwrap_or("");
    format!("{field}: {msg}")
}

enum Failure {
    Input(ConfigError),
    Engine(Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Input(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

type CmdResult = Result<Report, Failure>;

fn status(pass: bool) -> Status {
    if pass {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn rows(m: &Mat<f64>) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn expr_rows(m: &ExprMatrix) -> Vec<Vec<String>> {
    (0..m.rows).map(|i| (0..m.cols).map(|j| m.get(i, j).to_string()).collect()).collect()
}

/// Grid plus seeded random points, with the grid capped at
/// [`GRID_BUDGET`] nodes.
fn domain_samples(cfg: &EngineConfig) -> Vec<Vec<f64>> {
    let dim = cfg.domain.dim() as f64;
    let per_axis = (GRID_BUDGET.powf(1.0 / dim).floor() as usize).clamp(2, cfg.numerics.grid);
    cfg.domain.samples(per_axis, cfg.numerics.samples, cfg.seed)
}

fn thin<T: Clone>(v: &[T]) -> Vec<T> {
    if v.len() <= TABLE_ROWS {
        return v.to_vec();
    }
    (0..TABLE_ROWS).map(|i| v[i * (v.len() - 1) / (TABLE_ROWS - 1)].clone()).collect()
}

fn curvature_cmd(cfg: &EngineConfig) -> CmdResult {
    let (n, r) = (cfg.shape.n, cfg.shape.r);
    let mut worst = (0.0f64, cfg.point.p.clone());
    for p in domain_samples(cfg) {
        let m = curvature(&cfg.conn, &p)?.max_abs();
        if m > worst.0 {
            worst = (m, p);
        }
    }
    let at = curvature(&cfg.conn, &worst.1)?;
    let mut comps = Vec::new();
    for a in 0..r {
        for mu in 0..n {
            for nu in (mu + 1)..n {
                comps.push(json!({ "a": n + a + 1, "mu": mu + 1, "nu": nu + 1, "value": at.get(a, mu, nu) }));
            }
        }
    }
    let mut rep = Report::new(Command::Curvature, Status::Pass);
    rep.residuals.insert("curvature.max_abs".into(), worst.0);
    rep.constructed = json!({ "worst_point": worst.1, "components": comps });
    Ok(rep)
}

fn flatness_cmd(cli: &Cli, cfg: &EngineConfig) -> CmdResult {
    let tol = cli.tol.unwrap_or(cfg.tolerances.flatness);
    let samples = domain_samples(cfg);
    let f = check_flat(&cfg.conn, &samples, tol)?;
    let mut rep = Report::new(Command::Flatness, status(f.flat));
    rep.residuals.insert("curvature.max_abs".into(), f.max_residual);
    rep.constructed = json!({ "flat": f.flat, "worst_point": f.worst_point, "samples": samples.len(), "tol": tol });
    Ok(rep)
}

fn normal_point_cmd(cli: &Cli, cfg: &EngineConfig) -> CmdResult {
    let tol = cli.tol.unwrap_or(cfg.tolerances.point);
    let spec = PointNormalSpec::new(cfg.point.p.clone(), cfg.shape.r).with_gauge(cfg.point.g.clone(), cfg.point.g_mat.clone());
    let change = normal_at_point(&cfg.conn, &spec)?;
    let v = verify_normal(&cfg.conn, &change, &[spec.p.clone()], tol);
    let mut rep = Report::new(Command::NormalPoint, status(v.pass));
    rep.residuals.insert("normality".into(), v.max_residual);
    rep.constructed = json!({
        "kind": "point",
        "change": change.to_strings(),
        "points": [spec.p],
        "tol": tol,
    });
    Ok(rep)
}

fn normal_path_cmd(cli: &Cli, cfg: &EngineConfig) -> CmdResult {
    if cfg.paths.is_empty() {
        return Err(ConfigError::new("paths", "at least one path is required").into());
    }
    let tol = cli.tol.unwrap_or(cfg.tolerances.normality);
    let quad_step = cli.step.unwrap_or(cfg.numerics.quad_step);
    let mut rep = Report::new(Command::NormalPath, Status::Pass);
    let mut items = Vec::new();
    for (i, p) in cfg.paths.iter().enumerate() {
        let opts = PathOptions { quad_step, samples: cfg.numerics.grid.max(2), tol };
        let sol = normal_along_path(&cfg.conn, &p.beta, p.s0, p.frame.clone(), p.anchor, opts)?;
        let points = sol.sample_points()?;
        rep.residuals.insert(format!("paths[{i}].normality"), sol.report.max_residual);
        if !sol.report.pass {
            rep.status = Status::Fail;
        }
        let frame = match &sol.coords.frame {
            nframes_core::normal_path::FrameRule::Given(b) => expr_rows(b),
            nframes_core::normal_path::FrameRule::Transported { .. } => unreachable!("paths use a given frame"),
        };
        items.push(json!({
            "index": i,
            "s0": p.s0,
            "anchor": sol.coords.anchor[0],
            "frame": frame,
            "quad_step": quad_step,
            "window": [sol.coords.chart.window.lo[0], sol.coords.chart.window.hi[0]],
            "points": points,
        }));
    }
    rep.constructed = json!({ "kind": "path", "items": items, "tol": tol });
    Ok(rep)
}

fn normal_map_cmd(cli: &Cli, cfg: &EngineConfig) -> CmdResult {
    if cfg.maps.is_empty() {
        return Err(ConfigError::new("maps", "at least one map is required").into());
    }
    let tol = cli.tol.unwrap_or(cfg.tolerances.normality);
    let ode_step = cli.step.unwrap_or(cfg.numerics.ode_step);
    let mut rep = Report::new(Command::NormalMap, Status::Pass);
    let mut items = Vec::new();
    let mut obstructions = Vec::new();
    for (i, m) in cfg.maps.iter().enumerate() {
        let opts = MapOptions {
            grid: cfg.numerics.grid,
            ode_step,
            integrability_tol: cfg.tolerances.integrability,
            normality_tol: tol,
            anchor: m.anchor.clone(),
            b1: m.b1.clone(),
            d: None,
        };
        let at = format!("maps[{i}]");
        match normal_along_map(&cfg.conn, &m.beta, &m.s0, &opts)? {
            MapOutcome::Obstructed(ir) => {
                rep.residuals.insert(format!("{at}.integrability.curvature"), ir.curvature_residual);
                rep.residuals.insert(format!("{at}.integrability.frame"), ir.frame_residual);
                rep.status = Status::Obstructed;
                obstructions.push(json!({
                    "index": i,
                    "curvature_condition": { "residual": ir.curvature_residual, "pass": ir.pass_curvature, "worst_s": ir.worst_curvature },
                    "frame_condition": { "residual": ir.frame_residual, "pass": ir.pass_frame, "worst_s": ir.worst_frame },
                    "tol": ir.tol * ir.scale,
                }));
            }
            MapOutcome::Constructed(sol) => {
                rep.residuals.insert(format!("{at}.integrability.curvature"), sol.integrability.curvature_residual);
                rep.residuals.insert(format!("{at}.integrability.frame"), sol.integrability.frame_residual);
                rep.residuals.insert(format!("{at}.normality"), sol.report.max_residual);
                rep.residuals.insert(format!("{at}.path_independence"), sol.frame.path_independence);
                if !sol.report.pass && rep.status == Status::Pass {
                    rep.status = Status::Fail;
                }
                let grid = sol.coords.chart.window.grid(cfg.numerics.grid);
                let points = grid.iter().map(|s| m.beta.eval(s)).collect::<Result<Vec<_>, _>>()?;
                let b1 = match &sol.coords.frame {
                    nframes_core::normal_path::FrameRule::Transported { b1, .. } => rows(b1),
                    nframes_core::normal_path::FrameRule::Given(_) => unreachable!("maps transport their frame"),
                };
                items.push(json!({
                    "index": i,
                    "s0": m.s0,
                    "anchor": sol.coords.anchor,
                    "b1": b1,
                    "grid": cfg.numerics.grid,
                    "ode_step": ode_step,
                    "window": { "lo": sol.coords.chart.window.lo, "hi": sol.coords.chart.window.hi },
                    "points": points,
                }));
            }
        }
    }
    rep.constructed = json!({ "kind": "map", "items": items, "obstructions": obstructions, "tol": tol });
    Ok(rep)
}

fn need_vb(cfg: &EngineConfig) -> Result<(&ThreeIndexCoefficients, &CurveConfig), Failure> {
    let g3 = cfg.gamma3.as_ref().ok_or_else(|| ConfigError::new("gamma3", "missing"))?;
    let vb = cfg.vb.as_ref().ok_or_else(|| ConfigError::new("vb", "missing"))?;
    Ok((g3, vb))
}

fn steps_for(curve: &impl BaseCurve, h: f64) -> usize {
    let (a, b) = curve.interval();
    (((b - a) / h - 1e-9).ceil() as usize).max(2)
}

fn parallel_frame(cfg: &EngineConfig, step: f64) -> Result<ParallelFrame<ThreeIndexCoefficients, nframes_core::ExprCurve>, Failure> {
    let (g3, vb) = need_vb(cfg)?;
    let steps = steps_for(&vb.curve, step);
    Ok(normal_frame_along_base_path(g3.clone(), vb.curve.clone(), vb.b_start.clone(), steps)?)
}

fn vb_normal_cmd(cli: &Cli, cfg: &EngineConfig) -> CmdResult {
    let tol = cli.tol.unwrap_or(cfg.tolerances.frame);
    let step = cli.step.unwrap_or(cfg.numerics.ode_step);
    let pf = parallel_frame(cfg, step)?;
    let pass = pf.report.three_index_residual < tol && pf.report.two_index_residual < tol;
    let mut rep = Report::new(Command::VbNormal, status(pass));
    rep.residuals.insert("frame.three_index".into(), pf.report.three_index_residual);
    rep.residuals.insert("frame.two_index".into(), pf.report.two_index_residual);
    rep.residuals.insert("frame.min_abs_det".into(), pf.report.min_abs_det);
    let g3 = &pf.g3;
    if cfg.shape.n == 1 && g3.affine.is_none() {
        let bases: Vec<Vec<f64>> = thin(&pf.s).iter().map(|&s| pf.curve.point(s)).collect::<Result<_, _>>()?;
        let probes = fibre_probes(cfg.shape.r, cfg.shape.r + 1);
        let identity = ExprMatrix::identity(1);
        let eq = check_vanishing_equivalence(g3, &bases, &probes, &pf, &identity, tol)?;
        rep.residuals.insert("equivalence.two_index".into(), eq.max_two_index);
        rep.residuals.insert("equivalence.three_index".into(), eq.max_three_index);
        rep.residuals.insert("equivalence.violations".into(), eq.violations as f64);
        if !eq.holds {
            rep.status = Status::Fail;
        }
    }
    let s = thin(&pf.s);
    let b: Vec<Vec<Vec<f64>>> = thin(&pf.b).iter().map(rows).collect();
    rep.constructed = json!({
        "kind": "vb-frame",
        "ode_step": step,
        "b_start": rows(&pf.b_start),
        "s": s,
        "b": b,
        "tol": tol,
    });
    Ok(rep)
}

fn lift_cmd(cli: &Cli, cfg: &EngineConfig) -> CmdResult {
    let lc = cfg.lift.as_ref().ok_or_else(|| ConfigError::new("lift", "missing"))?;
    let step = cli.step.unwrap_or(cfg.numerics.ode_step);
    let steps = steps_for(&lc.curve, step);
    let lift = horizontal_lift(&cfg.conn, &lc.curve, &lc.start, steps, Some(&cfg.domain))?;
    let mut rep = Report::new(Command::Lift, status(!lift.exited));
    let (a, b) = lc.curve.interval();
    let (xa, xb) = (lc.curve.point(a)?, lc.curve.point(b)?);
    let closed = xa.iter().zip(&xb).all(|(p, q)| (p - q).abs() < 1e-12);
    let n = cfg.shape.n;
    if closed && !lift.exited {
        let defect = lift.last()[n..].iter().zip(&lc.start).map(|(x, y)| x - y).collect::<Vec<_>>();
        rep.residuals.insert("holonomy.defect".into(), defect.iter().map(|d| d.abs()).fold(0.0, f64::max));
    }
    rep.constructed = json!({
        "kind": "lift",
        "steps": steps,
        "exited": lift.exited,
        "s": thin(&lift.s),
        "points": thin(&lift.points),
        "end": lift.last(),
    });
    Ok(rep)
}

fn field<'a>(v: &'a Value, path: &str) -> Result<&'a Value, Failure> {
    let mut cur = v;
    for key in path.split('.') {
        cur = cur.get(key).ok_or_else(|| ConfigError::new(format!("--report: {path}"), "missing"))?;
    }
    Ok(cur)
}

fn f64_of(v: &Value, path: &str) -> Result<f64, Failure> {
    v.as_f64().ok_or_else(|| ConfigError::new(format!("--report: {path}"), "expected a number").into())
}

fn vec_of(v: &Value, path: &str) -> Result<Vec<f64>, Failure> {
    let arr = v.as_array().ok_or_else(|| ConfigError::new(format!("--report: {path}"), "expected an array"))?;
    arr.iter().map(|x| f64_of(x, path)).collect()
}

fn points_of(v: &Value, path: &str) -> Result<Vec<Vec<f64>>, Failure> {
    let arr = v.as_array().ok_or_else(|| ConfigError::new(format!("--report: {path}"), "expected an array"))?;
    arr.iter().map(|p| vec_of(p, path)).collect()
}

fn index_of(v: &Value, path: &str, len: usize) -> Result<usize, Failure> {
    let i = v.as_u64().ok_or_else(|| ConfigError::new(format!("--report: {path}"), "expected an index"))? as usize;
    if i >= len {
        return Err(ConfigError::new(format!("--report: {path}"), format!("index {i} not present in the config")).into());
    }
    Ok(i)
}

fn verify_cmd(cli: &Cli, cfg: &EngineConfig) -> CmdResult {
    let path = cli.report.as_ref().ok_or_else(|| ConfigError::new("--report", "required for verify"))?;
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new("--report", format!("{}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| ConfigError::new("--report", e))?;
    let constructed = field(&doc, "constructed")?;
    let kind = field(constructed, "kind")?.as_str().unwrap_or_default().to_string();
    let tol_of = |default: f64| -> Result<f64, Failure> {
        match (cli.tol, constructed.get("tol")) {
            (Some(t), _) => Ok(t),
            (None, Some(t)) => f64_of(t, "constructed.tol"),
            (None, None) => Ok(default),
        }
    };
    let mut rep = Report::new(Command::Verify, Status::Pass);
    let record = |rep: &mut Report, key: String, residual: f64, pass: bool| {
        rep.residuals.insert(key, residual);
        if !pass {
            rep.status = Status::Fail;
        }
    };
    match kind.as_str() {
        "point" => {
            let tol = tol_of(cfg.tolerances.point)?;
            let comps = field(constructed, "change")?
                .as_array()
                .ok_or_else(|| ConfigError::new("--report: constructed.change", "expected strings"))?;
            let texts: Vec<&str> = comps.iter().map(|c| c.as_str().unwrap_or("")).collect();
            let change = CoordinateChange::parse(cfg.shape, &texts).map_err(|e| ConfigError::new("--report: constructed.change", e))?;
            let points = points_of(field(constructed, "points")?, "constructed.points")?;
            let v = verify_normal(&cfg.conn, &change, &points, tol);
            record(&mut rep, "point.normality".into(), v.max_residual, v.pass);
        }
        "path" => {
            let tol = tol_of(cfg.tolerances.normality)?;
            for (j, item) in field(constructed, "items")?.as_array().into_iter().flatten().enumerate() {
                let i = index_of(field(item, "index")?, "constructed.items.index", cfg.paths.len())?;
                let p = &cfg.paths[i];
                let rows_v = field(item, "frame")?;
                let frame_rows: Vec<Vec<String>> = serde_json::from_value(rows_v.clone())
                    .map_err(|e| ConfigError::new("--report: constructed.items.frame", e))?;
                let vars = nframes_core::expr::param_vars(1);
                let entries = frame_rows
                    .iter()
                    .flatten()
                    .map(|t| parse(t, &vars))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| ConfigError::new("--report: constructed.items.frame", e))?;
                let frame = ExprMatrix::new(frame_rows.len(), frame_rows.first().map_or(0, Vec::len), entries)?;
                let s0 = f64_of(field(item, "s0")?, "constructed.items.s0")?;
                let anchor = f64_of(field(item, "anchor")?, "constructed.items.anchor")?;
                let quad_step = f64_of(field(item, "quad_step")?, "constructed.items.quad_step")?;
                let opts = PathOptions { quad_step, samples: 2, tol };
                let sol = normal_along_path(&cfg.conn, &p.beta, s0, Some(frame), Some(anchor), opts)?;
                let points = points_of(field(item, "points")?, "constructed.items.points")?;
                let v = verify_normal(&cfg.conn, &sol.coords, &points, tol);
                record(&mut rep, format!("items[{j}].normality"), v.max_residual, v.pass);
            }
        }
        "map" => {
            let tol = tol_of(cfg.tolerances.normality)?;
            for (j, item) in field(constructed, "items")?.as_array().into_iter().flatten().enumerate() {
                let i = index_of(field(item, "index")?, "constructed.items.index", cfg.maps.len())?;
                let m = &cfg.maps[i];
                let b1 = points_of(field(item, "b1")?, "constructed.items.b1")?;
                let opts = MapOptions {
                    grid: field(item, "grid")?.as_u64().unwrap_or(cfg.numerics.grid as u64) as usize,
                    ode_step: f64_of(field(item, "ode_step")?, "constructed.items.ode_step")?,
                    integrability_tol: cfg.tolerances.integrability,
                    normality_tol: tol,
                    anchor: Some(vec_of(field(item, "anchor")?, "constructed.items.anchor")?),
                    b1: Some(Mat::from_rows(&b1)),
                    d: None,
                };
                let s0 = vec_of(field(item, "s0")?, "constructed.items.s0")?;
                let points = points_of(field(item, "points")?, "constructed.items.points")?;
                match normal_along_map(&cfg.conn, &m.beta, &s0, &opts)? {
                    MapOutcome::Constructed(sol) => {
                        let v = verify_normal(&cfg.conn, &sol.coords, &points, tol);
                        record(&mut rep, format!("items[{j}].normality"), v.max_residual, v.pass);
                    }
                    MapOutcome::Obstructed(ir) => {
                        record(&mut rep, format!("items[{j}].integrability.curvature"), ir.curvature_residual, false);
                    }
                }
            }
        }
        "vb-frame" => {
            let tol = tol_of(cfg.tolerances.frame)?;
            let step = f64_of(field(constructed, "ode_step")?, "constructed.ode_step")?;
            let pf = parallel_frame(cfg, step)?;
            let s = vec_of(field(constructed, "s")?, "constructed.s")?;
            let b = field(constructed, "b")?.as_array().cloned().unwrap_or_default();
            let mut diff = 0.0f64;
            let mut residual = 0.0f64;
            for (sv, bv) in s.iter().zip(&b) {
                let stored = Mat::from_rows(&points_of(bv, "constructed.b")?);
                diff = diff.max(pf.frame_at(*sv)?.sub(&stored).max_abs());
                residual = residual.max(pf.contracted_residual(*sv)?.max_abs());
            }
            record(&mut rep, "frame.reproduction".into(), diff, diff < tol);
            record(&mut rep, "frame.three_index".into(), residual, residual < tol);
        }
        other => {
            return Err(ConfigError::new("--report: constructed.kind", format!("nothing to verify for `{other}`")).into());
        }
    }
    if rep.residuals.is_empty() {
        rep.status = Status::Fail;
    }
    rep.constructed = json!({ "kind": kind, "verified": rep.residuals.len() });
    Ok(rep)
}
