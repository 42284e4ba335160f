//! TOML configuration: raw serde shapes and validation into engine types.
//! Validation errors carry the path of the offending field.

use std::fmt;

use nframes_core::connection::ExprCurve;
use nframes_core::expr::{bundle_vars, param_vars};
use nframes_core::vector_bundle::ThreeIndexCoefficients;
use nframes_core::{parse, BundleShape, ConnectionCoefficients, DomainBox, Expr, ExprMatrix, Mat, ParamMap};
use serde::Deserialize;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigError { path: path.into(), message: message.to_string() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigError {}

type CResult<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawBundle {
    pub n: usize,
    pub r: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGamma3 {
    /// `matrices[μ][a][b]` is `Γ^a_{bμ}` over `u1..un`.
    pub matrices: Vec<Vec<Vec<String>>>,
    pub affine: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPath {
    pub components: Vec<String>,
    pub domain: RawBox,
    pub s0: f64,
    /// `B^a_b(s1)`; identity if absent.
    pub frame: Option<Vec<Vec<String>>>,
    pub anchor: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMap {
    pub components: Vec<String>,
    pub domain: RawBox,
    pub s0: Vec<f64>,
    pub anchor: Option<Vec<f64>>,
    pub b1: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPoint {
    pub p: Option<Vec<f64>>,
    pub g: Option<Vec<f64>>,
    pub g_mat: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCurve {
    /// Base curve components over `s1`.
    pub curve: Vec<String>,
    pub begin: f64,
    pub end: f64,
    /// Fibre start point of a lift.
    pub start: Option<Vec<f64>>,
    /// Initial frame of a parallel vector-bundle frame.
    pub b_start: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub point: f64,
    pub normality: f64,
    pub flatness: f64,
    pub integrability: f64,
    pub frame: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { point: 1e-10, normality: 1e-6, flatness: 1e-9, integrability: 1e-8, frame: 1e-7 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub ode_step: f64,
    pub grid: usize,
    pub quad_step: f64,
    /// Random samples added to grid nodes for pointwise checks.
    pub samples: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics { ode_step: 1e-2, grid: 21, quad_step: 1e-3, samples: 200 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub bundle: Option<RawBundle>,
    pub domain: Option<RawBox>,
    pub gamma: Option<Vec<Vec<String>>>,
    pub gamma3: Option<RawGamma3>,
    #[serde(default)]
    pub paths: Vec<RawPath>,
    #[serde(default)]
    pub maps: Vec<RawMap>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub seed: u64,
    pub point: Option<RawPoint>,
    pub lift: Option<RawCurve>,
    pub vb: Option<RawCurve>,
}

#[derive(Debug, Clone)]
pub struct PathConfig {
    pub beta: ParamMap,
    pub s0: f64,
    pub frame: Option<ExprMatrix>,
    pub anchor: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct MapConfig {
    pub beta: ParamMap,
    pub s0: Vec<f64>,
    pub anchor: Option<Vec<f64>>,
    pub b1: Option<Mat<f64>>,
}

#[derive(Debug, Clone)]
pub struct PointConfig {
    pub p: Vec<f64>,
    pub g: Vec<f64>,
    pub g_mat: Mat<f64>,
}

#[derive(Debug, Clone)]
pub struct CurveConfig {
    pub curve: ExprCurve,
    pub start: Vec<f64>,
    pub b_start: Mat<f64>,
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub shape: BundleShape,
    pub domain: DomainBox,
    pub conn: ConnectionCoefficients,
    pub gamma3: Option<ThreeIndexCoefficients>,
    pub paths: Vec<PathConfig>,
    pub maps: Vec<MapConfig>,
    pub tolerances: Tolerances,
    pub numerics: Numerics,
    pub seed: u64,
    pub point: PointConfig,
    pub lift: Option<CurveConfig>,
    pub vb: Option<CurveConfig>,
}

fn expr(path: &str, text: &str, vars: &[String]) -> CResult<Expr> {
    parse(text, vars).map_err(|e| ConfigError::new(path, e))
}

fn expr_matrix(path: &str, rows: &[Vec<String>], nrows: usize, ncols: usize, vars: &[String]) -> CResult<ExprMatrix> {
    if rows.len() != nrows {
        return Err(ConfigError::new(path, format!("expected {nrows} rows, found {}", rows.len())));
    }
    let mut entries = Vec::with_capacity(nrows * ncols);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(ConfigError::new(format!("{path}[{i}]"), format!("expected {ncols} entries, found {}", row.len())));
        }
        for (j, t) in row.iter().enumerate() {
            entries.push(expr(&format!("{path}[{i}][{j}]"), t, vars)?);
        }
    }
    ExprMatrix::new(nrows, ncols, entries).map_err(|e| ConfigError::new(path, e))
}

fn matrix(path: &str, rows: &[Vec<f64>], size: usize) -> CResult<Mat<f64>> {
    if rows.len() != size || rows.iter().any(|r| r.len() != size) {
        return Err(ConfigError::new(path, format!("expected a {size}x{size} matrix")));
    }
    let m = Mat::from_rows(rows);
    if m.det().abs() <= nframes_core::geometry::DET_TOL {
        return Err(ConfigError::new(path, "matrix is singular"));
    }
    Ok(m)
}

fn domain_box(path: &str, raw: &RawBox, dim: usize) -> CResult<DomainBox> {
    if raw.lo.len() != dim || raw.hi.len() != dim {
        return Err(ConfigError::new(path, format!("expected lo and hi of length {dim}")));
    }
    DomainBox::new(raw.lo.clone(), raw.hi.clone()).map_err(|e| ConfigError::new(path, e))
}

fn vector(path: &str, v: &[f64], len: usize) -> CResult<Vec<f64>> {
    if v.len() != len {
        return Err(ConfigError::new(path, format!("expected {len} values, found {}", v.len())));
    }
    Ok(v.to_vec())
}

fn positive(path: &str, x: f64) -> CResult<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(path, "must be positive"))
    }
}

fn curve(path: &str, raw: &RawCurve, shape: BundleShape) -> CResult<CurveConfig> {
    if raw.curve.len() != shape.n {
        return Err(ConfigError::new(format!("{path}.curve"), format!("expected {} components", shape.n)));
    }
    let vars = param_vars(1);
    for (i, t) in raw.curve.iter().enumerate() {
        expr(&format!("{path}.curve[{i}]"), t, &vars)?;
    }
    if !(raw.begin < raw.end) {
        return Err(ConfigError::new(format!("{path}.end"), "must exceed begin"));
    }
    let texts: Vec<&str> = raw.curve.iter().map(String::as_str).collect();
    let curve = ExprCurve::parse(&texts, raw.begin, raw.end).map_err(|e| ConfigError::new(format!("{path}.curve"), e))?;
    let start = match &raw.start {
        Some(s) => vector(&format!("{path}.start"), s, shape.r)?,
        None => vec![0.0; shape.r],
    };
    let b_start = match &raw.b_start {
        Some(b) => matrix(&format!("{path}.b_start"), b, shape.r)?,
        None => Mat::identity(shape.r),
    };
    Ok(CurveConfig { curve, start, b_start })
}

impl EngineConfig {
    pub fn from_toml(text: &str) -> CResult<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let loc = e.span().map(|s| {
                let line = text[..s.start].matches('\n').count() + 1;
                format!(" (line {line})")
            });
            ConfigError::new("config", format!("{msg}{}", loc.unwrap_or_default()))
        })?;
        Self::from_raw(&raw)
    }

    pub fn from_raw(raw: &RawConfig) -> CResult<Self> {
        let b = raw.bundle.as_ref().ok_or_else(|| ConfigError::new("bundle", "missing"))?;
        let shape = BundleShape::new(b.n, b.r).map_err(|e| ConfigError::new("bundle", e))?;
        let (n, r) = (shape.n, shape.r);
        let domain = domain_box("domain", raw.domain.as_ref().ok_or_else(|| ConfigError::new("domain", "missing"))?, n + r)?;
        let vars = bundle_vars(n + r);

        let gamma3 = match &raw.gamma3 {
            Some(g3) => {
                if g3.matrices.len() != n {
                    return Err(ConfigError::new("gamma3.matrices", format!("expected {n} matrices")));
                }
                let base = bundle_vars(n);
                let mats = g3
                    .matrices
                    .iter()
                    .enumerate()
                    .map(|(mu, m)| expr_matrix(&format!("gamma3.matrices[{mu}]"), m, r, r, &base))
                    .collect::<CResult<Vec<_>>>()?;
                let affine = g3.affine.as_ref().map(|a| expr_matrix("gamma3.affine", a, r, n, &base)).transpose()?;
                Some(
                    ThreeIndexCoefficients::new(shape, mats, affine, domain.clone())
                        .map_err(|e| ConfigError::new("gamma3", e))?,
                )
            }
            None => None,
        };
        let conn = match (&raw.gamma, &gamma3) {
            (Some(rows), _) => {
                let entries = expr_matrix("gamma", rows, r, n, &vars)?;
                ConnectionCoefficients::new(shape, entries, domain.clone()).map_err(|e| ConfigError::new("gamma", e))?
            }
            (None, Some(g3)) => nframes_core::two_from_three(g3),
            (None, None) => return Err(ConfigError::new("gamma", "missing")),
        };

        let mut paths = Vec::new();
        for (i, p) in raw.paths.iter().enumerate() {
            let at = format!("paths[{i}]");
            let dom = domain_box(&format!("{at}.domain"), &p.domain, 1)?;
            let beta = param_map(&at, &p.components, shape, dom.clone())?;
            if !dom.contains(&[p.s0]) {
                return Err(ConfigError::new(format!("{at}.s0"), "outside the parameter domain"));
            }
            if let Some(a) = p.anchor.filter(|a| !dom.contains(&[*a])) {
                return Err(ConfigError::new(format!("{at}.anchor"), format!("{a} is outside the parameter domain")));
            }
            let frame = p.frame.as_ref().map(|f| expr_matrix(&format!("{at}.frame"), f, r, r, &param_vars(1))).transpose()?;
            paths.push(PathConfig { beta, s0: p.s0, frame, anchor: p.anchor });
        }

        let mut maps = Vec::new();
        for (i, m) in raw.maps.iter().enumerate() {
            let at = format!("maps[{i}]");
            let k = m.s0.len();
            if k == 0 {
                return Err(ConfigError::new(format!("{at}.s0"), "needs at least one parameter"));
            }
            let dom = domain_box(&format!("{at}.domain"), &m.domain, k)?;
            let beta = param_map(&at, &m.components, shape, dom.clone())?;
            if !dom.contains(&m.s0) {
                return Err(ConfigError::new(format!("{at}.s0"), "outside the parameter domain"));
            }
            let anchor = m.anchor.as_ref().map(|a| vector(&format!("{at}.anchor"), a, k)).transpose()?;
            let b1 = m.b1.as_ref().map(|b| matrix(&format!("{at}.b1"), b, r)).transpose()?;
            maps.push(MapConfig { beta, s0: m.s0.clone(), anchor, b1 });
        }

        let t = raw.tolerances;
        for (name, v) in [
            ("point", t.point),
            ("normality", t.normality),
            ("flatness", t.flatness),
            ("integrability", t.integrability),
            ("frame", t.frame),
        ] {
            positive(&format!("tolerances.{name}"), v)?;
        }
        let num = raw.numerics;
        positive("numerics.ode_step", num.ode_step)?;
        positive("numerics.quad_step", num.quad_step)?;
        if num.grid < 2 {
            return Err(ConfigError::new("numerics.grid", "must be at least 2"));
        }

        let point = {
            let rp = raw.point.as_ref();
            let p = match rp.and_then(|p| p.p.as_ref()) {
                Some(p) => vector("point.p", p, n + r)?,
                None => domain.center(),
            };
            if !domain.contains(&p) {
                return Err(ConfigError::new("point.p", "outside the domain"));
            }
            let g = match rp.and_then(|p| p.g.as_ref()) {
                Some(g) => vector("point.g", g, r)?,
                None => vec![0.0; r],
            };
            let g_mat = match rp.and_then(|p| p.g_mat.as_ref()) {
                Some(m) => matrix("point.g_mat", m, r)?,
                None => Mat::identity(r),
            };
            PointConfig { p, g, g_mat }
        };
        let lift = raw.lift.as_ref().map(|c| curve("lift", c, shape)).transpose()?;
        let vb = raw.vb.as_ref().map(|c| curve("vb", c, shape)).transpose()?;

        Ok(EngineConfig {
            shape,
            domain,
            conn,
            gamma3,
            paths,
            maps,
            tolerances: t,
            numerics: num,
            seed: raw.seed,
            point,
            lift,
            vb,
        })
    }
}

fn param_map(at: &str, components: &[String], shape: BundleShape, dom: DomainBox) -> CResult<ParamMap> {
    if components.len() != shape.dim() {
        return Err(ConfigError::new(
            format!("{at}.components"),
            format!("expected {} components, found {}", shape.dim(), components.len()),
        ));
    }
    let vars = param_vars(dom.dim());
    let comps = components
        .iter()
        .enumerate()
        .map(|(i, t)| expr(&format!("{at}.components[{i}]"), t, &vars))
        .collect::<CResult<Vec<_>>>()?;
    ParamMap::new(shape, dom, comps).map_err(|e| ConfigError::new(format!("{at}.components"), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
        [bundle]
        n = 2
        r = 1
        [domain]
        lo = [-1.0, -1.0, -1.0]
        hi = [1.0, 1.0, 1.0]
    "#;

    #[test]
    fn missing_gamma_reports_field() {
        let err = EngineConfig::from_toml(BASIC).unwrap_err();
        assert_eq!(err.path, "gamma");
    }

    #[test]
    fn short_row_reports_index() {
        let err = EngineConfig::from_toml(&format!("gamma = [[\"0\"]]\n{BASIC}")).unwrap_err();
        assert_eq!(err.path, "gamma[0]");
    }

    #[test]
    fn bad_expression_reports_entry() {
        let err = EngineConfig::from_toml(&format!("gamma = [[\"0\", \"u1 +\"]]\n{BASIC}")).unwrap_err();
        assert_eq!(err.path, "gamma[0][1]");
        assert!(err.message.contains("offset 4"), "{err}");
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = EngineConfig::from_toml(&format!("gamma = [[\"0\", \"u1\"]]\n{BASIC}")).unwrap();
        assert_eq!(cfg.point.p, vec![0.0, 0.0, 0.0]);
        assert_eq!(cfg.numerics.grid, 21);
        assert_eq!(cfg.tolerances.point, 1e-10);
    }
}
