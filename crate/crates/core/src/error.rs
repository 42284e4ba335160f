use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: expected {expected}")]
    Syntax { offset: usize, expected: String },

    #[error("unknown variable `{name}` at offset {offset}")]
    UnknownVariable { name: String, offset: usize },

    #[error("unknown function `{name}` at offset {offset}")]
    UnknownFunction { name: String, offset: usize },

    #[error("{kind} in `{expr}` (bytes {start}..{end}) at point {point:?}")]
    Domain { kind: String, expr: String, start: usize, end: usize, point: Vec<f64> },

    #[error("matrix is singular or ill-conditioned (condition ~ {condition:e})")]
    Singular { condition: f64 },

    #[error("degenerate coordinate change at {point:?} (condition ~ {condition:e})")]
    DegenerateChange { point: Vec<f64>, condition: f64 },

    #[error("change does not respect the fibre structure: d(new u{mu})/d(u{a}) = {value:e}")]
    FibreStructure { mu: usize, a: usize, value: f64 },

    #[error("block field varies along the fibre (residual {residual:e})")]
    FibreConstancy { residual: f64 },

    #[error("tangent is vertical at s = {s:?}")]
    VerticalTangent { s: Vec<f64> },

    #[error("base rows of the parameter jacobian have rank {rank} < {k} at s = {s:?}")]
    RankDeficient { s: Vec<f64>, rank: usize, k: usize },

    #[error("could not invert the parameter map at {point:?} (residual {residual:e})")]
    Inversion { point: Vec<f64>, residual: f64 },

    #[error("quadrature window is empty")]
    EmptyWindow,

    #[error("frame determinant collapsed to {det:e} at s = {s:?}")]
    DetCollapse { s: Vec<f64>, det: f64 },

    #[error("frame field is path dependent (residual {residual:e} > {tol:e})")]
    PathDependence { residual: f64, tol: f64 },

    #[error("only {found} independent fibre samples over {base:?}, need {needed}")]
    InsufficientFibreSamples { base: Vec<f64>, found: usize, needed: usize },

    #[error("point {point:?} lies outside the domain")]
    OutOfDomain { point: Vec<f64> },

    #[error("shape mismatch: {0}")]
    Shape(String),
}
