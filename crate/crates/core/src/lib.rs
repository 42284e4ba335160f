//! Connections on fibre bundles in local coordinates: coefficient
//! transformation, curvature, and normal frames and coordinates at a point,
//! along paths and along maps.

pub mod error;
pub mod expr;
pub mod connection;
pub mod corpus;
pub mod geometry;
pub mod integrate;
pub mod linalg;
pub mod normal_map;
pub mod normal_path;
pub mod normal_point;
pub mod scalar;
pub mod vector_bundle;

pub use error::{Error, Result};
pub use connection::{
    check_flat, curvature, horizontal_lift, transform_coefficients, transform_coefficients_frame, BaseCurve, Connection,
    ConnectionCoefficients, CurvatureComponents, ExprCurve,
};
pub use expr::{parse, Expr};
pub use geometry::{BlockMatrix, BundleShape, CoordinateChange, CoordinateMap, DomainBox, ExprMatrix};
pub use linalg::Mat;
pub use normal_map::{normal_along_map, IntegrabilityReport, MapOptions, MapOutcome};
pub use normal_path::{normal_along_path, ParamMap, PathOptions};
pub use normal_point::{normal_at_point, verify_normal, PointNormalSpec, VerifyReport};
pub use scalar::{derive1, derive2, fd_check, Dual, HyperDual, Scalar, ScalarFn};
pub use vector_bundle::{check_vanishing_equivalence, normal_frame_along_base_path, two_from_three, ThreeIndexCoefficients};
