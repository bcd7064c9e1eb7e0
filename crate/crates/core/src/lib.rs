//! Boundary geometry, invariant-distance bounds and estimator checks on
//! strongly pseudoconvex model domains.

pub mod affine;
pub mod ball;
pub mod bounds;
pub mod curve;
pub mod cvec;
pub mod domain;
pub mod error;
pub mod estimators;
pub mod geodesics;
pub mod harness;
pub mod numeric;
pub mod transforms;

pub use cvec::{CVec, PointC, VectorC};
pub use domain::{BoundaryFrame, DomainSpec, Family};
pub use error::{Error, Result};
