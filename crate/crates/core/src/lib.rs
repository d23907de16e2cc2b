//! Constrained curvature flows of convex bodies, evolved through their
//! support functions on `S^1` and `S^2`.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod export;
pub mod flow;
pub mod geometry;
pub mod grid;
pub mod run;
pub mod shapes;
pub mod verify;
pub mod volumes;

pub use error::{FlowError, Result};
pub use config::{parse_config, render, FlowConfig};
pub use grid::{Point, ScalarField, SphereGrid};
pub use run::{run, Outcome, Trajectory};
pub use shapes::{make_shape, ShapeSpec};
