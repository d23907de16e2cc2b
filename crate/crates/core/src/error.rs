use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("invalid configuration{}: {message}", location(*line, key))]
    InvalidConfig {
        line: Option<usize>,
        key: Option<String>,
        message: String,
    },

    #[error("initial support function is not strictly convex: min principal radius {min_radius:.3e} at node {node} (floor {floor:.3e})")]
    NonConvexInput {
        node: usize,
        min_radius: f64,
        floor: f64,
    },

    #[error("lost strict convexity at t = {t}: min principal radius {min_radius:.3e} at node {node} (floor {floor:.3e})")]
    LossOfConvexity {
        t: f64,
        node: usize,
        min_radius: f64,
        floor: f64,
    },

    #[error("fields live on different grids ({left} vs {right} nodes)")]
    GridMismatch { left: usize, right: usize },

    #[error("external global term {phi} is below the mean speed {mean_speed} at t = {t}")]
    ConstraintViolation { t: f64, phi: f64, mean_speed: f64 },

    #[error("constraint has vanishing gradient at (a, b) = ({a}, {b})")]
    DegenerateConstraint { a: f64, b: f64 },

    #[error("constraint projection failed at t = {t}: {reason}")]
    ProjectionFailure { t: f64, reason: String },

    #[error("trajectory has no records")]
    EmptyTrajectory,

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn location(line: Option<usize>, key: &Option<String>) -> String {
    match (line, key) {
        (Some(l), Some(k)) => format!(" (line {l}, key `{k}`)"),
        (Some(l), None) => format!(" (line {l})"),
        (None, Some(k)) => format!(" (key `{k}`)"),
        (None, None) => String::new(),
    }
}

impl FlowError {
    pub(crate) fn config(message: impl Into<String>) -> Self {
        FlowError::InvalidConfig {
            line: None,
            key: None,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FlowError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = FlowError> = std::result::Result<T, E>;
