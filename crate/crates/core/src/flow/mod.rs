//! Time integration of the support-function flow.

pub mod constraint;
pub mod engine;
pub mod speed;

pub use constraint::{ConstraintFunction, ConstraintSpec, GeometricMean, PhiSchedule, PhiTable, ScaledMeanSpeed};
pub use engine::{speed_field, FlowEngine, FlowState, GlobalTerm, SpeedField};
pub use speed::{admissibility_probe, ExpMinusOne, LinearPlusCubic, Power, ProbeReport, SpeedProfile, SpeedSpec};
