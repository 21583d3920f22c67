//! Geodesic flow on `PSL(2, ℝ)`, Birkhoff averages and the averaging corrector `g_T`.

mod average;
mod flow;

pub use average::{
    averaging_corrector, averaging_corrector_variable, birkhoff_average, cohomology_defect, cohomology_residual,
    simpson, time_change, variable_identity, VariableIdentity, DEFAULT_QUAD_STEP,
};
pub use flow::{geodesic_flow, tanh_primitive, trajectory_csv, FlowPoint, Mat2, Observable, IDENTITY, MAX_FLOW_TIME};

#[derive(Debug, thiserror::Error)]
pub enum FlowError {
    #[error("invalid flow point: {0}")]
    InvalidPoint(String),
    #[error("flow time {0} exceeds the supported range ±600")]
    FlowTime(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("time-change density is {value} at s = {s}; it must be positive")]
    NonPositive { s: f64, value: f64 },
}
