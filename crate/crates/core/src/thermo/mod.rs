//! Pressure, entropy and rate functions on finite subshifts with roofs.

mod cycles;
mod ld;
mod model;
mod perron;
mod pressure;
mod rate;

pub use cycles::{q_extremes, stable_norm};
pub use ld::{abramov_timechange, birkhoff_ld_montecarlo, AbramovMeasure, AbramovReport, LdEstimate};
pub use model::{Edge, MarkovModel};
pub use perron::{Equilibrium, Perron};
pub use pressure::{
    base_pressure, bowen_root, equilibrium_state, periodic_orbits, pressure_orbit_sum, pressure_transfer,
    topological_entropy, OrbitSample, PressureCurve, DEFAULT_BETA_MAX, DEFAULT_BETA_MIN, DEFAULT_BETA_POINTS,
};
pub use rate::{
    legendre_rate, legendre_rate_on, slope_extremes, RateFunction, RateValue, DEFAULT_ALPHA_POINTS, SLOPE_CONVERGENCE,
};

#[derive(Debug, thiserror::Error)]
pub enum ThermoError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("adjacency matrix is not irreducible")]
    NotIrreducible,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("Bowen equation not bracketed on [{lo}, {hi}] (g = {glo}, {ghi})")]
    Bracketing { lo: f64, hi: f64, glo: f64, ghi: f64 },
    #[error("no orbits with length at most {0}")]
    NoOrbits(f64),
    #[error("pressure curve not convex (defect {0:e})")]
    NotConvex(f64),
    #[error("beta grid too narrow: {side} slope differences {diffs:?} not below 1e-6")]
    GridTooNarrow { side: &'static str, diffs: Vec<f64> },
}
