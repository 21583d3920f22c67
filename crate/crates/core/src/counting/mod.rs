//! Zero counting in complex windows: argument principle, Jensen bounds, deviation-set
//! counts and power-law exponent fits.

mod contour;
mod window;

pub use contour::{
    argument_principle_zeros, jensen_disk_bound, jensen_rect_bound, ComplexWindow, HolomorphicSampler, CONTOUR_FLOOR,
    JENSEN_RADIUS_RATIO, WINDING_TOLERANCE,
};
pub use window::{count_rows_csv, deviation_exponent, window_count, CountRow, ExponentFit, Side};

#[derive(Debug, thiserror::Error)]
pub enum CountError {
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("function is not finite on the contour")]
    NonFinite,
    #[error("suspected zero on the contour (|f| ranges over [{min:e}, {max:e}])")]
    ZeroOnContour { min: f64, max: f64 },
    #[error("winding number {winding} is not within 0.01 of an integer at {points} points")]
    NonIntegerWinding { winding: f64, points: usize },
    #[error("negative winding {0}: the function has poles inside")]
    NotHolomorphic(f64),
    #[error("|f(z0)| = {0:e} is below the floor 1e-300")]
    CentreZero(f64),
    #[error("spectrum has ħ = {spectrum}, but {requested} was requested")]
    HbarMismatch { spectrum: f64, requested: f64 },
}
