//! The arithmetic group `Γ(A, p)`: enumeration, conjugacy classes, the length spectrum
//! `log x_m` with twist weights, and the trace sums built on it.

mod group;
mod moment;
mod spectrum;
mod trace;

pub use group::{
    chebyshev, classify_conjugacy, enumerate_trace, norm_form_residual, small_conjugators, ConjugacyPartition,
    GroupElement, GroupParams, Quad,
};
pub use moment::{
    oscillatory_window, s_alpha, s_alpha_geodesic, s_alpha_sinh, s_alpha_terms, second_moment_split,
    windowed_second_moment, SecondMoment, C_SPLIT, MOMENT_STEP,
};
pub use spectrum::{
    build_length_spectrum, xm, EntryStatus, Geodesic, GeodesicList, LengthClass, LengthEntry, WeightMode,
    WeightedLengthSpectrum, XmValue, CONJUGATOR_MAX_HALF_TRACE, SYNTHETIC_DELTA,
};
pub use trace::{
    fejer_k, fejer_khat, fejer_test_function, gaussian_trace_sides, kalpha_hat, lengths_up_to, q3arithm_bound,
    q3arithm_witness, r_search, tail_bounds, weyl_surrogate, TailParts, TraceSides, TraceWindowParams,
    R_SEARCH_MAX_LENGTHS, TAIL_CONSTANT, TAIL_DOMINANCE,
};

#[derive(Debug, thiserror::Error)]
pub enum ArithError {
    #[error("invalid group parameters: {0}")]
    InvalidGroup(String),
    #[error("{y:?} is not in the group (norm-form residual {residual})")]
    NotInGroup { y: Quad, residual: i128 },
    #[error("elements with half-traces {0} and {1} cannot be classified together")]
    MixedTraces(i64, i64),
    #[error("integer overflow in quaternion arithmetic")]
    Overflow,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no class pair with distinct orientations to carry the synthetic stable norm")]
    NoOrientedPair,
    #[error("no admissible R found in [{m}, {cap}]")]
    SearchExhausted { m: f64, cap: f64 },
    #[error("quadrature did not reach tolerance {tol:e} with {panels} panels")]
    Quadrature { tol: f64, panels: usize },
    #[error("length spectrum covers lengths up to {covered}, but {needed} is needed")]
    Coverage { needed: f64, covered: f64 },
    #[error("cache line {line}: {msg}")]
    Cache { line: usize, msg: String },
    #[error("cache was written for (A, p, box) = {found:?}, expected {expected:?}")]
    CacheMismatch { found: (i64, i64, i64), expected: (i64, i64, i64) },
}
