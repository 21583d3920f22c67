//! Damped wave pencils on the circle: assembly, companion linearization, spectra,
//! Weyl counts, Lebeau decay quantities and time-domain energy decay.

mod evolve;
mod pencil;
mod profile;
mod spectrum;

pub use evolve::{energy_decay_rate, energy_decay_trace, DecayTrace, InitialData};
pub use pencil::{assemble_pencil, linearize_pencil, QuadraticPencil};
pub use profile::DampingProfile;
pub use spectrum::{
    constant_damping_reference, lebeau_quantities, solve_spectrum, to_semiclassical, twisted_circle_reference,
    weyl_window_count, ComplexSpectrum, EigenSolution, LebeauQuantities, SemiclassicalPoint, SemiclassicalSpectrum,
    SolveOptions, SpectrumKind, SpectrumMeta, WeylCount, REAL_AXIS_TOL,
};

use num_complex::Complex64;

#[derive(Debug, thiserror::Error)]
pub enum DwError {
    #[error("invalid damping profile: {0}")]
    InvalidProfile(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("profile has trigonometric degree {degree} but K = {k}; raise K to at least {degree}")]
    Aliasing { degree: usize, k: usize },
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("eigensolver did not converge on a {dimension}x{dimension} matrix: {detail}")]
    NoConvergence { dimension: usize, detail: String },
    #[error("eigenpair {index} has residual {residual:e} above {tol:e}")]
    Residual { index: usize, residual: f64, tol: f64 },
    #[error("no eigenvalues in the requested window")]
    EmptyWindow,
    #[error("energy grew from {before:e} to {after:e} at t = {time}; time step unstable")]
    EnergyGrowth { time: f64, before: f64, after: f64 },
    #[error("spectrum CSV line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Assemble, linearize and solve in one call, tagged as a wave-tau spectrum.
pub fn damped_spectrum(profile: &DampingProfile, k: usize) -> Result<ComplexSpectrum, DwError> {
    let pencil = assemble_pencil(profile, k)?;
    let sol = solve_spectrum(&linearize_pencil(&pencil), &SolveOptions::default())?;
    ComplexSpectrum::new(
        sol.values,
        SpectrumKind::WaveTau,
        None,
        SpectrumMeta { k, profile_hash: profile.content_hash() },
    )
}

/// `(⟨(−Δ + twist)u,u⟩ − τ²‖u‖² + 2iτ⟨Au,u⟩) / (‖u‖²(1 + |τ|²))` for a pencil eigenpair.
pub fn rayleigh_defect(pencil: &QuadraticPencil, tau: Complex64, u: &[Complex64]) -> f64 {
    let n = pencil.dimension();
    let a = pencil.damping_op();
    let lap = pencil.laplacian_diag();
    let tw = pencil.twist_diag();
    let mut stiff = Complex64::new(0.0, 0.0);
    let mut damp = Complex64::new(0.0, 0.0);
    let mut norm2 = 0.0;
    for i in 0..n {
        let ui = u[i];
        norm2 += ui.norm_sqr();
        stiff += (tw[i] + lap[i]) * ui.norm_sqr();
        let au: Complex64 = (0..n).map(|j| a[(i, j)] * u[j]).sum();
        damp += au * ui.conj();
    }
    let value = stiff - tau * tau * norm2 + Complex64::new(0.0, 2.0) * tau * damp;
    value.norm() / (norm2 * (1.0 + tau.norm_sqr()))
}
