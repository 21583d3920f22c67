use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;

use super::{assemble_pencil, DampingProfile, DwError};

/// Fourier coefficients (modes `−K..=K`) of the initial displacement and velocity.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialData {
    pub displacement: Vec<Complex64>,
    pub velocity: Vec<Complex64>,
}

impl InitialData {
    /// `u₀ = cos(nx)`, `∂ₜu₀ = 0`.
    pub fn single_mode(k: usize, n: usize) -> Self {
        let dim = 2 * k + 1;
        let mut displacement = vec![Complex64::new(0.0, 0.0); dim];
        if n <= k {
            displacement[k + n] += 0.5;
            displacement[k - n] += 0.5;
        }
        Self { displacement, velocity: vec![Complex64::new(0.0, 0.0); dim] }
    }

    /// Real smooth data touching every mode `|n| ≤ K/4` with deterministic phases.
    pub fn generic(k: usize) -> Self {
        let dim = 2 * k + 1;
        let cutoff = (k / 4).max(1) as i64;
        let coeff = |n: i64, phase: f64| {
            if n.abs() > cutoff {
                return Complex64::new(0.0, 0.0);
            }
            let c = Complex64::from_polar(1.0 / (1.0 + (n * n) as f64), phase * n.abs() as f64);
            if n < 0 {
                c.conj()
            } else {
                c
            }
        };
        let freq = |i: usize| i as i64 - k as i64;
        Self {
            displacement: (0..dim).map(|i| coeff(freq(i), 0.7)).collect(),
            velocity: (0..dim).map(|i| coeff(freq(i), 1.9) * 0.5).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DecayTrace {
    /// `(t, E(t))` sampled once per unit time step block.
    pub samples: Vec<(f64, f64)>,
    pub dt: f64,
    /// Fitted rate `−d/dt log E` over `[Tmax/2, Tmax]`.
    pub rate: f64,
}

/// Evolves `(∂ₜ² − Δ + 2a∂ₜ)v = 0` and fits the exponential decay rate of the energy.
///
/// Strang splitting: Crank–Nicolson half steps for `v' = −2Av` around a
/// velocity-Verlet step for `u'' = −Δu`, with `dt = 0.2/K`. The energy tracked is the
/// Verlet-invariant form `‖v‖² + Σ n²(1 − n²dt²/4)|uₙ|²`, which the scheme cannot
/// increase when `a ≥ 0`.
pub fn energy_decay_rate(profile: &DampingProfile, k: usize, u0: &InitialData, tmax: f64) -> Result<f64, DwError> {
    energy_decay_trace(profile, k, u0, tmax).map(|t| t.rate)
}

pub fn energy_decay_trace(
    profile: &DampingProfile,
    k: usize,
    u0: &InitialData,
    tmax: f64,
) -> Result<DecayTrace, DwError> {
    if profile.twist != 0.0 {
        return Err(DwError::InvalidArgument("time stepping needs twist = 0".into()));
    }
    if !(tmax > 0.0) {
        return Err(DwError::InvalidArgument(format!("Tmax must be positive, got {tmax}")));
    }
    let (lo, _) = profile.extrema();
    if lo < -1e-12 {
        return Err(DwError::InvalidArgument(format!("damping must be nonnegative (min ≈ {lo})")));
    }
    let pencil = assemble_pencil(profile, k)?;
    let dim = pencil.dimension();
    if u0.displacement.len() != dim || u0.velocity.len() != dim {
        return Err(DwError::InvalidArgument(format!("initial data must have {dim} Fourier coefficients")));
    }
    let lap = pencil.laplacian_diag();
    let dt = 0.2 / k as f64;
    let steps = (tmax / dt).ceil() as usize;
    let dt = tmax / steps as f64;
    let weights: Vec<f64> = lap.iter().map(|&n2| n2 * (1.0 - n2 * dt * dt / 4.0)).collect();
    let energy = |u: &[Complex64], v: &[Complex64]| -> f64 {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>() + u.iter().zip(&weights).map(|(z, w)| w * z.norm_sqr()).sum::<f64>()
    };

    // Cayley factor (I + hA)⁻¹(I − hA) for the half step h = dt/2 of v' = −2Av
    let a = pencil.damping_op();
    let h = dt / 2.0;
    let ident = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let plus = Mat::<Complex64>::from_fn(dim, dim, |i, j| a[(i, j)] * h + ident(i, j));
    let minus = Mat::<Complex64>::from_fn(dim, dim, |i, j| -a[(i, j)] * h + ident(i, j));
    let cayley = plus.partial_piv_lu().solve(&minus);
    let damped = profile.has_damping();

    let mut u = u0.displacement.clone();
    let mut v = u0.velocity.clone();
    let mut scratch = vec![Complex64::new(0.0, 0.0); dim];
    let mut apply_cayley = |v: &mut Vec<Complex64>| {
        for (i, out) in scratch.iter_mut().enumerate() {
            *out = (0..dim).map(|j| cayley[(i, j)] * v[j]).sum();
        }
        v.copy_from_slice(&scratch);
    };

    let sample_every = ((0.05 / dt).round() as usize).max(1);
    let mut samples = vec![(0.0, energy(&u, &v))];
    let mut prev = samples[0].1;
    if !(prev > 0.0) {
        return Err(DwError::InvalidArgument("initial energy is zero".into()));
    }
    for step in 1..=steps {
        if damped {
            apply_cayley(&mut v);
        }
        for i in 0..dim {
            v[i] -= u[i] * (0.5 * dt * lap[i]);
            u[i] += v[i] * dt;
            v[i] -= u[i] * (0.5 * dt * lap[i]);
        }
        if damped {
            apply_cayley(&mut v);
        }
        let e = energy(&u, &v);
        if !e.is_finite() || e > prev * (1.0 + 1e-10) {
            return Err(DwError::EnergyGrowth { time: step as f64 * dt, before: prev, after: e });
        }
        prev = e;
        if step % sample_every == 0 || step == steps {
            samples.push((step as f64 * dt, e));
        }
    }

    let window: Vec<(f64, f64)> = samples.iter().filter(|(t, _)| *t >= tmax / 2.0).map(|&(t, e)| (t, e.ln())).collect();
    let rate = -least_squares_slope(&window);
    Ok(DecayTrace { samples, dt, rate })
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
