//! Browser bindings for three speclab computations. Results cross the boundary as flat
//! `Float64Array`s so the page can plot them without parsing.

use wasm_bindgen::prelude::*;

use speclab::arith::oscillatory_window;
use speclab::dwcore::{damped_spectrum, DampingProfile};
use speclab::thermo::{legendre_rate_on, MarkovModel, PressureCurve};

/// Largest truncation the page may request; the solve is dense and runs on the main thread.
pub const MAX_K: usize = 96;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// Eigenvalues `τ` of the damped wave operator for `a(x) = mean + amp·cos x`, as
/// `[re₀, im₀, re₁, im₁, …]`.
#[wasm_bindgen]
pub fn spectrum(mean: f64, amp: f64, k: usize) -> Result<Vec<f64>, JsError> {
    if !(1..=MAX_K).contains(&k) {
        return Err(JsError::new(&format!("K must lie in 1..={MAX_K}")));
    }
    let profile = DampingProfile::new(mean, vec![amp], Vec::new(), 0.0).map_err(js_err)?;
    let spec = damped_spectrum(&profile, k).map_err(js_err)?;
    Ok(spec.values().iter().flat_map(|v| [v.re, v.im]).collect())
}

/// `[min a, max a]`, the band the eigenvalues with large real part must lie in.
#[wasm_bindgen]
pub fn damping_range(mean: f64, amp: f64) -> Vec<f64> {
    let (lo, hi) = DampingProfile::cosine(mean, amp).extrema();
    vec![lo, hi]
}

/// Rate function `H(α)` of the full shift whose symbols carry the given values, as
/// `[α₀, H₀, α₁, H₁, …]` over `npts` points strictly inside `[min q, max q]`.
#[wasm_bindgen]
pub fn rate_function(q: Vec<f64>, npts: usize) -> Result<Vec<f64>, JsError> {
    if q.len() < 2 || npts < 3 {
        return Err(JsError::new("need at least two symbols and three points"));
    }
    let model = MarkovModel::full_shift(&q).map_err(js_err)?;
    let betas: Vec<f64> = (0..=400).map(|i| -40.0 + 0.2 * i as f64).collect();
    let curve = PressureCurve::compute(&model, &betas).map_err(js_err)?;
    let (lo, hi) = q.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let pad = 1e-3 * (hi - lo);
    let alphas: Vec<f64> = (0..npts).map(|i| lo + pad + (hi - lo - 2.0 * pad) * i as f64 / (npts - 1) as f64).collect();
    let rate = legendre_rate_on(&curve, &alphas).map_err(js_err)?;
    Ok(rate.alphas.iter().zip(&rate.values).filter_map(|(&a, v)| v.finite().map(|h| [a, h])).flatten().collect())
}

/// `|∫ w(t)e^{iλt}dt|` for the triangular window of half-width `T^β` at `2T`, with its bound
/// `min(T^β, 4/(λ²T^β))`, as `[λ₀, value₀, bound₀, …]` for `λ` in `(0, lambda_max]`.
#[wasm_bindgen]
pub fn window_profile(t: f64, beta: f64, lambda_max: f64, npts: usize) -> Vec<f64> {
    let b = t.powf(beta);
    (1..=npts)
        .flat_map(|i| {
            let lambda = lambda_max * i as f64 / npts as f64;
            let value = oscillatory_window(lambda, t, beta).0.norm();
            [lambda, value, b.min(4.0 / (lambda * lambda * b))]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_damping_spectrum() {
        let flat = spectrum(0.5, 0.0, 16).unwrap();
        assert_eq!(flat.len(), 2 * 2 * 33);
        for pair in flat.chunks(2) {
            // τ = ia ± √(n² − a²), or purely imaginary for n = 0
            assert!((pair[1] - 0.5).abs() < 1e-8 || pair[0].abs() < 1e-8, "{pair:?}");
        }
        let r = damping_range(0.5, 0.4);
        assert!((r[0] - 0.1).abs() < 1e-6 && (r[1] - 0.9).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn coin_rate_peaks_at_log_two() {
        let flat = rate_function(vec![0.0, 1.0], 101).unwrap();
        let peak = flat.chunks(2).map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
        assert!((peak - std::f64::consts::LN_2).abs() < 1e-9);
        let mid = flat.chunks(2).find(|p| (p[0] - 0.5).abs() < 1e-9).unwrap();
        assert!((mid[1] - std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn window_stays_below_its_bound() {
        let flat = window_profile(10.0, 0.5, 4.0, 200);
        assert_eq!(flat.len(), 600);
        assert!(flat.chunks(3).all(|p| p[1] <= p[2] * (1.0 + 1e-12)));
    }
}
