use num_complex::Complex64;

use super::spectrum::{GeodesicList, WeightedLengthSpectrum};
use super::trace::kalpha_hat;
use super::ArithError;
use crate::flowavg::simpson;

/// Margin `C` in the regime `α ≤ 2β·log T − C` under which the off-diagonal part of the
/// windowed second moment is at most 1% of the diagonal part. Smallest integer for which
/// this holds on zero-form `Γ(2, 5)` data for every integer `T` in `[20, 200]`, `β = 0.8`.
pub const C_SPLIT: f64 = 4.0;

fn window_terms(
    wls: &WeightedLengthSpectrum,
    alpha: f64,
    denominator: impl Fn(f64) -> f64,
) -> Result<Vec<(f64, f64)>, ArithError> {
    let (lo, hi) = ((alpha - 1.0).exp(), (alpha + 1.0).exp());
    if hi > wls.entries.last().map_or(0.0, |e| e.x) {
        return Err(ArithError::Coverage { needed: hi.ln(), covered: wls.max_length() });
    }
    Ok(wls
        .entries
        .iter()
        .filter(|e| e.x >= lo && e.x <= hi)
        .map(|e| (2.0 * e.mu() / denominator(e.x) * kalpha_hat(e.l, alpha), e.l))
        .filter(|&(a, _)| a != 0.0)
        .collect())
}

/// Coefficients `a_m` and lengths `l_m` with `S_α(t) = Σ a_m cos(t·l_m)` in the trace-indexed
/// form, `a_m = 2μ(m)·K̂_α(log x_m)/(x_m^{1/2} + x_m^{−1/2})`.
pub fn s_alpha_terms(wls: &WeightedLengthSpectrum, alpha: f64) -> Result<Vec<(f64, f64)>, ArithError> {
    window_terms(wls, alpha, |x| x.sqrt() + x.sqrt().recip())
}

/// `S_α(t)` in the trace-indexed form.
pub fn s_alpha(wls: &WeightedLengthSpectrum, alpha: f64, t: f64) -> Result<f64, ArithError> {
    Ok(s_alpha_terms(wls, alpha)?.iter().map(|&(a, l)| a * (t * l).cos()).sum())
}

/// `Σ_γ e^{∫ω}l_{γ₀}/sinh(l/2)·K̂_α(l)·cos(t·l)`, summed class by class.
pub fn s_alpha_geodesic(geodesics: &GeodesicList, alpha: f64, t: f64) -> Result<f64, ArithError> {
    if alpha + 1.0 > geodesics.covered_up_to {
        return Err(ArithError::Coverage { needed: alpha + 1.0, covered: geodesics.covered_up_to });
    }
    Ok(geodesics.geodesics.iter().map(|g| g.weight() * kalpha_hat(g.length, alpha) * (t * g.length).cos()).sum())
}

/// The trace-indexed form with `x^{1/2} − x^{−1/2} = 2 sinh(l/2)` in the denominator; this is
/// the one that agrees term by term with [`s_alpha_geodesic`].
pub fn s_alpha_sinh(wls: &WeightedLengthSpectrum, alpha: f64, t: f64) -> Result<f64, ArithError> {
    let terms = window_terms(wls, alpha, |x| x.sqrt() - x.sqrt().recip())?;
    Ok(terms.iter().map(|&(a, l)| a * (t * l).cos()).sum())
}

/// `∫_{2T−B}^{2T+B}(1 − |t − 2T|/B)·e^{iλt}dt = e^{2iλT}·B·(sin(λB/2)/(λB/2))²` with `B = T^β`,
/// and whether `|value| ≤ min(B, 4/(λ²B))`.
pub fn oscillatory_window(lambda: f64, t: f64, beta: f64) -> (Complex64, bool) {
    let b = t.powf(beta);
    let x = 0.5 * lambda * b;
    let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
    let value = Complex64::from_polar(b * sinc * sinc, 2.0 * lambda * t);
    let bound = if lambda == 0.0 { b } else { b.min(4.0 / (lambda * lambda * b)) };
    // the bound is attained exactly at λ = 0; allow one rounding in the comparison
    (value, value.norm() <= bound * (1.0 + 4.0 * f64::EPSILON))
}

/// `∫ w(t) cos(λt) dt` over the triangular window.
fn window_cos(lambda: f64, t: f64, beta: f64) -> f64 {
    oscillatory_window(lambda, t, beta).0.re
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecondMoment {
    /// `∫ w(t)|S_α(t)|²dt` by quadrature.
    pub i: f64,
    /// Diagonal part, from closed-form window integrals.
    pub i1: f64,
    /// Off-diagonal part, from closed-form window integrals.
    pub i2: f64,
    pub terms: usize,
    /// `α ≤ 2β·log T − C_SPLIT`
    pub in_regime: bool,
    pub c_split: f64,
}

impl SecondMoment {
    /// `|I₂| ≤ I₁/100`, checked only in the regime.
    pub fn split_holds(&self) -> Option<bool> {
        self.in_regime.then(|| self.i2.abs() <= self.i1 / 100.0)
    }

    pub fn relative_gap(&self) -> f64 {
        let scale = self.i.abs().max((self.i1 + self.i2).abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.i - self.i1 - self.i2).abs() / scale
        }
    }
}

fn split_terms(terms: &[(f64, f64)], t: f64, beta: f64) -> (f64, f64) {
    // cos(a t)cos(b t) = ½[cos((a−b)t) + cos((a+b)t)]
    let pair = |la: f64, lb: f64| 0.5 * (window_cos(la - lb, t, beta) + window_cos(la + lb, t, beta));
    let mut i1 = 0.0;
    let mut i2 = 0.0;
    for (j, &(aj, lj)) in terms.iter().enumerate() {
        i1 += aj * aj * pair(lj, lj);
        for &(ak, lk) in &terms[j + 1..] {
            i2 += 2.0 * aj * ak * pair(lj, lk);
        }
    }
    (i1, i2)
}

/// Diagonal and off-diagonal parts `(I₁, I₂)` of the windowed second moment, without the
/// quadrature for `I`.
pub fn second_moment_split(
    wls: &WeightedLengthSpectrum,
    alpha: f64,
    beta: f64,
    t: f64,
) -> Result<(f64, f64), ArithError> {
    Ok(split_terms(&s_alpha_terms(wls, alpha)?, t, beta))
}

/// Quadrature step for the windowed second moment.
pub const MOMENT_STEP: f64 = 1e-3;

/// `I = ∫_{2T−T^β}^{2T+T^β}(1 − |t−2T|/T^β)|S_α(t)|²dt`, split as diagonal `I₁` plus off-diagonal `I₂`.
pub fn windowed_second_moment(
    wls: &WeightedLengthSpectrum,
    alpha: f64,
    beta: f64,
    t: f64,
) -> Result<SecondMoment, ArithError> {
    if !(beta > 0.0 && beta <= 1.0) || !(t >= 1.0) {
        return Err(ArithError::InvalidArgument(format!("need 0 < β ≤ 1 and T ≥ 1 (β = {beta}, T = {t})")));
    }
    let terms = s_alpha_terms(wls, alpha)?;
    let (i1, i2) = split_terms(&terms, t, beta);
    let b = t.powf(beta);
    let s = |u: f64| -> f64 { terms.iter().map(|&(a, l)| a * (u * l).cos()).sum() };
    let w = |u: f64| 1.0 - (u - 2.0 * t).abs() / b;
    let integrand = |u: f64| w(u) * s(u).powi(2);
    let i =
        simpson(integrand, 2.0 * t - b, 2.0 * t, MOMENT_STEP) + simpson(integrand, 2.0 * t, 2.0 * t + b, MOMENT_STEP);
    Ok(SecondMoment {
        i,
        i1,
        i2,
        terms: terms.len(),
        in_regime: alpha <= 2.0 * beta * t.ln() - C_SPLIT,
        c_split: C_SPLIT,
    })
}
