use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::spectrum::GeodesicList;
use super::ArithError;

/// `k̂(x) = 2·max(0, 1 − |x|)`: nonnegative, supported in `[−1, 1]`, at least 1 on `[−½, ½]`.
pub fn fejer_khat(x: f64) -> f64 {
    2.0 * (1.0 - x.abs()).max(0.0)
}

/// `k(u) = (1/π)·(sin(u/2)/(u/2))²`, whose transform `∫e^{iru}k(u)du` is [`fejer_khat`].
pub fn fejer_k(u: f64) -> f64 {
    let h = 0.5 * u;
    if h.abs() < 1e-4 {
        // sinc² ≈ 1 − h²/3 + 2h⁴/45
        let h2 = h * h;
        return (1.0 - h2 / 3.0 + 2.0 * h2 * h2 / 45.0) / PI;
    }
    let s = h.sin() / h;
    s * s / PI
}

pub fn fejer_test_function() -> (fn(f64) -> f64, fn(f64) -> f64) {
    (fejer_khat, fejer_k)
}

/// `K̂_α(l) = k̂(l − α) + k̂(l + α)`
pub fn kalpha_hat(l: f64, alpha: f64) -> f64 {
    fejer_khat(l - alpha) + fejer_khat(l + alpha)
}

/// Largest list accepted by [`r_search`].
pub const R_SEARCH_MAX_LENGTHS: usize = 12;
const R_SEARCH_MAX_STEPS: usize = 50_000_000;

fn cos_ok(r: f64, lengths: &[f64]) -> bool {
    lengths.iter().all(|&l| (r * l).cos() >= 0.5)
}

/// Smallest `R ≥ M` (up to a relative nudge of `10⁻¹²` into the admissible set) with
/// `cos(R·l) ≥ ½` for every listed length.
///
/// The admissible set for one length is the union of `[(2πk − π/3)/l, (2πk + π/3)/l]`;
/// the sweep jumps to the next admissible interval of whichever length fails, so the
/// first common point is found exactly. The result is verified before it is returned.
pub fn r_search(lengths: &[f64], m: f64, t: f64) -> Result<f64, ArithError> {
    if lengths.is_empty() || lengths.len() > R_SEARCH_MAX_LENGTHS {
        return Err(ArithError::InvalidArgument(format!(
            "r_search takes 1..={R_SEARCH_MAX_LENGTHS} lengths, got {}",
            lengths.len()
        )));
    }
    if !(m >= 1.0) || !(t > 0.0) {
        return Err(ArithError::InvalidArgument(format!("need M ≥ 1 and T > 0 (M = {m}, T = {t})")));
    }
    if let Some(&l) = lengths.iter().find(|&&l| !(l > 0.0) || l > 5.0 * t * (1.0 + 1e-12)) {
        return Err(ArithError::InvalidArgument(format!("length {l} outside (0, 5T]")));
    }
    let cap = m * (5.0 * t).exp().exp();
    let third = PI / 3.0;
    let two_pi = 2.0 * PI;
    let mut r = m;
    for _ in 0..R_SEARCH_MAX_STEPS {
        if r > cap {
            break;
        }
        // for each length, the admissible interval [lo, hi] containing r, or the next start
        let mut next_start = r;
        let mut end = f64::INFINITY;
        let mut all_in = true;
        for &l in lengths {
            let k = (r * l / two_pi).round();
            let (lo, hi) = ((two_pi * k - third) / l, (two_pi * k + third) / l);
            if r >= lo && r <= hi {
                end = end.min(hi);
            } else {
                all_in = false;
                let start = if r < lo { lo } else { (two_pi * (k + 1.0) - third) / l };
                next_start = next_start.max(start);
            }
        }
        if all_in {
            let nudged = if r == m { r } else { r * (1.0 + 1e-12) };
            for cand in [nudged, 0.5 * (r + end)] {
                if cand <= end && cand <= cap && cos_ok(cand, lengths) {
                    return Ok(cand);
                }
            }
            r = end * (1.0 + 1e-15) + f64::MIN_POSITIVE;
        } else {
            r = next_start;
        }
    }
    Err(ArithError::SearchExhausted { m, cap })
}

/// Parameters of the Gaussian test function `f̂(r) = e^{−σ²(r−R)²/2}e^{−iTr} + (r ↦ −r)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceWindowParams {
    pub sigma: f64,
    pub r: f64,
    pub t: f64,
}

impl TraceWindowParams {
    pub fn new(sigma: f64, r: f64, t: f64) -> Result<Self, ArithError> {
        if !(sigma > 0.0) || !(t > 0.0) || !r.is_finite() {
            return Err(ArithError::InvalidArgument(format!(
                "need σ > 0, T > 0, finite R (σ = {sigma}, R = {r}, T = {t})"
            )));
        }
        Ok(Self { sigma, r, t })
    }

    /// `σ` from the regime `σ⁻² = C·Θ(R)`.
    pub fn from_regime(c: f64, theta: f64, r: f64, t: f64) -> Result<Self, ArithError> {
        if !(c > 0.0) || !(theta >= 1.0) {
            return Err(ArithError::InvalidArgument(format!("need C > 0 and Θ ≥ 1 (C = {c}, Θ = {theta})")));
        }
        Self::new((c * theta).powf(-0.5), r, t)
    }
}

/// The two sides of the geometric half of the Gaussian trace identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceSides {
    /// `Area/(4π)·∫ r tanh(πr)·f̂(r) dr`
    pub plancherel: Complex64,
    /// `Σ_γ e^{∫ω}l_{γ₀}/sinh(l/2)·f(l)`
    pub geodesic_sum: Complex64,
    /// Lower bound for `Re(geodesic_sum)` valid when `cos(l·R) ≥ ½` for `l ≤ 5T`.
    pub modulus_lower_bound: f64,
    /// Whether every listed length with `l ≤ 5T` has `cos(l·R) ≥ ½`.
    pub phases_aligned: bool,
    /// The list does not cover `[T − 5σ, T + 5σ]`.
    pub truncated: bool,
}

impl TraceSides {
    /// The comparison `|geodesic_sum| ≥ modulus_lower_bound`, meaningful only when the
    /// phases are aligned.
    pub fn comparison_holds(&self) -> Option<bool> {
        self.phases_aligned.then(|| self.geodesic_sum.re >= self.modulus_lower_bound)
    }
}

/// Composite Simpson of a complex integrand with step halving until two successive
/// estimates agree to `tol`.
pub(crate) fn simpson_adaptive(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    initial_panels: usize,
    tol: f64,
) -> Result<Complex64, ArithError> {
    let eval = |n: usize| {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for k in 1..n {
            s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * (h / 3.0)
    };
    let mut n = initial_panels.max(2) & !1;
    let mut prev = eval(n);
    for _ in 0..8 {
        n *= 2;
        let cur = eval(n);
        if (cur - prev).norm() <= tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(ArithError::Quadrature { tol, panels: n })
}

/// Evaluates the geometric side of the Gaussian trace identity.
pub fn gaussian_trace_sides(
    params: &TraceWindowParams,
    geodesics: &GeodesicList,
    area: f64,
) -> Result<TraceSides, ArithError> {
    if !(area > 0.0) {
        return Err(ArithError::InvalidArgument(format!("area must be positive, got {area}")));
    }
    let TraceWindowParams { sigma, r: big_r, t } = *params;
    // the integrand is even in r, so fold onto the Gaussian centred at +R
    let width = 12.0 / sigma;
    let panels = (((2.0 * width) * (t + sigma.recip()).max(1.0) * 16.0).ceil() as usize).max(64);
    let tol = 1e-8 * big_r.abs().max(1.0) / sigma * 0.1;
    let integral = simpson_adaptive(
        |r| {
            let g = (-0.5 * sigma * sigma * (r - big_r).powi(2)).exp();
            Complex64::from_polar(r * (PI * r).tanh() * g, -t * r)
        },
        big_r - width,
        big_r + width,
        panels,
        tol / (2.0 * area / (4.0 * PI)),
    )?;
    let plancherel = integral * (2.0 * area / (4.0 * PI));
    let norm = 1.0 / ((2.0 * PI).sqrt() * sigma);
    let gauss = |l: f64| {
        let plus = (-(l - t).powi(2) / (2.0 * sigma * sigma)).exp();
        let minus = (-(l + t).powi(2) / (2.0 * sigma * sigma)).exp();
        (plus, minus)
    };
    let mut geodesic_sum = Complex64::new(0.0, 0.0);
    let mut lower = 0.0;
    let mut aligned = true;
    for g in &geodesics.geodesics {
        let w = g.weight();
        let (gp, gm) = gauss(g.length);
        geodesic_sum +=
            norm * w * (Complex64::from_polar(gp, g.length * big_r) + Complex64::from_polar(gm, -g.length * big_r));
        let c = (g.length * big_r).cos();
        if g.length <= 5.0 * t {
            aligned &= c >= 0.5;
            if g.length >= t - 1.0 && g.length <= t {
                lower += 0.5 * norm * w * (gp + gm);
            }
        } else {
            lower += norm * w * (gp + gm) * c;
        }
    }
    Ok(TraceSides {
        plancherel,
        geodesic_sum,
        modulus_lower_bound: lower,
        phases_aligned: aligned,
        truncated: geodesics.covered_up_to < t + 5.0 * sigma,
    })
}

/// `Pr(ω) − ½ − (1 + ε)/(2β)`
pub fn q3arithm_bound(pr_omega: f64, beta: f64, eps: f64) -> Result<f64, ArithError> {
    if !(beta > 0.0 && beta <= 1.0) || !(eps > 0.0 && eps < beta) || !pr_omega.is_finite() {
        return Err(ArithError::InvalidArgument(format!("need 0 < β ≤ 1 and 0 < ε < β (β = {beta}, ε = {eps})")));
    }
    Ok(pr_omega - 0.5 - (1.0 + eps) / (2.0 * beta))
}

/// First listed `r` with `|Re r − T| ≤ T^β` and `|Im r| ≥ bound`.
pub fn q3arithm_witness(rs: &[Complex64], t: f64, beta: f64, bound: f64) -> Option<Complex64> {
    let half = t.powf(beta);
    rs.iter().copied().find(|r| (r.re - t).abs() <= half && r.im.abs() >= bound)
}

/// The three partial sums of `Σ_j e^{−σ²(r_j−R)²/2}e^{−iTr_j}` split at `R ± f`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailParts {
    pub sum_i: Complex64,
    pub sum_ii: Complex64,
    pub sum_iii: Complex64,
    /// `Σ |term|` over each part, the quantities the bounds control.
    pub part_i: f64,
    pub part_ii: f64,
    pub part_iii: f64,
    pub counts: [usize; 3],
}

/// Calibrated size of the tails counted as `O(1)`.
pub const TAIL_CONSTANT: f64 = 1.0;
/// Required ratio of the central part to the tails.
pub const TAIL_DOMINANCE: f64 = 10.0;

impl TailParts {
    pub fn tails_bounded(&self) -> bool {
        self.part_i <= TAIL_CONSTANT && self.part_iii <= TAIL_CONSTANT
    }

    pub fn centre_dominates(&self) -> bool {
        self.part_ii >= TAIL_DOMINANCE * (self.part_i + self.part_iii)
    }
}

/// Splits the Gaussian spectral sum into `Re r ≤ R − f`, `|Re r − R| ≤ f` and `Re r ≥ R + f`.
pub fn tail_bounds(
    spectrum: &[Complex64],
    sigma: f64,
    f_window: f64,
    big_r: f64,
    t: f64,
) -> Result<TailParts, ArithError> {
    if !(sigma > 0.0) || !(f_window > 0.0) || !(t > 0.0) {
        return Err(ArithError::InvalidArgument(format!("need σ, f, T > 0 (σ = {sigma}, f = {f_window}, T = {t})")));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut sums = [zero; 3];
    let mut mods = [0.0; 3];
    let mut counts = [0usize; 3];
    for &r in spectrum {
        let d = r - big_r;
        let term = (-0.5 * sigma * sigma * d * d - Complex64::i() * t * r).exp();
        let part = if r.re <= big_r - f_window {
            0
        } else if r.re >= big_r + f_window {
            2
        } else {
            1
        };
        sums[part] += term;
        mods[part] += term.norm();
        counts[part] += 1;
    }
    Ok(TailParts {
        sum_i: sums[0],
        sum_ii: sums[1],
        sum_iii: sums[2],
        part_i: mods[0],
        part_ii: mods[1],
        part_iii: mods[2],
        counts,
    })
}

/// Surrogate spectral parameters with Weyl density: `⌊x·Θ⌉` points uniformly in each unit
/// interval `[x, x+1]` of `[lo, hi]`, imaginary parts uniform in `[−cΘ, cΘ]`.
pub fn weyl_surrogate(lo: f64, hi: f64, theta: f64, c: f64, seed: u64) -> Result<Vec<Complex64>, ArithError> {
    if !(lo >= 0.0 && hi > lo) || !(theta >= 1.0) || !(c >= 0.0) {
        return Err(ArithError::InvalidArgument(format!(
            "need 0 ≤ lo < hi, Θ ≥ 1, c ≥ 0 (lo = {lo}, hi = {hi}, Θ = {theta}, c = {c})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut x = lo.floor();
    let ib = c * theta;
    while x < hi {
        let n = (x.max(0.5) * theta).round() as usize;
        for _ in 0..n {
            let re = x + rng.random::<f64>();
            if re >= lo && re < hi {
                let im = if ib > 0.0 { rng.random_range(-ib..=ib) } else { 0.0 };
                out.push(Complex64::new(re, im));
            }
        }
        x += 1.0;
    }
    Ok(out)
}

/// Lengths `≤ 5T` from a geodesic list, sorted and deduplicated.
pub fn lengths_up_to(geodesics: &GeodesicList, lmax: f64) -> Vec<f64> {
    let mut ls: Vec<f64> = geodesics.geodesics.iter().map(|g| g.length).filter(|&l| l <= lmax).collect();
    ls.sort_by(f64::total_cmp);
    ls.dedup();
    ls
}
