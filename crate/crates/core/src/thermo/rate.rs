use serde::Serialize;

use super::pressure::{hermite, hermite_critical_points, interval_index, linspace, PressureCurve};
use super::ThermoError;

/// A rate-function value; `−∞` is explicit rather than a float.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum RateValue {
    Finite(f64),
    NegInfinity,
}

impl RateValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            RateValue::Finite(v) => Some(v),
            RateValue::NegInfinity => None,
        }
    }

    pub fn max(self, other: Self) -> Self {
        match (self, other) {
            (RateValue::Finite(a), RateValue::Finite(b)) => RateValue::Finite(a.max(b)),
            (RateValue::NegInfinity, x) | (x, RateValue::NegInfinity) => x,
        }
    }
}

impl std::fmt::Display for RateValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RateValue::Finite(v) => write!(f, "{v:?}"),
            RateValue::NegInfinity => f.write_str("-inf"),
        }
    }
}

/// `H(α) = inf_β (P(β) − αβ)` sampled on an α grid, with `H'(α) = −β*(α)`.
#[derive(Clone, Debug)]
pub struct RateFunction {
    pub alphas: Vec<f64>,
    pub values: Vec<RateValue>,
    pub slopes: Vec<f64>,
    pub q_minus: f64,
    pub q_plus: f64,
    curve: PressureCurve,
}

pub const DEFAULT_ALPHA_POINTS: usize = 1001;
/// Three trailing slope differences below this declare the boundary slope converged.
pub const SLOPE_CONVERGENCE: f64 = 1e-6;

/// Extreme slopes of the curve, failing if either end has not flattened out.
pub fn slope_extremes(curve: &PressureCurve) -> Result<(f64, f64), ThermoError> {
    let s = &curve.slopes;
    let n = s.len();
    let left = [s[1] - s[0], s[2] - s[1], s[3] - s[2]];
    let right = [s[n - 1] - s[n - 2], s[n - 2] - s[n - 3], s[n - 3] - s[n - 4]];
    for (side, diffs) in [("left", left), ("right", right)] {
        if diffs.iter().any(|d| d.abs() >= SLOPE_CONVERGENCE) {
            return Err(ThermoError::GridTooNarrow { side, diffs: diffs.to_vec() });
        }
    }
    Ok((s[0], s[n - 1]))
}

pub fn legendre_rate(curve: &PressureCurve) -> Result<RateFunction, ThermoError> {
    let (q_minus, q_plus) = slope_extremes(curve)?;
    let alphas = if q_plus > q_minus { linspace(q_minus, q_plus, DEFAULT_ALPHA_POINTS) } else { vec![q_minus] };
    legendre_rate_on(curve, &alphas)
}

/// Legendre transform on a caller-supplied α grid (points outside `[q⁻, q⁺]` get `−∞`).
pub fn legendre_rate_on(curve: &PressureCurve, alphas: &[f64]) -> Result<RateFunction, ThermoError> {
    let (q_minus, q_plus) = slope_extremes(curve)?;
    let mut values = Vec::with_capacity(alphas.len());
    let mut slopes = Vec::with_capacity(alphas.len());
    for &a in alphas {
        match legendre_point(curve, q_minus, q_plus, a) {
            Some((h, beta)) => {
                values.push(RateValue::Finite(h));
                slopes.push(-beta);
            }
            None => {
                values.push(RateValue::NegInfinity);
                slopes.push(f64::NAN);
            }
        }
    }
    Ok(RateFunction { alphas: alphas.to_vec(), values, slopes, q_minus, q_plus, curve: curve.clone() })
}

/// `(H(α), β*)` by minimizing `P_h(β) − αβ` over the Hermite interpolant `P_h`.
fn legendre_point(curve: &PressureCurve, q_minus: f64, q_plus: f64, alpha: f64) -> Option<(f64, f64)> {
    // extreme slopes are converged only to SLOPE_CONVERGENCE; accept that much slack
    if !(alpha >= q_minus - SLOPE_CONVERGENCE && alpha <= q_plus + SLOPE_CONVERGENCE) {
        return None;
    }
    let b = &curve.betas;
    let n = b.len();
    let objective = |beta: f64| curve.interpolate(beta).unwrap() - alpha * beta;
    // the minimizer sits where the nondecreasing slope sequence crosses α
    let k = curve.slopes.partition_point(|&s| s < alpha);
    let mut best = if k == 0 {
        (objective(b[0]), b[0])
    } else if k == n {
        (objective(b[n - 1]), b[n - 1])
    } else {
        (objective(b[k]), b[k])
    };
    for idx in k.saturating_sub(1)..(k + 1).min(n - 1) {
        let (x0, x1) = (b[idx], b[idx + 1]);
        let ts = hermite_critical_points(
            x0,
            x1,
            curve.values[idx],
            curve.values[idx + 1],
            curve.slopes[idx],
            curve.slopes[idx + 1],
            alpha,
        );
        for t in ts.into_iter().chain([0.0, 1.0]) {
            let beta = x0 + t * (x1 - x0);
            let v = objective(beta);
            if v < best.0 {
                best = (v, beta);
            }
        }
    }
    Some(best)
}

impl RateFunction {
    /// `H(α)` at an arbitrary point, recomputed from the pressure curve.
    pub fn eval(&self, alpha: f64) -> RateValue {
        match legendre_point(&self.curve, self.q_minus, self.q_plus, alpha) {
            Some((h, _)) => RateValue::Finite(h),
            None => RateValue::NegInfinity,
        }
    }

    /// Maximizer `q̄ = P'(0)` of `H`, by linear interpolation of the slopes.
    pub fn peak(&self) -> f64 {
        let b = &self.curve.betas;
        match interval_index(b, 0.0) {
            Some(i) => {
                let t = (0.0 - b[i]) / (b[i + 1] - b[i]);
                self.curve.slopes[i] + t * (self.curve.slopes[i + 1] - self.curve.slopes[i])
            }
            None if b[0] > 0.0 => self.q_minus,
            None => self.q_plus,
        }
    }

    pub fn curve(&self) -> &PressureCurve {
        &self.curve
    }

    /// `sup_{α ∈ [lo, hi]} H(α)`; concavity puts it at the point of `[lo, hi]` nearest
    /// the maximizer of `H`.
    pub fn sup_over(&self, lo: f64, hi: f64) -> RateValue {
        let lo = lo.max(self.q_minus - SLOPE_CONVERGENCE);
        let hi = hi.min(self.q_plus + SLOPE_CONVERGENCE);
        if lo > hi {
            return RateValue::NegInfinity;
        }
        let target = self.peak().clamp(lo, hi);
        self.eval(target)
    }

    /// `sup_α (αβ + H(α))` using only the stored grid (Hermite in α with `H' = −β*`).
    ///
    /// Cells touching `q±`, where `H'` is unbounded and the stored slope is only a large
    /// finite stand-in, use grid values only: a Hermite cubic overshoots there.
    pub fn dual_pressure(&self, beta: f64) -> f64 {
        let at_end = |a: f64| a <= self.q_minus || a >= self.q_plus;
        let pts: Vec<(f64, f64, f64)> = self
            .alphas
            .iter()
            .zip(&self.values)
            .zip(&self.slopes)
            .filter_map(|((&a, v), &s)| v.finite().map(|h| (a, h, s)))
            .collect();
        let mut best = f64::NEG_INFINITY;
        for &(a, h, _) in &pts {
            best = best.max(a * beta + h);
        }
        for w in pts.windows(2) {
            let ((a0, h0, s0), (a1, h1, s1)) = (w[0], w[1]);
            if at_end(a0) || at_end(a1) {
                continue;
            }
            for t in hermite_critical_points(a0, a1, h0, h1, s0, s1, -beta) {
                let a = a0 + t * (a1 - a0);
                best = best.max(a * beta + hermite(a0, a1, h0, h1, s0, s1, a));
            }
        }
        best
    }

    /// Worst positive second difference among finite values (scaled to a unit step).
    pub fn concavity_defect(&self) -> f64 {
        let pts: Vec<(f64, f64)> =
            self.alphas.iter().zip(&self.values).filter_map(|(&a, v)| v.finite().map(|h| (a, h))).collect();
        pts.windows(3)
            .map(|w| {
                let d1 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
                let d2 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
                (d2 - d1).max(0.0)
            })
            .fold(0.0, f64::max)
    }

    /// `H` interpolated on the stored grid, `−∞` outside `[q⁻, q⁺]`.
    pub fn interpolate(&self, alpha: f64) -> RateValue {
        match interval_index(&self.alphas, alpha) {
            Some(i) => match (self.values[i], self.values[i + 1]) {
                (RateValue::Finite(h0), RateValue::Finite(h1)) => RateValue::Finite(hermite(
                    self.alphas[i],
                    self.alphas[i + 1],
                    h0,
                    h1,
                    self.slopes[i],
                    self.slopes[i + 1],
                    alpha,
                )),
                _ => RateValue::NegInfinity,
            },
            None => RateValue::NegInfinity,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for (a, v) in self.alphas.iter().zip(&self.values) {
            out.push_str(&format!("{a:?},{v}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::MarkovModel;
    use std::f64::consts::LN_2;

    fn binary_entropy(a: f64) -> f64 {
        let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
        term(a) + term(1.0 - a)
    }

    #[test]
    fn coin_rate_function_matches_binary_entropy() {
        let coin = MarkovModel::full_shift(&[0.0, 1.0]).unwrap();
        let curve = PressureCurve::default_grid(&coin).unwrap();
        let rate = legendre_rate(&curve).unwrap();
        assert!(rate.q_minus.abs() < 1e-12 && (rate.q_plus - 1.0).abs() < 1e-12);
        assert!((rate.eval(0.5).finite().unwrap() - LN_2).abs() < 1e-12);
        assert!((rate.eval(0.6).finite().unwrap() - binary_entropy(0.6)).abs() < 1e-6);
        assert!(rate.eval(0.0).finite().unwrap().abs() < 1e-12);
        assert!(rate.eval(1.0).finite().unwrap().abs() < 1e-12);
        assert_eq!(rate.eval(1.2), RateValue::NegInfinity);
        assert!(rate.concavity_defect() <= 1e-9);
        for &a in &[0.1, 0.3, 0.77, 0.95] {
            let h = rate.interpolate(a).finite().unwrap();
            assert!((h - binary_entropy(a)).abs() < 1e-6, "alpha {a}");
        }
    }

    #[test]
    fn narrow_grid_is_reported() {
        let coin = MarkovModel::full_shift(&[0.0, 1.0]).unwrap();
        let curve = PressureCurve::compute(&coin, &linspace(-2.0, 2.0, 41)).unwrap();
        assert!(matches!(legendre_rate(&curve), Err(ThermoError::GridTooNarrow { .. })));
    }

    #[test]
    fn rate_value_ordering() {
        let a = RateValue::Finite(-1.0);
        assert_eq!(a.max(RateValue::NegInfinity), a);
        assert_eq!(RateValue::NegInfinity.to_string(), "-inf");
    }
}
