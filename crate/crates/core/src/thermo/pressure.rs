use rayon::prelude::*;

use super::perron::{Equilibrium, Perron};
use super::{MarkovModel, ThermoError};

/// `log` of the Perron root of `A_ij·exp(β q_ij)`, ignoring the roof.
pub fn base_pressure(model: &MarkovModel, beta: f64) -> Result<f64, ThermoError> {
    Ok(Perron::compute(model, |i, j| beta * model.q(i, j))?.log_root)
}

/// Root `s` of `log ρ(A∘exp(w − s·roof)) = 0` with the safeguarded Newton method.
///
/// `g(s) = log ρ(s)` decreases with slope `−∫roof dμₛ ∈ [−max roof, −min roof]`,
/// which gives the initial bracket.
pub fn bowen_root(model: &MarkovModel, potential: impl Fn(usize, usize) -> f64 + Sync) -> Result<f64, ThermoError> {
    let edges = model.edges();
    let rmin = edges.iter().map(|e| e.roof).fold(f64::INFINITY, f64::min);
    let rmax = edges.iter().map(|e| e.roof).fold(0.0, f64::max);
    let eval = |s: f64| -> Result<(f64, f64), ThermoError> {
        let p = Perron::compute(model, |i, j| potential(i, j) - s * model.roof(i, j))?;
        let slope = -p.equilibrium().integral(|i, j| model.roof(i, j));
        Ok((p.log_root, slope))
    };
    let (g0, _) = eval(0.0)?;
    let (mut lo, mut hi) = if g0 >= 0.0 { (g0 / rmax, g0 / rmin) } else { (g0 / rmin, g0 / rmax) };
    // widen by a relative hair so rounding in g cannot push the root outside
    let pad = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    lo -= pad;
    hi += pad;
    let (glo, _) = eval(lo)?;
    let (ghi, _) = eval(hi)?;
    if !(glo >= 0.0 && ghi <= 0.0) {
        return Err(ThermoError::Bracketing { lo, hi, glo, ghi });
    }
    let mut s = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (g, dg) = eval(s)?;
        if g == 0.0 {
            return Ok(s);
        }
        if g > 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        let newton = s - g / dg;
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - s).abs() <= 1e-15 * (1.0 + s.abs()) || hi - lo <= 1e-15 * (1.0 + s.abs()) {
            return Ok(next);
        }
        s = next;
    }
    Ok(s)
}

/// Pressure `P(β) = Pr(βq)`: the log Perron root for unit roofs, the Bowen root otherwise.
pub fn pressure_transfer(model: &MarkovModel, beta: f64) -> Result<f64, ThermoError> {
    if !beta.is_finite() {
        return Err(ThermoError::InvalidArgument(format!("beta = {beta}")));
    }
    if model.has_unit_roof() {
        base_pressure(model, beta)
    } else {
        bowen_root(model, |i, j| beta * model.q(i, j))
    }
}

/// Base equilibrium state of `βq − P(β)·roof` together with `P(β)` and the slope `P'(β)`.
pub fn equilibrium_state(model: &MarkovModel, beta: f64) -> Result<(f64, f64, Equilibrium), ThermoError> {
    let p = pressure_transfer(model, beta)?;
    let eq = Perron::compute(model, |i, j| beta * model.q(i, j) - p * model.roof(i, j))?.equilibrium();
    let slope = eq.integral(|i, j| model.q(i, j)) / eq.integral(|i, j| model.roof(i, j));
    Ok((p, slope, eq))
}

/// Topological entropy of the model (unit-roof pressure at `β = 0`).
pub fn topological_entropy(model: &MarkovModel) -> Result<f64, ThermoError> {
    base_pressure(model, 0.0)
}

/// A closed orbit: its length and the integral of the observable along it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitSample {
    pub length: f64,
    pub integral: f64,
}

/// `(1/t)·log Σ_{l ≤ t} e^{∫q}`, a finite-`t` estimator of the pressure with `O(1/t)` bias.
pub fn pressure_orbit_sum(orbits: &[OrbitSample], t: f64) -> Result<f64, ThermoError> {
    let weights: Vec<f64> = orbits.iter().filter(|o| o.length <= t).map(|o| o.integral).collect();
    if weights.is_empty() || !(t > 0.0) {
        return Err(ThermoError::NoOrbits(t));
    }
    let top = weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = weights.iter().map(|w| (w - top).exp()).sum();
    Ok((top + sum.ln()) / t)
}

/// Every closed word (periodic point) of length `1..=max_len` as an orbit sample, with
/// length `Σ roof` and integral `β·Σ q`.
pub fn periodic_orbits(model: &MarkovModel, beta: f64, max_len: usize) -> Vec<OrbitSample> {
    let n = model.states();
    let mut out = Vec::new();
    // (current state, steps, length, integral) per start state, depth-first
    for start in 0..n {
        let mut stack = vec![(start, 0usize, 0.0f64, 0.0f64)];
        while let Some((v, steps, len, integral)) = stack.pop() {
            if steps == max_len {
                continue;
            }
            for w in 0..n {
                if !model.allowed(v, w) {
                    continue;
                }
                let l = len + model.roof(v, w);
                let q = integral + beta * model.q(v, w);
                if w == start {
                    out.push(OrbitSample { length: l, integral: q });
                }
                stack.push((w, steps + 1, l, q));
            }
        }
    }
    out
}

/// Sampled pressure with exact slopes `P'(β) = ∫q dμ_β / ∫roof dμ_β`.
#[derive(Clone, Debug, PartialEq)]
pub struct PressureCurve {
    pub betas: Vec<f64>,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
}

pub const DEFAULT_BETA_MIN: f64 = -40.0;
pub const DEFAULT_BETA_MAX: f64 = 40.0;
pub const DEFAULT_BETA_POINTS: usize = 801;

impl PressureCurve {
    pub fn compute(model: &MarkovModel, betas: &[f64]) -> Result<Self, ThermoError> {
        if betas.len() < 4 || betas.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(ThermoError::InvalidArgument("beta grid needs at least 4 strictly increasing points".into()));
        }
        let pts: Vec<(f64, f64)> =
            betas.par_iter().map(|&b| equilibrium_state(model, b).map(|(p, s, _)| (p, s))).collect::<Result<_, _>>()?;
        let curve = Self {
            betas: betas.to_vec(),
            values: pts.iter().map(|p| p.0).collect(),
            slopes: pts.iter().map(|p| p.1).collect(),
        };
        curve.check_convex()?;
        Ok(curve)
    }

    pub fn default_grid(model: &MarkovModel) -> Result<Self, ThermoError> {
        Self::compute(model, &linspace(DEFAULT_BETA_MIN, DEFAULT_BETA_MAX, DEFAULT_BETA_POINTS))
    }

    /// Worst negative second difference (scaled to a unit step).
    pub fn convexity_defect(&self) -> f64 {
        self.values
            .windows(3)
            .zip(self.betas.windows(3))
            .map(|(v, b)| {
                let d1 = (v[1] - v[0]) / (b[1] - b[0]);
                let d2 = (v[2] - v[1]) / (b[2] - b[1]);
                (d1 - d2).max(0.0)
            })
            .fold(0.0, f64::max)
    }

    fn check_convex(&self) -> Result<(), ThermoError> {
        let defect = self.convexity_defect();
        if defect > 1e-9 {
            return Err(ThermoError::NotConvex(defect));
        }
        Ok(())
    }

    /// Cubic Hermite interpolant of `P` (values and exact slopes).
    pub fn interpolate(&self, beta: f64) -> Option<f64> {
        let idx = interval_index(&self.betas, beta)?;
        Some(hermite(
            self.betas[idx],
            self.betas[idx + 1],
            self.values[idx],
            self.values[idx + 1],
            self.slopes[idx],
            self.slopes[idx + 1],
            beta,
        ))
    }

    pub fn to_csv(&self) -> String {
        to_csv(&self.betas, &self.values)
    }
}

pub(crate) fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

pub(crate) fn to_csv(xs: &[f64], vs: &[f64]) -> String {
    let mut out = String::from("x,value\n");
    for (x, v) in xs.iter().zip(vs) {
        out.push_str(&format!("{x:?},{v:?}\n"));
    }
    out
}

pub(crate) fn interval_index(grid: &[f64], x: f64) -> Option<usize> {
    if grid.len() < 2 || !(x >= grid[0] && x <= grid[grid.len() - 1]) {
        return None;
    }
    let idx = grid.partition_point(|&g| g <= x).saturating_sub(1);
    Some(idx.min(grid.len() - 2))
}

pub(crate) fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let (t2, t3) = (t * t, t * t * t);
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * h * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * h * d1
}

/// Local coordinates `t ∈ [0, 1]` where the Hermite cubic has derivative `target`.
pub(crate) fn hermite_critical_points(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, target: f64) -> Vec<f64> {
    let h = x1 - x0;
    // derivative in t (times 1/h) as a·t² + b·t + c
    let a = 6.0 * y0 / h + 3.0 * d0 - 6.0 * y1 / h + 3.0 * d1;
    let b = -6.0 * y0 / h - 4.0 * d0 + 6.0 * y1 / h - 2.0 * d1;
    let c = d0 - target;
    let mut roots = Vec::new();
    if a.abs() < 1e-14 * (b.abs() + c.abs()) {
        if b != 0.0 {
            roots.push(-c / b);
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            // numerically stable pair
            let qv = -0.5 * (b + b.signum() * sq);
            if qv != 0.0 {
                roots.push(qv / a);
                roots.push(c / qv);
            } else {
                roots.push(0.0);
            }
        }
    }
    roots.into_iter().filter(|t| (0.0..=1.0).contains(t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn full_shift_pressures() {
        let flat = MarkovModel::full_shift(&[0.0, 0.0]).unwrap();
        assert!((pressure_transfer(&flat, 3.0).unwrap() - LN_2).abs() < 1e-14);
        let coin = MarkovModel::full_shift(&[0.0, 1.0]).unwrap();
        let p1 = pressure_transfer(&coin, 1.0).unwrap();
        assert!((p1 - (1.0 + 1f64.exp()).ln()).abs() < 1e-12);
        assert!((p1 - 1.313262).abs() < 1e-6);
    }

    #[test]
    fn golden_mean_entropy() {
        let h = topological_entropy(&MarkovModel::golden_mean()).unwrap();
        assert!((h - ((1.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-13);
        assert!((h - 0.481212).abs() < 1e-6);
    }

    #[test]
    fn bowen_root_for_symbol_roofs() {
        // e^{−s} + e^{−2s} = 1 ⇒ e^{−s} = (√5 − 1)/2
        let m = MarkovModel::full_shift_with_roof(&[0.0, 0.0], &[1.0, 2.0]).unwrap();
        let s = pressure_transfer(&m, 0.0).unwrap();
        assert!((s - ((1.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-12);
        let doubled = MarkovModel::full_shift_with_roof(&[0.0, 0.0], &[2.0, 2.0]).unwrap();
        assert!((pressure_transfer(&doubled, 0.0).unwrap() - LN_2 / 2.0).abs() < 1e-13);
    }

    #[test]
    fn orbit_sum_single_family() {
        let orbits: Vec<OrbitSample> = (1..=30).map(|k| OrbitSample { length: k as f64, integral: 0.0 }).collect();
        let v = pressure_orbit_sum(&orbits, 20.0).unwrap();
        assert!((v - 20f64.ln() / 20.0).abs() < 1e-15);
        assert!((v - 0.1498).abs() < 1e-4);
        assert!(pressure_orbit_sum(&orbits, 0.5).is_err());
    }

    #[test]
    fn periodic_point_counts() {
        // golden mean: number of closed words of length k is the Lucas number L_k
        let orbits = periodic_orbits(&MarkovModel::golden_mean(), 0.0, 6);
        let count = |k: f64| orbits.iter().filter(|o| o.length == k).count();
        assert_eq!([1.0, 2.0, 3.0, 4.0, 5.0, 6.0].map(count), [1, 3, 4, 7, 11, 18]);
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let f = |x: f64| x * x * x - 2.0 * x;
        let df = |x: f64| 3.0 * x * x - 2.0;
        let v = hermite(0.5, 1.5, f(0.5), f(1.5), df(0.5), df(1.5), 1.1);
        assert!((v - f(1.1)).abs() < 1e-14);
        let ts = hermite_critical_points(0.5, 1.5, f(0.5), f(1.5), df(0.5), df(1.5), 1.0);
        assert_eq!(ts.len(), 1);
        assert!((df(0.5 + ts[0]) - 1.0).abs() < 1e-13);
    }
}
