use super::{MarkovModel, ThermoError};

const MAX_ITERS: usize = 2_000_000;

/// Perron root and vectors of `M_ij = A_ij·exp(w_ij)`, computed in scaled form.
#[derive(Clone, Debug)]
pub struct Perron {
    /// `log ρ(M)`
    pub log_root: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    /// Scaled matrix `M·e^{−shift}` with `log ρ(M) = shift + log ρ(scaled)`.
    scaled: Vec<f64>,
    scaled_root: f64,
    n: usize,
}

/// Power iteration on `M + δI` (primitive when `M` is irreducible) with Collatz–Wielandt
/// brackets; `δ` tracks the current lower bound so periodic graphs still converge.
fn perron_vector(m: &[f64], n: usize, transpose: bool) -> Result<(f64, Vec<f64>), ThermoError> {
    let at = |i: usize, j: usize| if transpose { m[j * n + i] } else { m[i * n + j] };
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    let mut delta = (0..n).map(|i| (0..n).map(|j| at(i, j)).sum::<f64>()).fold(0.0, f64::max);
    for _ in 0..MAX_ITERS {
        for i in 0..n {
            y[i] = (0..n).map(|j| at(i, j) * x[j]).sum();
        }
        let (mut l, mut h) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let r = y[i] / x[i];
            l = l.min(r);
            h = h.max(r);
        }
        lo = lo.max(l);
        hi = hi.min(h);
        if hi - lo <= 1e-14 * hi {
            let norm: f64 = x.iter().sum();
            x.iter_mut().for_each(|v| *v /= norm);
            return Ok((0.5 * (lo + hi), x));
        }
        delta = delta.min(hi).max(lo);
        let mut norm = 0.0;
        for i in 0..n {
            y[i] += delta * x[i];
            norm += y[i];
        }
        for i in 0..n {
            x[i] = (y[i] / norm).max(f64::MIN_POSITIVE);
        }
    }
    Err(ThermoError::NoConvergence(format!("Perron iteration stalled with bracket [{lo:e}, {hi:e}]")))
}

impl Perron {
    pub fn compute(model: &MarkovModel, log_weight: impl Fn(usize, usize) -> f64) -> Result<Self, ThermoError> {
        let n = model.states();
        let logw = model.weighted(&log_weight);
        let mut shift = f64::NEG_INFINITY;
        for i in 0..n {
            for j in 0..n {
                if model.allowed(i, j) {
                    let w = logw[i * n + j];
                    if !w.is_finite() {
                        return Err(ThermoError::InvalidModel(format!("non-finite weight on {i}->{j}")));
                    }
                    shift = shift.max(w);
                }
            }
        }
        let scaled: Vec<f64> = (0..n * n)
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                if model.allowed(i, j) {
                    (logw[idx] - shift).exp()
                } else {
                    0.0
                }
            })
            .collect();
        let (root_r, right) = perron_vector(&scaled, n, false)?;
        let (root_l, left) = perron_vector(&scaled, n, true)?;
        let scaled_root = 0.5 * (root_r + root_l);
        Ok(Self { log_root: shift + scaled_root.ln(), left, right, scaled, scaled_root, n })
    }

    /// Equilibrium Markov measure: `πᵢ ∝ lᵢrᵢ`, `Pᵢⱼ = Mᵢⱼ rⱼ / (ρ rᵢ)`.
    pub fn equilibrium(&self) -> Equilibrium {
        let n = self.n;
        let mut pi: Vec<f64> = (0..n).map(|i| self.left[i] * self.right[i]).collect();
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|p| *p /= total);
        let mut transition = vec![0.0; n * n];
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                let p = self.scaled[i * n + j] * self.right[j] / (self.scaled_root * self.right[i]);
                transition[i * n + j] = p;
                row += p;
            }
            // absorb rounding so every row is stochastic
            for j in 0..n {
                transition[i * n + j] /= row;
            }
        }
        Equilibrium { n, pi, transition }
    }
}

/// Stationary Markov measure on edges.
#[derive(Clone, Debug, PartialEq)]
pub struct Equilibrium {
    n: usize,
    pub pi: Vec<f64>,
    pub transition: Vec<f64>,
}

impl Equilibrium {
    pub fn states(&self) -> usize {
        self.n
    }

    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.transition[i * self.n + j]
    }

    /// Kolmogorov–Sinai entropy `−Σ πᵢ Pᵢⱼ log Pᵢⱼ`.
    pub fn entropy(&self) -> f64 {
        let mut h = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let p = self.p(i, j);
                if p > 0.0 {
                    h -= self.pi[i] * p * p.ln();
                }
            }
        }
        h
    }

    /// `Σ πᵢ Pᵢⱼ f(i, j)`
    pub fn integral(&self, f: impl Fn(usize, usize) -> f64) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let p = self.p(i, j);
                if p > 0.0 {
                    s += self.pi[i] * p * f(i, j);
                }
            }
        }
        s
    }
}
