use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::perron::{Equilibrium, Perron};
use super::pressure::{bowen_root, equilibrium_state};
use super::{MarkovModel, RateValue, ThermoError};

/// Samples per independent RNG stream; fixing this keeps results schedule-independent.
const CHUNK: usize = 4096;

#[derive(Clone, Debug, Serialize)]
pub struct LdEstimate {
    /// `(1/T)·log(hits/nsamples)`, `−∞` when nothing hit.
    pub rate: RateValue,
    pub hits: u64,
    pub nsamples: u64,
    /// Delta-method standard error of `rate` (infinite with zero hits).
    pub std_error: f64,
}

/// Monte Carlo estimate of `(1/T)·log P(⟨q⟩_T ∈ [lo, hi])` for length-`T` paths of the
/// measure of maximal entropy.
pub fn birkhoff_ld_montecarlo(
    model: &MarkovModel,
    t: usize,
    interval: (f64, f64),
    nsamples: u64,
    seed: u64,
) -> Result<LdEstimate, ThermoError> {
    if nsamples < 10_000 {
        return Err(ThermoError::InvalidArgument(format!("nsamples = {nsamples} < 10^4")));
    }
    if t == 0 || !(interval.0 <= interval.1) {
        return Err(ThermoError::InvalidArgument("need T ≥ 1 and lo ≤ hi".into()));
    }
    let law = Perron::compute(model, |_, _| 0.0)?.equilibrium();
    let sampler = PathSampler::new(model, &law);
    let chunks = nsamples.div_ceil(CHUNK as u64);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let count = CHUNK.min((nsamples - c * CHUNK as u64) as usize);
            (0..count)
                .filter(|_| {
                    let avg = sampler.path_sum(&mut rng, t) / t as f64;
                    avg >= interval.0 - 1e-12 && avg <= interval.1 + 1e-12
                })
                .count() as u64
        })
        .sum();
    let tf = t as f64;
    let (rate, std_error) = if hits == 0 {
        (RateValue::NegInfinity, f64::INFINITY)
    } else {
        let p = hits as f64 / nsamples as f64;
        let se_p = (p * (1.0 - p) / nsamples as f64).sqrt();
        (RateValue::Finite(p.ln() / tf), se_p / (p * tf))
    };
    Ok(LdEstimate { rate, hits, nsamples, std_error })
}

/// Inverse-CDF sampler for a stationary Markov chain on states.
struct PathSampler {
    n: usize,
    stationary_cdf: Vec<f64>,
    row_cdf: Vec<f64>,
    q: Vec<f64>,
}

impl PathSampler {
    fn new(model: &MarkovModel, law: &Equilibrium) -> Self {
        let n = model.states();
        let cumulate = |v: &[f64]| {
            let mut acc = 0.0;
            v.iter()
                .map(|x| {
                    acc += x;
                    acc
                })
                .collect::<Vec<f64>>()
        };
        let mut row_cdf = Vec::with_capacity(n * n);
        for i in 0..n {
            row_cdf.extend(cumulate(&law.transition[i * n..(i + 1) * n]));
        }
        Self {
            n,
            stationary_cdf: cumulate(&law.pi),
            row_cdf,
            q: (0..n * n).map(|idx| model.q(idx / n, idx % n)).collect(),
        }
    }

    fn pick(cdf: &[f64], u: f64) -> usize {
        let total = cdf[cdf.len() - 1];
        cdf.partition_point(|&c| c <= u * total).min(cdf.len() - 1)
    }

    fn path_sum(&self, rng: &mut ChaCha8Rng, t: usize) -> f64 {
        let mut state = Self::pick(&self.stationary_cdf, rng.random::<f64>());
        let mut sum = 0.0;
        for _ in 0..t {
            let row = &self.row_cdf[state * self.n..(state + 1) * self.n];
            let next = Self::pick(row, rng.random::<f64>());
            sum += self.q[state * self.n + next];
            state = next;
        }
        sum
    }
}

/// Entropy bookkeeping for the time change by the roof.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AbramovReport {
    pub h_base: f64,
    pub mean_roof: f64,
    /// `(d−1)·h_base / ∫roof dμ`
    pub h_timechanged: f64,
    /// Topological entropy of the suspension by the normalized roof `roof/(d−1)`.
    pub bowen_root: f64,
    /// `bowen_root − h_timechanged`, nonnegative by the variational principle and zero
    /// for the measure of maximal entropy of the suspension.
    pub gap: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AbramovMeasure {
    /// Base equilibrium state lifting to the suspension's measure of maximal entropy.
    SuspensionMaxEntropy,
    /// Base equilibrium state of `β·q` (unit roof pressure).
    BaseEquilibrium(f64),
}

pub fn abramov_timechange(model: &MarkovModel, which: AbramovMeasure) -> Result<AbramovReport, ThermoError> {
    let dm1 = model.d_minus_1;
    let s_star = bowen_root(model, |_, _| 0.0)? * dm1;
    let eq = match which {
        AbramovMeasure::SuspensionMaxEntropy => {
            Perron::compute(model, |i, j| -s_star * model.roof(i, j) / dm1)?.equilibrium()
        }
        AbramovMeasure::BaseEquilibrium(beta) => {
            let unit = model.with_roof(|_, _| 1.0)?;
            equilibrium_state(&unit, beta)?.2
        }
    };
    let h_base = eq.entropy();
    let mean_roof = eq.integral(|i, j| model.roof(i, j));
    let h_timechanged = dm1 * h_base / mean_roof;
    Ok(AbramovReport { h_base, mean_roof, h_timechanged, bowen_root: s_star, gap: s_star - h_timechanged })
}
