use super::{MarkovModel, OrbitSample, ThermoError};

/// Minimum mean edge weight over cycles (Karp). The graph must be strongly connected.
fn karp_min_mean(model: &MarkovModel, weight: impl Fn(usize, usize) -> f64) -> f64 {
    let n = model.states();
    // d[k][v]: least weight of a k-edge walk from state 0 to v
    let mut d = vec![vec![f64::INFINITY; n]; n + 1];
    d[0][0] = 0.0;
    for k in 1..=n {
        for u in 0..n {
            if d[k - 1][u] == f64::INFINITY {
                continue;
            }
            for v in 0..n {
                if model.allowed(u, v) {
                    let cand = d[k - 1][u] + weight(u, v);
                    if cand < d[k][v] {
                        d[k][v] = cand;
                    }
                }
            }
        }
    }
    let mut best = f64::INFINITY;
    for v in 0..n {
        if d[n][v] == f64::INFINITY {
            continue;
        }
        let worst = (0..n)
            .filter(|&k| d[k][v] < f64::INFINITY)
            .map(|k| (d[n][v] - d[k][v]) / (n - k) as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        best = best.min(worst);
    }
    best
}

/// `(q⁻, q⁺)`: extreme means of `q` over invariant measures, which are attained on
/// cycles. With a non-unit roof the extremes are of `Σq / Σroof` and are found by
/// bisection on the parametric mean-cycle problem.
pub fn q_extremes(model: &MarkovModel) -> (f64, f64) {
    if model.has_unit_roof() {
        let lo = karp_min_mean(model, |i, j| model.q(i, j));
        let hi = -karp_min_mean(model, |i, j| -model.q(i, j));
        return (lo, hi);
    }
    let ratio_min = |sign: f64| {
        // min over cycles of Σ sq/Σ roof = λ* where min mean of (sq − λ roof) = 0
        let edges = model.edges();
        let (mut lo, mut hi) = edges
            .iter()
            .map(|e| sign * e.q / e.roof)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let m = karp_min_mean(model, |i, j| sign * model.q(i, j) - mid * model.roof(i, j));
            if m >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * (1.0 + mid.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    (ratio_min(1.0), -ratio_min(-1.0))
}

/// Largest `∫_γ ω / l_γ` over the listed orbits; a lower bound for the stable norm
/// that increases as the list grows.
pub fn stable_norm(orbits: &[OrbitSample]) -> Result<f64, ThermoError> {
    orbits
        .iter()
        .filter(|o| o.length > 0.0)
        .map(|o| o.integral / o.length)
        .reduce(f64::max)
        .ok_or(ThermoError::NoOrbits(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::Edge;

    fn edge(from: usize, to: usize, q: f64) -> Edge {
        Edge { from, to, q, roof: 1.0 }
    }

    #[test]
    fn coin_extremes() {
        let coin = MarkovModel::full_shift(&[0.0, 1.0]).unwrap();
        assert_eq!(q_extremes(&coin), (0.0, 1.0));
    }

    #[test]
    fn self_loops_joined_by_bridge() {
        let m = MarkovModel::from_edges(2, &[edge(0, 0, 1.0), edge(1, 1, 3.0), edge(0, 1, 2.0), edge(1, 0, 2.0)], 1.0)
            .unwrap();
        let (lo, hi) = q_extremes(&m);
        assert!((lo - 1.0).abs() < 1e-15 && (hi - 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_cycle_has_one_mean() {
        let m = MarkovModel::from_edges(3, &[edge(0, 1, 1.0), edge(1, 2, 2.0), edge(2, 0, 3.0)], 1.0).unwrap();
        let (lo, hi) = q_extremes(&m);
        assert!((lo - 2.0).abs() < 1e-15 && (hi - 2.0).abs() < 1e-15);
    }

    #[test]
    fn roof_ratio_extremes() {
        // fixed points 0 (q 1, roof 1) and 1 (q 1, roof 2): ratios 1 and 1/2
        let m = MarkovModel::full_shift_with_roof(&[1.0, 1.0], &[1.0, 2.0]).unwrap();
        let (lo, hi) = q_extremes(&m);
        assert!((lo - 0.5).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stable_norm_scans_ratios() {
        let orbits: Vec<OrbitSample> =
            (1..6).map(|k| OrbitSample { length: k as f64, integral: 0.8 * k as f64 }).collect();
        assert!((stable_norm(&orbits).unwrap() - 0.8).abs() < 1e-15);
        let zero: Vec<OrbitSample> = orbits.iter().map(|o| OrbitSample { integral: 0.0, ..*o }).collect();
        assert_eq!(stable_norm(&zero).unwrap(), 0.0);
        let mut mixed = zero.clone();
        mixed[2].integral = 0.95 * mixed[2].length;
        mixed[3].integral = -0.99 * mixed[3].length;
        assert!((stable_norm(&mixed).unwrap() - 0.95).abs() < 1e-15);
        assert!(stable_norm(&[]).is_err());
    }
}
