//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`). Criteria listed in `KNOWN_FAILURES` are
//! reported as FAIL with their measurements but do not fail the process; any other FAIL,
//! or a known failure that starts passing, exits nonzero.

use std::f64::consts::LN_2;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use speclab::arith::{
    build_length_spectrum, lengths_up_to, oscillatory_window, q3arithm_bound, r_search, tail_bounds, weyl_surrogate,
    windowed_second_moment, xm, GroupParams, WeightMode, C_SPLIT,
};
use speclab::counting::{
    argument_principle_zeros, deviation_exponent, jensen_disk_bound, ComplexWindow, HolomorphicSampler,
};
use speclab::dwcore::{
    constant_damping_reference, damped_spectrum, energy_decay_rate, lebeau_quantities, weyl_window_count,
    ComplexSpectrum, DampingProfile, InitialData,
};
use speclab::flowavg::{cohomology_defect, cohomology_residual, simpson, FlowPoint, Observable, DEFAULT_QUAD_STEP};
use speclab::thermo::{
    abramov_timechange, base_pressure, birkhoff_ld_montecarlo, legendre_rate, q_extremes, AbramovMeasure, Edge,
    MarkovModel, PressureCurve, RateValue,
};

/// Exact binomial tail: at T = 50 the finite-T rate is (1/50)·log P(Bin(50, ½) ≥ 30) ≈ −0.0457,
/// which sits 0.026 below the asymptotic target; the prefactor decays like T^{−1/2}/T.
const KNOWN_FAILURES: &[u32] = &[7];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit_s: f64) -> (bool, String) {
    let s = elapsed.as_secs_f64();
    (s < limit_s, format!("{s:.2} s (limit {limit_s} s)"))
}

fn cosine_profile() -> DampingProfile {
    DampingProfile::cosine(0.5, 0.4)
}

fn c1_constant_damping() -> Outcome {
    let start = Instant::now();
    let a0 = 0.5;
    let spec = damped_spectrum(&DampingProfile::constant(a0), 64).unwrap();
    let reference = constant_damping_reference(a0, 64);
    let forward = spec.values().iter().map(|&v| reference.nearest_distance(v)).fold(0.0, f64::max);
    let backward = reference.values().iter().map(|&v| spec.nearest_distance(v)).fold(0.0, f64::max);
    let err = forward.max(backward);
    let (fast, time) = within(start.elapsed(), 5.0);
    outcome(
        err <= 1e-8 && spec.len() == reference.len() && fast,
        format!("max |Δτ| = {err:.2e} (tol 1e-8) over {} values, {time}", spec.len()),
    )
}

fn c2_weyl(spec: &ComplexSpectrum, solve_time: Duration) -> Outcome {
    let start = Instant::now();
    let w = weyl_window_count(spec, 50.0).unwrap();
    let dev = (w.count as f64 - w.predicted).abs();
    let (fast, time) = within(solve_time + start.elapsed(), 30.0);
    outcome(
        dev <= 3.0 && !w.beyond_horizon && fast,
        format!("count {} vs 2λ = {} (|Δ| = {dev}, tol 3), {time}", w.count, w.predicted),
    )
}

fn c3_band(spec: &ComplexSpectrum) -> Outcome {
    let (lo, hi) = cosine_profile().extrema();
    let outside = spec.values().iter().filter(|v| v.re.abs() >= 1.0 && (v.im < lo - 1e-6 || v.im > hi + 1e-6)).count();
    let refl = spec.reflection_defect();
    outcome(
        outside == 0 && refl <= 1e-8,
        format!("{outside} values outside [{lo:.3}, {hi:.3}] ± 1e-6; reflection defect {refl:.2e} (tol 1e-8)"),
    )
}

fn c4_lebeau() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    for (name, profile) in [("constant 0.5", DampingProfile::constant(0.5)), ("0.5+0.4cos x", cosine_profile())] {
        let spec = damped_spectrum(&profile, 64).unwrap();
        let lq = lebeau_quantities(&spec, &profile).unwrap();
        let k = 32;
        let rate = energy_decay_rate(&profile, k, &InitialData::generic(k), 60.0).unwrap();
        let rel = (rate - lq.rho_pred).abs() / lq.rho_pred;
        pass &= rel <= 0.10;
        lines.push(format!("{name}: measured {rate:.4} vs ρ {:.4} ({:.1}%)", lq.rho_pred, 100.0 * rel));
    }
    let (fast, time) = within(start.elapsed(), 120.0);
    outcome(pass && fast, format!("{} (tol 10%), {time}", lines.join("; ")))
}

fn c5_concentration(spec: &ComplexSpectrum) -> Outcome {
    let band: Vec<&Complex64> = spec.values().iter().filter(|v| v.re >= 64.0 && v.re <= 128.0).collect();
    let off = band.iter().filter(|v| (v.im - 0.5).abs() > 0.1).count();
    let frac = off as f64 / band.len() as f64;
    outcome(
        !band.is_empty() && frac <= 0.10,
        format!("{off} of {} eigenvalues with |Im τ − ½| > 0.1 (fraction {frac:.4}, tol 0.10)", band.len()),
    )
}

fn binary_entropy(a: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    term(a) + term(1.0 - a)
}

/// Extreme cycle means by enumerating every simple cycle from its least vertex.
fn exhaustive_cycle_means(n: usize, weight: &[Vec<Option<f64>>]) -> (f64, f64) {
    fn dfs(
        start: usize,
        v: usize,
        weight: &[Vec<Option<f64>>],
        on_path: &mut Vec<bool>,
        sum: f64,
        len: usize,
        ext: &mut (f64, f64),
    ) {
        for (u, w) in weight[v].iter().enumerate() {
            let Some(w) = *w else { continue };
            if u == start {
                let mean = (sum + w) / (len + 1) as f64;
                ext.0 = ext.0.min(mean);
                ext.1 = ext.1.max(mean);
            } else if u > start && !on_path[u] {
                on_path[u] = true;
                dfs(start, u, weight, on_path, sum + w, len + 1, ext);
                on_path[u] = false;
            }
        }
    }
    let mut ext = (f64::INFINITY, f64::NEG_INFINITY);
    for s in 0..n {
        let mut on_path = vec![false; n];
        on_path[s] = true;
        dfs(s, s, weight, &mut on_path, 0.0, 0, &mut ext);
    }
    ext
}

fn c6_pressure_entropy() -> Outcome {
    let coin = MarkovModel::full_shift(&[0.0, 1.0]).unwrap();
    let p1 = base_pressure(&coin, 1.0).unwrap();
    let p_err = (p1 - (1.0 + 1f64.exp()).ln()).abs();

    let curve = PressureCurve::default_grid(&coin).unwrap();
    let rate = legendre_rate(&curve).unwrap();
    let h06 = rate.eval(0.6).finite().unwrap_or(f64::NAN);
    let h_err = (h06 - binary_entropy(0.6)).abs().max((h06 - 0.673012).abs());

    // interior β: the maximizing α lies at least ten grid cells inside [q⁻, q⁺]
    let n = rate.alphas.len();
    let (a_lo, a_hi) = (rate.alphas[10], rate.alphas[n - 11]);
    let slope = |b: f64| (base_pressure(&coin, b + 1e-5).unwrap() - base_pressure(&coin, b - 1e-5).unwrap()) / 2e-5;
    let interior: Vec<f64> =
        (-200..=200).map(|k| k as f64 * 0.05).filter(|&b| (a_lo..=a_hi).contains(&slope(b))).collect();
    let round_trip =
        interior.iter().map(|&b| (rate.dual_pressure(b) - base_pressure(&coin, b).unwrap()).abs()).fold(0.0, f64::max);

    let roofed = MarkovModel::full_shift_with_roof(&[0.0, 1.0], &[1.0, 2.0]).unwrap();
    let ab = abramov_timechange(&roofed, AbramovMeasure::SuspensionMaxEntropy).unwrap();
    let ab_err = (ab.h_timechanged - ab.bowen_root).abs();

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut karp_bad = 0;
    let mut graphs = 0;
    for n in 1..=6 {
        for _ in 0..40 {
            let mut weight = vec![vec![None; n]; n];
            // a Hamiltonian cycle keeps the graph strongly connected
            for i in 0..n {
                weight[i][(i + 1) % n] = Some(rng.random_range(-3.0..3.0));
            }
            for i in 0..n {
                for j in 0..n {
                    if weight[i][j].is_none() && rng.random::<f64>() < 0.35 {
                        weight[i][j] = Some(rng.random_range(-3.0..3.0));
                    }
                }
            }
            let edges: Vec<Edge> = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter_map(|(i, j)| weight[i][j].map(|q| Edge { from: i, to: j, q, roof: 1.0 }))
                .collect();
            let model = MarkovModel::from_edges(n, &edges, 1.0).unwrap();
            let (lo, hi) = q_extremes(&model);
            let (elo, ehi) = exhaustive_cycle_means(n, &weight);
            graphs += 1;
            if (lo - elo).abs() > 1e-12 || (hi - ehi).abs() > 1e-12 {
                karp_bad += 1;
            }
        }
    }

    let pass = p_err <= 1e-12 && h_err <= 1e-6 && round_trip <= 1e-6 && ab_err <= 1e-8 && karp_bad == 0;
    outcome(
        pass,
        format!(
            "P(1) err {p_err:.1e} (1e-12); H(0.6) err {h_err:.1e} (1e-6); Legendre round trip {round_trip:.1e} (1e-6, {} interior β); \
             Abramov {ab_err:.1e} (1e-8); Karp mismatches {karp_bad}/{graphs}",
            interior.len()
        ),
    )
}

fn log_binomial_upper_tail(n: u64, k0: u64) -> f64 {
    // log Σ_{k ≥ k0} C(n, k) 2^{−n}, by log-sum-exp over exact log-binomials
    let log_choose = |k: u64| -> f64 { (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum() };
    let logs: Vec<f64> = (k0..=n).map(|k| log_choose(k) - n as f64 * LN_2).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln()
}

fn c7_large_deviations() -> Outcome {
    let start = Instant::now();
    let coin = MarkovModel::full_shift(&[0.0, 1.0]).unwrap();
    let est = birkhoff_ld_montecarlo(&coin, 50, (0.6, 1.0), 1_000_000, 2024).unwrap();
    let target = binary_entropy(0.6) - LN_2;
    let tol = 0.005f64.max(3.0 * est.std_error);
    let exact = log_binomial_upper_tail(50, 30) / 50.0;
    let (fast, time) = within(start.elapsed(), 60.0);
    match est.rate {
        RateValue::Finite(r) => outcome(
            (r - target).abs() <= tol && fast,
            format!(
                "rate {r:.6} vs {target:.6} (|Δ| = {:.4}, tol {tol:.4}); exact finite-T rate {exact:.6}; {} hits; {time}",
                (r - target).abs(),
                est.hits
            ),
        ),
        RateValue::NegInfinity => outcome(false, format!("no hits; {time}")),
    }
}

fn c8_averaging() -> Outcome {
    let p = FlowPoint::new([[0.8, 0.9], [-0.3, 0.9]]).unwrap();
    let observables = [Observable::bounded_ratio(), Observable::oscillating(), Observable::positive_oscillating()];
    let mut worst = 0.0f64;
    let mut ratios = Vec::new();
    for q in &observables {
        worst = worst.max(cohomology_residual(q, &p, 8.0, 1e-4).unwrap());
        let d: Vec<f64> = [1e-3, 5e-4, 2.5e-4]
            .iter()
            .map(|&h| cohomology_defect(q, &p, 8.0, h, DEFAULT_QUAD_STEP).unwrap().abs())
            .collect();
        ratios.push(d[0] / d[1]);
        ratios.push(d[1] / d[2]);
    }
    let second_order = ratios.iter().all(|r| (3.0..=5.0).contains(r));
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.2}")).collect();
    outcome(
        worst <= 1e-4 && second_order,
        format!("worst residual {worst:.2e} (tol 1e-4); halving ratios [{}] (expect ≈ 4)", shown.join(", ")),
    )
}

fn c9_lengths() -> Outcome {
    let mut worst = 0.0f64;
    let mut worst_ratio = 0.0f64;
    let mut prev = xm(2).unwrap();
    for m in 2..=1_000_000i64 {
        let v = xm(m).unwrap();
        worst = worst.max((v.l - 2.0 * (m as f64).acosh()).abs());
        if m >= 100 {
            let ratio = (v.l - prev.l) * v.x.sqrt() / 4.0;
            worst_ratio = worst_ratio.max((ratio - 1.0).abs());
        }
        prev = v;
    }
    outcome(
        worst <= 1e-12 && worst_ratio <= 0.01,
        format!("max |log x_m − 2 arccosh m| = {worst:.1e} (tol 1e-12); max |spacing ratio − 1| = {worst_ratio:.2e} (tol 0.01)"),
    )
}

fn c10_r_search() -> Outcome {
    let start = Instant::now();
    let t = 2.0;
    let m = 10.0;
    let group = GroupParams::new(2, 5).unwrap();
    let spec = build_length_spectrum(group, 12, 12, WeightMode::ZeroForm, 0).unwrap();
    let mut lengths = lengths_up_to(&spec.geodesics(), 5.0 * t);
    lengths.truncate(8);
    let r = r_search(&lengths, m, t).unwrap();
    let worst_cos = lengths.iter().map(|&l| (r * l).cos()).fold(f64::INFINITY, f64::min);
    let cap = m * (5.0 * t).exp().exp();
    let (fast, time) = within(start.elapsed(), 10.0);
    outcome(
        worst_cos >= 0.5 && r >= m && r <= cap && fast,
        format!("{} lengths, R = {r:.6}, min cos(Rl) = {worst_cos:.4}, {time}", lengths.len()),
    )
}

fn window_by_quadrature(lambda: f64, t: f64, beta: f64) -> Complex64 {
    let b = t.powf(beta);
    let step = (0.02 / (1.0 + lambda)).min(b / 100.0);
    let w = |s: f64| 1.0 - (s - 2.0 * t).abs() / b;
    let part = |f: fn(f64) -> f64| {
        simpson(|s| w(s) * f(lambda * s), 2.0 * t - b, 2.0 * t, step)
            + simpson(|s| w(s) * f(lambda * s), 2.0 * t, 2.0 * t + b, step)
    };
    Complex64::new(part(f64::cos), part(f64::sin))
}

fn c11_oscillatory_window() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let lambda = rng.random_range(0.0..3.0);
        let t = rng.random_range(1.0..30.0);
        let beta = rng.random_range(0.1..1.0);
        let closed = oscillatory_window(lambda, t, beta).0;
        worst = worst.max((closed - window_by_quadrature(lambda, t, beta)).norm());
    }
    let mut violations = 0;
    for i in 0..100 {
        for j in 0..10 {
            for k in 0..10 {
                let lambda = i as f64 * 0.05;
                let t = 1.0 + 50.0 * j as f64;
                let beta = 0.1 + 0.1 * k as f64;
                if !oscillatory_window(lambda, t, beta).1 {
                    violations += 1;
                }
            }
        }
    }
    outcome(
        worst <= 1e-8 && violations == 0,
        format!(
            "closed form vs quadrature {worst:.1e} (tol 1e-8, 100 points); {violations} bound violations on 10^4 grid"
        ),
    )
}

fn c12_second_moment() -> Outcome {
    let group = GroupParams::new(2, 5).unwrap();
    let spec = build_length_spectrum(group, 40, 12, WeightMode::ZeroForm, 0).unwrap();
    let beta = 0.8;
    let mut pass = true;
    let mut parts = Vec::new();
    for t in [20.0, 50.0, 100.0, 200.0f64] {
        let alpha = 2.0 * beta * t.ln() - C_SPLIT;
        let m = windowed_second_moment(&spec, alpha, beta, t).unwrap();
        let ratio = if m.i1 > 0.0 { m.i2.abs() / m.i1 } else { 0.0 };
        pass &= m.in_regime && m.split_holds() == Some(true) && m.relative_gap() <= 1e-6;
        parts.push(format!("T={t}: {} terms, |I2|/I1 = {ratio:.2e}, gap {:.1e}", m.terms, m.relative_gap()));
    }
    outcome(pass, format!("C_split = {C_SPLIT}; {} (tol 1/100, 1e-6)", parts.join("; ")))
}

fn c13_jensen() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut violations = 0;
    let mut mismatches = 0;
    let mut instances = 0;
    while instances < 100 {
        let degree = rng.random_range(2..=8);
        let roots: Vec<Complex64> =
            (0..degree).map(|_| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect();
        let z0 = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let r = rng.random_range(0.3..1.5);
        // keep roots off the counting circle and away from the centre
        if roots.iter().any(|&w| ((w - z0).norm() - r).abs() < 1e-3 || (w - z0).norm() < 1e-3) {
            continue;
        }
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for &w in &roots {
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * w;
            }
            coeffs = next;
        }
        let disk = ComplexWindow::disk(z0, r).unwrap();
        let f = HolomorphicSampler::polynomial(coeffs, ComplexWindow::disk(z0, 2.0 * r).unwrap());
        let count = argument_principle_zeros(&f, &disk, 512).unwrap();
        let inside = roots.iter().filter(|&&w| (w - z0).norm() < r).count();
        if count != inside {
            mismatches += 1;
        }
        let bound = jensen_disk_bound(&f, z0, r, 2.0 * r, 2048).unwrap();
        if bound < count as f64 {
            violations += 1;
        }
        instances += 1;
    }
    let (fast, time) = within(start.elapsed(), 30.0);
    outcome(
        violations == 0 && mismatches == 0 && fast,
        format!("{violations} violations, {mismatches} count mismatches vs root oracle over {instances} polynomials, {time}"),
    )
}

fn c14_substitutes() -> Outcome {
    // (a) planted power laws
    let mut worst_fit = 0.0f64;
    for &e in &[0.25, 0.5, 1.0, 1.5] {
        let ladder: Vec<(f64, f64)> = (0..6)
            .map(|k| {
                let h = 0.1 * 0.5f64.powi(k);
                (h, 3.0 * h.powf(-e))
            })
            .collect();
        let fit = deviation_exponent(&ladder).unwrap();
        worst_fit = worst_fit.max((fit.exponent - e).abs());
    }
    // (b) t^{2β s}·t^{1+ε} = t^{β(2Pr−1)} at s = bound, for several t
    let mut worst_chain = 0.0f64;
    for &(pr, beta, eps) in &[(2.0, 1.0, 0.1), (1.0, 1.0, 0.5), (1.7, 0.8, 0.3), (3.0, 0.5, 0.2)] {
        let s = q3arithm_bound(pr, beta, eps).unwrap();
        for &t in &[10.0f64, 1e3, 1e6] {
            let lhs = (2.0 * beta * s + 1.0 + eps) * t.ln();
            let rhs = beta * (2.0 * pr - 1.0) * t.ln();
            worst_chain = worst_chain.max((lhs - rhs).abs() / rhs.abs().max(1.0));
        }
    }
    // (c) three-part split on a Weyl-density surrogate
    let big_r = 1e3f64;
    let theta = big_r.ln();
    let sigma = (5.0 * theta).powf(-0.5);
    let t = 3.0;
    let f = (t * theta).powf(0.6) / sigma;
    let surrogate = weyl_surrogate(big_r - 200.0, big_r + 200.0, theta, 0.2, 14).unwrap();
    let parts = tail_bounds(&surrogate, sigma, f, big_r, t).unwrap();
    let pass = worst_fit <= 1e-12 && worst_chain <= 1e-12 && parts.part_iii <= 1.0 && parts.centre_dominates();
    outcome(
        pass,
        format!(
            "(a) exponent err {worst_fit:.1e} (1e-12); (b) chain defect {worst_chain:.1e}; \
             (c) I = {:.2e}, II = {:.2e}, III = {:.2e} (III ≤ 1, II ≥ 10·(I+III))",
            parts.part_i, parts.part_ii, parts.part_iii
        ),
    )
}

fn main() -> ExitCode {
    let solve_start = Instant::now();
    let cos_spec = damped_spectrum(&cosine_profile(), 256).unwrap();
    let solve_time = solve_start.elapsed();

    let criteria: Vec<(u32, &str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, "constant-damping exactness", Box::new(c1_constant_damping)),
        (2, "Weyl law on the circle", Box::new(|| c2_weyl(&cos_spec, solve_time))),
        (3, "band and reflection symmetry", Box::new(|| c3_band(&cos_spec))),
        (4, "Lebeau decay rate", Box::new(c4_lebeau)),
        (5, "concentration near the mean", Box::new(|| c5_concentration(&cos_spec))),
        (6, "pressure, entropy, Legendre, Abramov, Karp", Box::new(c6_pressure_entropy)),
        (7, "Monte Carlo large deviations", Box::new(c7_large_deviations)),
        (8, "cohomological averaging", Box::new(c8_averaging)),
        (9, "arithmetic lengths and spacing", Box::new(c9_lengths)),
        (10, "R-search", Box::new(c10_r_search)),
        (11, "oscillatory window", Box::new(c11_oscillatory_window)),
        (12, "second-moment split", Box::new(c12_second_moment)),
        (13, "Jensen dominance", Box::new(c13_jensen)),
        (14, "desk-scale substitutes", Box::new(c14_substitutes)),
    ];

    let mut unexpected = 0;
    let mut passed = 0;
    for (id, name, run) in &criteria {
        let o = run();
        let known = KNOWN_FAILURES.contains(id);
        let tag = match (o.pass, known) {
            (true, false) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "FAIL (known)",
            (true, true) => "PASS (unexpected)",
        };
        println!("{tag:<17} {id:>2}  {name}: {}", o.detail);
        passed += o.pass as usize;
        if o.pass == known {
            unexpected += 1;
        }
    }
    println!("{passed}/{} criteria pass; {unexpected} unexpected outcomes", criteria.len());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
