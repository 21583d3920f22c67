use serde::Serialize;

use super::{geodesic_flow, FlowError, FlowPoint, Observable};

/// Simpson step used where an operation's signature has no quadrature step.
pub const DEFAULT_QUAD_STEP: f64 = 1e-3;

/// Composite Simpson rule on `[a, b]` with an even number of panels of width at most `step`.
pub fn simpson(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, step: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let mut n = ((b - a).abs() / step).ceil() as usize;
    n = n.max(2);
    if n % 2 == 1 {
        n += 1;
    }
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + k as f64 * h);
    }
    sum * h / 3.0
}

fn along<'a>(q: &'a Observable, p: &'a FlowPoint) -> impl Fn(f64) -> f64 + 'a {
    move |s| q.eval(&geodesic_flow(p, s).expect("flow time checked by caller"))
}

fn check_window(t: f64, step: f64) -> Result<(), FlowError> {
    if !(t > 0.0) || !(step > 0.0) {
        return Err(FlowError::InvalidArgument(format!("need T > 0 and step > 0 (T = {t}, step = {step})")));
    }
    if t / 2.0 + 1.0 > super::MAX_FLOW_TIME {
        return Err(FlowError::FlowTime(t / 2.0));
    }
    Ok(())
}

/// `⟨q⟩_T(p) = (1/T)∫_{−T/2}^{T/2} q(G^s p) ds`, Simpson with panel width at most `step`.
pub fn birkhoff_average(q: &Observable, p: &FlowPoint, t: f64, step: f64) -> Result<f64, FlowError> {
    check_window(t, step)?;
    if step > t / 100.0 {
        return Err(FlowError::InvalidArgument(format!("step {step} exceeds T/100")));
    }
    Ok(simpson(along(q, p), -t / 2.0, t / 2.0, step) / t)
}

/// `g_T = ½∫_0^{T/2}(2s/T − 1) q∘G^s ds + ½∫_{−T/2}^0 (2s/T + 1) q∘G^s ds`.
pub fn averaging_corrector(q: &Observable, p: &FlowPoint, t: f64, step: f64) -> Result<f64, FlowError> {
    check_window(t, step)?;
    let f = along(q, p);
    let right = simpson(|s| (2.0 * s / t - 1.0) * f(s), 0.0, t / 2.0, step);
    let left = simpson(|s| (2.0 * s / t + 1.0) * f(s), -t / 2.0, 0.0, step);
    Ok(0.5 * (right + left))
}

/// Signed `(g_T(G^h p) − g_T(G^{−h} p))/(2h) − (q(p) − ⟨q⟩_T(p))`.
pub fn cohomology_defect(
    q: &Observable,
    p: &FlowPoint,
    t: f64,
    fd_step: f64,
    quad_step: f64,
) -> Result<f64, FlowError> {
    if !(1e-6..=1e-3).contains(&fd_step) {
        return Err(FlowError::InvalidArgument(format!("fd_step {fd_step} outside [1e-6, 1e-3]")));
    }
    let fwd = averaging_corrector(q, &geodesic_flow(p, fd_step)?, t, quad_step)?;
    let bwd = averaging_corrector(q, &geodesic_flow(p, -fd_step)?, t, quad_step)?;
    let derivative = (fwd - bwd) / (2.0 * fd_step);
    let avg = simpson(along(q, p), -t / 2.0, t / 2.0, quad_step) / t;
    Ok(derivative - (q.eval(p) - avg))
}

/// `|{p₀, g_T} − (q − ⟨q⟩_T)|` at `p` with a central difference along the flow.
pub fn cohomology_residual(q: &Observable, p: &FlowPoint, t: f64, fd_step: f64) -> Result<f64, FlowError> {
    cohomology_defect(q, p, t, fd_step, DEFAULT_QUAD_STEP).map(f64::abs)
}

/// Root `𝒯` of `∫_0^𝒯 φ(G^s p) ds = (d−1)t`.
///
/// Marches Simpson panels along the trajectory (checking `φ > 0` at every node) until
/// the target is passed, then solves inside the last panel by Newton's method.
pub fn time_change(phi: &Observable, p: &FlowPoint, t: f64, d_minus_1: f64) -> Result<f64, FlowError> {
    if !(d_minus_1 > 0.0) || !t.is_finite() {
        return Err(FlowError::InvalidArgument(format!("t = {t}, d−1 = {d_minus_1}")));
    }
    let target = (d_minus_1 * t).abs();
    if target == 0.0 {
        return Ok(0.0);
    }
    let dir = t.signum();
    let f = |s: f64| -> Result<f64, FlowError> {
        let v = phi.eval(&geodesic_flow(p, s)?);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(FlowError::NonPositive { s, value: v })
        }
    };
    let h = DEFAULT_QUAD_STEP;
    let (mut s0, mut acc) = (0.0f64, 0.0f64);
    let mut f0 = f(0.0)?;
    loop {
        let fm = f(s0 + dir * h)?;
        let f1 = f(s0 + 2.0 * dir * h)?;
        let panel = h / 3.0 * (f0 + 4.0 * fm + f1);
        if acc + panel >= target {
            break;
        }
        acc += panel;
        s0 += 2.0 * dir * h;
        f0 = f1;
    }
    // Newton on x ↦ acc + ∫_{s0}^{x} φ − target inside the panel, bisection as fallback
    let partial = |x: f64| -> Result<f64, FlowError> {
        let mut err = None;
        let v = simpson(
            |s| match f(s) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    f64::NAN
                }
            },
            s0,
            x,
            h / 16.0,
        );
        err.map_or(Ok(v * dir), Err)
    };
    let (mut lo, mut hi) = (0.0f64, 2.0 * h);
    let mut off = h;
    for _ in 0..100 {
        let x = s0 + dir * off;
        let g = acc + partial(x)? - target;
        if g.abs() <= 1e-14 * target.max(1.0) {
            break;
        }
        if g > 0.0 {
            hi = off;
        } else {
            lo = off;
        }
        let newton = off - g / f(x)?;
        off = if newton >= lo && newton <= hi { newton } else { 0.5 * (lo + hi) };
    }
    Ok(s0 + dir * off)
}

/// The time-changed corrector with `τ = 𝒯_p(T/2)`:
/// `½∫_0^τ (s/τ − 1) q∘G^s ds + ½∫_{−τ}^0 (s/τ + 1) q∘G^s ds`.
pub fn averaging_corrector_variable(
    q: &Observable,
    phi: &Observable,
    p: &FlowPoint,
    t: f64,
    d_minus_1: f64,
) -> Result<f64, FlowError> {
    check_window(t, DEFAULT_QUAD_STEP)?;
    let tau = time_change(phi, p, t / 2.0, d_minus_1)?;
    if tau + 1.0 > super::MAX_FLOW_TIME {
        return Err(FlowError::FlowTime(tau));
    }
    let f = along(q, p);
    let right = simpson(|s| (s / tau - 1.0) * f(s), 0.0, tau, DEFAULT_QUAD_STEP);
    let left = simpson(|s| (s / tau + 1.0) * f(s), -tau, 0.0, DEFAULT_QUAD_STEP);
    Ok(0.5 * (right + left))
}

/// Pieces of the time-changed cohomological identity at one point.
///
/// Differentiating the corrector along the flow gives exactly
/// `q − ⟨q⟩_{−τ,τ} − τ'/(2τ²)·∫_{−τ}^{τ} s·q∘G^s ds` with `τ' = φ(p)/φ(G^τ p) − 1`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct VariableIdentity {
    pub tau_plus: f64,
    pub tau_minus: f64,
    /// Central difference of the corrector along the flow.
    pub derivative: f64,
    pub q_value: f64,
    /// `⟨q⟩` over `[−τ, τ]`.
    pub avg_symmetric: f64,
    /// `⟨q⟩` over `[𝒯(−T/2), 𝒯(T/2)]`.
    pub avg_window: f64,
    /// `−τ'/(2τ²)·∫_{−τ}^{τ} s·q∘G^s ds`
    pub drift_term: f64,
    /// `|derivative − (q − avg_window)|`, the size of the remainder `r_T`.
    pub raw_residual: f64,
    /// `|derivative − (q − avg_symmetric + drift_term)|`
    pub corrected_residual: f64,
}

pub fn variable_identity(
    q: &Observable,
    phi: &Observable,
    p: &FlowPoint,
    t: f64,
    d_minus_1: f64,
    fd_step: f64,
) -> Result<VariableIdentity, FlowError> {
    let fwd = averaging_corrector_variable(q, phi, &geodesic_flow(p, fd_step)?, t, d_minus_1)?;
    let bwd = averaging_corrector_variable(q, phi, &geodesic_flow(p, -fd_step)?, t, d_minus_1)?;
    let derivative = (fwd - bwd) / (2.0 * fd_step);
    let tau_plus = time_change(phi, p, t / 2.0, d_minus_1)?;
    let tau_minus = time_change(phi, p, -t / 2.0, d_minus_1)?;
    let f = along(q, p);
    let avg_symmetric = simpson(&f, -tau_plus, tau_plus, DEFAULT_QUAD_STEP) / (2.0 * tau_plus);
    let avg_window = simpson(&f, tau_minus, tau_plus, DEFAULT_QUAD_STEP) / (tau_plus - tau_minus);
    let tau_dot = phi.eval(p) / phi.eval(&geodesic_flow(p, tau_plus)?) - 1.0;
    let moment = simpson(|s| s * f(s), -tau_plus, tau_plus, DEFAULT_QUAD_STEP);
    let drift_term = -tau_dot / (2.0 * tau_plus * tau_plus) * moment;
    let q_value = q.eval(p);
    Ok(VariableIdentity {
        tau_plus,
        tau_minus,
        derivative,
        q_value,
        avg_symmetric,
        avg_window,
        drift_term,
        raw_residual: (derivative - (q_value - avg_window)).abs(),
        corrected_residual: (derivative - (q_value - avg_symmetric + drift_term)).abs(),
    })
}
