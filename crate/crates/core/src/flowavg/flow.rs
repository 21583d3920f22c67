use std::fmt;
use std::sync::Arc;

use super::FlowError;

pub type Mat2 = [[f64; 2]; 2];

/// Unit tangent vector of the hyperbolic plane in the group model, `g ∈ SL(2, ℝ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowPoint {
    g: Mat2,
}

pub const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

fn det(g: &Mat2) -> f64 {
    g[0][0] * g[1][1] - g[0][1] * g[1][0]
}

impl FlowPoint {
    /// Accepts any matrix of positive determinant and rescales it to determinant 1.
    pub fn new(g: Mat2) -> Result<Self, FlowError> {
        let d = det(&g);
        if !(d > 0.0 && d.is_finite()) || g.iter().flatten().any(|v| !v.is_finite()) {
            return Err(FlowError::InvalidPoint(format!("det = {d}")));
        }
        Ok(Self::renormalized(g))
    }

    pub fn identity() -> Self {
        Self { g: IDENTITY }
    }

    fn renormalized(g: Mat2) -> Self {
        let s = det(&g).sqrt();
        Self { g: [[g[0][0] / s, g[0][1] / s], [g[1][0] / s, g[1][1] / s]] }
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.g
    }

    pub fn det(&self) -> f64 {
        det(&self.g)
    }
}

/// Largest flow time accepted before `e^{t/2}` risks overflow in products.
pub const MAX_FLOW_TIME: f64 = 600.0;

/// `G^t(p) = p·diag(e^{t/2}, e^{−t/2})`, renormalized to determinant 1.
pub fn geodesic_flow(p: &FlowPoint, t: f64) -> Result<FlowPoint, FlowError> {
    if !t.is_finite() || t.abs() > MAX_FLOW_TIME {
        return Err(FlowError::FlowTime(t));
    }
    let (a, b) = ((t / 2.0).exp(), (-t / 2.0).exp());
    let g = p.g;
    Ok(FlowPoint::renormalized([[g[0][0] * a, g[0][1] * b], [g[1][0] * a, g[1][1] * b]]))
}

/// A real function on the unit tangent bundle, built from matrix coefficients.
#[derive(Clone)]
pub struct Observable {
    name: String,
    f: Arc<dyn Fn(&Mat2) -> f64 + Send + Sync>,
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Observable").field("name", &self.name).finish()
    }
}

impl Observable {
    pub fn new(name: impl Into<String>, f: impl Fn(&Mat2) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), f: Arc::new(f) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, p: &FlowPoint) -> f64 {
        (self.f)(&p.g)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const({c})"), move |_| c)
    }

    /// `g₁₁²`
    pub fn top_left_squared() -> Self {
        Self::new("g11^2", |g| g[0][0] * g[0][0])
    }

    /// `g₁₁g₁₂ / (1 + ‖g‖²)`, bounded by 1/2.
    pub fn bounded_ratio() -> Self {
        Self::new("g11*g12/(1+|g|^2)", |g| {
            let norm2: f64 = g.iter().flatten().map(|v| v * v).sum();
            g[0][0] * g[0][1] / (1.0 + norm2)
        })
    }

    /// `cos(g₁₁) + ½ sin(g₂₁ g₁₂)`
    pub fn oscillating() -> Self {
        Self::new("cos(g11)+sin(g21*g12)/2", |g| g[0][0].cos() + 0.5 * (g[1][0] * g[0][1]).sin())
    }

    /// `2 + cos(g₁₁)·sin(g₁₂)`, positive (between 1 and 3).
    pub fn positive_oscillating() -> Self {
        Self::new("2+cos(g11)sin(g12)", |g| 2.0 + g[0][0].cos() * g[0][1].sin())
    }

    pub fn scaled(&self, c: f64) -> Self {
        let f = self.f.clone();
        Self::new(format!("{c}*{}", self.name), move |g| c * f(g))
    }

    pub fn plus(&self, other: &Self) -> Self {
        let (f, h) = (self.f.clone(), other.f.clone());
        Self::new(format!("{}+{}", self.name, other.name), move |g| f(g) + h(g))
    }
}

/// `h(g) = (g₁₁² − g₁₂²)/(g₁₁² + g₁₂²)`, whose flow derivative is `1 − h²`.
///
/// Along the flow `h(G^s p) = tanh(s + ½ log(g₁₁²/g₁₂²))`, so `|h| ≤ 1`.
pub fn tanh_primitive() -> (Observable, Observable) {
    let h = Observable::new("tanh-primitive", |g| {
        let (a, b) = (g[0][0] * g[0][0], g[0][1] * g[0][1]);
        (a - b) / (a + b)
    });
    let dh = Observable::new("tanh-coboundary", |g| {
        let (a, b) = (g[0][0] * g[0][0], g[0][1] * g[0][1]);
        4.0 * a * b / ((a + b) * (a + b))
    });
    (h, dh)
}

/// CSV `t,g11,g12,g21,g22,q_value` along `G^{t}p` for `t = t0 + k·step`.
pub fn trajectory_csv(q: &Observable, p: &FlowPoint, t0: f64, t1: f64, step: f64) -> Result<String, FlowError> {
    if !(step > 0.0) || !(t1 >= t0) {
        return Err(FlowError::InvalidArgument("need step > 0 and t1 ≥ t0".into()));
    }
    let n = ((t1 - t0) / step).round() as usize;
    let mut out = String::from("t,g11,g12,g21,g22,q_value\n");
    for k in 0..=n {
        let t = t0 + k as f64 * step;
        let pt = geodesic_flow(p, t)?;
        let g = pt.matrix();
        out.push_str(&format!("{t:?},{:?},{:?},{:?},{:?},{:?}\n", g[0][0], g[0][1], g[1][0], g[1][1], q.eval(&pt)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn identity_flows_to_diagonal() {
        let g = geodesic_flow(&FlowPoint::identity(), 2.0).unwrap();
        let m = g.matrix();
        assert!((m[0][0] - E).abs() < 1e-15 && (m[1][1] - 1.0 / E).abs() < 1e-15);
        assert_eq!(m[0][1], 0.0);
    }

    #[test]
    fn unipotent_point() {
        let p = FlowPoint::new([[1.0, 1.0], [0.0, 1.0]]).unwrap();
        let m = *geodesic_flow(&p, 1.0).unwrap().matrix();
        let (a, b) = (0.5f64.exp(), (-0.5f64).exp());
        let expect = [[a, b], [0.0, b]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((m[i][j] - expect[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn long_flow_errors() {
        assert!(geodesic_flow(&FlowPoint::identity(), 601.0).is_err());
        assert!(geodesic_flow(&FlowPoint::identity(), -600.0).is_ok());
        assert!(FlowPoint::new([[1.0, 0.0], [0.0, -1.0]]).is_err());
    }

    #[test]
    fn tanh_primitive_derivative() {
        let (h, dh) = tanh_primitive();
        let p = FlowPoint::new([[0.7, 1.3], [-0.4, 0.6]]).unwrap();
        let step = 1e-5;
        let fd =
            (h.eval(&geodesic_flow(&p, step).unwrap()) - h.eval(&geodesic_flow(&p, -step).unwrap())) / (2.0 * step);
        assert!((fd - dh.eval(&p)).abs() < 1e-9);
    }

    #[test]
    fn trajectory_rows() {
        let csv = trajectory_csv(&Observable::constant(1.0), &FlowPoint::identity(), 0.0, 1.0, 0.25).unwrap();
        assert_eq!(csv.lines().count(), 6);
        assert!(csv.starts_with("t,g11,g12,g21,g22,q_value\n0.0,1.0,0.0,0.0,1.0,1.0"));
    }
}
