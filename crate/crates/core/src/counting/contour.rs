use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::CountError;

/// A rectangle or a disk in the complex plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ComplexWindow {
    Rect { center: Complex64, half_width: f64, half_height: f64 },
    Disk { center: Complex64, radius: f64 },
}

impl ComplexWindow {
    pub fn rect(center: Complex64, half_width: f64, half_height: f64) -> Result<Self, CountError> {
        if !(half_width > 0.0 && half_height > 0.0) || !center.is_finite() {
            return Err(CountError::InvalidWindow(format!("half sizes {half_width} × {half_height}")));
        }
        Ok(Self::Rect { center, half_width, half_height })
    }

    pub fn disk(center: Complex64, radius: f64) -> Result<Self, CountError> {
        if !(radius > 0.0) || !center.is_finite() {
            return Err(CountError::InvalidWindow(format!("radius {radius}")));
        }
        Ok(Self::Disk { center, radius })
    }

    /// `Ω = [½ − cħ, ½ + cħ] × [αħ, top·ħ]`, the semiclassical counting window.
    pub fn semiclassical(hbar: f64, c: f64, alpha: f64, top: f64) -> Result<Self, CountError> {
        if !(top > alpha) {
            return Err(CountError::InvalidWindow(format!("need top > α (α = {alpha}, top = {top})")));
        }
        Self::rect(Complex64::new(0.5, 0.5 * (alpha + top) * hbar), c * hbar, 0.5 * (top - alpha) * hbar)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        match *self {
            Self::Rect { center, half_width, half_height } => {
                (z.re - center.re).abs() <= half_width && (z.im - center.im).abs() <= half_height
            }
            Self::Disk { center, radius } => (z - center).norm() <= radius,
        }
    }

    /// `n` points on the boundary, counterclockwise, equally spaced in arc length.
    pub fn boundary(&self, n: usize) -> Vec<Complex64> {
        match *self {
            Self::Disk { center, radius } => {
                (0..n).map(|k| center + Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64)).collect()
            }
            Self::Rect { center, half_width: w, half_height: h } => {
                // counterclockwise from the lower-right corner
                let corners =
                    [Complex64::new(w, -h), Complex64::new(w, h), Complex64::new(-w, h), Complex64::new(-w, -h)];
                let sides = [2.0 * h, 2.0 * w, 2.0 * h, 2.0 * w];
                let perimeter = 4.0 * (w + h);
                (0..n)
                    .map(|k| {
                        let mut s = perimeter * k as f64 / n as f64;
                        let mut i = 0;
                        while i < 3 && s >= sides[i] {
                            s -= sides[i];
                            i += 1;
                        }
                        let dir = (corners[(i + 1) % 4] - corners[i]) / sides[i];
                        center + corners[i] + dir * s
                    })
                    .collect()
            }
        }
    }
}

/// A function declared holomorphic on a window with a margin.
#[derive(Clone)]
pub struct HolomorphicSampler {
    f: Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>,
    pub domain: ComplexWindow,
}

impl std::fmt::Debug for HolomorphicSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HolomorphicSampler").field("domain", &self.domain).finish()
    }
}

impl HolomorphicSampler {
    pub fn new(f: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static, domain: ComplexWindow) -> Self {
        Self { f: Arc::new(f), domain }
    }

    /// A polynomial from its coefficients, constant term first.
    pub fn polynomial(coeffs: Vec<Complex64>, domain: ComplexWindow) -> Self {
        Self::new(move |z| coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c), domain)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.f)(z)
    }
}

/// `|f|` below this fraction of its boundary maximum is treated as a zero on the contour.
pub const CONTOUR_FLOOR: f64 = 1e-12;
/// Winding numbers are rounded only within this distance of an integer.
pub const WINDING_TOLERANCE: f64 = 0.01;
const MAX_REFINEMENTS: usize = 4;

/// Winding number of `f` along the boundary of the window.
///
/// Doubles the sampling while any phase step exceeds π/2 or the winding is not within
/// 0.01 of an integer, up to four times.
pub fn argument_principle_zeros(
    f: &HolomorphicSampler,
    contour: &ComplexWindow,
    n_points: usize,
) -> Result<usize, CountError> {
    if n_points < 8 {
        return Err(CountError::InvalidArgument(format!("need at least 8 contour points, got {n_points}")));
    }
    let mut n = n_points;
    let mut last = f64::NAN;
    for _ in 0..=MAX_REFINEMENTS {
        let values: Vec<Complex64> = contour.boundary(n).into_iter().map(|z| f.eval(z)).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CountError::NonFinite);
        }
        let top = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let bottom = values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        if !(bottom > CONTOUR_FLOOR * top) {
            return Err(CountError::ZeroOnContour { min: bottom, max: top });
        }
        let mut total = 0.0;
        let mut coarse = false;
        for k in 0..n {
            let step = (values[(k + 1) % n] / values[k]).arg();
            coarse |= step.abs() > 0.5 * PI;
            total += step;
        }
        last = total / (2.0 * PI);
        let nearest = last.round();
        if !coarse && (last - nearest).abs() <= WINDING_TOLERANCE {
            if nearest < 0.0 {
                return Err(CountError::NotHolomorphic(last));
            }
            return Ok(nearest as usize);
        }
        n *= 2;
    }
    Err(CountError::NonIntegerWinding { winding: last, points: n / 2 })
}

/// `(log max_{|z−z0|=R}|f| − log|f(z0)|)/log(R/r)`, an upper bound for the number of zeros
/// in the closed disk of radius `r` (Jensen). The maximum is taken over `n_boundary` samples.
pub fn jensen_disk_bound(
    f: &HolomorphicSampler,
    z0: Complex64,
    r: f64,
    r_big: f64,
    n_boundary: usize,
) -> Result<f64, CountError> {
    if !(r > 0.0 && r_big > r) || n_boundary < 8 {
        return Err(CountError::InvalidArgument(format!(
            "need 0 < r < R and n ≥ 8 (r = {r}, R = {r_big}, n = {n_boundary})"
        )));
    }
    let f0 = f.eval(z0).norm();
    if !(f0 > 1e-300) {
        return Err(CountError::CentreZero(f0));
    }
    let circle = ComplexWindow::Disk { center: z0, radius: r_big };
    let top = circle.boundary(n_boundary).into_iter().map(|z| f.eval(z).norm()).fold(0.0, f64::max);
    if !top.is_finite() {
        return Err(CountError::NonFinite);
    }
    Ok(((top.ln() - f0.ln()) / (r_big / r).ln()).max(0.0))
}

/// Ratio `R/r` of the outer to the inner disks in [`jensen_rect_bound`].
pub const JENSEN_RADIUS_RATIO: f64 = 2.0;

/// Jensen bound on a rectangle via the four disks circumscribing its quadrants.
pub fn jensen_rect_bound(f: &HolomorphicSampler, window: &ComplexWindow, n_boundary: usize) -> Result<f64, CountError> {
    let ComplexWindow::Rect { center, half_width: w, half_height: h } = *window else {
        return Err(CountError::InvalidArgument("jensen_rect_bound needs a rectangle".into()));
    };
    let r = 0.5 * w.hypot(h);
    let mut total = 0.0;
    for (sx, sy) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
        let c = center + Complex64::new(0.5 * sx * w, 0.5 * sy * h);
        total += jensen_disk_bound(f, c, r, JENSEN_RADIUS_RATIO * r, n_boundary)?;
    }
    Ok(total)
}
