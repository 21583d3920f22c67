use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;

use super::DwError;

/// Damping on the circle of length 2π, as a finite trigonometric polynomial
///
/// `a(x) = mean + Σ_k cos[k-1]·cos(kx) + sin[k-1]·sin(kx)`
///
/// plus an optional twist coefficient `c` for the 1-form model `q(x, ξ) = cξ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DampingProfile {
    pub mean: f64,
    #[serde(rename = "cos", default)]
    pub cos_coeffs: Vec<f64>,
    #[serde(rename = "sin", default)]
    pub sin_coeffs: Vec<f64>,
    #[serde(default)]
    pub twist: f64,
}

impl DampingProfile {
    pub fn new(mean: f64, cos_coeffs: Vec<f64>, sin_coeffs: Vec<f64>, twist: f64) -> Result<Self, DwError> {
        let profile = Self { mean, cos_coeffs, sin_coeffs, twist };
        profile.validate()?;
        Ok(profile)
    }

    pub fn constant(a0: f64) -> Self {
        Self { mean: a0, cos_coeffs: Vec::new(), sin_coeffs: Vec::new(), twist: 0.0 }
    }

    /// `mean + amp·cos x`
    pub fn cosine(mean: f64, amp: f64) -> Self {
        Self { mean, cos_coeffs: vec![amp], sin_coeffs: Vec::new(), twist: 0.0 }
    }

    /// Pure twist mode: zero damping, 1-form `c dx`.
    pub fn twist_only(c: f64) -> Self {
        Self { mean: 0.0, cos_coeffs: Vec::new(), sin_coeffs: Vec::new(), twist: c }
    }

    pub fn validate(&self) -> Result<(), DwError> {
        let all_finite = self.mean.is_finite()
            && self.twist.is_finite()
            && self.cos_coeffs.iter().chain(&self.sin_coeffs).all(|c| c.is_finite());
        if all_finite {
            Ok(())
        } else {
            Err(DwError::InvalidProfile("non-finite coefficient".into()))
        }
    }

    pub fn from_json(text: &str) -> Result<Self, DwError> {
        let profile: Self = serde_json::from_str(text).map_err(|e| DwError::InvalidProfile(e.to_string()))?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }

    /// Highest frequency with a nonzero coefficient.
    pub fn degree(&self) -> usize {
        let last = |v: &[f64]| v.iter().rposition(|&c| c != 0.0).map_or(0, |i| i + 1);
        last(&self.cos_coeffs).max(last(&self.sin_coeffs))
    }

    pub fn has_damping(&self) -> bool {
        self.mean != 0.0 || self.degree() > 0
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut value = self.mean;
        for (k, c) in self.cos_coeffs.iter().enumerate() {
            value += c * ((k + 1) as f64 * x).cos();
        }
        for (k, s) in self.sin_coeffs.iter().enumerate() {
            value += s * ((k + 1) as f64 * x).sin();
        }
        value
    }

    /// Coefficient `â(j)` in `a(x) = Σ_j â(j) e^{ijx}`.
    pub fn fourier_coeff(&self, j: i64) -> Complex64 {
        if j == 0 {
            return Complex64::new(self.mean, 0.0);
        }
        let k = j.unsigned_abs() as usize;
        let c = self.cos_coeffs.get(k - 1).copied().unwrap_or(0.0);
        let s = self.sin_coeffs.get(k - 1).copied().unwrap_or(0.0);
        if j > 0 {
            Complex64::new(c / 2.0, -s / 2.0)
        } else {
            Complex64::new(c / 2.0, s / 2.0)
        }
    }

    /// Average of `a` over the circle.
    pub fn mean_value(&self) -> f64 {
        self.mean
    }

    /// Upper bound on `sup |a''|` from the coefficients.
    fn second_derivative_bound(&self) -> f64 {
        let sum = |v: &[f64]| v.iter().enumerate().map(|(k, c)| ((k + 1) * (k + 1)) as f64 * c.abs()).sum::<f64>();
        sum(&self.cos_coeffs) + sum(&self.sin_coeffs)
    }

    /// Min and max of `a` on an `npts` uniform grid.
    pub fn grid_extrema(&self, npts: usize) -> (f64, f64) {
        let h = 2.0 * PI / npts as f64;
        (0..npts)
            .map(|i| self.eval(i as f64 * h))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    /// Certified bracket `[lo, hi] ⊇ [min a, max a]` from a 10⁴-point grid.
    ///
    /// At an interior extremum `a' = 0`, so the nearest grid node is off by at most
    /// `½·sup|a''|·(h/2)²`.
    pub fn extrema(&self) -> (f64, f64) {
        const NPTS: usize = 10_000;
        let (lo, hi) = self.grid_extrema(NPTS);
        let h = 2.0 * PI / NPTS as f64;
        let slack = 0.5 * self.second_derivative_bound() * (h / 2.0).powi(2);
        (lo - slack, hi + slack)
    }

    /// Stable short hash of the coefficients, used to tag spectra.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.mean.to_le_bytes());
        hasher.update((self.cos_coeffs.len() as u64).to_le_bytes());
        for c in &self.cos_coeffs {
            hasher.update(c.to_le_bytes());
        }
        hasher.update((self.sin_coeffs.len() as u64).to_le_bytes());
        for s in &self.sin_coeffs {
            hasher.update(s.to_le_bytes());
        }
        hasher.update(self.twist.to_le_bytes());
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourier_coefficients_of_cos_and_sin() {
        let p = DampingProfile::new(0.5, vec![0.4], vec![0.2], 0.0).unwrap();
        assert_eq!(p.fourier_coeff(0), Complex64::new(0.5, 0.0));
        assert_eq!(p.fourier_coeff(1), Complex64::new(0.2, -0.1));
        assert_eq!(p.fourier_coeff(-1), Complex64::new(0.2, 0.1));
        assert_eq!(p.fourier_coeff(2), Complex64::new(0.0, 0.0));
        // resynthesis
        for &x in &[0.0, 0.7, 2.5, 5.9] {
            let v: Complex64 = (-2..=2).map(|j| p.fourier_coeff(j) * Complex64::from_polar(1.0, j as f64 * x)).sum();
            assert!((v.re - p.eval(x)).abs() < 1e-14 && v.im.abs() < 1e-14);
        }
    }

    #[test]
    fn degree_ignores_trailing_zeros() {
        let p = DampingProfile::new(1.0, vec![0.0, 0.3, 0.0], vec![], 0.0).unwrap();
        assert_eq!(p.degree(), 2);
        assert_eq!(DampingProfile::constant(0.5).degree(), 0);
    }

    #[test]
    fn extrema_bracket_true_values() {
        let p = DampingProfile::cosine(0.5, 0.4);
        let (lo, hi) = p.extrema();
        assert!(lo <= 0.1 && 0.1 - lo < 1e-6);
        assert!(hi >= 0.9 && hi - 0.9 < 1e-6);
        // off-grid extremum
        let q = DampingProfile::new(0.0, vec![0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0], 0.0).unwrap();
        let (lo, hi) = q.extrema();
        assert!(lo <= -1.0 && lo > -1.0 - 1e-6);
        assert!(hi >= 1.0 && hi < 1.0 + 1e-6);
    }

    #[test]
    fn json_round_trip_uses_short_field_names() {
        let p = DampingProfile::new(0.5, vec![0.4], vec![], 0.1).unwrap();
        let text = p.to_json();
        assert!(text.contains("\"cos\"") && text.contains("\"twist\""));
        assert_eq!(DampingProfile::from_json(&text).unwrap(), p);
        assert!(DampingProfile::from_json(r#"{"mean":1,"bogus":2}"#).is_err());
    }

    #[test]
    fn hash_distinguishes_profiles() {
        let a = DampingProfile::constant(0.5);
        let b = DampingProfile::constant(0.5000001);
        assert_ne!(a.content_hash(), b.content_hash());
        assert_eq!(a.content_hash(), DampingProfile::constant(0.5).content_hash());
    }
}
