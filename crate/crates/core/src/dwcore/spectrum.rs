use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use super::{DampingProfile, DwError};

/// What the values of a [`ComplexSpectrum`] parametrize.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumKind {
    /// Wave frequencies τ of the damped pencil.
    WaveTau,
    /// Trace-formula parameters r with λ = 1/4 + r².
    SpectralR,
    /// Semiclassical energies z = (ħτ)²/2.
    SemiclassicalZ,
    /// Eigenvalues λ of a (twisted) Laplacian.
    LaplaceLambda,
}

impl SpectrumKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SpectrumKind::WaveTau => "wave-tau",
            SpectrumKind::SpectralR => "spectral-r",
            SpectrumKind::SemiclassicalZ => "semiclassical-z",
            SpectrumKind::LaplaceLambda => "laplace-lambda",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "wave-tau" => SpectrumKind::WaveTau,
            "spectral-r" => SpectrumKind::SpectralR,
            "semiclassical-z" => SpectrumKind::SemiclassicalZ,
            "laplace-lambda" => SpectrumKind::LaplaceLambda,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct SpectrumMeta {
    /// Fourier truncation K (0 for closed-form references).
    pub k: usize,
    pub profile_hash: String,
}

/// Finite list of eigenvalues, sorted by real part then imaginary part.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSpectrum {
    values: Vec<Complex64>,
    pub hbar: Option<f64>,
    pub kind: SpectrumKind,
    pub meta: SpectrumMeta,
}

fn cmp_re_im(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

impl ComplexSpectrum {
    pub fn new(
        mut values: Vec<Complex64>,
        kind: SpectrumKind,
        hbar: Option<f64>,
        meta: SpectrumMeta,
    ) -> Result<Self, DwError> {
        if let Some(bad) = values.iter().find(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(DwError::NonFinite(format!("eigenvalue {bad}")));
        }
        values.sort_by(cmp_re_im);
        Ok(Self { values, hbar, kind, meta })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Worst distance from `−conj(τ)` to the nearest eigenvalue.
    pub fn reflection_defect(&self) -> f64 {
        self.values
            .iter()
            .map(|v| {
                let mirror = Complex64::new(-v.re, v.im);
                self.nearest_distance(mirror)
            })
            .fold(0.0, f64::max)
    }

    /// Distance from `z` to the nearest listed value.
    pub fn nearest_distance(&self, z: Complex64) -> f64 {
        // values are sorted by real part: scan outward from the insertion point
        let start = self.values.partition_point(|v| v.re < z.re);
        let mut best = f64::INFINITY;
        for v in self.values[start..].iter() {
            if v.re - z.re > best {
                break;
            }
            best = best.min((v - z).norm());
        }
        for v in self.values[..start].iter().rev() {
            if z.re - v.re > best {
                break;
            }
            best = best.min((v - z).norm());
        }
        best
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,kind,hbar,K,profile_hash\n");
        let hbar = self.hbar.map(|h| format!("{h:?}")).unwrap_or_default();
        for v in &self.values {
            let _ = writeln!(
                out,
                "{:?},{:?},{},{},{},{}",
                v.re,
                v.im,
                self.kind.as_str(),
                hbar,
                self.meta.k,
                self.meta.profile_hash
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, DwError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "re,im,kind,hbar,K,profile_hash")) => {}
            _ => return Err(DwError::Parse { line: 1, msg: "missing header".into() }),
        }
        let mut values = Vec::new();
        let mut kind = SpectrumKind::WaveTau;
        let mut hbar = None;
        let mut meta = SpectrumMeta::default();
        for (idx, line) in lines {
            let line_no = idx + 1;
            let err = |msg: &str| DwError::Parse { line: line_no, msg: msg.to_string() };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 {
                return Err(err("expected 6 fields"));
            }
            let re: f64 = fields[0].parse().map_err(|_| err("bad re"))?;
            let im: f64 = fields[1].parse().map_err(|_| err("bad im"))?;
            kind = SpectrumKind::parse(fields[2]).ok_or_else(|| err("bad kind"))?;
            hbar = if fields[3].is_empty() { None } else { Some(fields[3].parse().map_err(|_| err("bad hbar"))?) };
            meta.k = fields[4].parse().map_err(|_| err("bad K"))?;
            meta.profile_hash = fields[5].to_string();
            values.push(Complex64::new(re, im));
        }
        Self::new(values, kind, hbar, meta)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub eigenvectors: bool,
    /// Bound on `‖Mv − τv‖/‖v‖`; violations are reported as errors.
    pub residual_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { eigenvectors: false, residual_tol: 1e-8 }
    }
}

/// Eigenvalues (and optionally unit eigenvectors as columns) of a dense matrix,
/// sorted by real part.
#[derive(Clone, Debug)]
pub struct EigenSolution {
    pub values: Vec<Complex64>,
    pub vectors: Option<Mat<Complex64>>,
    pub max_residual: Option<f64>,
}

/// Full eigendecomposition of a square complex matrix.
pub fn solve_spectrum(matrix: &Mat<Complex64>, opts: &SolveOptions) -> Result<EigenSolution, DwError> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(DwError::InvalidArgument(format!("matrix is {}x{}, expected square", n, matrix.ncols())));
    }
    if n == 0 {
        return Ok(EigenSolution {
            values: Vec::new(),
            vectors: opts.eigenvectors.then(|| Mat::zeros(0, 0)),
            max_residual: None,
        });
    }
    if !opts.eigenvectors {
        let mut values =
            matrix.eigenvalues().map_err(|e| DwError::NoConvergence { dimension: n, detail: format!("{e:?}") })?;
        values.sort_by(cmp_re_im);
        return Ok(EigenSolution { values, vectors: None, max_residual: None });
    }
    let evd = matrix.eigen().map_err(|e| DwError::NoConvergence { dimension: n, detail: format!("{e:?}") })?;
    let s = evd.S();
    let u = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cmp_re_im(&s[a], &s[b]));
    let values: Vec<Complex64> = order.iter().map(|&i| s[i]).collect();
    let mut vectors = Mat::<Complex64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let norm = (0..n).map(|r| u[(r, src)].norm_sqr()).sum::<f64>().sqrt();
        for r in 0..n {
            vectors[(r, dst)] = u[(r, src)] / norm;
        }
    }
    let mut max_residual = 0.0f64;
    for (col, &tau) in values.iter().enumerate() {
        let res = (0..n)
            .map(|r| {
                let mv: Complex64 = (0..n).map(|c| matrix[(r, c)] * vectors[(c, col)]).sum();
                (mv - tau * vectors[(r, col)]).norm_sqr()
            })
            .sum::<f64>()
            .sqrt();
        if !(res <= opts.residual_tol) {
            return Err(DwError::Residual { index: col, residual: res, tol: opts.residual_tol });
        }
        max_residual = max_residual.max(res);
    }
    Ok(EigenSolution { values, vectors: Some(vectors), max_residual: Some(max_residual) })
}

/// Closed-form spectrum `ia₀ ± √(n² − a₀²)`, `|n| ≤ nmax`, principal square root.
pub fn constant_damping_reference(a0: f64, nmax: usize) -> ComplexSpectrum {
    let i_a0 = Complex64::new(0.0, a0);
    let n = nmax as i64;
    let values = (-n..=n)
        .flat_map(|m| {
            let root = Complex64::new((m * m) as f64 - a0 * a0, 0.0).sqrt();
            [i_a0 + root, i_a0 - root]
        })
        .collect();
    ComplexSpectrum::new(
        values,
        SpectrumKind::WaveTau,
        None,
        SpectrumMeta { k: nmax, profile_hash: DampingProfile::constant(a0).content_hash() },
    )
    .expect("closed form is finite")
}

/// Eigenvalues `(n + ic)²` of the twisted Laplacian `−Δ_ω`, `ω = c dx`, on the circle.
pub fn twisted_circle_reference(c: f64, nmax: usize) -> ComplexSpectrum {
    let n = nmax as i64;
    let values = (-n..=n).map(|m| Complex64::new(m as f64, c).powi(2)).collect();
    ComplexSpectrum::new(
        values,
        SpectrumKind::LaplaceLambda,
        None,
        SpectrumMeta { k: nmax, profile_hash: DampingProfile::twist_only(c).content_hash() },
    )
    .expect("closed form is finite")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SemiclassicalPoint {
    pub z: Complex64,
    pub im_over_hbar: f64,
}

/// Spectrum rescaled to the semiclassical energy `z = (ħτ)²/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SemiclassicalSpectrum {
    pub hbar: f64,
    pub points: Vec<SemiclassicalPoint>,
}

impl SemiclassicalSpectrum {
    /// Points with `|Re z − 1/2| ≤ c·ħ`.
    pub fn near_half(&self, c: f64) -> impl Iterator<Item = &SemiclassicalPoint> + '_ {
        let width = c * self.hbar;
        self.points.iter().filter(move |p| (p.z.re - 0.5).abs() <= width)
    }
}

pub fn to_semiclassical(spectrum: &ComplexSpectrum, hbar: f64) -> Result<SemiclassicalSpectrum, DwError> {
    if !(hbar > 0.0) {
        return Err(DwError::InvalidArgument(format!("hbar must be positive, got {hbar}")));
    }
    let points = spectrum
        .values()
        .iter()
        .map(|tau| {
            let lam = tau * hbar;
            let z = lam * lam / 2.0;
            SemiclassicalPoint { z, im_over_hbar: z.im / hbar }
        })
        .collect();
    Ok(SemiclassicalSpectrum { hbar, points })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeylCount {
    pub count: usize,
    /// `(λ/2π)^d·vol(p⁻¹(0,1))`, equal to `2λ` on the circle.
    pub predicted: f64,
    /// λ beyond K/2, where truncation corrupts the spectrum.
    pub beyond_horizon: bool,
}

/// Tolerance used to decide `Re τ ≥ 0` for numerically zero real parts.
pub const REAL_AXIS_TOL: f64 = 1e-8;

pub fn weyl_window_count(spectrum: &ComplexSpectrum, lambda: f64) -> Result<WeylCount, DwError> {
    if spectrum.kind != SpectrumKind::WaveTau {
        return Err(DwError::InvalidArgument(format!(
            "Weyl count needs a wave-tau spectrum, got {}",
            spectrum.kind.as_str()
        )));
    }
    let count = spectrum.values().iter().filter(|v| v.re >= -REAL_AXIS_TOL && v.re <= lambda + REAL_AXIS_TOL).count();
    Ok(WeylCount { count, predicted: 2.0 * lambda, beyond_horizon: lambda > spectrum.meta.k as f64 / 2.0 })
}

/// Spectral gap, geodesic-average infimum and predicted decay rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LebeauQuantities {
    pub d0: f64,
    pub c_inf: f64,
    pub rho_pred: f64,
    pub rho_measured: Option<f64>,
}

impl LebeauQuantities {
    pub fn new(d0: f64, c_inf: f64) -> Self {
        Self { d0, c_inf, rho_pred: 2.0 * d0.min(c_inf), rho_measured: None }
    }
}

/// `D(0)` over nonzero eigenvalues inside the trust horizon `|Re τ| ≤ K/2`;
/// `C(∞)` is the circle mean of `a`, since every geodesic of the circle equidistributes.
pub fn lebeau_quantities(spectrum: &ComplexSpectrum, profile: &DampingProfile) -> Result<LebeauQuantities, DwError> {
    if profile.twist != 0.0 {
        return Err(DwError::InvalidArgument("Lebeau quantities need twist = 0".into()));
    }
    let (lo, _) = profile.extrema();
    if lo < -1e-12 {
        return Err(DwError::InvalidArgument(format!("damping must be nonnegative (min ≈ {lo})")));
    }
    let horizon = if spectrum.meta.k > 0 { spectrum.meta.k as f64 / 2.0 } else { f64::INFINITY };
    let d0 = spectrum
        .values()
        .iter()
        .filter(|v| v.norm() > REAL_AXIS_TOL && v.re.abs() <= horizon)
        .map(|v| v.im)
        .fold(f64::INFINITY, f64::min);
    if !d0.is_finite() {
        return Err(DwError::EmptyWindow);
    }
    Ok(LebeauQuantities::new(d0, profile.mean_value()))
}
