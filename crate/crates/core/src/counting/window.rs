use std::fmt;

use crate::dwcore::SemiclassicalSpectrum;

use super::CountError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Above,
    Below,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Above => "above",
            Side::Below => "below",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Side {
    type Err = CountError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "above" => Ok(Side::Above),
            "below" => Ok(Side::Below),
            other => Err(CountError::InvalidArgument(format!("side must be above or below, got {other}"))),
        }
    }
}

/// `#{z : |Re z − ½| ≤ cħ, Im z/ħ ≥ α}` (or `≤ α` below).
pub fn window_count(
    spectrum: &SemiclassicalSpectrum,
    hbar: f64,
    c: f64,
    alpha: f64,
    side: Side,
) -> Result<usize, CountError> {
    if (spectrum.hbar - hbar).abs() > 1e-12 * hbar.abs() {
        return Err(CountError::HbarMismatch { spectrum: spectrum.hbar, requested: hbar });
    }
    if !(c >= 0.0) || !alpha.is_finite() {
        return Err(CountError::InvalidArgument(format!("need c ≥ 0 and finite α (c = {c}, α = {alpha})")));
    }
    Ok(spectrum
        .near_half(c)
        .filter(|p| match side {
            Side::Above => p.im_over_hbar >= alpha,
            Side::Below => p.im_over_hbar <= alpha,
        })
        .count())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountRow {
    pub hbar: f64,
    pub c: f64,
    pub alpha: f64,
    pub side: Side,
    pub count: usize,
}

/// CSV `hbar,c,alpha,side,count`.
pub fn count_rows_csv(rows: &[CountRow]) -> String {
    let mut out = String::from("hbar,c,alpha,side,count\n");
    for r in rows {
        out.push_str(&format!("{:?},{:?},{:?},{},{}\n", r.hbar, r.c, r.alpha, r.side, r.count));
    }
    out
}

/// Least-squares slope of `log count` against `|log ħ|`; `−∞` when some count is zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentFit {
    pub exponent: f64,
    /// Root-mean-square residual of the fit in `log count`.
    pub residual: f64,
}

impl ExponentFit {
    pub fn csv_suffix(&self) -> String {
        format!("# slope={:?}\n# residual={:?}\n", self.exponent, self.residual)
    }
}

/// Fits `count ≈ C·ħ^{−e}` on a ladder of at least four points with `ħ` decreasing by
/// factors of at least 2.
pub fn deviation_exponent(ladder: &[(f64, f64)]) -> Result<ExponentFit, CountError> {
    if ladder.len() < 4 {
        return Err(CountError::InvalidArgument(format!("need ≥ 4 ladder points, got {}", ladder.len())));
    }
    for w in ladder.windows(2) {
        if !(w[0].0 > 0.0 && w[1].0 > 0.0 && w[0].0 >= 2.0 * w[1].0) {
            return Err(CountError::InvalidArgument(format!(
                "ħ must decrease by factors ≥ 2 ({} then {})",
                w[0].0, w[1].0
            )));
        }
    }
    if let Some(&(h, c)) = ladder.iter().find(|&&(_, c)| !(c >= 1.0 || c == 0.0)) {
        return Err(CountError::InvalidArgument(format!("count {c} at ħ = {h} must be 0 or ≥ 1")));
    }
    if ladder.iter().any(|&(_, c)| c == 0.0) {
        return Ok(ExponentFit { exponent: f64::NEG_INFINITY, residual: f64::NAN });
    }
    let xs: Vec<f64> = ladder.iter().map(|&(h, _)| -h.ln()).collect();
    let ys: Vec<f64> = ladder.iter().map(|&(_, c)| c.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    Ok(ExponentFit { exponent: slope, residual: (rss / n).sqrt() })
}
