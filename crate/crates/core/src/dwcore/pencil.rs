use faer::Mat;
use num_complex::Complex64;

use super::{DampingProfile, DwError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Galerkin truncation of `−Δ − τ² + 2iτa` on Fourier modes `n = −K..=K`.
///
/// The twist `c` of a pure 1-form model enters through the τ-independent first-order
/// term of `−Δ_ω = −Δ + 2c∂ₓ − c²`, diagonal with entries `2icn − c²`, so that the
/// stiffness part is `diag((n + ic)²)`.
#[derive(Clone, Debug)]
pub struct QuadraticPencil {
    k: usize,
    laplacian: Vec<f64>,
    damping: Mat<Complex64>,
    twist: Vec<Complex64>,
}

impl QuadraticPencil {
    pub fn modes(&self) -> usize {
        self.k
    }

    /// N = 2K + 1
    pub fn dimension(&self) -> usize {
        2 * self.k + 1
    }

    /// Frequency carried by basis index `i`.
    pub fn frequency(&self, i: usize) -> i64 {
        i as i64 - self.k as i64
    }

    /// Diagonal of the discrete `−Δ` (entries n²).
    pub fn laplacian_diag(&self) -> &[f64] {
        &self.laplacian
    }

    pub fn laplacian(&self) -> Mat<Complex64> {
        let n = self.dimension();
        Mat::from_fn(n, n, |i, j| if i == j { Complex64::new(self.laplacian[i], 0.0) } else { ZERO })
    }

    /// Convolution matrix of `a`.
    pub fn damping_op(&self) -> &Mat<Complex64> {
        &self.damping
    }

    /// Diagonal τ-independent twist term.
    pub fn twist_diag(&self) -> &[Complex64] {
        &self.twist
    }

    /// `P(τ) = −Δ + twist − τ² + 2iτ·A` as a dense matrix.
    pub fn evaluate(&self, tau: Complex64) -> Mat<Complex64> {
        let n = self.dimension();
        let two_i_tau = Complex64::new(0.0, 2.0) * tau;
        Mat::from_fn(n, n, |i, j| {
            let mut v = two_i_tau * self.damping[(i, j)];
            if i == j {
                v += Complex64::new(self.laplacian[i], 0.0) + self.twist[i] - tau * tau;
            }
            v
        })
    }

    /// Largest deviation of the damping operator from its adjoint.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dimension();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.damping[(i, j)] - self.damping[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

pub fn assemble_pencil(profile: &DampingProfile, k: usize) -> Result<QuadraticPencil, DwError> {
    if k < 1 {
        return Err(DwError::InvalidArgument("K must be at least 1".into()));
    }
    profile.validate()?;
    let degree = profile.degree();
    if degree > k {
        return Err(DwError::Aliasing { degree, k });
    }
    let n = 2 * k + 1;
    let freq = |i: usize| i as i64 - k as i64;
    let laplacian = (0..n).map(|i| (freq(i) * freq(i)) as f64).collect();
    let damping = Mat::from_fn(n, n, |i, j| profile.fourier_coeff(freq(i) - freq(j)));
    let c = profile.twist;
    let twist = (0..n)
        .map(|i| Complex64::new(-c * c, 2.0 * c * freq(i) as f64))
        .map(|z| if c == 0.0 { ZERO } else { z })
        .collect();
    Ok(QuadraticPencil { k, laplacian, damping, twist })
}

/// Companion matrix `[[0, I], [−Δ + twist, 2i·A]]` acting on `(u, τu)`.
pub fn linearize_pencil(pencil: &QuadraticPencil) -> Mat<Complex64> {
    let n = pencil.dimension();
    Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => ZERO,
        (true, false) => {
            if j - n == i {
                ONE
            } else {
                ZERO
            }
        }
        (false, true) => {
            let r = i - n;
            if r == j {
                Complex64::new(pencil.laplacian[r], 0.0) + pencil.twist[r]
            } else {
                ZERO
            }
        }
        (false, false) => Complex64::new(0.0, 2.0) * pencil.damping[(i - n, j - n)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_damping_is_scaled_identity() {
        let pencil = assemble_pencil(&DampingProfile::constant(0.5), 4).unwrap();
        assert_eq!(pencil.dimension(), 9);
        let a = pencil.damping_op();
        for i in 0..9 {
            for j in 0..9 {
                let expect = if i == j { 0.5 } else { 0.0 };
                assert_eq!(a[(i, j)], Complex64::new(expect, 0.0));
            }
        }
    }

    #[test]
    fn cosine_damping_fills_first_off_diagonals() {
        let pencil = assemble_pencil(&DampingProfile::cosine(0.0, 1.0), 2).unwrap();
        let a = pencil.damping_op();
        for i in 0..5usize {
            for j in 0..5usize {
                let expect = if i.abs_diff(j) == 1 { 0.5 } else { 0.0 };
                assert_eq!(a[(i, j)], Complex64::new(expect, 0.0), "({i},{j})");
            }
        }
        assert_eq!(pencil.hermitian_defect(), 0.0);
    }

    #[test]
    fn laplacian_is_diag_n_squared() {
        let pencil = assemble_pencil(&DampingProfile::constant(0.0), 3).unwrap();
        assert_eq!(pencil.laplacian_diag(), &[9.0, 4.0, 1.0, 0.0, 1.0, 4.0, 9.0]);
    }

    #[test]
    fn aliasing_is_rejected() {
        let p = DampingProfile::new(0.5, vec![0.0, 0.0, 0.1], vec![], 0.0).unwrap();
        let err = assemble_pencil(&p, 2).unwrap_err();
        assert!(matches!(err, DwError::Aliasing { degree: 3, k: 2 }));
        assert!(err.to_string().contains("degree 3"));
        assert!(assemble_pencil(&p, 3).is_ok());
        assert!(assemble_pencil(&DampingProfile::constant(1.0), 0).is_err());
    }

    #[test]
    fn twist_term_completes_the_square() {
        let pencil = assemble_pencil(&DampingProfile::twist_only(0.3), 2).unwrap();
        for i in 0..5 {
            let n = pencil.frequency(i) as f64;
            let stiff = Complex64::new(pencil.laplacian_diag()[i], 0.0) + pencil.twist_diag()[i];
            let expect = Complex64::new(n, 0.3).powi(2);
            assert!((stiff - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn companion_block_layout() {
        let pencil = assemble_pencil(&DampingProfile::constant(0.25), 1).unwrap();
        let m = linearize_pencil(&pencil);
        assert_eq!(m.nrows(), 6);
        assert_eq!(m[(0, 3)], ONE);
        assert_eq!(m[(3, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(m[(4, 1)], ZERO);
        assert_eq!(m[(4, 4)], Complex64::new(0.0, 0.5));
    }
}
