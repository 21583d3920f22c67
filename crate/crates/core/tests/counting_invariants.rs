use num_complex::Complex64;
use proptest::prelude::*;

use speclab::counting::{
    argument_principle_zeros, deviation_exponent, jensen_disk_bound, window_count, ComplexWindow, HolomorphicSampler,
    Side,
};
use speclab::dwcore::{damped_spectrum, to_semiclassical, DampingProfile};

fn from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for &w in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (i, &c) in coeffs.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * w;
        }
        coeffs = next;
    }
    coeffs
}

fn roots() -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| Complex64::new(a, b)), 1..=7)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn jensen_dominates_the_count(rs in roots(), r in 0.3f64..1.5) {
        let z0 = Complex64::new(0.05, -0.02);
        prop_assume!(rs.iter().all(|w| ((w - z0).norm() - r).abs() > 1e-3 && (w - z0).norm() > 1e-3));
        let disk = ComplexWindow::disk(z0, r).unwrap();
        let f = HolomorphicSampler::polynomial(from_roots(&rs), ComplexWindow::disk(z0, 2.0 * r).unwrap());
        let count = argument_principle_zeros(&f, &disk, 512).unwrap();
        prop_assert_eq!(count, rs.iter().filter(|w| (*w - z0).norm() < r).count());
        prop_assert!(jensen_disk_bound(&f, z0, r, 2.0 * r, 2048).unwrap() >= count as f64);
    }

    #[test]
    fn fine_contours_give_integer_windings(rs in roots()) {
        let sq = ComplexWindow::rect(Complex64::new(0.0, 0.0), 1.0, 1.0).unwrap();
        prop_assume!(rs.iter().all(|w| (w.re.abs() - 1.0).abs() > 1e-3 && (w.im.abs() - 1.0).abs() > 1e-3));
        let f = HolomorphicSampler::polynomial(from_roots(&rs), sq);
        let inside = rs.iter().filter(|w| sq.contains(**w)).count();
        prop_assert_eq!(argument_principle_zeros(&f, &sq, 1 << 14).unwrap(), inside);
    }

    #[test]
    fn planted_power_laws_are_recovered(e in 0.0f64..3.0, c in 0.5f64..50.0, h0 in 0.01f64..0.5) {
        let ladder: Vec<(f64, f64)> = (0..5)
            .map(|k| {
                let h = h0 * 0.5f64.powi(k);
                (h, (c * h.powf(-e)).max(1.0))
            })
            .collect();
        prop_assume!(ladder.iter().all(|&(h, n)| n == c * h.powf(-e)));
        prop_assert!((deviation_exponent(&ladder).unwrap().exponent - e).abs() <= 1e-12);
    }
}

#[test]
fn window_counts_are_monotone_and_additive() {
    let hbar = 1.0 / 64.0;
    let spec = to_semiclassical(&damped_spectrum(&DampingProfile::cosine(0.5, 0.4), 128).unwrap(), hbar).unwrap();
    let alphas: Vec<f64> = (0..=20).map(|k| 0.05 * k as f64).collect();
    let above: Vec<usize> = alphas.iter().map(|&a| window_count(&spec, hbar, 2.0, a, Side::Above).unwrap()).collect();
    assert!(above.windows(2).all(|w| w[1] <= w[0]));
    for (k, w) in alphas.windows(2).enumerate() {
        let bin = spec.near_half(2.0).filter(|p| p.im_over_hbar >= w[0] && p.im_over_hbar < w[1]).count();
        assert_eq!(above[k], bin + above[k + 1]);
    }
}
