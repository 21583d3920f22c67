use proptest::prelude::*;

use speclab::flowavg::{
    averaging_corrector, birkhoff_average, cohomology_defect, geodesic_flow, tanh_primitive, FlowPoint, Observable,
    DEFAULT_QUAD_STEP,
};

fn points() -> impl Strategy<Value = FlowPoint> {
    (0.3f64..2.0, 0.3f64..2.0, -1.0f64..1.0).prop_map(|(a, b, c)| {
        // det = a·d − b·c = 1
        let d = (1.0 + b * c) / a;
        FlowPoint::new([[a, b], [c, d]]).unwrap()
    })
}

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / (1.0 + y.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_law_and_determinant(p in points(), s in -10.0f64..10.0, t in -10.0f64..10.0) {
        let two = geodesic_flow(&geodesic_flow(&p, s).unwrap(), t).unwrap();
        let one = geodesic_flow(&p, s + t).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!(rel(two.matrix()[i][j], one.matrix()[i][j]) <= 1e-12);
            }
        }
        prop_assert!((one.det() - 1.0).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn coboundary_averages_decay_like_one_over_t(p in points()) {
        let (_, dh) = tanh_primitive();
        for t in [4.0, 8.0, 16.0, 32.0] {
            let avg = birkhoff_average(&dh, &p, t, 0.002).unwrap();
            prop_assert!(avg.abs() * t <= 2.0 + 1e-9, "T = {t}: T·avg = {}", avg * t);
        }
    }

    #[test]
    fn corrector_shift_by_coboundary_is_closed_form(p in points()) {
        // g_T(q + h') − g_T(q) = h(p) − ⟨h⟩_T, and h(G^s p) = tanh(s + s0)
        let (h, dh) = tanh_primitive();
        let q = Observable::oscillating();
        let t = 8.0;
        let diff = averaging_corrector(&q.plus(&dh), &p, t, DEFAULT_QUAD_STEP).unwrap()
            - averaging_corrector(&q, &p, t, DEFAULT_QUAD_STEP).unwrap();
        let g = p.matrix();
        let s0 = 0.5 * (g[0][0] * g[0][0] / (g[0][1] * g[0][1])).ln();
        let mean_h = ((t / 2.0 + s0).cosh().ln() - (-t / 2.0 + s0).cosh().ln()) / t;
        prop_assert!((diff - (h.eval(&p) - mean_h)).abs() <= 1e-8);
    }
}

#[test]
fn defect_is_second_order_in_the_difference_step() {
    let p = FlowPoint::new([[1.3, -0.4], [0.5, 0.6]]).unwrap();
    for q in [Observable::bounded_ratio(), Observable::oscillating(), Observable::top_left_squared()] {
        let d: Vec<f64> = [8e-4, 4e-4, 2e-4]
            .iter()
            .map(|&h| cohomology_defect(&q, &p, 8.0, h, DEFAULT_QUAD_STEP).unwrap().abs())
            .collect();
        for w in d.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.0..=5.0).contains(&ratio), "{}: ratio {ratio}", q.name());
        }
    }
}
