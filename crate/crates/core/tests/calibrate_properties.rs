use heterogen::calibrate::{calibrate_gain, generate_with_target};
use heterogen::graphon::{Graphon, ParametricKernel};
use heterogen::signal::PolyFilter;
use proptest::prelude::*;

fn graphons() -> Vec<Graphon> {
    vec![
        Graphon::constant(0.5).unwrap(),
        Graphon::step_function(vec![0.5, 0.5], vec![vec![0.8, 0.2], vec![0.2, 0.8]]).unwrap(),
        Graphon::parametric(ParametricKernel::Logistic { c: 2.0, b: -1.0 }).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn limit_scales_with_gain_squared(
        coeffs in prop::collection::vec(-2.0f64..2.0, 1..5),
        gain in 0.01f64..10.0,
    ) {
        for g in graphons() {
            let unit = g.limit_heterophily(&PolyFilter::new(coeffs.clone()).unwrap());
            let scaled = g.limit_heterophily(&PolyFilter::with_gain(coeffs.clone(), gain).unwrap());
            prop_assert!((scaled - gain * gain * unit).abs() <= 1e-12 * scaled.abs().max(1e-300));
        }
    }

    #[test]
    fn calibration_hits_target_and_is_idempotent(
        coeffs in prop::collection::vec(0.1f64..2.0, 1..4),
        target in 0.001f64..2.0,
    ) {
        for g in graphons() {
            let base = PolyFilter::new(coeffs.clone()).unwrap();
            let r = calibrate_gain(&g, &base, target).unwrap();
            prop_assert!((r.h_limit_achieved - target).abs() <= 1e-12 * target);
            prop_assert!((r.h_limit_achieved - r.gain * r.gain * r.h_base).abs() <= 1e-12 * target);
            let again = calibrate_gain(&g, &r.calibrated_filter(&base).unwrap(), target).unwrap();
            prop_assert!((again.gain / r.gain - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn achieved_limit_is_monotone_in_target(mut targets in prop::collection::vec(0.0f64..3.0, 2..8)) {
        targets.sort_by(f64::total_cmp);
        for g in graphons() {
            let base = PolyFilter::new(vec![1.0, 0.5]).unwrap();
            let achieved: Vec<f64> = targets
                .iter()
                .map(|&t| calibrate_gain(&g, &base, t).unwrap().h_limit_achieved)
                .collect();
            prop_assert!(achieved.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}

#[test]
fn verification_sample_hits_target() {
    let g = Graphon::constant(0.5).unwrap();
    let one = PolyFilter::new(vec![1.0]).unwrap();
    let (data, r) = generate_with_target(&g, &one, 0.2, 1000, 1000, 11).unwrap();
    let h = r.h_empirical_check.unwrap();
    assert!((h - 0.2).abs() / 0.2 < 0.1, "{h}");
    assert_eq!(data.sample.n(), 1000);
    assert_eq!(r.verification_seed, Some(11));
}

#[test]
fn generation_with_target_is_reproducible() {
    let g = Graphon::step_function(vec![0.5, 0.5], vec![vec![0.8, 0.2], vec![0.2, 0.8]]).unwrap();
    let base = PolyFilter::new(vec![0.0, 1.0]).unwrap();
    let a = generate_with_target(&g, &base, 0.05, 120, 60, 3).unwrap();
    let b = generate_with_target(&g, &base, 0.05, 120, 60, 3).unwrap();
    assert_eq!(a, b);
}
