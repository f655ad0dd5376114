use heterogen::graph::GraphSample;
use heterogen::graphon::{Graphon, ParametricKernel};
use heterogen::heterophily::{
    degree_moment, empirical_heterophily, empirical_heterophily_edge_sum, expected_heterophily_eigen,
    expected_heterophily_trace, laplacian_spectrum, spectral_moment, DEFAULT_EIGEN_CAP,
};
use heterogen::signal::{apply_filter, sample_white_features, PolyFilter};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn graph(n: usize, p: f64, seed: u64) -> GraphSample {
    Graphon::constant(p).unwrap().sample(n, seed).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-15)
}

/// `Tr(f(𝓛) 𝓛 f(𝓛))/n` with dense matrices.
fn dense_mu(s: &GraphSample, f: &PolyFilter) -> f64 {
    let l = s.dense_rescaled_laplacian();
    let n = s.n();
    let mut fl = DMatrix::zeros(n, n);
    let mut power = DMatrix::identity(n, n);
    for &a in f.coeffs() {
        fl += a * &power;
        power = &l * power;
    }
    fl *= f.gain();
    (&fl * &l * &fl).trace() / n as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn trace_and_edge_sum_agree(
        n in 2usize..120,
        d in 1usize..40,
        p in 0.0f64..=1.0,
        seed in any::<u64>(),
        coeffs in prop::collection::vec(-2.0f64..2.0, 1..4),
    ) {
        let s = graph(n, p, seed);
        let x = apply_filter(&PolyFilter::new(coeffs).unwrap(), &s, &sample_white_features(n, d, !seed).unwrap()).unwrap();
        let a = empirical_heterophily(&s, &x).unwrap();
        let b = empirical_heterophily_edge_sum(&s, &x).unwrap();
        prop_assert!(rel(a, b) <= 1e-10, "{} vs {}", a, b);
        prop_assert!(a >= 0.0 && b >= 0.0);
    }

    #[test]
    fn three_routes_to_mu(
        n in 2usize..80,
        p in 0.0f64..=1.0,
        seed in any::<u64>(),
        coeffs in prop::collection::vec(-2.0f64..2.0, 1..6),
        gain in -2.0f64..2.0,
    ) {
        let s = graph(n, p, seed);
        let f = PolyFilter::with_gain(coeffs, gain).unwrap();
        let trace = expected_heterophily_trace(&s, &f).unwrap();
        let eigen = expected_heterophily_eigen(&s, &f, DEFAULT_EIGEN_CAP).unwrap();
        let dense = dense_mu(&s, &f);
        let scale = trace.abs().max(1e-12);
        prop_assert!((trace - eigen).abs() <= 1e-8 * scale + 1e-14, "{} vs {}", trace, eigen);
        prop_assert!((trace - dense).abs() <= 1e-10 * scale + 1e-14, "{} vs {}", trace, dense);
        prop_assert!(trace >= 0.0 && eigen >= 0.0);
    }

    #[test]
    fn mu_is_quadratic_in_gain(
        n in 2usize..80,
        seed in any::<u64>(),
        coeffs in prop::collection::vec(-2.0f64..2.0, 1..5),
        gain in 0.1f64..5.0,
    ) {
        let s = graph(n, 0.5, seed);
        let unit = expected_heterophily_trace(&s, &PolyFilter::new(coeffs.clone()).unwrap()).unwrap();
        let gained = expected_heterophily_trace(&s, &PolyFilter::with_gain(coeffs, gain).unwrap()).unwrap();
        prop_assert!((gained - gain * gain * unit).abs() <= 1e-12 * gained.abs().max(1e-300));
    }

    #[test]
    fn moment_gap_obeys_mixed_word_bound(n in 2usize..150, p in 0.0f64..=1.0, seed in any::<u64>()) {
        let s = graph(n, p, seed);
        for m in 1..=3u32 {
            let gap = (spectral_moment(&s, m).unwrap() - degree_moment(&s, m).unwrap()).abs();
            let bound = ((1u64 << m) - 1) as f64 / n as f64;
            prop_assert!(gap <= bound, "m = {}: {} > {}", m, gap, bound);
        }
    }

    #[test]
    fn spectrum_stays_in_range(n in 1usize..120, p in 0.0f64..=1.0, seed in any::<u64>()) {
        let eig = laplacian_spectrum(&graph(n, p, seed), DEFAULT_EIGEN_CAP).unwrap();
        prop_assert!(eig.iter().all(|&l| (-1e-9..=2.0 + 1e-9).contains(&l)));
    }
}

#[test]
fn first_moment_is_twice_the_edge_count() {
    let s = graph(90, 0.4, 3);
    let want = 2.0 * s.edge_count() as f64 / (90.0 * 90.0);
    assert!((spectral_moment(&s, 1).unwrap() - want).abs() < 1e-15);
}

#[test]
fn structured_graphs_through_all_routes() {
    let sbm = Graphon::step_function(vec![0.3, 0.7], vec![vec![0.7, 0.1], vec![0.1, 0.4]]).unwrap();
    let smooth = Graphon::parametric(ParametricKernel::Logistic { c: 3.0, b: -1.5 }).unwrap();
    let f = PolyFilter::new(vec![1.0, -1.5, 0.5]).unwrap();
    for g in [sbm, smooth] {
        let s = g.sample(200, 5).unwrap();
        let a = expected_heterophily_trace(&s, &f).unwrap();
        let b = expected_heterophily_eigen(&s, &f, DEFAULT_EIGEN_CAP).unwrap();
        assert!(rel(a, b) < 1e-8);
    }
}
