use proptest::prelude::*;
use toeplitz_embed::symbol::{reduce_angle, Symbol, SymbolSpec};
use toeplitz_embed::{c64, C64, TAU};

fn coeffs() -> impl Strategy<Value = (i64, Vec<C64>)> {
    (-3i64..=1, prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..=7))
        .prop_map(|(kmin, v)| (kmin, v.into_iter().map(|(a, b)| c64(a, b)).collect::<Vec<_>>()))
        .prop_filter("nonzero", |(_, v)| v.iter().any(|c| c.norm() > 1e-3))
}

fn direct_sum(kmin: i64, c: &[C64], theta: f64) -> C64 {
    c.iter().enumerate().map(|(j, &a)| a * C64::from_polar(1.0, (kmin + j as i64) as f64 * theta)).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn evaluate_matches_direct_sum((kmin, c) in coeffs(), theta in -10.0f64..10.0) {
        let f = Symbol::from_coefficients(kmin, c.clone()).unwrap();
        let scale: f64 = c.iter().map(|z| z.norm()).sum();
        prop_assert!((f.evaluate(theta) - direct_sum(kmin, &c, theta)).norm() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn parseval((kmin, c) in coeffs()) {
        let f = Symbol::from_coefficients(kmin, c.clone()).unwrap();
        let m = 4096;
        let mean = (0..m).map(|i| f.evaluate(TAU * i as f64 / m as f64).norm_sqr()).sum::<f64>() / m as f64;
        let energy: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((mean - energy).abs() <= 1e-10, "mean {mean} energy {energy}");
    }

    #[test]
    fn truncations_are_nested((kmin, c) in coeffs(), n in 1usize..24) {
        let f = Symbol::from_coefficients(kmin, c).unwrap();
        let a = f.toeplitz_truncation(n).unwrap().matrix;
        let b = f.toeplitz_truncation(n + 1).unwrap().matrix;
        prop_assert_eq!(a, b.view((0, 0), (n, n)).clone_owned());
    }

    #[test]
    fn truncation_entries_are_coefficients((kmin, c) in coeffs(), n in 1usize..12) {
        let f = Symbol::from_coefficients(kmin, c.clone()).unwrap();
        let t = f.toeplitz_truncation(n).unwrap().matrix;
        for j in 0..n {
            for k in 0..n {
                let d = j as i64 - k as i64 - kmin;
                let want = if d >= 0 && (d as usize) < c.len() { c[d as usize] } else { c64(0.0, 0.0) };
                prop_assert_eq!(t[(j, k)], want);
            }
        }
    }

    #[test]
    fn evaluate_is_periodic_after_reduction((kmin, c) in coeffs(), theta in -50.0f64..50.0, turns in -3i32..=3) {
        let f = Symbol::from_coefficients(kmin, c).unwrap();
        let x = theta + turns as f64 * TAU;
        prop_assert_eq!(f.evaluate(x), f.evaluate(reduce_angle(x)));
        let r = reduce_angle(x);
        prop_assert!((0.0..TAU).contains(&r));
    }

    #[test]
    fn sampled_evaluate_is_periodic_after_reduction(a in 0.1f64..0.9, theta in -50.0f64..50.0) {
        let f = Symbol::sampled_from_fn(256, |t| C64::from_polar(1.0, -t) + a * C64::from_polar(1.0, 2.0 * t)).unwrap();
        prop_assert_eq!(f.evaluate(theta), f.evaluate(reduce_angle(theta)));
    }

    // Relative to max|F'| so that near-stationary points do not divide by ~0.
    #[test]
    fn derivative_matches_central_differences((kmin, c) in coeffs(), theta in 0.0f64..TAU) {
        let f = Symbol::from_coefficients(kmin, c).unwrap();
        let h = 1e-5;
        let fd = (f.evaluate(theta + h) - f.evaluate(theta - h)) / (2.0 * h);
        let dmax = (0..512).map(|i| f.derivative(TAU * i as f64 / 512.0).norm()).fold(0.0, f64::max);
        prop_assume!(dmax > 1e-3);
        prop_assert!((fd - f.derivative(theta)).norm() <= 1e-6 * dmax);
    }

    #[test]
    fn json_round_trip((kmin, c) in coeffs(), theta in 0.0f64..TAU) {
        let f = Symbol::from_coefficients(kmin, c).unwrap();
        let text = serde_json::to_string(&f.to_spec()).unwrap();
        let back: SymbolSpec = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &f.to_spec());
        let g = Symbol::from_json(&text).unwrap();
        prop_assert!((g.evaluate(theta) - f.evaluate(theta)).norm() <= 1e-14 * (1.0 + f.evaluate(theta).norm()));
    }

    #[test]
    fn reflection_reverses_parameter((kmin, c) in coeffs(), theta in 0.0f64..TAU) {
        let f = Symbol::from_coefficients(kmin, c).unwrap();
        let g = f.reflect();
        prop_assert!((g.evaluate(theta) - f.evaluate(-theta)).norm() <= 1e-12);
        prop_assert_eq!(g.toeplitz_truncation(5).unwrap().matrix, f.toeplitz_truncation(5).unwrap().matrix.transpose());
    }
}

// Cubic splines converge at O(h^4); 1024 samples put the error near 1e-9.
#[test]
fn sampled_symbol_reproduces_trig_coefficients() {
    let f = Symbol::sampled_from_fn(1024, |t| 2.0 * C64::from_polar(1.0, -t) + c64(0.5, 0.25) * C64::from_polar(1.0, 3.0 * t))
        .unwrap();
    assert!((f.coefficient(-1) - c64(2.0, 0.0)).norm() < 1e-8);
    assert!((f.coefficient(3) - c64(0.5, 0.25)).norm() < 1e-8);
    assert!(f.coefficient(0).norm() < 1e-8);
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(Symbol::fourier(&[]).is_err());
    assert!(Symbol::sampled(vec![0.0, 1.0], vec![c64(1.0, 0.0); 2]).is_err());
    assert!(Symbol::from_json("{\"type\":\"fourier\",\"coeffs\":[{\"k\":0,\"re\":1.0}]").is_err());
    let f = Symbol::sampled_from_fn(32, |t| C64::from_polar(1.0, t)).unwrap();
    assert!(f.toeplitz_truncation(16).is_err());
}
