use proptest::prelude::*;
use sm_pricer_core::quadrature::{integrate, integrate_pieces, QuadConfig};
use sm_pricer_core::specfun::{
    gamma, mittag_leffler, ml_density, ml_survival, normal_cdf, MlParams, StableKernel,
};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

// e^{x^2} erfc(x), 30-digit references.
const HALF_ORDER_ML: [(f64, f64); 4] = [
    (0.25, 0.770_346_547_730_996_7),
    (1.0, 0.427_583_576_155_807),
    (2.0, 0.255_395_676_310_505_74),
    (3.0, 0.179_001_151_181_389_95),
];

#[test]
fn order_one_is_exponential() {
    for x in [0.0, 1e-3, 0.5, 1.0, 5.0, 20.0, 100.0] {
        let e = mittag_leffler(1.0, -x).unwrap();
        assert!((e - (-x).exp()).abs() <= 1e-12 * (-x).exp().max(1e-300), "x={x}: {e}");
    }
}

#[test]
fn half_order_matches_complementary_error_function() {
    for (x, want) in HALF_ORDER_ML {
        assert!(rel(mittag_leffler(0.5, -x).unwrap(), want) < 1e-8, "x={x}");
    }
    let p = MlParams::new(0.5, 1.0).unwrap();
    assert!((ml_survival(p, 1.0).unwrap() - 0.427_583_576_155_807).abs() < 1e-8);
    assert!((normal_cdf(0.5) - 0.691_462_461_274_013_1).abs() < 1e-14);
}

#[test]
fn density_is_minus_derivative_of_survival() {
    let p = MlParams::new(0.5, 1.0).unwrap();
    let d = 1e-4;
    let fd = (ml_survival(p, 1.0 - d).unwrap() - ml_survival(p, 1.0 + d).unwrap()) / (2.0 * d);
    assert!(rel(ml_density(p, 1.0).unwrap(), fd) < 1e-5);
}

#[test]
fn survival_power_law_tail() {
    for alpha in [0.3, 0.5, 0.7, 0.9] {
        let lambda = 2.0f64;
        let t = (1e4 / lambda).powf(1.0 / alpha);
        let p = MlParams::new(alpha, lambda).unwrap();
        let asym = t.powf(-alpha) / (lambda * gamma(1.0 - alpha));
        let ratio = ml_survival(p, t).unwrap() / asym;
        assert!((ratio - 1.0).abs() < 0.02, "alpha {alpha}: ratio {ratio}");
    }
}

#[test]
fn sonine_pair_convolves_to_one() {
    for alpha in [0.3, 0.5, 0.9] {
        let k = StableKernel::new(alpha).unwrap();
        for t in [0.1, 1.0, 10.0] {
            let c = k.sonine_convolution(t).unwrap();
            assert!((c - 1.0).abs() < 1e-8, "alpha {alpha}, t {t}: {c}");
        }
    }
}

#[test]
fn levy_closed_form_at_half() {
    let k = StableKernel::new(0.5).unwrap();
    assert!((k.stable_density(1.0, 1.0).unwrap() - 0.219_695_644_733_861_2).abs() < 1e-9);
    for (x, t) in [(0.05f64, 1.0f64), (0.3, 0.5), (2.0, 1.0), (40.0, 2.0)] {
        let levy = t / (2.0 * std::f64::consts::PI.sqrt()) * x.powf(-1.5) * (-t * t / (4.0 * x)).exp();
        assert!((k.stable_density(x, t).unwrap() - levy).abs() < 1e-9 * levy.max(1.0), "x={x}, t={t}");
    }
    // median of the Lévy law at t = 1
    assert!((k.stable_cdf(1.099_054_669_158_866_2, 1.0).unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn stable_density_normalized() {
    for alpha in [0.3, 0.5, 0.8] {
        let k = StableKernel::new(alpha).unwrap();
        let f = |x: f64| k.stable_density(x, 1.0).unwrap_or(0.0);
        let breaks = [0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0, 100.0, 1e3];
        let body = integrate_pieces(f, &breaks, QuadConfig::new(1e-12, 1e-10).with_budget(4000)).unwrap();
        let tail = 1.0 - k.stable_cdf(1e3, 1.0).unwrap();
        assert!((body.value + tail - 1.0).abs() < 1e-6, "alpha {alpha}: {}", body.value + tail);
    }
}

#[test]
fn inverse_stable_half_gaussian_and_moments() {
    let k = StableKernel::new(0.5).unwrap();
    for (s, t) in [(0.1, 1.0), (1.0, 1.0), (2.5, 1.0), (0.7, 3.0)] {
        let closed = (std::f64::consts::PI * t).powf(-0.5) * (-s * s / (4.0 * t)).exp();
        assert!((k.inverse_stable_density(s, t).unwrap() - closed).abs() < 1e-5, "s={s}");
        assert!((k.inverse_stable_density_scaled(s, t).unwrap() - closed).abs() < 1e-5, "s={s}");
    }
    for alpha in [0.4, 0.5, 0.8] {
        let k = StableKernel::new(alpha).unwrap();
        let t = 1.0;
        let cfg = QuadConfig::new(1e-12, 1e-10).with_budget(4000);
        let dens = |s: f64| k.inverse_stable_density_scaled(s, t).unwrap_or(0.0);
        let mass = integrate(dens, 0.0, 30.0, cfg).unwrap().value;
        let mean = integrate(|s| s * dens(s), 0.0, 30.0, cfg).unwrap().value;
        assert!((mass - 1.0).abs() < 1e-5, "alpha {alpha}: mass {mass}");
        let want = t.powf(alpha) / gamma(1.0 + alpha);
        assert!((mean - want).abs() < 1e-5, "alpha {alpha}: mean {mean}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn survival_is_completely_monotone_on_grids(
        alpha in 0.05f64..=1.0,
        lambda in 0.1f64..10.0,
        start in 0.0f64..5.0,
        step in 1e-3f64..1.0,
    ) {
        let p = MlParams::new(alpha, lambda).unwrap();
        let f: Vec<f64> = (0..4).map(|i| ml_survival(p, start + i as f64 * step).unwrap()).collect();
        for v in &f {
            prop_assert!(*v > 0.0 && *v <= 1.0);
        }
        let tol = 1e-13;
        for w in f.windows(2) {
            prop_assert!(w[1] - w[0] <= tol);
        }
        for w in f.windows(3) {
            prop_assert!(w[2] - 2.0 * w[1] + w[0] >= -tol);
        }
    }
}
