use sm_pricer_core::fractional::{
    aged_price_gy, aged_price_gy_direct, apply_terminal_fractional, bs_field, g0_field, gy_field, limit_mc_price,
    pde_residual_g0, pde_residual_gy, sonine_inversion_check, subordinated_price_g0, FieldSpec, FracOperatorSpec,
    GyIntegrand, ResidualWindow,
};
use sm_pricer_core::sampling::RngStream;
use sm_pricer_core::OptionSpec;

#[test]
fn renewal_route_matches_direct_quadrature() {
    for alpha in [0.3, 0.5, 0.8] {
        for y in [0.1, 1.0] {
            for z in [0.25, 1.0] {
                let opt = OptionSpec::new(1.0, 1.0, z, y).unwrap();
                let sol = aged_price_gy(alpha, opt).unwrap();
                let direct = aged_price_gy_direct(alpha, opt).unwrap();
                assert!(!sol.resolution_warning);
                assert!((sol.estimate.value - direct).abs() < 1e-3);
            }
        }
    }
}

#[test]
fn small_age_approaches_age_zero_price() {
    // The gap shrinks like y^alpha: the no-renewal mass (y / (y + z))^alpha
    // keeps the payoff instead of the age-zero price.
    for alpha in [0.5, 0.8] {
        let g0 = subordinated_price_g0(alpha, 1.0, 1.0, 1.0).unwrap();
        let gaps: Vec<f64> = [1e-1, 1e-2, 1e-3]
            .into_iter()
            .map(|y| {
                let opt = OptionSpec::new(1.0, 1.0, 1.0, y).unwrap();
                let d = aged_price_gy_direct(alpha, opt).unwrap();
                (d - g0).abs()
            })
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2]);
        let opt = OptionSpec::new(1.0, 1.0, 1.0, 1e-3).unwrap();
        let gy = aged_price_gy(alpha, opt).unwrap().estimate.value;
        assert!((gy - g0).abs() - gaps[2] < 1e-4);
        if alpha >= 0.8 {
            assert!(gaps[2] <= 1e-2);
        }
    }
}

#[test]
fn limit_prices_match_monte_carlo() {
    let g0 = subordinated_price_g0(0.5, 1.0, 1.0, 1.0).unwrap();
    let opt = OptionSpec::new(1.0, 1.0, 1.0, 0.0).unwrap();
    let mc = limit_mc_price(0.5, opt, 1_000_000, RngStream::new(77, 0)).unwrap();
    assert!((g0 - mc.value).abs() < 3.0 * mc.std_error.unwrap(), "{g0} vs {mc:?}");
    for (i, alpha) in [0.3, 0.5, 0.8].into_iter().enumerate() {
        for y in [0.1, 1.0] {
            for z in [0.25, 1.0] {
                let opt = OptionSpec::new(1.0, 1.0, z, y).unwrap();
                let q = aged_price_gy(alpha, opt).unwrap().estimate.value;
                let mc = limit_mc_price(alpha, opt, 1_000_000, RngStream::new(78, i as u64)).unwrap();
                let se = mc.std_error.unwrap();
                assert!((q - mc.value).abs() < 3.0 * se, "alpha {alpha} y {y} z {z}: {q} vs {}", mc.value);
            }
        }
    }
}

#[test]
fn extrapolated_ages_are_flagged() {
    let sol = aged_price_gy(0.5, OptionSpec::new(1.0, 1.0, 0.5, 2.0).unwrap()).unwrap();
    assert!(sol.extrapolated);
    let sol = aged_price_gy(0.5, OptionSpec::new(1.0, 1.0, 2.0, 0.5).unwrap()).unwrap();
    assert!(!sol.extrapolated);
}

#[test]
fn terminal_operator_is_linear() {
    let spec = FracOperatorSpec::new(0.6, 1.5).unwrap();
    let n = 81;
    let u: Vec<f64> = (0..n).map(|j| (j as f64 * 0.1).sin()).collect();
    let v: Vec<f64> = (0..n).map(|j| (j as f64 * 0.05).powi(2)).collect();
    let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| 2.5 * a - 0.75 * b).collect();
    let (du, dv, dw) = (
        apply_terminal_fractional(spec, &u).unwrap(),
        apply_terminal_fractional(spec, &v).unwrap(),
        apply_terminal_fractional(spec, &w).unwrap(),
    );
    for j in 0..n {
        assert!((dw[j] - (2.5 * du[j] - 0.75 * dv[j])).abs() < 1e-12 * (1.0 + dw[j].abs()));
    }
}

#[test]
fn sonine_inversion_converges_on_smooth_curve() {
    // fixed smooth curve with random-looking coefficients
    let coef = [0.37, -1.21, 0.84, 0.15];
    let curve = |n: usize| -> Vec<f64> {
        let h = 1.0 / (n - 1) as f64;
        (0..n)
            .map(|j| {
                let t = j as f64 * h;
                coef[0] + coef[1] * t + coef[2] * (3.0 * t).sin() + coef[3] * (-t).exp()
            })
            .collect()
    };
    let e: Vec<f64> = [65usize, 129, 257]
        .into_iter()
        .map(|n| sonine_inversion_check(0.6, 1.0 / (n - 1) as f64, &curve(n)).unwrap())
        .collect();
    assert!(e[0] > e[1] && e[1] > e[2], "{e:?}");
}

#[test]
fn fractional_residuals_shrink_under_refinement() {
    let alpha = 0.5;
    let coarse = FieldSpec::new(alpha, 1.0, 1.0, 65, 33).unwrap();
    let fine = coarse.refined();
    let (g0c, g0f) = (g0_field(&coarse).unwrap(), g0_field(&fine).unwrap());
    for (f, spec) in [(&g0c, &coarse), (&g0f, &fine)] {
        let last = spec.n_t - 1;
        for (x, row) in f.x_nodes.iter().zip(&f.values) {
            assert_eq!(row[last], (x - 1.0f64).max(0.0));
        }
    }
    let rc = pde_residual_g0(alpha, 1.0, &g0c, ResidualWindow::for_spec(&coarse)).unwrap().sup_norm;
    let rf = pde_residual_g0(alpha, 1.0, &g0f, ResidualWindow::for_spec(&fine)).unwrap().sup_norm;
    assert!(rc / rf >= 1.5, "{rc} {rf}");
    for y in [0.1, 1.0] {
        let (gyc, gyf) = (gy_field(y, alpha, 1.0, &g0c).unwrap(), gy_field(y, alpha, 1.0, &g0f).unwrap());
        let rc = pde_residual_gy(alpha, y, 1.0, &g0c, &gyc, ResidualWindow::for_spec(&coarse), GyIntegrand::ForwardShift)
            .unwrap()
            .sup_norm;
        let rf = pde_residual_gy(alpha, y, 1.0, &g0f, &gyf, ResidualWindow::for_spec(&fine), GyIntegrand::ForwardShift)
            .unwrap()
            .sup_norm;
        assert!(rc / rf >= 1.5, "y {y}: {rc} {rf}");
    }
}

#[test]
fn frozen_regime_for_large_age() {
    let spec = FieldSpec::new(0.5, 1.0, 1.0, 65, 33).unwrap();
    let g0 = g0_field(&spec).unwrap();
    let y = 1e6;
    let gy = gy_field(y, 0.5, 1.0, &g0).unwrap();
    let r = pde_residual_gy(0.5, y, 1.0, &g0, &gy, ResidualWindow::for_spec(&spec), GyIntegrand::ForwardShift).unwrap();
    assert!(r.sup_norm < 1e-3, "{}", r.sup_norm);
}

#[test]
fn near_classical_order_matches_black_scholes() {
    let spec = FieldSpec::new(0.99, 1.0, 1.0, 65, 33).unwrap();
    let (a, b) = (g0_field(&spec).unwrap(), bs_field(&spec).unwrap());
    let gap = a
        .values
        .iter()
        .flatten()
        .zip(b.values.iter().flatten())
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max);
    assert!(gap <= 2e-2, "{gap}");
}
