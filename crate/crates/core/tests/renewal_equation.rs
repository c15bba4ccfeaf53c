use sm_pricer_core::estimate::call_payoff;
use sm_pricer_core::markov::{markov_series_price, MarkovModel};
use sm_pricer_core::quadrature::Grid1D;
use sm_pricer_core::renewal::{kernel_mass, verify_prelimit_renewal, RenewalKernel, VERIFY_POINTS_PER_UNIT};
use sm_pricer_core::sampling::WaitingTimeLaw;
use sm_pricer_core::semimarkov::{SemiMarkovPricer, SeriesConfig};
use sm_pricer_core::OptionSpec;

fn grid(z: f64) -> Grid1D {
    Grid1D::covering(z, VERIFY_POINTS_PER_UNIT).unwrap()
}

#[test]
fn markov_price_solves_renewal_equation() {
    let law = WaitingTimeLaw::exponential(3.0).unwrap();
    let model = MarkovModel::new(3.0, 0.04).unwrap();
    let price = |x: f64, _: f64, z: f64| Ok(markov_series_price(model, OptionSpec::new(x, 1.0, z, 0.0)?, 1e-13)?.value);
    for age in [0.0, 1.2] {
        let opt = OptionSpec::new(1.0, 1.0, 1.0, age).unwrap();
        let r = verify_prelimit_renewal(&law, 0.04, price, opt, grid(1.0)).unwrap();
        assert!(r <= 1e-4, "age {age}: {r}");
    }
}

#[test]
fn series_price_solves_renewal_equation() {
    let law = WaitingTimeLaw::mittag_leffler(0.7, 5.0).unwrap();
    let pricer = SemiMarkovPricer::new(law, 0.04, 1.0, &SeriesConfig::default()).unwrap();
    let opt = OptionSpec::new(1.0, 1.0, 1.0, 0.0).unwrap();
    let good = verify_prelimit_renewal(&law, 0.04, |x, s, z| Ok(pricer.price(x, 1.0, s, z)?.value), opt, grid(1.0)).unwrap();
    let bad = verify_prelimit_renewal(&law, 0.04, |x, _, _| Ok(call_payoff(x, 1.0)), opt, grid(1.0)).unwrap();
    assert!(good <= 1e-3, "{good}");
    assert!(bad >= 10.0 * 1e-3, "{bad}");
}

#[test]
fn kernel_mass_is_defective_and_increasing() {
    let kernels = [
        RenewalKernel::StableAged { alpha: 0.5, age: 1.0 },
        RenewalKernel::StableAged { alpha: 0.9, age: 0.2 },
        RenewalKernel::MlConditional {
            law: WaitingTimeLaw::mittag_leffler(0.6, 2.0).unwrap(),
            age: 0.0,
        },
        RenewalKernel::MlConditional {
            law: WaitingTimeLaw::mittag_leffler(0.6, 2.0).unwrap(),
            age: 0.7,
        },
    ];
    for k in kernels {
        let mut prev = 0.0;
        for z in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let m = kernel_mass(&k, z, &Grid1D::covering(z, 512).unwrap()).unwrap();
            assert!(m > prev && m <= 1.0 + 1e-9, "{k:?} z={z}: {m}");
            prev = m;
        }
    }
    let k = RenewalKernel::StableAged { alpha: 0.5, age: 1.0 };
    let m = kernel_mass(&k, 1.0, &Grid1D::covering(1.0, 4096).unwrap()).unwrap();
    assert!((m - (1.0 - 0.5f64.sqrt())).abs() < 1e-7);
    let far = 1.0 - k.survival(1e12).unwrap();
    assert!((far - 1.0).abs() < 1e-5);
}

#[test]
fn kernel_mass_order_near_singularity() {
    for alpha in [0.5, 0.7] {
        let law = WaitingTimeLaw::mittag_leffler(alpha, 1.0).unwrap();
        let k = RenewalKernel::MlConditional { law, age: 0.0 };
        let exact = 1.0 - law.survival(1.0).unwrap();
        let err = |n: usize| (kernel_mass(&k, 1.0, &Grid1D::covering(1.0, n).unwrap()).unwrap() - exact).abs();
        let order = (err(128) / err(256)).log2();
        assert!(order >= 1.0, "alpha {alpha}: order {order}");
    }
}

#[test]
fn kernel_mass_order_away_from_singularity() {
    let law = WaitingTimeLaw::mittag_leffler(0.6, 2.0).unwrap();
    let k = RenewalKernel::MlConditional { law, age: 0.5 };
    let exact = 1.0 - k.survival(1.0).unwrap();
    let err = |n: usize| (kernel_mass(&k, 1.0, &Grid1D::covering(1.0, n).unwrap()).unwrap() - exact).abs();
    let order = (err(128) / err(256)).log2();
    assert!((order - 2.0).abs() < 0.1, "order {order}");
}
