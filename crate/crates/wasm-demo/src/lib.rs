//! Browser bindings for the demo page in `www/`.
//!
//! The model is the scaled one: Mittag-Leffler waiting times with rate
//! `lambda` and per-trade log-variance `1 / lambda`, whose prices approach
//! the fractional limit as `lambda` grows.

use sm_pricer_core::fractional::{aged_price_gy_direct, subordinated_price_g0};
use sm_pricer_core::markov::bs_call;
use sm_pricer_core::sampling::{simulate_semimarkov_path, RngStream, WaitingTimeLaw};
use sm_pricer_core::semimarkov::{SemiMarkovPricer, SeriesConfig};
use sm_pricer_core::OptionSpec;
use wasm_bindgen::prelude::*;

fn js(e: sm_pricer_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn limit_price(alpha: f64, x: f64, strike: f64, z: f64, age: f64) -> sm_pricer_core::Result<f64> {
    if age == 0.0 || alpha == 1.0 {
        subordinated_price_g0(alpha, x, strike, z)
    } else {
        aged_price_gy_direct(alpha, OptionSpec::new(x, strike, z, age)?)
    }
}

fn series_pricer(alpha: f64, lambda: f64, z: f64) -> sm_pricer_core::Result<SemiMarkovPricer> {
    let law = WaitingTimeLaw::mittag_leffler(alpha, lambda)?;
    SemiMarkovPricer::new(law, 1.0 / lambda, z, &SeriesConfig::default())
}

/// Prices on `points` spots in `[x_lo, x_hi]`, flattened as
/// `[spots, semi-Markov series, fractional limit, Black–Scholes]`.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn price_curves(
    alpha: f64,
    lambda: f64,
    strike: f64,
    z: f64,
    age: f64,
    x_lo: f64,
    x_hi: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    if points < 2 || !(x_lo > 0.0 && x_hi > x_lo) {
        return Err(JsError::new("need at least two spots in a positive range"));
    }
    let pricer = series_pricer(alpha, lambda, z).map_err(js)?;
    let dist = pricer.counts().aged(age, z).map_err(js)?;
    let xs: Vec<f64> = (0..points)
        .map(|i| x_lo + (x_hi - x_lo) * i as f64 / (points - 1) as f64)
        .collect();
    let mut out = xs.clone();
    for &x in &xs {
        out.push(pricer.price_with(&dist, x, strike).map_err(js)?.value);
    }
    for &x in &xs {
        out.push(limit_price(alpha, x, strike, z, age).map_err(js)?);
    }
    for &x in &xs {
        out.push(bs_call(x, strike, z).map_err(js)?);
    }
    Ok(out)
}

/// At-the-money series prices for each rate in `lambdas` against the
/// limit, flattened as rows `[lambda, price, limit, |price - limit|]`.
#[wasm_bindgen]
pub fn scaling_convergence(alpha: f64, z: f64, age: f64, lambdas: Vec<f64>) -> Result<Vec<f64>, JsError> {
    let target = limit_price(alpha, 1.0, 1.0, z, age).map_err(js)?;
    let mut out = Vec::with_capacity(4 * lambdas.len());
    for lambda in lambdas {
        let price = series_pricer(alpha, lambda, z)
            .and_then(|p| p.price(1.0, 1.0, age, z))
            .map_err(js)?
            .value;
        out.extend([lambda, price, target, (price - target).abs()]);
    }
    Ok(out)
}

/// One martingale price path from spot 1 over `[0, horizon]`, flattened
/// as `[t0, x0, t1, x1, ...]` with the horizon and terminal price last.
#[wasm_bindgen]
pub fn simulate_path(alpha: f64, lambda: f64, horizon: f64, age: f64, seed: u64) -> Result<Vec<f64>, JsError> {
    let law = WaitingTimeLaw::mittag_leffler(alpha, lambda).map_err(js)?;
    let mut rng = RngStream::new(seed, 0).rng();
    let path = simulate_semimarkov_path(1.0, 1.0 / lambda, &law, horizon, age, true, &mut rng).map_err(js)?;
    let mut out = vec![0.0, 1.0];
    let mut log_price = 0.0;
    for (t, y) in path.epochs.iter().zip(&path.log_returns) {
        log_price += y;
        out.extend([*t, log_price.exp()]);
    }
    out.extend([horizon, path.terminal_price]);
    Ok(out)
}
