//! Pricing when trades arrive as a Poisson process: Black–Scholes with zero
//! rate and unit volatility, and the Poisson-weighted series over jump counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{call_payoff, Method, OptionSpec, PriceEstimate};
use crate::specfun::{ln_gamma, normal_cdf};

/// Black–Scholes call price with zero rate after operational time `s`
/// (the variance of the log-price).
pub fn bs_call(x: f64, strike: f64, s: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::domain(format!("spot {x} must be positive")));
    }
    if !(strike >= 0.0 && strike.is_finite()) {
        return Err(Error::domain(format!("strike {strike} must be nonnegative")));
    }
    if !(s >= 0.0) {
        return Err(Error::domain(format!("operational time {s} must be nonnegative")));
    }
    Ok(bs_call_unchecked(x, strike, s))
}

pub(crate) fn bs_call_unchecked(x: f64, strike: f64, s: f64) -> f64 {
    if strike == 0.0 {
        return x;
    }
    if s == 0.0 {
        return call_payoff(x, strike);
    }
    let sd = s.sqrt();
    let d1 = ((x / strike).ln() + 0.5 * s) / sd;
    let d2 = d1 - sd;
    let v = x * normal_cdf(d1) - strike * normal_cdf(d2);
    v.clamp(call_payoff(x, strike), x)
}

/// Price conditional on exactly `n` jumps of log-variance `sigma2` each.
pub fn merton_term(x: f64, strike: f64, sigma2: f64, n: u64) -> Result<f64> {
    if !(sigma2 >= 0.0) {
        return Err(Error::domain(format!("variance {sigma2} must be nonnegative")));
    }
    bs_call(x, strike, n as f64 * sigma2)
}

/// Poisson rate and per-jump log-return variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkovModel {
    pub lambda: f64,
    pub sigma2: f64,
}

impl MarkovModel {
    pub fn new(lambda: f64, sigma2: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::domain(format!("rate {lambda} must be positive")));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::domain(format!("variance {sigma2} must be positive")));
        }
        Ok(Self { lambda, sigma2 })
    }
}

/// The Poisson(`mean`) probabilities over the window of counts outside of
/// which the mass is provably below the requested tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonWindow {
    pub start: usize,
    pub pmf: Vec<f64>,
    /// Chernoff upper bound on the probability outside the window.
    pub omitted: f64,
}

impl PoissonWindow {
    pub fn new(mean: f64, tol: f64) -> Self {
        if mean <= 0.0 {
            return Self {
                start: 0,
                pmf: vec![1.0],
                omitted: 0.0,
            };
        }
        let mode = mean.floor() as usize;
        let p_mode = poisson_ln_pmf(mode, mean).exp();
        // ln P(N >= n) <= -mean + n (1 + ln mean - ln n) for n > mean,
        // and the same bound for P(N <= n) with n < mean.
        let chernoff = |n: usize| -> f64 {
            if n == 0 {
                return -mean;
            }
            let nf = n as f64;
            -mean + nf * (1.0 + mean.ln() - nf.ln())
        };
        let ln_tol = tol.ln();

        let mut upper = Vec::new();
        let mut p = p_mode;
        let mut k = mode;
        let upper_bound = loop {
            let next = k + 1;
            if next as f64 > mean {
                let b = chernoff(next);
                if b < ln_tol {
                    break b.exp();
                }
            }
            p *= mean / next as f64;
            upper.push(p);
            k = next;
        };

        let mut lower = Vec::new();
        let mut p = p_mode;
        let mut k = mode;
        let lower_bound = loop {
            if k == 0 {
                break 0.0;
            }
            let prev = k - 1;
            let b = chernoff(prev);
            if (prev as f64) < mean && b < ln_tol {
                break b.exp();
            }
            p *= k as f64 / mean;
            lower.push(p);
            k = prev;
        };

        let start = mode - lower.len();
        let mut pmf = Vec::with_capacity(lower.len() + 1 + upper.len());
        pmf.extend(lower.iter().rev());
        pmf.push(p_mode);
        pmf.extend(upper);
        Self {
            start,
            pmf,
            omitted: upper_bound + lower_bound,
        }
    }

    /// Largest count in the window.
    pub fn end(&self) -> usize {
        self.start + self.pmf.len() - 1
    }

    /// `sum_n P(N = n) f(n)` over the window.
    pub fn expect<F: FnMut(usize) -> f64>(&self, mut f: F) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(i, p)| p * f(self.start + i))
            .sum()
    }
}

/// Adds `weight * P(N = k)`, `N ~ Poisson(mean)`, to `out[k]` for every
/// `k < out.len()`. The recurrence runs outward from the mode and stops
/// once the geometric bound on the remaining tail falls below `tol`.
pub(crate) fn add_poisson_pmf(mean: f64, weight: f64, tol: f64, out: &mut [f64]) {
    let len = out.len();
    if len == 0 {
        return;
    }
    if mean <= 0.0 {
        out[0] += weight;
        return;
    }
    let top = (len - 1) as f64;
    if top < mean && -mean + top * (1.0 + mean.ln() - top.ln()) < tol.ln() {
        // Chernoff: P(N <= len - 1) is already below tol.
        return;
    }
    let mode = mean.floor() as usize;
    let p_mode = poisson_ln_pmf(mode, mean).exp();
    let mut p = p_mode;
    let mut k = mode;
    while k < len {
        out[k] += weight * p;
        let ratio = mean / (k + 1) as f64;
        p *= ratio;
        k += 1;
        if p <= tol * (1.0 - ratio) {
            break;
        }
    }
    let mut p = p_mode;
    let mut k = mode;
    while k > 0 {
        p *= k as f64 / mean;
        k -= 1;
        if k < len {
            out[k] += weight * p;
        }
        if p <= tol * (1.0 - k as f64 / mean) {
            break;
        }
    }
}

/// `ln P(N = n)` for `N ~ Poisson(mean)`, without the cancellation of the
/// naive formula at large `n`.
pub fn poisson_ln_pmf(n: usize, mean: f64) -> f64 {
    if n < 16 {
        return -mean + n as f64 * mean.ln() - ln_gamma(n as f64 + 1.0);
    }
    let m = n as f64;
    // Stirling series for ln n!
    let inv = 1.0 / m;
    let inv2 = inv * inv;
    let corr = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    m * ((mean - m) / m).ln_1p() - (mean - m) - 0.5 * (2.0 * std::f64::consts::PI * m).ln() - corr
}

/// Poisson-weighted series of [`merton_term`]s, truncated once the neglected
/// Poisson mass times the spot is below `tol`.
pub fn markov_series_price(model: MarkovModel, opt: OptionSpec, tol: f64) -> Result<PriceEstimate> {
    opt.validate()?;
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance {tol} must be positive")));
    }
    let x = opt.spot;
    let window = PoissonWindow::new(model.lambda * opt.time_to_maturity, tol / x);
    let value = window.expect(|n| bs_call_unchecked(x, opt.strike, n as f64 * model.sigma2));
    Ok(PriceEstimate::series(
        Method::MarkovSeries,
        value,
        [value, value + window.omitted * x],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussHermite;

    #[test]
    fn bs_call_reference_values() {
        // 2 N(1/2) - 1
        assert!((bs_call(1.0, 1.0, 1.0).unwrap() - 0.382_924_922_548_026_2).abs() < 1e-14);
        assert!((bs_call(1.3, 1.0, 0.0).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(bs_call(0.7, 1.0, 0.0).unwrap(), 0.0);
        assert!(bs_call(2.0, 1.0, 1e4).unwrap() <= 2.0);
        assert!(bs_call(-1.0, 1.0, 1.0).is_err());
        assert!(bs_call(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn merton_term_matches_bs_and_increases() {
        assert!((merton_term(1.2, 1.0, 0.3, 0).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(merton_term(1.0, 1.0, 1.0, 1).unwrap(), bs_call(1.0, 1.0, 1.0).unwrap());
        let mut prev = 0.0;
        for n in 0..50 {
            let c = merton_term(0.9, 1.1, 0.02, n).unwrap();
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn poisson_window_mass() {
        for mean in [0.3, 4.0, 37.5, 1000.0, 12345.0] {
            let w = PoissonWindow::new(mean, 1e-13);
            let mass: f64 = w.pmf.iter().sum();
            assert!((mass - 1.0).abs() < 1e-12, "mean {mean}: {mass}");
            assert!(w.omitted < 1e-12);
            let m = w.expect(|n| n as f64);
            assert!((m - mean).abs() < 1e-9 * mean.max(1.0));
        }
    }

    #[test]
    fn poisson_ln_pmf_branches_agree() {
        for n in [16usize, 40, 300] {
            for mean in [3.0, 41.0, 290.0] {
                let direct = -mean + n as f64 * f64::ln(mean) - ln_gamma(n as f64 + 1.0);
                assert!((poisson_ln_pmf(n, mean) - direct).abs() < 1e-11 * direct.abs().max(1.0));
            }
        }
    }

    #[test]
    fn series_trivial_cases() {
        let model = MarkovModel::new(3.0, 0.1).unwrap();
        let opt = OptionSpec::new(1.4, 1.0, 0.0, 0.0).unwrap();
        let p = markov_series_price(model, opt, 1e-12).unwrap();
        assert!((p.value - 0.4).abs() < 1e-15);
        let opt = OptionSpec::new(1.4, 0.0, 2.0, 0.0).unwrap();
        let p = markov_series_price(model, opt, 1e-12).unwrap();
        assert!((p.value - 1.4).abs() < 1e-11);
    }

    #[test]
    fn donsker_limit() {
        let bs = bs_call(1.0, 1.0, 0.25).unwrap();
        let opt = OptionSpec::new(1.0, 1.0, 0.25, 0.0).unwrap();
        let err = |lambda: f64| {
            let m = MarkovModel::new(lambda, 1.0 / lambda).unwrap();
            (markov_series_price(m, opt, 1e-12).unwrap().value - bs).abs()
        };
        let e: Vec<f64> = [10.0, 100.0, 1000.0].into_iter().map(err).collect();
        assert!(e[0] > e[1] && e[1] > e[2] && e[2] <= 1e-2, "{e:?}");
    }

    #[test]
    fn kolmogorov_forward_equation() {
        // dC/dz = lambda (E[C(x e^Y, z)] - C(x, z)), Y ~ N(-s2/2, s2)
        let m = MarkovModel::new(4.0, 0.05).unwrap();
        let gh = GaussHermite::new(64);
        let price = |x: f64, z: f64| {
            markov_series_price(m, OptionSpec::new(x, 1.0, z, 0.0).unwrap(), 1e-14).unwrap().value
        };
        let (x, z, dz) = (1.05, 0.7, 1e-4);
        let lhs = (price(x, z + dz) - price(x, z - dz)) / (2.0 * dz);
        let sd = m.sigma2.sqrt();
        let avg = gh.expect(|g| price(x * (sd * g - 0.5 * m.sigma2).exp(), z));
        let rhs = m.lambda * (avg - price(x, z));
        // The n = 0 term has a payoff kink, which limits Gauss–Hermite.
        assert!((lhs - rhs).abs() < 1e-4, "{lhs} vs {rhs}");
    }
}
