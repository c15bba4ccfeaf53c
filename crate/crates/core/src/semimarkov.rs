//! Pricing when waiting times between trades are not exponential: the
//! price is a mixture of Black–Scholes prices over the conditional law of
//! the number of trades before maturity given the current age.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{Method, OptionSpec, PriceEstimate};
use crate::markov::{add_poisson_pmf, bs_call_unchecked, PoissonWindow};
use crate::quadrature::{gauss_legendre, Grid1D, ProductWeights};
use crate::sampling::{monte_carlo_many, ResidualLifetime, RngStream, WaitingTimeLaw};
use crate::specfun::{ml_survival_integral_series, InverseStableRule};

/// `P(remaining lifetime <= w | age s)`.
pub fn residual_lifetime_cdf(law: &WaitingTimeLaw, s: f64, w: f64) -> Result<f64> {
    if !(s >= 0.0 && w >= 0.0) {
        return Err(Error::domain(format!("age {s} and horizon {w} must be nonnegative")));
    }
    if let WaitingTimeLaw::Exponential { lambda } = *law {
        return Ok(-(-lambda * w).exp_m1());
    }
    let surv_s = law.survival(s)?;
    if surv_s <= 0.0 {
        return Err(Error::DegenerateAge { age: s });
    }
    let surv_sw = law.survival(s + w)?;
    Ok(((surv_s - surv_sw) / surv_s).clamp(0.0, 1.0))
}

/// Law of the number of trades before maturity, truncated at `n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingDistribution {
    pub probs: Vec<f64>,
    /// `1 - sum(probs)`: mass beyond `n_max` plus quadrature defect.
    pub tail_mass: f64,
}

impl CountingDistribution {
    fn from_probs(mut probs: Vec<f64>) -> Self {
        for p in probs.iter_mut() {
            *p = p.max(0.0);
        }
        let total: f64 = probs.iter().sum();
        Self {
            probs,
            tail_mass: (1.0 - total).max(0.0),
        }
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }
}

/// How renewal counting probabilities are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountingRoute {
    /// Grid convolution when the grid resolves the waiting times, else the
    /// time-change mixture.
    #[default]
    Auto,
    /// Recursive convolution of the waiting-time law on a uniform grid.
    Grid,
    /// `P(N(u) = k) = E[Poisson(k; lambda L(u))]` with `L` the inverse
    /// stable subordinator.
    Mixture,
}

/// Discretisation settings of the series pricer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeriesConfig {
    /// Largest jump count kept; `None` picks it from the count quantiles.
    pub n_max: Option<usize>,
    pub points_per_unit: usize,
    /// Largest acceptable truncated counting mass.
    pub tail_tol: f64,
    pub route: CountingRoute,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            n_max: None,
            points_per_unit: 512,
            tail_tol: 1e-8,
            route: CountingRoute::Auto,
        }
    }
}

/// Smallest `n_max` considered.
pub const DEFAULT_N_MAX: usize = 64;
// First grid cell may hold at most this much waiting-time mass.
const GRID_MAX_FIRST_CELL_MASS: f64 = 0.5;
const GRID_MAX_COUNTS: usize = 1024;
const WINDOW_TOL: f64 = 1e-15;

enum Counts {
    Poisson,
    Grid { table: Vec<Vec<f64>> },
    Mixture { rule: Arc<InverseStableRule> },
}

/// Ordinary (age zero) renewal counting probabilities `P(N(u) = k)` for
/// `u` in `[0, horizon]`, `k <= n_max`.
pub struct RenewalCounts {
    law: WaitingTimeLaw,
    grid: Grid1D,
    n_max: usize,
    counts: Counts,
}

impl RenewalCounts {
    pub fn new(law: WaitingTimeLaw, horizon: f64, cfg: &SeriesConfig) -> Result<Self> {
        law.validate()?;
        let grid = Grid1D::covering(horizon, cfg.points_per_unit)?;
        let alpha = law.alpha();
        let lambda = law.lambda();
        let (counts, n_max) = if law.is_markov() {
            let n_max = cfg
                .n_max
                .unwrap_or_else(|| PoissonWindow::new(lambda * horizon, cfg.tail_tol * 1e-3).end().max(DEFAULT_N_MAX));
            (Counts::Poisson, n_max)
        } else {
            let rule = InverseStableRule::cached(alpha)?;
            let n_max = cfg.n_max.unwrap_or_else(|| {
                let u_max = rule.nodes().last().copied().unwrap_or(1.0);
                let mean = lambda * horizon.powf(alpha) * u_max;
                PoissonWindow::new(mean, cfg.tail_tol * 1e-3).end().max(DEFAULT_N_MAX)
            });
            let first_cell = 1.0 - law.survival(grid.step)?;
            let use_grid = match cfg.route {
                CountingRoute::Grid => true,
                CountingRoute::Mixture => false,
                CountingRoute::Auto => first_cell <= GRID_MAX_FIRST_CELL_MASS && n_max <= GRID_MAX_COUNTS,
            };
            if use_grid {
                (
                    Counts::Grid {
                        table: grid_counts(&law, &grid, n_max)?,
                    },
                    n_max,
                )
            } else {
                (Counts::Mixture { rule }, n_max)
            }
        };
        Ok(Self {
            law,
            grid,
            n_max,
            counts,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn horizon(&self) -> f64 {
        self.grid.horizon()
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    /// Which route is in use.
    pub fn route(&self) -> CountingRoute {
        match self.counts {
            Counts::Grid { .. } => CountingRoute::Grid,
            _ => CountingRoute::Mixture,
        }
    }

    /// `P(N(u) = k)` for `k = 0..=n_max`.
    pub fn ordinary(&self, u: f64) -> Result<Vec<f64>> {
        self.check_horizon(u)?;
        let mut out = vec![0.0; self.n_max + 1];
        self.accumulate_ordinary(u, 1.0, 0, &mut out);
        Ok(out)
    }

    fn check_horizon(&self, u: f64) -> Result<()> {
        if !(u >= 0.0) || u > self.horizon() * (1.0 + 1e-12) {
            return Err(Error::domain(format!(
                "time {u} outside the counting horizon [0, {}]",
                self.horizon()
            )));
        }
        Ok(())
    }

    /// Adds `weight * P(N(u) = k)` to `out[k + shift]`.
    fn accumulate_ordinary(&self, u: f64, weight: f64, shift: usize, out: &mut [f64]) {
        let len = out.len();
        let add_poisson = |mean: f64, w: f64, out: &mut [f64]| {
            if shift < len {
                add_poisson_pmf(mean, w, WINDOW_TOL, &mut out[shift..]);
            }
        };
        if u <= 0.0 {
            if shift < len {
                out[shift] += weight;
            }
            return;
        }
        match &self.counts {
            Counts::Poisson => add_poisson(self.law.lambda() * u, weight, out),
            Counts::Mixture { rule } => {
                let scale = self.law.lambda() * u.powf(self.law.alpha());
                for (v, w) in rule.nodes().iter().zip(rule.weights()) {
                    add_poisson(scale * v, weight * w, out);
                }
            }
            Counts::Grid { table } => {
                let pos = (u / self.grid.step).min(self.grid.cells() as f64);
                let j = (pos.floor() as usize).min(self.grid.cells() - 1);
                let frac = pos - j as f64;
                for (k, row) in table.iter().enumerate() {
                    if k + shift >= len {
                        break;
                    }
                    out[k + shift] += weight * ((1.0 - frac) * row[j] + frac * row[j + 1]);
                }
            }
        }
    }

    /// Conditional law of the number of trades in the next `z` time units
    /// given that the current waiting time has lasted `age`.
    pub fn aged(&self, age: f64, z: f64) -> Result<CountingDistribution> {
        self.check_horizon(z)?;
        if !(age >= 0.0) {
            return Err(Error::domain(format!("age {age} must be nonnegative")));
        }
        if z == 0.0 {
            let mut probs = vec![0.0; self.n_max + 1];
            probs[0] = 1.0;
            return Ok(CountingDistribution::from_probs(probs));
        }
        if age == 0.0 || self.law.is_markov() {
            return Ok(CountingDistribution::from_probs(self.ordinary(z)?));
        }
        let surv_age = self.law.survival(age)?;
        if surv_age <= 0.0 {
            return Err(Error::DegenerateAge { age });
        }
        // p_0 = S(age + z) / S(age); p_n = int_0^z P(N(z - w) = n - 1) dF_res(w)
        let mut probs = vec![0.0; self.n_max + 1];
        probs[0] = self.law.survival(age + z)? / surv_age;
        let sub = Grid1D::covering(z, (1.0 / self.grid.step).ceil() as usize)?;
        let weights = residual_weights(&self.law, age, surv_age, &sub)?;
        let cells = sub.cells();
        let mut node_weight = vec![0.0; cells + 1];
        for j in 0..cells {
            node_weight[j] += weights.left[j];
            node_weight[j + 1] += weights.right[j];
        }
        for (j, w) in node_weight.iter().enumerate() {
            if *w != 0.0 {
                let u = (z - sub.node(j)).max(0.0);
                self.accumulate_ordinary(u, *w, 1, &mut probs);
            }
        }
        Ok(CountingDistribution::from_probs(probs))
    }
}

/// Cell integrals of a survival function by 8-point Gauss–Legendre.
fn cell_integral<S: Fn(f64) -> Result<f64>>(survival: &S, a: f64, b: f64) -> Result<f64> {
    let (x, w) = gauss_legendre(8);
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    let mut acc = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        acc += wi * survival(c + r * xi)?;
    }
    Ok(acc * r)
}

fn survival_weights<S: Fn(f64) -> Result<f64>>(
    grid: &Grid1D,
    survival: S,
    first_cell: Option<f64>,
) -> Result<ProductWeights> {
    let cells = grid.cells();
    let mut surv = Vec::with_capacity(cells + 1);
    let mut integ = Vec::with_capacity(cells);
    for j in 0..=cells {
        surv.push(survival(grid.node(j))?);
    }
    for j in 0..cells {
        let exact = if j == 0 { first_cell } else { None };
        integ.push(match exact {
            Some(v) => v,
            None => cell_integral(&survival, grid.node(j), grid.node(j + 1))?,
        });
    }
    let h = grid.step;
    Ok(ProductWeights::from_survival(
        cells,
        h,
        |t| surv[((t / h).round() as usize).min(cells)],
        |a, _| integ[((a / h).round() as usize).min(cells - 1)],
    ))
}

/// Weights of the residual-lifetime measure given `age` on `grid`.
fn residual_weights(law: &WaitingTimeLaw, age: f64, surv_age: f64, grid: &Grid1D) -> Result<ProductWeights> {
    survival_weights(grid, |w| Ok(law.survival(age + w)? / surv_age), None)
}

/// `table[k][j] = P(N(u_j) = k)` by recursive convolution
/// `P_k(u) = int_0^u P_{k-1}(u - tau) dF(tau)`.
fn grid_counts(law: &WaitingTimeLaw, grid: &Grid1D, n_max: usize) -> Result<Vec<Vec<f64>>> {
    let first = ml_survival_integral_series(law.ml_params(), grid.step);
    let weights = survival_weights(grid, |t| law.survival(t), first)?;
    let m = grid.n_points;
    // Cell weights merged per lag: sum_j left[j] g[n-j] + right[j] g[n-j-1]
    // = sum_{i<n} lag[i] g[n-i] + right[n-1] g[0].
    let lag: Vec<f64> = (0..m - 1)
        .map(|i| weights.left[i] + if i > 0 { weights.right[i - 1] } else { 0.0 })
        .collect();
    let mut table = Vec::with_capacity(n_max + 1);
    let p0: Vec<f64> = grid.nodes().iter().map(|&u| law.survival(u)).collect::<Result<_>>()?;
    table.push(p0);
    for k in 1..=n_max {
        let prev: &Vec<f64> = &table[k - 1];
        // P_k <= sup P_{k-1}, so once a row is negligible so is the rest.
        if prev.iter().all(|&p| p < NEGLIGIBLE_COUNT_PROB) {
            table.push(vec![0.0; m]);
            continue;
        }
        let mut row = vec![0.0; m];
        for (n, r) in row.iter_mut().enumerate().skip(1) {
            let body: f64 = lag[..n].iter().zip(prev[1..=n].iter().rev()).map(|(c, g)| c * g).sum();
            *r = (body + weights.right[n - 1] * prev[0]).max(0.0);
        }
        table.push(row);
    }
    Ok(table)
}

const NEGLIGIBLE_COUNT_PROB: f64 = 1e-30;

/// Series pricer with counting probabilities precomputed up to a horizon.
pub struct SemiMarkovPricer {
    sigma2: f64,
    counts: RenewalCounts,
    tail_tol: f64,
}

impl SemiMarkovPricer {
    pub fn new(law: WaitingTimeLaw, sigma2: f64, horizon: f64, cfg: &SeriesConfig) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::domain(format!("variance {sigma2} must be positive")));
        }
        if !(cfg.tail_tol > 0.0) {
            return Err(Error::domain("tail tolerance must be positive"));
        }
        Ok(Self {
            sigma2,
            counts: RenewalCounts::new(law, horizon, cfg)?,
            tail_tol: cfg.tail_tol,
        })
    }

    pub fn counts(&self) -> &RenewalCounts {
        &self.counts
    }

    /// Price of the call with spot `x`, strike `strike`, current age `age`
    /// and `z` time units to maturity.
    pub fn price(&self, x: f64, strike: f64, age: f64, z: f64) -> Result<PriceEstimate> {
        OptionSpec::new(x, strike, z, age)?;
        let dist = self.counts.aged(age, z)?;
        self.price_with(&dist, x, strike)
    }

    /// `sum_n p_n C_n(x)` for a given counting law.
    pub fn price_with(&self, dist: &CountingDistribution, x: f64, strike: f64) -> Result<PriceEstimate> {
        if dist.tail_mass > self.tail_tol {
            return Err(Error::Truncation {
                tail_mass: dist.tail_mass,
                tolerance: self.tail_tol,
            });
        }
        let value: f64 = dist
            .probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(n, p)| p * bs_call_unchecked(x, strike, n as f64 * self.sigma2))
            .sum();
        Ok(PriceEstimate::series(
            Method::SmSeries,
            value,
            [value, value + dist.tail_mass * x],
        ))
    }
}

/// Conditional counting law for horizon `z` and age `s`.
pub fn counting_probabilities(
    law: &WaitingTimeLaw,
    z: f64,
    s: f64,
    cfg: &SeriesConfig,
) -> Result<CountingDistribution> {
    if z == 0.0 {
        let n = cfg.n_max.unwrap_or(DEFAULT_N_MAX);
        let mut probs = vec![0.0; n + 1];
        probs[0] = 1.0;
        return Ok(CountingDistribution::from_probs(probs));
    }
    RenewalCounts::new(*law, z, cfg)?.aged(s, z)
}

/// Series price of the call.
pub fn series_price(law: &WaitingTimeLaw, sigma2: f64, opt: OptionSpec, cfg: &SeriesConfig) -> Result<PriceEstimate> {
    opt.validate()?;
    if opt.time_to_maturity == 0.0 {
        let v = opt.payoff();
        return Ok(PriceEstimate::series(Method::SmSeries, v, [v, v]));
    }
    SemiMarkovPricer::new(*law, sigma2, opt.time_to_maturity, cfg)?.price(
        opt.spot,
        opt.strike,
        opt.age,
        opt.time_to_maturity,
    )
}

/// Monte Carlo price under the martingale measure: log-returns are
/// `N(-sigma2 / 2, sigma2)` per trade and the first waiting time follows
/// the residual-lifetime law at the current age.
pub fn mc_price(
    law: &WaitingTimeLaw,
    sigma2: f64,
    opt: OptionSpec,
    n_paths: u64,
    stream: RngStream,
) -> Result<PriceEstimate> {
    Ok(mc_price_strip(law, sigma2, &[opt], n_paths, stream)?.remove(0))
}

/// [`mc_price`] for several spots and strikes sharing maturity and age,
/// all evaluated on the same paths.
pub fn mc_price_strip(
    law: &WaitingTimeLaw,
    sigma2: f64,
    opts: &[OptionSpec],
    n_paths: u64,
    stream: RngStream,
) -> Result<Vec<PriceEstimate>> {
    let Some(first) = opts.first() else {
        return Ok(Vec::new());
    };
    for opt in opts {
        opt.validate()?;
        if opt.time_to_maturity != first.time_to_maturity || opt.age != first.age {
            return Err(Error::domain("a Monte Carlo strip needs one maturity and one age"));
        }
    }
    law.validate()?;
    if n_paths < 2 {
        return Err(Error::domain("Monte Carlo needs at least two paths"));
    }
    if !(sigma2 >= 0.0) {
        return Err(Error::domain(format!("variance {sigma2} must be nonnegative")));
    }
    if first.time_to_maturity == 0.0 {
        // No trade can occur: every path pays the intrinsic value.
        return Ok(opts
            .iter()
            .map(|o| PriceEstimate::monte_carlo(Method::SmMc, o.payoff(), 0.0, n_paths))
            .collect());
    }
    let sd = sigma2.sqrt();
    let residual = ResidualLifetime::new(*law, first.age)?;
    let est = monte_carlo_many(stream, n_paths, opts.len(), |rng, out| {
        let n = residual.jump_count(first.time_to_maturity, rng)? as f64;
        let g: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng);
        let multiplier = (-0.5 * n * sigma2 + sd * n.sqrt() * g).exp();
        for (v, opt) in out.iter_mut().zip(opts) {
            *v = (opt.spot * multiplier - opt.strike).max(0.0);
        }
        Ok(())
    })?;
    Ok(est
        .into_iter()
        .map(|e| PriceEstimate::monte_carlo(Method::SmMc, e.mean, e.std_error, n_paths))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{markov_series_price, MarkovModel};
    use crate::specfun::mittag_leffler;

    #[test]
    fn residual_cdf_examples() {
        let exp = WaitingTimeLaw::exponential(2.0).unwrap();
        for s in [0.0, 0.5, 3.0] {
            let v = residual_lifetime_cdf(&exp, s, 0.7).unwrap();
            assert!((v - (1.0 - (-1.4f64).exp())).abs() < 1e-15);
        }
        let ml = WaitingTimeLaw::mittag_leffler(0.5, 1.0).unwrap();
        assert_eq!(residual_lifetime_cdf(&ml, 1.0, 0.0).unwrap(), 0.0);
        // 1 - E_{1/2}(-sqrt 2) / E_{1/2}(-1)
        let want = 1.0 - (2.0f64).exp() * libm::erfc(2f64.sqrt()) / (1f64.exp() * libm::erfc(1.0));
        assert!((residual_lifetime_cdf(&ml, 1.0, 1.0).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn exponential_counts_are_poisson_for_every_age() {
        let law = WaitingTimeLaw::exponential(3.0).unwrap();
        let counts = RenewalCounts::new(law, 1.5, &SeriesConfig::default()).unwrap();
        for age in [0.0, 0.5, 2.0] {
            let d = counts.aged(age, 1.5).unwrap();
            let win = PoissonWindow::new(4.5, 1e-16);
            for (k, p) in d.probs.iter().enumerate().take(20) {
                let q = if k >= win.start { win.pmf[k - win.start] } else { 0.0 };
                assert!((p - q).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn grid_and_mixture_counts_agree() {
        for (alpha, lambda) in [(0.5, 5.0), (0.7, 5.0), (0.9, 3.0)] {
            let law = WaitingTimeLaw::mittag_leffler(alpha, lambda).unwrap();
            let grid = SeriesConfig {
                route: CountingRoute::Grid,
                ..Default::default()
            };
            let mix = SeriesConfig {
                route: CountingRoute::Mixture,
                ..Default::default()
            };
            let a = RenewalCounts::new(law, 1.0, &grid).unwrap();
            let b = RenewalCounts::new(law, 1.0, &mix).unwrap();
            assert_eq!(a.route(), CountingRoute::Grid);
            for age in [0.0, 0.5] {
                let pa = a.aged(age, 1.0).unwrap();
                let pb = b.aged(age, 1.0).unwrap();
                let diff = pa.probs.iter().zip(&pb.probs).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                assert!(diff < 2e-4, "alpha {alpha} age {age}: {diff}");
                assert!(pb.tail_mass < 1e-8);
            }
        }
    }

    #[test]
    fn survival_probability_is_first_count() {
        let law = WaitingTimeLaw::mittag_leffler(0.6, 2.0).unwrap();
        let c = RenewalCounts::new(law, 1.0, &SeriesConfig::default()).unwrap();
        assert_eq!(c.route(), CountingRoute::Grid);
        let p = c.ordinary(0.75).unwrap();
        let s = mittag_leffler(0.6, -2.0 * 0.75f64.powf(0.6)).unwrap();
        assert!((p[0] - s).abs() < 1e-12);
        // Off the grid the table is interpolated linearly.
        let p = c.ordinary(0.8).unwrap();
        let s = mittag_leffler(0.6, -2.0 * 0.8f64.powf(0.6)).unwrap();
        assert!((p[0] - s).abs() < 1e-6);
    }

    #[test]
    fn exponential_series_matches_markov() {
        let law = WaitingTimeLaw::exponential(4.0).unwrap();
        let opt = OptionSpec::new(1.1, 1.0, 0.8, 0.3).unwrap();
        let a = series_price(&law, 0.05, opt, &SeriesConfig::default()).unwrap();
        let b = markov_series_price(MarkovModel::new(4.0, 0.05).unwrap(), opt, 1e-12).unwrap();
        assert!((a.value - b.value).abs() < 1e-10);
    }

    #[test]
    fn series_trivial_cases() {
        let law = WaitingTimeLaw::mittag_leffler(0.7, 5.0).unwrap();
        let cfg = SeriesConfig::default();
        let p = series_price(&law, 0.04, OptionSpec::new(1.2, 1.0, 0.0, 0.4).unwrap(), &cfg).unwrap();
        assert!((p.value - 0.2).abs() < 1e-15);
        let p = series_price(&law, 0.04, OptionSpec::new(1.2, 0.0, 1.0, 0.4).unwrap(), &cfg).unwrap();
        let [lo, hi] = p.truncation_bracket.unwrap();
        assert!(lo - 1e-12 <= 1.2 && 1.2 <= hi + 1e-6);
    }

    #[test]
    fn series_matches_monte_carlo() {
        let law = WaitingTimeLaw::mittag_leffler(0.7, 5.0).unwrap();
        let opt = OptionSpec::new(1.0, 1.0, 1.0, 0.2).unwrap();
        let s = series_price(&law, 0.04, opt, &SeriesConfig::default()).unwrap();
        let m = mc_price(&law, 0.04, opt, 40_000, RngStream::new(3, 0)).unwrap();
        let se = m.std_error.unwrap();
        assert!((s.value - m.value).abs() < 3.5 * se, "{} vs {} ± {se}", s.value, m.value);
    }

    #[test]
    fn strip_matches_single_contracts() {
        let law = WaitingTimeLaw::mittag_leffler(0.6, 3.0).unwrap();
        let opts: Vec<OptionSpec> = [(1.0, 0.9), (1.2, 1.0), (0.8, 0.0)]
            .iter()
            .map(|&(x, k)| OptionSpec::new(x, k, 0.7, 0.3).unwrap())
            .collect();
        let strip = mc_price_strip(&law, 0.05, &opts, 5000, RngStream::new(5, 2)).unwrap();
        for (opt, got) in opts.iter().zip(&strip) {
            let single = mc_price(&law, 0.05, *opt, 5000, RngStream::new(5, 2)).unwrap();
            assert_eq!(single, *got);
        }
        let bad = [opts[0], OptionSpec::new(1.0, 1.0, 0.5, 0.3).unwrap()];
        assert!(mc_price_strip(&law, 0.05, &bad, 5000, RngStream::new(5, 2)).is_err());
    }
}
