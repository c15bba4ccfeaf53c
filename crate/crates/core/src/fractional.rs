//! Limit prices under the inverse-stable time change and the time-fractional
//! Black–Scholes equation they satisfy.
//!
//! Time is handled as remaining time `Z = T - t` throughout. In those terms
//! the age-zero price `G(x, Z) = E[C_BS(x, L(Z))]` solves
//! `D^alpha_Z G = (x^2 / 2) G_xx` with a Caputo derivative `D^alpha_Z`, and
//! the terminal-value operator of the backward equation is its negative.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{call_payoff, Method, OptionSpec, PriceEstimate};
use crate::markov::bs_call_unchecked;
use crate::quadrature::{integrate_pieces, power_kernel_weights, Grid1D, QuadConfig};
use crate::renewal::{kernel_mass, solve_limit_renewal, LimitRenewalSolution, RenewalKernel, KERNEL_MASS_TOL};
use crate::sampling::{fmt_real, monte_carlo, simulate_aged_limit_payoff, simulate_subordinated_gbm_payoff, RngStream};
use crate::specfun::{gamma, normal_pdf, rgamma, InverseStableRule};

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("order {alpha} outside (0, 1]")))
    }
}

/// Age-zero limit price `E[C_BS(x, L(z))]`; `alpha = 1` is Black–Scholes.
pub fn subordinated_price_g0(alpha: f64, x: f64, strike: f64, z: f64) -> Result<f64> {
    check_alpha(alpha)?;
    OptionSpec::new(x, strike, z, 0.0)?;
    if z == 0.0 {
        return Ok(call_payoff(x, strike));
    }
    if alpha == 1.0 {
        return Ok(bs_call_unchecked(x, strike, z));
    }
    let rule = InverseStableRule::cached(alpha)?;
    Ok(g0_with_rule(&rule, x, strike, z))
}

fn g0_with_rule(rule: &InverseStableRule, x: f64, strike: f64, z: f64) -> f64 {
    if z == 0.0 {
        return call_payoff(x, strike);
    }
    let v = rule.expect(z, |s| bs_call_unchecked(x, strike, s));
    v.clamp(call_payoff(x, strike), x)
}

/// Starting points per unit time of the renewal grid of [`aged_price_gy`].
pub const GY_POINTS_PER_UNIT: usize = 1024;
/// Most cells [`aged_price_gy`] refines to before accepting a resolution
/// warning.
pub const GY_MAX_CELLS: usize = 1 << 15;

/// Limit price at age `y = opt.age > 0` from the renewal equation with the
/// age-zero price as its base curve. The grid is refined until the kernel
/// mass check passes or [`GY_MAX_CELLS`] is reached.
pub fn aged_price_gy(alpha: f64, opt: OptionSpec) -> Result<LimitRenewalSolution> {
    check_alpha(alpha)?;
    opt.validate()?;
    let z = opt.time_to_maturity;
    if z == 0.0 {
        return aged_price_gy_on(alpha, opt, GY_POINTS_PER_UNIT);
    }
    let kernel = RenewalKernel::StableAged { alpha, age: opt.age };
    kernel.validate()?;
    let exact = 1.0 - kernel.survival(z)?;
    let mut ppu = GY_POINTS_PER_UNIT;
    loop {
        let grid = Grid1D::covering(z, ppu)?;
        let ok = (kernel_mass(&kernel, z, &grid)? - exact).abs() <= KERNEL_MASS_TOL;
        if ok || 2 * grid.cells() > GY_MAX_CELLS {
            return aged_price_gy_on(alpha, opt, ppu);
        }
        ppu *= 2;
    }
}

pub fn aged_price_gy_on(alpha: f64, opt: OptionSpec, points_per_unit: usize) -> Result<LimitRenewalSolution> {
    check_alpha(alpha)?;
    opt.validate()?;
    if opt.time_to_maturity == 0.0 {
        return solve_limit_renewal(alpha, opt, |_| Ok(f64::NAN), Grid1D::new(2, 1.0)?);
    }
    let rule = InverseStableRule::cached(alpha)?;
    let grid = Grid1D::covering(opt.time_to_maturity, points_per_unit)?;
    let base = TabulatedBase::new(&rule, opt.spot, opt.strike, grid.step, opt.time_to_maturity);
    solve_limit_renewal(alpha, opt, |u| Ok(base.g0(u)), grid)
}

/// Log-variance step of [`TabulatedBase`].
const BS_TABLE_STEP: f64 = 0.01;

/// Age-zero price on many maturities of one contract. The Black–Scholes
/// price is tabulated against `w = ln(variance)` with its exact
/// derivative and read back by cubic Hermite interpolation, which is
/// accurate to about `1e-11 x` at this step.
struct TabulatedBase<'a> {
    rule: &'a InverseStableRule,
    ln_nodes: Vec<f64>,
    x: f64,
    strike: f64,
    w_lo: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl<'a> TabulatedBase<'a> {
    /// Covers maturities in `[u_min, u_max]`.
    fn new(rule: &'a InverseStableRule, x: f64, strike: f64, u_min: f64, u_max: f64) -> Self {
        let ln_nodes: Vec<f64> = rule.nodes().iter().map(|u| u.ln()).collect();
        let lo = ln_nodes.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ln_nodes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let alpha = rule.alpha();
        let w_lo = lo + alpha * u_min.ln() - BS_TABLE_STEP;
        let w_hi = hi + alpha * u_max.ln() + BS_TABLE_STEP;
        let len = ((w_hi - w_lo) / BS_TABLE_STEP).ceil() as usize + 2;
        let (mut values, mut slopes) = (Vec::with_capacity(len), Vec::with_capacity(len));
        for i in 0..len {
            let w = w_lo + i as f64 * BS_TABLE_STEP;
            let s = w.exp();
            values.push(bs_call_unchecked(x, strike, s));
            slopes.push(if strike == 0.0 { 0.0 } else { bs_log_variance_slope(x, strike, s) });
        }
        Self {
            rule,
            ln_nodes,
            x,
            strike,
            w_lo,
            values,
            slopes,
        }
    }

    fn bs(&self, w: f64) -> f64 {
        let pos = (w - self.w_lo) / BS_TABLE_STEP;
        let i = pos.floor();
        if !(i >= 0.0 && (i as usize) + 1 < self.values.len()) {
            return bs_call_unchecked(self.x, self.strike, w.exp());
        }
        let i = i as usize;
        let t = pos - i as f64;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.values[i]
            + h01 * self.values[i + 1]
            + BS_TABLE_STEP * (h10 * self.slopes[i] + h11 * self.slopes[i + 1])
    }

    fn g0(&self, u: f64) -> f64 {
        if u == 0.0 || self.strike == 0.0 {
            return if u == 0.0 { call_payoff(self.x, self.strike) } else { self.x };
        }
        let shift = self.rule.alpha() * u.ln();
        let v: f64 = self
            .ln_nodes
            .iter()
            .zip(self.rule.weights())
            .map(|(&ln_l, &wt)| wt * self.bs(shift + ln_l))
            .sum();
        v.clamp(call_payoff(self.x, self.strike), self.x)
    }
}

/// `d C_BS / d ln(s)` for total variance `s`: `x phi(d1) sqrt(s) / 2`.
fn bs_log_variance_slope(x: f64, strike: f64, s: f64) -> f64 {
    let sd = s.sqrt();
    let d1 = ((x / strike).ln() + 0.5 * s) / sd;
    0.5 * x * normal_pdf(d1) * sd
}

/// The same price by adaptive quadrature of
/// `(x - K)^+ S(z) + int_0^z G(x, z - tau) h_y(tau) dtau`, independent of
/// any grid.
pub fn aged_price_gy_direct(alpha: f64, opt: OptionSpec) -> Result<f64> {
    check_alpha(alpha)?;
    opt.validate()?;
    let kernel = RenewalKernel::StableAged { alpha, age: opt.age };
    kernel.validate()?;
    let z = opt.time_to_maturity;
    let payoff = opt.payoff();
    if z == 0.0 {
        return Ok(payoff);
    }
    let rule = InverseStableRule::cached(alpha)?;
    let base = TabulatedBase::new(&rule, opt.spot, opt.strike, 1e-8 * z, z);
    let f = |tau: f64| base.g0((z - tau).max(0.0)) * kernel.density(tau).unwrap_or(0.0);
    let breaks = [0.0, 0.5 * z, 0.9 * z, 0.99 * z, z];
    let res = integrate_pieces(f, &breaks, QuadConfig::new(1e-13, 1e-11).with_budget(4000))?;
    Ok(payoff * kernel.survival(z)? + res.value)
}

/// Monte Carlo price of the limit model: the subordinated geometric
/// Brownian motion, started at age `opt.age`.
pub fn limit_mc_price(alpha: f64, opt: OptionSpec, n_paths: u64, stream: RngStream) -> Result<PriceEstimate> {
    check_alpha(alpha)?;
    opt.validate()?;
    if n_paths < 2 {
        return Err(Error::domain("Monte Carlo needs at least two paths"));
    }
    let OptionSpec {
        spot,
        strike,
        time_to_maturity: z,
        age,
    } = opt;
    let est = monte_carlo(stream, n_paths, |rng| {
        Ok(if age > 0.0 {
            simulate_aged_limit_payoff(alpha, spot, age, z, strike, rng)
        } else {
            simulate_subordinated_gbm_payoff(alpha, spot, z, strike, rng)
        })
    })?;
    Ok(PriceEstimate::monte_carlo(Method::LimitMc, est.mean, est.std_error, n_paths))
}

/// Values on a spot × time grid: `values[i][j]` at `(x_nodes[i], t_nodes[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field2D {
    pub x_nodes: Vec<f64>,
    pub t_nodes: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl Field2D {
    /// CSV matrix: the first row holds the time nodes, the first column the
    /// spot nodes.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "x\\t")?;
        for t in &self.t_nodes {
            write!(out, ",{}", fmt_real(*t))?;
        }
        writeln!(out)?;
        for (x, row) in self.x_nodes.iter().zip(&self.values) {
            write!(out, "{}", fmt_real(*x))?;
            for v in row {
                write!(out, ",{}", fmt_real(*v))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    fn time_step(&self) -> f64 {
        self.t_nodes[1] - self.t_nodes[0]
    }

    fn log_step(&self) -> f64 {
        (self.x_nodes[1] / self.x_nodes[0]).ln()
    }

    /// Row `i` reordered by remaining time: entry `n` is at `Z = n h`.
    fn by_remaining(&self, i: usize) -> Vec<f64> {
        self.values[i].iter().rev().copied().collect()
    }
}

/// Shape of the spot × time grid of a limit-price field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub alpha: f64,
    pub strike: f64,
    pub maturity: f64,
    pub n_x: usize,
    pub n_t: usize,
    /// Half-width of the log-spot grid in limit standard deviations
    /// `sqrt(E L(T))`.
    pub width_sd: f64,
}

impl FieldSpec {
    pub fn new(alpha: f64, strike: f64, maturity: f64, n_x: usize, n_t: usize) -> Result<Self> {
        let spec = Self {
            alpha,
            strike,
            maturity,
            n_x,
            n_t,
            width_sd: 6.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if !(self.strike > 0.0 && self.maturity > 0.0) {
            return Err(Error::domain("field needs positive strike and maturity"));
        }
        if self.n_x < 5 || self.n_t < 3 {
            return Err(Error::domain("field needs at least 5 spot and 3 time nodes"));
        }
        if !(self.width_sd > 0.0) {
            return Err(Error::domain("field width must be positive"));
        }
        Ok(())
    }

    /// Both node counts doubled in resolution (steps halved).
    pub fn refined(&self) -> Self {
        Self {
            n_x: 2 * self.n_x - 1,
            n_t: 2 * self.n_t - 1,
            ..*self
        }
    }

    pub fn half_width(&self) -> f64 {
        self.width_sd * (self.maturity.powf(self.alpha) * rgamma(1.0 + self.alpha)).sqrt()
    }

    pub fn x_nodes(&self) -> Vec<f64> {
        let c = self.strike.ln();
        let w = self.half_width();
        let d = 2.0 * w / (self.n_x - 1) as f64;
        (0..self.n_x).map(|i| (c - w + i as f64 * d).exp()).collect()
    }

    pub fn t_nodes(&self) -> Vec<f64> {
        let h = self.maturity / (self.n_t - 1) as f64;
        (0..self.n_t)
            .map(|j| if j + 1 == self.n_t { self.maturity } else { j as f64 * h })
            .collect()
    }
}

fn build_field<F: Fn(f64, f64) -> Result<f64> + Sync>(spec: &FieldSpec, f: F) -> Result<Field2D> {
    let x_nodes = spec.x_nodes();
    let t_nodes = spec.t_nodes();
    let row = |x: &f64| -> Result<Vec<f64>> { t_nodes.iter().map(|t| f(*x, spec.maturity - t)).collect() };
    #[cfg(feature = "parallel")]
    let values: Result<Vec<Vec<f64>>> = {
        use rayon::prelude::*;
        x_nodes.par_iter().map(row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let values: Result<Vec<Vec<f64>>> = x_nodes.iter().map(row).collect();
    Ok(Field2D {
        values: values?,
        x_nodes,
        t_nodes,
    })
}

/// Field of the age-zero price on the grid of `spec`.
pub fn g0_field(spec: &FieldSpec) -> Result<Field2D> {
    spec.validate()?;
    if spec.alpha == 1.0 {
        return build_field(spec, |x, z| Ok(bs_call_unchecked(x, spec.strike, z)));
    }
    let rule = InverseStableRule::cached(spec.alpha)?;
    build_field(spec, |x, z| Ok(g0_with_rule(&rule, x, spec.strike, z)))
}

/// Black–Scholes prices on the grid of `spec`.
pub fn bs_field(spec: &FieldSpec) -> Result<Field2D> {
    spec.validate()?;
    build_field(spec, |x, z| Ok(bs_call_unchecked(x, spec.strike, z)))
}

/// Field of the aged price at age `y`, by the renewal equation on the time
/// grid of `g0` itself.
pub fn gy_field(y: f64, alpha: f64, strike: f64, g0: &Field2D) -> Result<Field2D> {
    let kernel = RenewalKernel::StableAged { alpha, age: y };
    kernel.validate()?;
    let n_t = g0.t_nodes.len();
    let grid = Grid1D::new(n_t, g0.time_step())?;
    let weights = kernel.weights(&grid)?;
    let surv: Vec<f64> = (0..n_t).map(|n| kernel.survival(grid.node(n))).collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(g0.x_nodes.len());
    for (i, x) in g0.x_nodes.iter().enumerate() {
        let base = g0.by_remaining(i);
        let payoff = call_payoff(*x, strike);
        let mut by_z: Vec<f64> = (0..n_t)
            .map(|n| payoff * surv[n] + weights.convolve_at(&base, n))
            .collect();
        by_z.reverse();
        values.push(by_z);
    }
    Ok(Field2D {
        x_nodes: g0.x_nodes.clone(),
        t_nodes: g0.t_nodes.clone(),
        values,
    })
}

/// Order and horizon of the terminal-value fractional operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracOperatorSpec {
    pub alpha: f64,
    pub maturity: f64,
}

impl FracOperatorSpec {
    pub fn new(alpha: f64, maturity: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!("order {alpha} outside (0, 1)")));
        }
        if !(maturity > 0.0) {
            return Err(Error::domain("maturity must be positive"));
        }
        Ok(Self { alpha, maturity })
    }
}

/// Caputo derivative of order `alpha` of `u` sampled at `n h`, `n = 0..`,
/// by the L1 scheme (exact for piecewise-linear `u`).
pub fn caputo_l1(alpha: f64, h: f64, u: &[f64]) -> Vec<f64> {
    let p = 1.0 - alpha;
    let b: Vec<f64> = (0..u.len()).map(|k| ((k + 1) as f64).powf(p) - (k as f64).powf(p)).collect();
    let scale = h.powf(-alpha) * rgamma(2.0 - alpha);
    let mut out = vec![0.0; u.len()];
    for n in 1..u.len() {
        let mut acc = 0.0;
        for k in 0..n {
            acc += b[k] * (u[n - k] - u[n - k - 1]);
        }
        out[n] = scale * acc;
    }
    out
}

/// The terminal-value operator
/// `u -> d/dt int_t^T (u(s) - u(T)) (s - t)^{-alpha} / Gamma(1 - alpha) ds`
/// for `u` sampled on the uniform grid of `[0, T]`; zero at `t = T`.
pub fn apply_terminal_fractional(spec: FracOperatorSpec, u: &[f64]) -> Result<Vec<f64>> {
    if u.len() < 2 {
        return Err(Error::domain("curve needs at least two samples"));
    }
    let h = spec.maturity / (u.len() - 1) as f64;
    let rev: Vec<f64> = u.iter().rev().copied().collect();
    let mut d = caputo_l1(spec.alpha, h, &rev);
    d.reverse();
    Ok(d.into_iter().map(|v| -v).collect())
}

/// Region of the grid where residuals are measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualWindow {
    /// Largest `|ln(x / K)|` included.
    pub log_moneyness: f64,
    /// Smallest remaining time included, as a fraction of maturity.
    pub min_remaining_fraction: f64,
}

impl ResidualWindow {
    /// Central third of the log-spot grid, remaining time at least `T / 4`.
    pub fn for_spec(spec: &FieldSpec) -> Self {
        Self {
            log_moneyness: spec.half_width() / 3.0,
            min_remaining_fraction: 0.25,
        }
    }
}

/// Residual field with its sup-norm over the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub residual: Field2D,
    pub sup_norm: f64,
}

/// `(x^2 / 2) u_xx` by central differences in log-spot.
fn half_x2_uxx(field: &Field2D, i: usize, j: usize) -> f64 {
    let d = field.log_step();
    let (um, u0, up) = (field.values[i - 1][j], field.values[i][j], field.values[i + 1][j]);
    let uss = (up - 2.0 * u0 + um) / (d * d);
    let us = (up - um) / (2.0 * d);
    0.5 * (uss - us)
}

fn windowed_report(
    field: &Field2D,
    strike: f64,
    window: ResidualWindow,
    mut residual_at: impl FnMut(usize, usize) -> f64,
) -> ResidualReport {
    let n_x = field.x_nodes.len();
    let n_t = field.t_nodes.len();
    let maturity = field.t_nodes[n_t - 1];
    let mut values = vec![vec![f64::NAN; n_t]; n_x];
    let mut sup: f64 = 0.0;
    for i in 1..n_x - 1 {
        for j in 0..n_t - 1 {
            let r = residual_at(i, j);
            values[i][j] = r;
            let inside = (field.x_nodes[i] / strike).ln().abs() <= window.log_moneyness + 1e-12
                && maturity - field.t_nodes[j] >= window.min_remaining_fraction * maturity - 1e-12;
            if inside && r.is_finite() {
                sup = sup.max(r.abs());
            }
        }
    }
    ResidualReport {
        residual: Field2D {
            x_nodes: field.x_nodes.clone(),
            t_nodes: field.t_nodes.clone(),
            values,
        },
        sup_norm: sup,
    }
}

/// Residual of `DT g0 + (x^2 / 2) g0_xx = 0` on a field of [`g0_field`].
pub fn pde_residual_g0(alpha: f64, strike: f64, field: &Field2D, window: ResidualWindow) -> Result<ResidualReport> {
    let n_t = field.t_nodes.len();
    let spec = FracOperatorSpec::new(alpha, field.t_nodes[n_t - 1])?;
    let dt: Vec<Vec<f64>> = field
        .values
        .iter()
        .map(|row| apply_terminal_fractional(spec, row))
        .collect::<Result<_>>()?;
    Ok(windowed_report(field, strike, window, |i, j| dt[i][j] + half_x2_uxx(field, i, j)))
}

/// Time argument of the age-zero price inside the aged equation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GyIntegrand {
    /// `g0(x, t + tau)`: convolution in remaining time, `q(x, 0, z - tau)`.
    #[default]
    ForwardShift,
    /// `g0(x, t - tau)`, only evaluable for `t >= T / 2` on `[0, T]`; other
    /// nodes are reported as NaN and left out of the sup-norm.
    BackwardShift,
}

/// Residual of the aged equation
/// `DT g_y(x, t) = -int_0^{T-t} (x^2 / 2) d_xx g0(x, t +- tau) h_y(tau) dtau`.
///
/// With the forward shift, the cell next to maturity uses
/// `int_0^h (x^2/2) G_xx du = I^{1-alpha}(G - G(0))(h)` with `G` linear on
/// the cell, which avoids differentiating the payoff kink.
pub fn pde_residual_gy(
    alpha: f64,
    y: f64,
    strike: f64,
    field_g0: &Field2D,
    field_gy: &Field2D,
    window: ResidualWindow,
    integrand: GyIntegrand,
) -> Result<ResidualReport> {
    if field_g0.x_nodes != field_gy.x_nodes || field_g0.t_nodes != field_gy.t_nodes {
        return Err(Error::domain("fields must share one grid"));
    }
    let n_t = field_g0.t_nodes.len();
    let h = field_g0.time_step();
    let spec = FracOperatorSpec::new(alpha, field_g0.t_nodes[n_t - 1])?;
    let kernel = RenewalKernel::StableAged { alpha, age: y };
    let weights = kernel.weights(&Grid1D::new(n_t, h)?)?;
    let first_cell = h.powf(1.0 - alpha) / gamma(3.0 - alpha);
    let dt: Vec<Vec<f64>> = field_gy
        .values
        .iter()
        .map(|row| apply_terminal_fractional(spec, row))
        .collect::<Result<_>>()?;
    Ok(windowed_report(field_gy, strike, window, |i, j| {
        // remaining-time index
        let n = n_t - 1 - j;
        let mut rhs = 0.0;
        match integrand {
            GyIntegrand::ForwardShift => {
                let ag = |m: usize| half_x2_uxx(field_g0, i, n_t - 1 - m);
                let g = |m: usize| field_g0.values[i][n_t - 1 - m];
                for c in 0..n.saturating_sub(1) {
                    rhs += weights.left[c] * ag(n - c) + weights.right[c] * ag(n - c - 1);
                }
                if n >= 1 {
                    let c = n - 1;
                    let mass = weights.left[c] + weights.right[c];
                    rhs += mass / h * (g(1) - g(0)) * first_cell;
                }
            }
            GyIntegrand::BackwardShift => {
                if j < n {
                    return f64::NAN;
                }
                for c in 0..n {
                    rhs += weights.left[c] * half_x2_uxx(field_g0, i, j - c)
                        + weights.right[c] * half_x2_uxx(field_g0, i, j - c - 1);
                }
            }
        }
        dt[i][j] + rhs
    }))
}

/// Largest deviation from `u` of the two discrete Sonine inversions
/// `d/dt I*(I u)` and `d/dt I(I* u)`, where `I` and `I*` convolve with the
/// stable tail and its Sonine dual. `u` is sampled at `n h`; the
/// derivative is a central difference. The composed discretisation has an
/// O(1) error in the first few cells, where `I u` behaves like
/// `t^{1-alpha}`, so only the last three quarters of the range are measured.
pub fn sonine_inversion_check(alpha: f64, h: f64, u: &[f64]) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("order {alpha} outside (0, 1)")));
    }
    if u.len() < 3 || !(h > 0.0) {
        return Err(Error::domain("curve needs at least three samples and a positive step"));
    }
    let n = u.len();
    let conv = |a: f64, scale: f64, f: &[f64]| -> Vec<f64> {
        let (w0, w1) = power_kernel_weights(a, h, n - 1);
        (0..n)
            .map(|m| {
                let mut acc = 0.0;
                for k in 0..m {
                    acc += w0[k] * f[m - k] + w1[k] * f[m - k - 1];
                }
                scale * acc
            })
            .collect()
    };
    let tail = |f: &[f64]| conv(alpha, rgamma(1.0 - alpha), f);
    let dual = |f: &[f64]| conv(1.0 - alpha, rgamma(alpha), f);
    let a = dual(&tail(u));
    let b = tail(&dual(u));
    let mut worst: f64 = 0.0;
    for m in ((n - 1) / 4).max(1)..n - 1 {
        let da = (a[m + 1] - a[m - 1]) / (2.0 * h);
        let db = (b[m + 1] - b[m - 1]) / (2.0 * h);
        worst = worst.max((da - u[m]).abs()).max((db - u[m]).abs());
    }
    Ok(worst)
}
