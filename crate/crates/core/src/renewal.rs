//! Renewal-type integral equations for prices: the first-renewal
//! decomposition of the price at a given age, before and in the limit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{call_payoff, Method, OptionSpec, PriceEstimate};
use crate::quadrature::{gauss_legendre, GaussHermite, Grid1D, ProductWeights};
use crate::sampling::WaitingTimeLaw;
use crate::specfun::{ml_survival_integral_series, rgamma};

/// Law of the time to the next renewal given the current age.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RenewalKernel {
    /// Density `f_J(s + tau) / S_J(s)` of a pre-limit waiting-time law.
    MlConditional { law: WaitingTimeLaw, age: f64 },
    /// Density `alpha y^alpha / (y + tau)^{alpha + 1}` of the limit model.
    StableAged { alpha: f64, age: f64 },
}

impl RenewalKernel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RenewalKernel::MlConditional { law, age } => {
                law.validate()?;
                if !(age >= 0.0) {
                    return Err(Error::domain(format!("age {age} must be nonnegative")));
                }
                if law.survival(age)? <= 0.0 {
                    return Err(Error::DegenerateAge { age });
                }
                Ok(())
            }
            RenewalKernel::StableAged { alpha, age } => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(Error::domain(format!("stability index {alpha} outside (0, 1)")));
                }
                if !(age > 0.0 && age.is_finite()) {
                    return Err(Error::domain(format!("limit age {age} must be positive")));
                }
                Ok(())
            }
        }
    }

    /// Probability that no renewal happens within `tau`.
    pub fn survival(&self, tau: f64) -> Result<f64> {
        match *self {
            RenewalKernel::MlConditional { law, age } => Ok(law.survival(age + tau)? / law.survival(age)?),
            RenewalKernel::StableAged { alpha, age } => Ok((age / (age + tau)).powf(alpha)),
        }
    }

    /// Kernel density at `tau > 0`.
    pub fn density(&self, tau: f64) -> Result<f64> {
        match *self {
            RenewalKernel::MlConditional { law, age } => {
                let d = crate::specfun::ml_density(law.ml_params(), age + tau)?;
                Ok(d / law.survival(age)?)
            }
            RenewalKernel::StableAged { alpha, age } => Ok(alpha * age.powf(alpha) / (age + tau).powf(alpha + 1.0)),
        }
    }

    /// `int_a^b survival`.
    fn survival_integral(&self, a: f64, b: f64) -> Result<f64> {
        match *self {
            RenewalKernel::StableAged { alpha, age } => {
                let p = 1.0 - alpha;
                Ok(age.powf(alpha) * ((age + b).powf(p) - (age + a).powf(p)) / p)
            }
            RenewalKernel::MlConditional { law, age } => {
                if a == 0.0 && age == 0.0 {
                    if let Some(v) = ml_survival_integral_series(law.ml_params(), b) {
                        return Ok(v);
                    }
                }
                let (x, w) = gauss_legendre(8);
                let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
                let mut acc = 0.0;
                for (xi, wi) in x.iter().zip(&w) {
                    acc += wi * self.survival(c + r * xi)?;
                }
                Ok(acc * r)
            }
        }
    }

    /// Density is unbounded at zero (fresh Mittag-Leffler waiting time).
    fn singular_at_zero(&self) -> bool {
        matches!(*self, RenewalKernel::MlConditional { law, age } if age == 0.0 && !law.is_markov())
    }

    /// Product-integration weights of the kernel measure on `grid`.
    pub fn weights(&self, grid: &Grid1D) -> Result<ProductWeights> {
        self.validate()?;
        let cells = grid.cells();
        let surv: Vec<f64> = (0..=cells).map(|j| self.survival(grid.node(j))).collect::<Result<_>>()?;
        let integ: Vec<f64> = (0..cells)
            .map(|j| self.survival_integral(grid.node(j), grid.node(j + 1)))
            .collect::<Result<_>>()?;
        let h = grid.step;
        Ok(ProductWeights::from_survival(
            cells,
            h,
            |t| surv[((t / h).round() as usize).min(cells)],
            |a, _| integ[((a / h).round() as usize).min(cells - 1)],
        ))
    }
}

/// Kernel mass on `[0, z]` by the composite trapezoid rule on `grid`.
///
/// A fresh Mittag-Leffler density is singular like `tau^{alpha-1}` at zero
/// but `tau^{1-alpha} f(tau)` is smooth in `v = tau^alpha`, so that case
/// uses the trapezoid rule in `v` on the images of the grid nodes. Its
/// order is `min(2, 3 alpha)`. The aged stable density gets an exact end
/// correction and is fourth order.
pub fn kernel_mass(kernel: &RenewalKernel, z: f64, grid: &Grid1D) -> Result<f64> {
    kernel.validate()?;
    if !(z > 0.0) {
        return Err(Error::domain(format!("horizon {z} must be positive")));
    }
    if (grid.horizon() - z).abs() > 1e-12 * z {
        return Err(Error::domain(format!(
            "grid horizon {} does not match {z}",
            grid.horizon()
        )));
    }
    let cells = grid.cells();
    let h = grid.step;
    if let RenewalKernel::MlConditional { law, .. } = *kernel {
        if kernel.singular_at_zero() {
            let p = law.ml_params();
            let smooth = |j: usize| -> Result<f64> {
                if j == 0 {
                    return Ok(p.lambda * rgamma(p.alpha));
                }
                let tau = grid.node(j);
                Ok(kernel.density(tau)? * tau.powf(1.0 - p.alpha))
            };
            let mut mass = 0.0;
            let mut prev = smooth(0)?;
            for j in 0..cells {
                let next = smooth(j + 1)?;
                let dv = grid.node(j + 1).powf(p.alpha) - grid.node(j).powf(p.alpha);
                mass += 0.5 * dv * (prev + next) / p.alpha;
                prev = next;
            }
            return Ok(mass);
        }
    }
    let mut mass = 0.0;
    for j in 0..cells {
        let (a, b) = (grid.node(j), grid.node(j + 1));
        mass += 0.5 * h * (kernel.density(a)? + kernel.density(b)?);
    }
    if let RenewalKernel::StableAged { alpha, age } = *kernel {
        // Euler–Maclaurin end correction with the exact derivative
        // f' = -(1 + alpha) f / (y + tau): fourth order.
        let slope = |tau: f64| -> Result<f64> { Ok(-(1.0 + alpha) * kernel.density(tau)? / (age + tau)) };
        mass -= h * h / 12.0 * (slope(grid.horizon())? - slope(0.0)?);
    }
    Ok(mass)
}

/// Largest tolerated gap between quadrature and exact kernel mass.
pub const KERNEL_MASS_TOL: f64 = 1e-6;

/// Result of [`solve_limit_renewal`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitRenewalSolution {
    pub estimate: PriceEstimate,
    /// Renewal probability within the horizon.
    pub kernel_mass: f64,
    /// Gap between the trapezoid and the exact kernel mass on the grid.
    pub mass_error: f64,
    /// The gap exceeds [`KERNEL_MASS_TOL`]: the grid is too coarse for
    /// the kernel near zero.
    pub resolution_warning: bool,
    /// Age at least the horizon: outside the range where the limit
    /// equation is established, evaluated by the same formula.
    pub extrapolated: bool,
}

/// Price of the limit model at age `y`:
/// `q(x, y, z) = (x - K)^+ S(z) + int_0^z q(x, 0, z - tau) h_y(tau) dtau`,
/// with `h_y` the Pareto-type remaining-lifetime density and `base_curve`
/// the age-zero price as a function of the remaining time.
pub fn solve_limit_renewal<F>(alpha: f64, opt: OptionSpec, base_curve: F, grid: Grid1D) -> Result<LimitRenewalSolution>
where
    F: Fn(f64) -> Result<f64>,
{
    opt.validate()?;
    let kernel = RenewalKernel::StableAged { alpha, age: opt.age };
    kernel.validate()?;
    let z = opt.time_to_maturity;
    let payoff = opt.payoff();
    if z == 0.0 {
        return Ok(LimitRenewalSolution {
            estimate: PriceEstimate::quadrature(Method::LimitRenewal, payoff),
            kernel_mass: 0.0,
            mass_error: 0.0,
            resolution_warning: false,
            extrapolated: false,
        });
    }
    if (grid.horizon() - z).abs() > 1e-12 * z {
        return Err(Error::domain(format!(
            "grid horizon {} does not match time to maturity {z}",
            grid.horizon()
        )));
    }
    let exact_mass = 1.0 - kernel.survival(z)?;
    let mass_error = (kernel_mass(&kernel, z, &grid)? - exact_mass).abs();
    let weights = kernel.weights(&grid)?;
    let cells = grid.cells();
    // base[m] = q(x, 0, m h)
    let base: Vec<f64> = (0..=cells)
        .map(|m| if m == 0 { Ok(payoff) } else { base_curve(grid.node(m)) })
        .collect::<Result<_>>()?;
    let value = payoff * kernel.survival(z)? + weights.convolve_at(&base, cells);
    Ok(LimitRenewalSolution {
        estimate: PriceEstimate::quadrature(Method::LimitRenewal, value),
        kernel_mass: exact_mass,
        mass_error,
        resolution_warning: mass_error > KERNEL_MASS_TOL,
        extrapolated: opt.age >= z,
    })
}

/// Number of Gauss–Hermite nodes for the one-trade transition average.
pub const TRANSITION_NODES: usize = 64;
/// Grid density of [`verify_prelimit_renewal`] when none is configured.
pub const VERIFY_POINTS_PER_UNIT: usize = 64;

/// Sup-norm over `z` in the grid (excluding 0) of the defect of the
/// pre-limit renewal equation
/// `C(x, s, z) = (x - K)^+ S(z | s) + int_0^z E[C(x e^Y, 0, z - tau)] dF(tau | s)`,
/// where `Y ~ N(-sigma2 / 2, sigma2)` and `F(. | s)` is the residual
/// lifetime law at age `s`. `grid` spans `[0, opt.time_to_maturity]`.
pub fn verify_prelimit_renewal<F>(
    law: &WaitingTimeLaw,
    sigma2: f64,
    price_fn: F,
    opt: OptionSpec,
    grid: Grid1D,
) -> Result<f64>
where
    F: Fn(f64, f64, f64) -> Result<f64>,
{
    opt.validate()?;
    if !(sigma2 > 0.0) {
        return Err(Error::domain(format!("variance {sigma2} must be positive")));
    }
    if (grid.horizon() - opt.time_to_maturity).abs() > 1e-12 * opt.time_to_maturity.max(1.0) {
        return Err(Error::domain("grid must span the time to maturity"));
    }
    let kernel = RenewalKernel::MlConditional { law: *law, age: opt.age };
    let weights = kernel.weights(&grid)?;
    let gh = GaussHermite::new(TRANSITION_NODES);
    let sd = sigma2.sqrt();
    let (x, strike) = (opt.spot, opt.strike);
    let cells = grid.cells();
    let mut inner = Vec::with_capacity(cells + 1);
    for m in 0..=cells {
        let u = grid.node(m);
        let mut acc = 0.0;
        for (g, w) in gh.nodes().iter().zip(gh.weights()) {
            acc += w * price_fn(x * (sd * g - 0.5 * sigma2).exp(), 0.0, u)?;
        }
        inner.push(acc);
    }
    let payoff = call_payoff(x, strike);
    let mut worst: f64 = 0.0;
    for n in 1..=cells {
        let z = grid.node(n);
        let lhs = price_fn(x, opt.age, z)?;
        let rhs = payoff * kernel.survival(z)? + weights.convolve_at(&inner, n);
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}
