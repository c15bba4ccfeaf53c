//! Quadrature rules shared by the pricers.
//!
//! Three families are used throughout the crate:
//!
//! * adaptive Gauss–Kronrod (7/15 points) with global bisection, for smooth
//!   integrands on finite intervals;
//! * fixed Gauss–Legendre and Gauss–Hermite rules, the latter for lognormal
//!   one-step transition averages;
//! * product-integration weights on uniform grids, which integrate a
//!   piecewise-linear interpolant exactly against a kernel given through its
//!   distribution function (so integrable kernel singularities cost nothing).

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// Tolerances and budget for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_intervals: 2000,
        }
    }
}

impl QuadConfig {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn with_budget(mut self, max_intervals: usize) -> Self {
        self.max_intervals = max_intervals;
        self
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (value, err)
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// The interval with the largest error estimate is bisected until the total
/// estimate drops below `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: QuadConfig) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let (value, error) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut intervals = 1;
    loop {
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        if intervals >= cfg.max_intervals {
            return Err(Error::QuadratureBudget {
                estimate: total,
                error: total_err,
                intervals,
            });
        }
        let worst = heap.pop().expect("heap never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval has collapsed to machine resolution; accept it.
            heap.push(Segment {
                error: 0.0,
                ..worst
            });
            total_err -= worst.error;
            continue;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        intervals += 1;
    }
    // Re-sum to shed the drift of the running total.
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    Ok(QuadResult {
        value,
        error,
        intervals,
    })
}

/// Integrates over consecutive breakpoints, summing the pieces.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, breaks: &[f64], cfg: QuadConfig) -> Result<QuadResult> {
    let mut out = QuadResult {
        value: 0.0,
        error: 0.0,
        intervals: 0,
    };
    for w in breaks.windows(2) {
        let r = integrate(&f, w[0], w[1], cfg)?;
        out.value += r.value;
        out.error += r.error;
        out.intervals += r.intervals;
    }
    Ok(out)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Gauss–Hermite nodes and weights for the weight `exp(-x^2)`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let pim4 = PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    x.reverse();
    w.reverse();
    (x, w)
}

/// A fixed Gauss–Hermite rule specialised to Gaussian expectations.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> Self {
        let (x, w) = gauss_hermite(n);
        let nodes = x.iter().map(|v| v * std::f64::consts::SQRT_2).collect();
        let weights = w.iter().map(|v| v / PI.sqrt()).collect();
        Self { nodes, weights }
    }

    /// `E[f(Z)]` for standard normal `Z`.
    pub fn expect<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| w * f(z))
            .sum()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Uniform partition of `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Grid1D {
    pub n_points: usize,
    pub step: f64,
}

impl Grid1D {
    pub fn new(n_points: usize, step: f64) -> Result<Self> {
        if n_points < 2 || !(step > 0.0 && step.is_finite()) {
            return Err(Error::Domain(format!(
                "grid needs at least 2 points and a positive step, got {n_points} and {step}"
            )));
        }
        Ok(Self { n_points, step })
    }

    /// The coarsest grid on `[0, horizon]` with at least `per_unit` cells
    /// per unit time (and at least one cell).
    pub fn covering(horizon: f64, per_unit: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) || per_unit == 0 {
            return Err(Error::Domain(format!("cannot grid horizon {horizon} at {per_unit} points per unit")));
        }
        let cells = ((horizon * per_unit as f64).ceil() as usize).max(1);
        Self::new(cells + 1, horizon / cells as f64)
    }

    pub fn cells(&self) -> usize {
        self.n_points - 1
    }

    pub fn horizon(&self) -> f64 {
        self.step * self.cells() as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        if j == self.cells() {
            self.horizon()
        } else {
            j as f64 * self.step
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.node(j)).collect()
    }
}

/// Per-cell product-integration weights on a uniform grid.
///
/// For a kernel measure `dK` on `[0, z]` and a function `g` sampled at the
/// nodes `tau_j = j h`, the piecewise-linear interpolant of `g` integrates as
/// `sum_j (left[j] g(tau_j) + right[j] g(tau_{j+1}))`.
#[derive(Debug, Clone)]
pub struct ProductWeights {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl ProductWeights {
    /// Builds weights from the survival function of the kernel measure and
    /// the integral of that survival function over each cell.
    ///
    /// `survival(t)` must equal the kernel mass on `(t, inf)` up to a
    /// common constant, and `survival_integral(a, b)` its integral.
    pub fn from_survival<S, I>(cells: usize, h: f64, survival: S, survival_integral: I) -> Self
    where
        S: Fn(f64) -> f64,
        I: Fn(f64, f64) -> f64,
    {
        let mut left = Vec::with_capacity(cells);
        let mut right = Vec::with_capacity(cells);
        let mut s_prev = survival(0.0);
        for j in 0..cells {
            let a = j as f64 * h;
            let b = a + h;
            let s_next = survival(b);
            let mass = s_prev - s_next;
            // int_a^b (tau - a) dK(tau) = -h S(b) + int_a^b S
            let first = (survival_integral(a, b) - h * s_next).clamp(0.0, h * mass.max(0.0));
            let r = first / h;
            left.push(mass - r);
            right.push(r);
            s_prev = s_next;
        }
        Self { left, right }
    }

    pub fn cells(&self) -> usize {
        self.left.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.left.iter().chain(&self.right).sum()
    }

    /// `int_0^{n h} g(n h - tau) dK(tau)` for `g` sampled on the grid.
    pub fn convolve_at(&self, g: &[f64], n: usize) -> f64 {
        let mut acc = 0.0;
        for j in 0..n {
            acc += self.left[j] * g[n - j] + self.right[j] * g[n - j - 1];
        }
        acc
    }
}

/// Product-integration weights for the power kernel `(t - s)^{-a}` with
/// `a < 1`, integrated against the piecewise-linear interpolant on a
/// uniform grid of step `h`.
///
/// Returns `(w0, w1)` where the cell `[t_n - (k+1) h, t_n - k h]` contributes
/// `w0[k] u(t_n - k h) + w1[k] u(t_n - (k+1) h)`.
pub fn power_kernel_weights(a: f64, h: f64, cells: usize) -> (Vec<f64>, Vec<f64>) {
    let p = 1.0 - a;
    let c1 = h.powf(p) / p;
    let c2 = h.powf(p) / (p + 1.0);
    let mut w0 = Vec::with_capacity(cells);
    let mut w1 = Vec::with_capacity(cells);
    for k in 0..cells {
        let k0 = k as f64;
        let k1 = k0 + 1.0;
        // With r = (t_n - s)/h in [k, k+1], u linear: u = u_k (k+1-r) + u_{k+1} (r-k).
        let m0 = c1 * (k1.powf(p) - k0.powf(p));
        let m1 = c2 * (k1.powf(p + 1.0) - k0.powf(p + 1.0));
        let wk1 = m1 - k0 * m0;
        let wk0 = m0 - wk1;
        w0.push(wk0);
        w1.push(wk1);
    }
    (w0, w1)
}
