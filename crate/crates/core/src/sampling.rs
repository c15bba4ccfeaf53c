//! Exact random variates, semi-Markov price paths and Monte Carlo
//! estimation with reproducible, thread-count independent results.

use std::f64::consts::PI;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{kanter_a, ml_survival, MlParams};

/// Generator used by every sampler.
pub type StreamRng = ChaCha8Rng;

/// Identifies an independent random stream: a seed plus a stream number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// The `index`-th child stream; children of distinct parents or with
    /// distinct indices never coincide in practice.
    pub fn child(&self, index: u64) -> RngStream {
        RngStream {
            seed: splitmix64(self.seed ^ splitmix64(self.stream_id)),
            stream_id: index,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Law of the waiting times between trades.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WaitingTimeLaw {
    Exponential { lambda: f64 },
    MittagLeffler { alpha: f64, lambda: f64 },
}

impl WaitingTimeLaw {
    pub fn exponential(lambda: f64) -> Result<Self> {
        let law = WaitingTimeLaw::Exponential { lambda };
        law.validate()?;
        Ok(law)
    }

    pub fn mittag_leffler(alpha: f64, lambda: f64) -> Result<Self> {
        let law = WaitingTimeLaw::MittagLeffler { alpha, lambda };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            WaitingTimeLaw::Exponential { lambda } => MlParams::new(1.0, lambda).map(|_| ()),
            WaitingTimeLaw::MittagLeffler { alpha, lambda } => MlParams::new(alpha, lambda).map(|_| ()),
        }
    }

    /// The law as Mittag-Leffler parameters (`alpha = 1` for exponential).
    pub fn ml_params(&self) -> MlParams {
        match *self {
            WaitingTimeLaw::Exponential { lambda } => MlParams { alpha: 1.0, lambda },
            WaitingTimeLaw::MittagLeffler { alpha, lambda } => MlParams { alpha, lambda },
        }
    }

    pub fn lambda(&self) -> f64 {
        self.ml_params().lambda
    }

    pub fn alpha(&self) -> f64 {
        self.ml_params().alpha
    }

    pub fn is_markov(&self) -> bool {
        self.alpha() == 1.0
    }

    /// `P(J > t)`.
    pub fn survival(&self, t: f64) -> Result<f64> {
        ml_survival(self.ml_params(), t)
    }
}

/// One unit-exponential draw.
fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// Uniform on the open interval (0, 1).
fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// One draw of `sigma(t)` for the stable subordinator with Laplace
/// exponent `phi^alpha` (Kanter's representation).
pub fn sample_stable<R: Rng + ?Sized>(alpha: f64, t: f64, rng: &mut R) -> f64 {
    if alpha == 1.0 {
        return t;
    }
    let phi = PI * open01(rng);
    let e = exp1(rng);
    let s = (kanter_a(alpha, phi) / e).powf((1.0 - alpha) / alpha);
    t.powf(1.0 / alpha) * s
}

/// One waiting time from `law`.
pub fn sample_ml_waiting<R: Rng + ?Sized>(law: &WaitingTimeLaw, rng: &mut R) -> f64 {
    let MlParams { alpha, lambda } = law.ml_params();
    let e = exp1(rng);
    if alpha == 1.0 {
        return e / lambda;
    }
    sample_stable(alpha, e / lambda, rng)
}

/// One draw of the inverse stable subordinator `L(t) = (t / sigma(1))^alpha`.
pub fn sample_inverse_stable<R: Rng + ?Sized>(alpha: f64, t: f64, rng: &mut R) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    (t / sample_stable(alpha, 1.0, rng)).powf(alpha)
}

// Below this survival at the age, rejection wastes too many draws.
const REJECTION_MIN_SURVIVAL: f64 = 1e-3;
const INVERSION_TOL: f64 = 1e-10;

/// Remaining waiting time given that the current one has lasted `age`.
pub fn sample_residual_lifetime<R: Rng + ?Sized>(
    law: &WaitingTimeLaw,
    age: f64,
    rng: &mut R,
) -> Result<f64> {
    ResidualLifetime::new(*law, age)?.sample(rng)
}

/// Number of trades in `[0, horizon]` when the current waiting time has
/// lasted `age` at time 0.
pub fn sample_jump_count<R: Rng + ?Sized>(
    law: &WaitingTimeLaw,
    horizon: f64,
    age: f64,
    rng: &mut R,
) -> Result<u64> {
    ResidualLifetime::new(*law, age)?.jump_count(horizon, rng)
}

/// Residual-lifetime sampler for one law and age, for repeated draws.
#[derive(Debug, Clone, Copy)]
pub struct ResidualLifetime {
    law: WaitingTimeLaw,
    age: f64,
    /// Survival at the age; unused when the age plays no role.
    surv_age: f64,
}

impl ResidualLifetime {
    pub fn new(law: WaitingTimeLaw, age: f64) -> Result<Self> {
        let surv_age = if age <= 0.0 || law.is_markov() {
            1.0
        } else {
            law.survival(age)?
        };
        if surv_age <= 0.0 {
            return Err(Error::DegenerateAge { age });
        }
        Ok(Self { law, age, surv_age })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let (law, age, surv_age) = (&self.law, self.age, self.surv_age);
        if age <= 0.0 || law.is_markov() {
            return Ok(sample_ml_waiting(law, rng));
        }
        if surv_age >= REJECTION_MIN_SURVIVAL {
            loop {
                let j = sample_ml_waiting(law, rng);
                if j > age {
                    return Ok(j - age);
                }
            }
        }
        // Invert P(J > age + w | J > age) = u by bisection.
        let u = open01(rng);
        let cond = |w: f64| -> Result<f64> { Ok(law.survival(age + w)? / surv_age) };
        let mut hi = age.max(1e-12);
        while cond(hi)? > u {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::DegenerateAge { age });
            }
        }
        let mut lo = 0.0;
        while hi - lo > INVERSION_TOL * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if cond(mid)? > u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Trades in `[0, horizon]`.
    pub fn jump_count<R: Rng + ?Sized>(&self, horizon: f64, rng: &mut R) -> Result<u64> {
        let mut t = self.sample(rng)?;
        let mut n = 0;
        while t <= horizon {
            n += 1;
            t += sample_ml_waiting(&self.law, rng);
        }
        Ok(n)
    }
}

/// A simulated trade history.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub epochs: Vec<f64>,
    pub log_returns: Vec<f64>,
    pub terminal_price: f64,
}

impl PathRecord {
    /// CSV dump: `epoch,log_return` rows then a `terminal,<price>` trailer.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "epoch,log_return")?;
        for (t, y) in self.epochs.iter().zip(&self.log_returns) {
            writeln!(out, "{},{}", fmt_real(*t), fmt_real(*y))?;
        }
        writeln!(out, "terminal,{}", fmt_real(self.terminal_price))
    }

    /// File name used for dumps of the path on stream `stream_id`.
    pub fn file_name(stream_id: u64) -> String {
        format!("path_{stream_id}.csv")
    }
}

/// Formats with 17 significant digits and a `.` decimal separator.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Trade epochs in `[0, horizon]` with normal log-returns of variance
/// `sigma2`; centred at `-sigma2 / 2` when `martingale` is set so that the
/// price is a martingale.
pub fn simulate_semimarkov_path<R: Rng + ?Sized>(
    x0: f64,
    sigma2: f64,
    law: &WaitingTimeLaw,
    horizon: f64,
    initial_age: f64,
    martingale: bool,
    rng: &mut R,
) -> Result<PathRecord> {
    if !(x0 > 0.0 && sigma2 >= 0.0 && horizon > 0.0 && initial_age >= 0.0) {
        return Err(Error::domain("path needs x0 > 0, sigma2 >= 0, horizon > 0, age >= 0"));
    }
    let sd = sigma2.sqrt();
    let drift = if martingale { -0.5 * sigma2 } else { 0.0 };
    let mut epochs = Vec::new();
    let mut log_returns = Vec::new();
    let mut t = sample_residual_lifetime(law, initial_age, rng)?;
    let mut total = 0.0;
    while t <= horizon {
        let z: f64 = StandardNormal.sample(rng);
        let y = drift + sd * z;
        epochs.push(t);
        log_returns.push(y);
        total += y;
        t += sample_ml_waiting(law, rng);
    }
    Ok(PathRecord {
        epochs,
        log_returns,
        terminal_price: x0 * total.exp(),
    })
}

/// Payoff `(x e^{B(L) - L/2} - K)^+` with `L = L(z)` independent of `B`.
pub fn simulate_subordinated_gbm_payoff<R: Rng + ?Sized>(
    alpha: f64,
    x: f64,
    z: f64,
    strike: f64,
    rng: &mut R,
) -> f64 {
    if z <= 0.0 {
        return (x - strike).max(0.0);
    }
    let l = sample_inverse_stable(alpha, z, rng);
    let g: f64 = StandardNormal.sample(rng);
    (x * (l.sqrt() * g - 0.5 * l).exp() - strike).max(0.0)
}

/// Time to the first renewal of the limit model at age `y`, with survival
/// `(y / (y + tau))^alpha`, by inversion.
pub fn sample_aged_limit_renewal<R: Rng + ?Sized>(alpha: f64, y: f64, rng: &mut R) -> f64 {
    y * (open01(rng).powf(-1.0 / alpha) - 1.0)
}

/// Payoff of the limit model started at age `y`: the first renewal has
/// survival `(y / (y + tau))^alpha`, after which the clock restarts.
pub fn simulate_aged_limit_payoff<R: Rng + ?Sized>(
    alpha: f64,
    x: f64,
    y: f64,
    z: f64,
    strike: f64,
    rng: &mut R,
) -> f64 {
    if z <= 0.0 {
        return (x - strike).max(0.0);
    }
    let tau = sample_aged_limit_renewal(alpha, y, rng);
    if tau > z {
        return (x - strike).max(0.0);
    }
    simulate_subordinated_gbm_payoff(alpha, x, z - tau, strike, rng)
}

/// Mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: u64,
}

/// Paths per independent stream in [`monte_carlo`].
pub const MC_CHUNK: u64 = 4096;

#[derive(Clone, Copy)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    const EMPTY: Moments = Moments { n: 0.0, mean: 0.0, m2: 0.0 };

    fn merge(a: Moments, b: Moments) -> Moments {
        if a.n == 0.0 {
            return b;
        }
        if b.n == 0.0 {
            return a;
        }
        let n = a.n + b.n;
        let d = b.mean - a.mean;
        Moments {
            n,
            mean: a.mean + d * b.n / n,
            m2: a.m2 + b.m2 + d * d * a.n * b.n / n,
        }
    }
}

fn merge_tree(parts: &[Moments]) -> Moments {
    match parts.len() {
        0 => Moments::EMPTY,
        1 => parts[0],
        n => Moments::merge(merge_tree(&parts[..n / 2]), merge_tree(&parts[n / 2..])),
    }
}

/// Sample mean of `f` over `n_paths` draws.
///
/// Paths are split into chunks of [`MC_CHUNK`], each with its own child
/// stream of `stream`, and chunk statistics are merged in a fixed tree, so
/// the result is bitwise identical for any number of worker threads.
pub fn monte_carlo<F>(stream: RngStream, n_paths: u64, f: F) -> Result<McEstimate>
where
    F: Fn(&mut StreamRng) -> Result<f64> + Sync,
{
    let mut est = monte_carlo_many(stream, n_paths, 1, |rng, out| {
        out[0] = f(rng)?;
        Ok(())
    })?;
    Ok(est.remove(0))
}

/// As [`monte_carlo`] for `width` statistics of the same path; `f` fills
/// one value per statistic.
pub fn monte_carlo_many<F>(stream: RngStream, n_paths: u64, width: usize, f: F) -> Result<Vec<McEstimate>>
where
    F: Fn(&mut StreamRng, &mut [f64]) -> Result<()> + Sync,
{
    if n_paths == 0 {
        return Err(Error::domain("Monte Carlo needs at least one path"));
    }
    let n_chunks = n_paths.div_ceil(MC_CHUNK);
    let run_chunk = |c: u64| -> Result<Vec<Moments>> {
        let mut rng = stream.child(c).rng();
        let len = MC_CHUNK.min(n_paths - c * MC_CHUNK);
        let mut ms = vec![Moments::EMPTY; width];
        let mut vals = vec![0.0; width];
        for _ in 0..len {
            f(&mut rng, &mut vals)?;
            for (m, &v) in ms.iter_mut().zip(&vals) {
                m.n += 1.0;
                let d = v - m.mean;
                m.mean += d / m.n;
                m.m2 += d * (v - m.mean);
            }
        }
        Ok(ms)
    };
    #[cfg(feature = "parallel")]
    let parts: Result<Vec<Vec<Moments>>> = {
        use rayon::prelude::*;
        (0..n_chunks).into_par_iter().map(run_chunk).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Result<Vec<Vec<Moments>>> = (0..n_chunks).map(run_chunk).collect();
    let parts = parts?;
    Ok((0..width)
        .map(|k| {
            let column: Vec<Moments> = parts.iter().map(|p| p[k]).collect();
            let total = merge_tree(&column);
            let var = if total.n > 1.0 { total.m2 / (total.n - 1.0) } else { 0.0 };
            McEstimate {
                mean: total.mean,
                std_error: (var / total.n).sqrt(),
                n_paths,
            }
        })
        .collect())
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and
/// the distribution function `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).abs().max((c - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::StableKernel;

    fn draws(n: usize, seed: u64, mut f: impl FnMut(&mut StreamRng) -> f64) -> Vec<f64> {
        let mut rng = RngStream::new(seed, 0).rng();
        (0..n).map(|_| f(&mut rng)).collect()
    }

    #[test]
    fn streams_reproduce_and_differ() {
        let take = |st: RngStream| -> Vec<u64> {
            let mut r = st.rng();
            (0..4).map(|_| r.random()).collect()
        };
        let (a, b, c) = (take(RngStream::new(7, 3)), take(RngStream::new(7, 3)), take(RngStream::new(7, 4)));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(RngStream::new(7, 3).child(0), RngStream::new(7, 4).child(0));
    }

    #[test]
    fn stable_half_is_levy() {
        let mut s = draws(20_000, 1, |r| sample_stable(0.5, 1.0, r));
        let d = ks_distance(&mut s, |x| libm::erfc(1.0 / (2.0 * x.sqrt())));
        assert!(d < 0.015, "KS {d}");
    }

    #[test]
    fn stable_general_matches_cdf() {
        let k = StableKernel::new(0.7).unwrap();
        let mut s = draws(5_000, 2, |r| sample_stable(0.7, 2.0, r));
        let d = ks_distance(&mut s, |x| k.stable_cdf(x, 2.0).unwrap());
        assert!(d < 0.025, "KS {d}");
    }

    #[test]
    fn residual_lifetime_inversion_matches_rejection() {
        // Age deep in the tail forces inversion; compare against the exact
        // conditional survival.
        let law = WaitingTimeLaw::mittag_leffler(0.6, 500.0).unwrap();
        let age = 3.0;
        assert!(law.survival(age).unwrap() < REJECTION_MIN_SURVIVAL);
        let sa = law.survival(age).unwrap();
        let mut s = draws(4_000, 3, |r| sample_residual_lifetime(&law, age, r).unwrap());
        let d = ks_distance(&mut s, |w| 1.0 - law.survival(age + w).unwrap() / sa);
        assert!(d < 0.03, "KS {d}");
        let law = WaitingTimeLaw::mittag_leffler(0.5, 1.0).unwrap();
        let sa = law.survival(1.0).unwrap();
        let mut s = draws(4_000, 4, |r| sample_residual_lifetime(&law, 1.0, r).unwrap());
        let d = ks_distance(&mut s, |w| 1.0 - law.survival(1.0 + w).unwrap() / sa);
        assert!(d < 0.03, "KS {d}");
    }

    #[test]
    fn zero_volatility_path_keeps_price() {
        let law = WaitingTimeLaw::exponential(3.0).unwrap();
        let mut rng = RngStream::new(5, 0).rng();
        let p = simulate_semimarkov_path(2.5, 0.0, &law, 4.0, 0.0, true, &mut rng).unwrap();
        assert_eq!(p.terminal_price, 2.5);
        assert!(p.epochs.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(p.epochs.len(), p.log_returns.len());
    }

    #[test]
    fn path_csv_layout() {
        let p = PathRecord {
            epochs: vec![0.5, 1.25],
            log_returns: vec![-0.1, 0.2],
            terminal_price: 1.1,
        };
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "epoch,log_return");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("terminal,1.1000000000000001e0"));
        assert_eq!(PathRecord::file_name(12), "path_12.csv");
    }

    #[test]
    fn monte_carlo_is_chunk_deterministic() {
        let f = |r: &mut StreamRng| -> Result<f64> { Ok(StandardNormal.sample(r)) };
        let a = monte_carlo(RngStream::new(9, 0), 10_000, f).unwrap();
        let b = monte_carlo(RngStream::new(9, 0), 10_000, f).unwrap();
        assert_eq!(a, b);
        assert!(a.mean.abs() < 4.0 * a.std_error);
        assert!((a.std_error - 0.01).abs() < 1e-3);
    }

    #[test]
    fn gbm_payoff_conditional_mean() {
        // K = 0: the payoff is the price itself, a martingale.
        let est = monte_carlo(RngStream::new(11, 0), 40_000, |r| Ok(simulate_subordinated_gbm_payoff(0.5, 1.3, 2.0, 0.0, r))).unwrap();
        assert!((est.mean - 1.3).abs() < 3.5 * est.std_error);
    }
}
