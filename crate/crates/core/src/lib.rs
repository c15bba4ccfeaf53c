//! Option pricing when the number of price jumps is a renewal process with
//! Mittag-Leffler waiting times, and its fractional Black–Scholes limit.

pub mod error;
pub mod estimate;
pub mod fractional;
pub mod markov;
pub mod quadrature;
pub mod renewal;
pub mod sampling;
pub mod semimarkov;
pub mod specfun;

pub use error::{Error, Result};
pub use estimate::{Method, OptionSpec, PriceEstimate};
