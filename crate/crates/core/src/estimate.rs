use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A European call contract and the state it is priced in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionSpec {
    pub strike: f64,
    pub spot: f64,
    /// Remaining time `T - t`.
    pub time_to_maturity: f64,
    /// Time elapsed since the last trade.
    #[serde(default)]
    pub age: f64,
}

impl OptionSpec {
    pub fn new(spot: f64, strike: f64, time_to_maturity: f64, age: f64) -> Result<Self> {
        let opt = Self {
            strike,
            spot,
            time_to_maturity,
            age,
        };
        opt.validate()?;
        Ok(opt)
    }

    /// Strike zero is accepted: the call then pays the spot.
    pub fn validate(&self) -> Result<()> {
        if !(self.spot > 0.0 && self.spot.is_finite()) {
            return Err(Error::domain(format!("spot {} must be positive", self.spot)));
        }
        if !(self.strike >= 0.0 && self.strike.is_finite()) {
            return Err(Error::domain(format!("strike {} must be nonnegative", self.strike)));
        }
        if !(self.time_to_maturity >= 0.0 && self.time_to_maturity.is_finite()) {
            return Err(Error::domain(format!(
                "time to maturity {} must be nonnegative",
                self.time_to_maturity
            )));
        }
        if !(self.age >= 0.0 && self.age.is_finite()) {
            return Err(Error::domain(format!("age {} must be nonnegative", self.age)));
        }
        Ok(())
    }

    pub fn payoff(&self) -> f64 {
        call_payoff(self.spot, self.strike)
    }
}

pub fn call_payoff(x: f64, strike: f64) -> f64 {
    (x - strike).max(0.0)
}

/// Pricing route that produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    MarkovSeries,
    SmSeries,
    SmMc,
    LimitSubordination,
    LimitRenewal,
    LimitMc,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::MarkovSeries,
        Method::SmSeries,
        Method::SmMc,
        Method::LimitSubordination,
        Method::LimitRenewal,
        Method::LimitMc,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Method::MarkovSeries => "markov-series",
            Method::SmSeries => "sm-series",
            Method::SmMc => "sm-mc",
            Method::LimitSubordination => "limit-subordination",
            Method::LimitRenewal => "limit-renewal",
            Method::LimitMc => "limit-mc",
        }
    }

    pub fn is_monte_carlo(&self) -> bool {
        matches!(self, Method::SmMc | Method::LimitMc)
    }

    pub fn is_series(&self) -> bool {
        matches!(self, Method::MarkovSeries | Method::SmSeries)
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| Error::domain(format!("unknown method '{s}'")))
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// A price together with its uncertainty.
///
/// Monte Carlo estimates carry a standard error and a path count; series
/// estimates carry the interval known to contain the untruncated sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceEstimate {
    pub value: f64,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_paths: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_bracket: Option<[f64; 2]>,
}

impl PriceEstimate {
    pub fn quadrature(method: Method, value: f64) -> Self {
        Self {
            value,
            method,
            std_error: None,
            n_paths: None,
            truncation_bracket: None,
        }
    }

    pub fn series(method: Method, value: f64, bracket: [f64; 2]) -> Self {
        Self {
            truncation_bracket: Some(bracket),
            ..Self::quadrature(method, value)
        }
    }

    pub fn monte_carlo(method: Method, value: f64, std_error: f64, n_paths: u64) -> Self {
        Self {
            std_error: Some(std_error),
            n_paths: Some(n_paths),
            ..Self::quadrature(method, value)
        }
    }
}
