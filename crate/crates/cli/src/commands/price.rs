use serde::Serialize;
use sm_pricer_core::fractional::{aged_price_gy, aged_price_gy_direct, limit_mc_price, subordinated_price_g0};
use sm_pricer_core::markov::{bs_call, markov_series_price, MarkovModel};
use sm_pricer_core::sampling::{RngStream, WaitingTimeLaw};
use sm_pricer_core::semimarkov::{mc_price, series_price, SeriesConfig};
use sm_pricer_core::{Method, OptionSpec, PriceEstimate};

use crate::config::{ExperimentConfig, Format, ModelConfig, PriceSection};
use crate::output::{emit, json_lines, opt_real, real, CsvTable};
use crate::{CliError, RunSettings};

#[derive(Debug, Clone, Serialize)]
pub struct PriceRecord {
    pub spot: f64,
    pub strike: f64,
    pub time_to_maturity: f64,
    pub age: f64,
    #[serde(flatten)]
    pub estimate: PriceEstimate,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Limit-model price at order `alpha` by `method`, which must be
/// `limit-subordination` or `limit-renewal`. Returns the estimate, warnings
/// and an error bound of the quadrature.
pub fn limit_price(alpha: f64, method: Method, opt: OptionSpec) -> Result<(PriceEstimate, Vec<String>, f64), CliError> {
    opt.validate()?;
    // Memoryless clock or no age: no renewal equation to solve.
    let base = || -> Result<f64, CliError> {
        Ok(if alpha == 1.0 {
            bs_call(opt.spot, opt.strike, opt.time_to_maturity)?
        } else {
            subordinated_price_g0(alpha, opt.spot, opt.strike, opt.time_to_maturity)?
        })
    };
    match method {
        Method::LimitSubordination => {
            let v = if opt.age == 0.0 || alpha == 1.0 {
                base()?
            } else {
                aged_price_gy_direct(alpha, opt)?
            };
            Ok((PriceEstimate::quadrature(method, v), Vec::new(), 0.0))
        }
        Method::LimitRenewal => {
            if opt.age == 0.0 || alpha == 1.0 {
                return Ok((PriceEstimate::quadrature(method, base()?), Vec::new(), 0.0));
            }
            let sol = aged_price_gy(alpha, opt)?;
            let mut warnings = Vec::new();
            if sol.resolution_warning {
                warnings.push(format!("renewal grid unresolved: kernel mass error {:e}", sol.mass_error));
            }
            if sol.extrapolated {
                warnings.push("age exceeds the time to maturity; limit equation extrapolated".to_string());
            }
            Ok((sol.estimate, warnings, sol.mass_error * opt.spot))
        }
        other => Err(CliError::Usage(format!("{other} is not a limit quadrature method"))),
    }
}

/// Price of one contract by one method.
pub fn price_one(
    method: Method,
    model: &ModelConfig,
    law: &WaitingTimeLaw,
    opt: OptionSpec,
    section: &PriceSection,
    series: &SeriesConfig,
    stream: RngStream,
) -> Result<(PriceEstimate, Vec<String>), CliError> {
    let alpha = model.limit_alpha();
    let est = match method {
        Method::MarkovSeries => {
            if !law.is_markov() {
                return Err(CliError::Usage("markov-series needs the exponential law".into()));
            }
            markov_series_price(MarkovModel::new(model.lambda, model.sigma2)?, opt, section.tolerance)?
        }
        Method::SmSeries => series_price(law, model.sigma2, opt, series)?,
        Method::SmMc => mc_price(law, model.sigma2, opt, section.n_paths, stream)?,
        Method::LimitMc => {
            if alpha == 1.0 {
                return Err(CliError::Usage("limit-mc needs a Mittag-Leffler law with alpha < 1".into()));
            }
            limit_mc_price(alpha, opt, section.n_paths, stream)?
        }
        Method::LimitSubordination | Method::LimitRenewal => {
            let (est, warnings, _) = limit_price(alpha, method, opt)?;
            return Ok((est, warnings));
        }
    };
    Ok((est, Vec::new()))
}

pub fn price(cfg: &ExperimentConfig, settings: &RunSettings) -> Result<(), CliError> {
    let section = cfg
        .price
        .as_ref()
        .ok_or_else(|| CliError::Usage("missing [price] section".into()))?;
    let methods = section.parsed_methods()?;
    let model = cfg.model()?;
    let law = model.waiting_law()?;
    let contracts = cfg.option()?.contracts()?;
    if methods.iter().any(Method::is_monte_carlo) && section.n_paths < 2 {
        return Err(CliError::Usage("price.n_paths must be at least 2".into()));
    }

    let mut records = Vec::with_capacity(methods.len() * contracts.len());
    for &method in &methods {
        for (i, &opt) in contracts.iter().enumerate() {
            let stream = RngStream::new(settings.seed, section.stream_id + i as u64);
            let (estimate, warnings) = price_one(method, model, &law, opt, section, &cfg.series, stream)?;
            for w in &warnings {
                eprintln!("warning: {method} at spot {} strike {}: {w}", opt.spot, opt.strike);
            }
            records.push(PriceRecord {
                spot: opt.spot,
                strike: opt.strike,
                time_to_maturity: opt.time_to_maturity,
                age: opt.age,
                estimate,
                warnings,
            });
        }
    }

    let text = match settings.format {
        Format::Json => json_lines(&records)?,
        Format::Csv => {
            let mut t = CsvTable::new(&[
                "method",
                "spot",
                "strike",
                "time_to_maturity",
                "age",
                "value",
                "std_error",
                "n_paths",
                "bracket_low",
                "bracket_high",
            ]);
            for r in &records {
                let e = &r.estimate;
                t.row([
                    e.method.to_string(),
                    real(r.spot),
                    real(r.strike),
                    real(r.time_to_maturity),
                    real(r.age),
                    real(e.value),
                    opt_real(e.std_error),
                    e.n_paths.map(|n| n.to_string()).unwrap_or_default(),
                    opt_real(e.truncation_bracket.map(|b| b[0])),
                    opt_real(e.truncation_bracket.map(|b| b[1])),
                ]);
            }
            t.finish()
        }
    };
    emit(settings.out.as_deref(), &text)
}
