use rayon::prelude::*;
use serde::Serialize;
use sm_pricer_core::markov::{bs_call, markov_series_price, MarkovModel};
use sm_pricer_core::sampling::WaitingTimeLaw;
use sm_pricer_core::semimarkov::series_price;
use sm_pricer_core::Method;

use super::limit_price;
use crate::config::{ConvergeVariant, ExperimentConfig, Format, ScalingStage};
use crate::output::{emit, json_document, real, CsvTable};
use crate::{CliError, RunSettings};

const MARKOV_SERIES_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergeRow {
    pub m: usize,
    pub lambda_m: f64,
    pub sigma2_m: f64,
    #[serde(rename = "C_m")]
    pub c_m: f64,
    pub q_target: f64,
    pub abs_error: f64,
    /// Numerical uncertainty of `abs_error`: series truncation plus the
    /// quadrature error of the target.
    pub noise_tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergeReport {
    pub variant: ConvergeVariant,
    pub target: String,
    pub rows: Vec<ConvergeRow>,
    /// Errors nonincreasing up to `noise_tol`; absent for a single stage.
    pub monotone: Option<bool>,
}

fn is_monotone(rows: &[ConvergeRow]) -> Option<bool> {
    (rows.len() > 1).then(|| {
        rows.windows(2)
            .all(|w| w[1].abs_error <= w[0].abs_error + w[0].noise_tol + w[1].noise_tol)
    })
}

pub fn converge_report(cfg: &ExperimentConfig) -> Result<ConvergeReport, CliError> {
    let section = cfg
        .converge
        .as_ref()
        .ok_or_else(|| CliError::Usage("missing [converge] section".into()))?;
    let stages = section.stages()?;
    let opt = cfg.option()?.single()?;

    let (target_name, q, target_tol) = match section.variant {
        ConvergeVariant::Markov => (
            "black-scholes".to_string(),
            bs_call(opt.spot, opt.strike, opt.time_to_maturity)?,
            0.0,
        ),
        ConvergeVariant::MittagLeffler => {
            let method = match section.target.as_deref() {
                None if opt.age > 0.0 => Method::LimitRenewal,
                None => Method::LimitSubordination,
                Some(tag) => match tag.parse::<Method>() {
                    Ok(m @ (Method::LimitRenewal | Method::LimitSubordination)) => m,
                    _ => {
                        return Err(CliError::Usage(format!(
                            "converge.target '{tag}' must be limit-renewal or limit-subordination"
                        )))
                    }
                },
            };
            let (est, warnings, tol) = limit_price(mittag_leffler_alpha(cfg)?, method, opt)?;
            for w in warnings {
                eprintln!("warning: target: {w}");
            }
            (method.to_string(), est.value, tol)
        }
    };

    let alpha = match section.variant {
        ConvergeVariant::Markov => 1.0,
        ConvergeVariant::MittagLeffler => mittag_leffler_alpha(cfg)?,
    };
    let stage_price = |s: &ScalingStage| -> Result<ConvergeRow, CliError> {
        let est = if alpha == 1.0 {
            markov_series_price(MarkovModel::new(s.lambda_m, s.sigma2_m)?, opt, MARKOV_SERIES_TOL)?
        } else {
            let law = WaitingTimeLaw::mittag_leffler(alpha, s.lambda_m)?;
            series_price(&law, s.sigma2_m, opt, &cfg.series)?
        };
        let bracket = est.truncation_bracket.map_or(0.0, |b| b[1] - b[0]);
        Ok(ConvergeRow {
            m: s.m,
            lambda_m: s.lambda_m,
            sigma2_m: s.sigma2_m,
            c_m: est.value,
            q_target: q,
            abs_error: (est.value - q).abs(),
            noise_tol: bracket + target_tol,
        })
    };
    // Stages are independent; collecting in order keeps the table fixed.
    let rows: Vec<ConvergeRow> = stages.par_iter().map(stage_price).collect::<Result<_, _>>()?;
    Ok(ConvergeReport {
        variant: section.variant,
        target: target_name,
        monotone: is_monotone(&rows),
        rows,
    })
}

fn mittag_leffler_alpha(cfg: &ExperimentConfig) -> Result<f64, CliError> {
    let section = cfg.converge.as_ref().expect("converge section checked");
    section
        .alpha
        .or_else(|| cfg.model.as_ref().and_then(|m| m.alpha))
        .filter(|a| *a > 0.0 && *a < 1.0)
        .ok_or_else(|| CliError::Usage("mittag-leffler variant needs alpha in (0, 1)".into()))
}

pub fn converge(cfg: &ExperimentConfig, settings: &RunSettings) -> Result<(), CliError> {
    let report = converge_report(cfg)?;
    if report.monotone == Some(false) {
        eprintln!("warning: errors are not monotone within the noise tolerance");
    }
    let text = match settings.format {
        Format::Json => json_document(&report)?,
        Format::Csv => {
            let mut t = CsvTable::new(&["m", "lambda_m", "sigma2_m", "C_m", "q_target", "abs_error", "noise_tol"]);
            for r in &report.rows {
                t.row([
                    r.m.to_string(),
                    real(r.lambda_m),
                    real(r.sigma2_m),
                    real(r.c_m),
                    real(r.q_target),
                    real(r.abs_error),
                    real(r.noise_tol),
                ]);
            }
            t.finish()
        }
    };
    emit(settings.out.as_deref(), &text)
}
