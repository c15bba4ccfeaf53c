use std::path::Path;

use serde::Serialize;
use sm_pricer_core::fractional::{
    bs_field, g0_field, gy_field, pde_residual_g0, pde_residual_gy, Field2D, FieldSpec, GyIntegrand, ResidualWindow,
};

use crate::config::{ExperimentConfig, Format, ResidualSection};
use crate::output::{create_dir, emit, json_document, real, write_file, CsvTable};
use crate::{CliError, RunSettings};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgedResidual {
    pub age: f64,
    pub sup_norm_coarse: f64,
    pub sup_norm_fine: f64,
    pub measured_order: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualSummary {
    pub alpha: f64,
    pub strike: f64,
    pub maturity: f64,
    /// Spot and time node counts of the coarse and the refined grid.
    pub grid_coarse: [usize; 2],
    pub grid_fine: [usize; 2],
    pub integrand: GyIntegrand,
    pub sup_norm_coarse: f64,
    pub sup_norm_fine: f64,
    pub measured_order: f64,
    pub aged: Vec<AgedResidual>,
    /// Largest gap between the age-zero field and Black–Scholes on the
    /// refined grid.
    pub bs_gap: f64,
}

fn order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

struct Level {
    name: &'static str,
    spec: FieldSpec,
    g0: Field2D,
}

fn dump(dir: Option<&Path>, name: &str, field: &Field2D) -> Result<(), CliError> {
    let Some(dir) = dir else { return Ok(()) };
    let mut buf = Vec::new();
    field
        .write_csv(&mut buf)
        .map_err(|source| CliError::Io { path: dir.join(name), source })?;
    write_file(&dir.join(name), &buf)
}

/// Residuals on the configured grid and on its 2x refinement.
pub fn residual_report(section: &ResidualSection) -> Result<ResidualSummary, CliError> {
    section.validate()?;
    let coarse = FieldSpec {
        width_sd: section.width_sd,
        ..FieldSpec::new(section.alpha, section.strike, section.maturity, section.n_x, section.n_t)?
    };
    coarse.validate()?;
    if !(section.alpha < 1.0) {
        return Err(CliError::Usage("residual.alpha must lie in (0, 1)".into()));
    }
    let fine = coarse.refined();
    let window = ResidualWindow::for_spec(&coarse);
    let dir = section.field_dir.as_deref();
    if let Some(d) = dir {
        create_dir(d)?;
    }

    let levels = [coarse, fine]
        .into_iter()
        .zip(["coarse", "fine"])
        .map(|(spec, name)| Ok(Level { name, spec, g0: g0_field(&spec)? }))
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut g0_norms = Vec::new();
    for lv in &levels {
        let rep = pde_residual_g0(section.alpha, section.strike, &lv.g0, window)?;
        dump(dir, &format!("g0_{}.csv", lv.name), &lv.g0)?;
        dump(dir, &format!("residual_g0_{}.csv", lv.name), &rep.residual)?;
        g0_norms.push(rep.sup_norm);
    }

    let mut aged = Vec::new();
    for &y in &section.ages {
        let mut norms = Vec::new();
        for lv in &levels {
            let gy = gy_field(y, section.alpha, section.strike, &lv.g0)?;
            let rep = pde_residual_gy(section.alpha, y, section.strike, &lv.g0, &gy, window, section.integrand)?;
            dump(dir, &format!("gy_y{y}_{}.csv", lv.name), &gy)?;
            dump(dir, &format!("residual_gy_y{y}_{}.csv", lv.name), &rep.residual)?;
            norms.push(rep.sup_norm);
        }
        aged.push(AgedResidual {
            age: y,
            sup_norm_coarse: norms[0],
            sup_norm_fine: norms[1],
            measured_order: order(norms[0], norms[1]),
        });
    }

    let fine_level = &levels[1];
    let bs = bs_field(&fine_level.spec)?;
    let bs_gap = fine_level
        .g0
        .values
        .iter()
        .flatten()
        .zip(bs.values.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    Ok(ResidualSummary {
        alpha: section.alpha,
        strike: section.strike,
        maturity: section.maturity,
        grid_coarse: [coarse.n_x, coarse.n_t],
        grid_fine: [fine.n_x, fine.n_t],
        integrand: section.integrand,
        sup_norm_coarse: g0_norms[0],
        sup_norm_fine: g0_norms[1],
        measured_order: order(g0_norms[0], g0_norms[1]),
        aged,
        bs_gap,
    })
}

pub fn residual(cfg: &ExperimentConfig, settings: &RunSettings) -> Result<(), CliError> {
    let section = cfg.residual.clone().unwrap_or_default();
    section.validate()?;
    let report = if section.parallel {
        residual_report(&section)?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start worker: {e}")))?
            .install(|| residual_report(&section))?
    };
    let text = match settings.format {
        Format::Json => json_document(&report)?,
        Format::Csv => {
            let mut t = CsvTable::new(&[
                "equation",
                "age",
                "sup_norm_coarse",
                "sup_norm_fine",
                "measured_order",
                "bs_gap",
            ]);
            t.row([
                "g0".to_string(),
                real(0.0),
                real(report.sup_norm_coarse),
                real(report.sup_norm_fine),
                real(report.measured_order),
                real(report.bs_gap),
            ]);
            for a in &report.aged {
                t.row([
                    "gy".to_string(),
                    real(a.age),
                    real(a.sup_norm_coarse),
                    real(a.sup_norm_fine),
                    real(a.measured_order),
                    String::new(),
                ]);
            }
            t.finish()
        }
    };
    emit(settings.out.as_deref(), &text)
}
