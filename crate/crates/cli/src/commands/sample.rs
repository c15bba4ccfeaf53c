use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use sm_pricer_core::sampling::{
    ks_distance, sample_aged_limit_renewal, sample_inverse_stable, sample_ml_waiting, sample_stable,
    simulate_semimarkov_path, PathRecord, ResidualLifetime, RngStream, StreamRng, MC_CHUNK,
};
use sm_pricer_core::semimarkov::residual_lifetime_cdf;
use sm_pricer_core::specfun::StableKernel;

use crate::config::{ExperimentConfig, Format, SampleSection, SampleTarget};
use crate::output::{create_dir, emit, json_document, real, write_file, CsvTable};
use crate::{CliError, RunSettings};

/// Share of the draws below the upper edge of the regular bins; the rest
/// fall in one overflow bin.
const HISTOGRAM_COVERAGE: f64 = 0.99;

/// `n` draws of `f`, in chunks of [`MC_CHUNK`] on child streams of
/// `stream`; the result does not depend on the number of threads.
pub fn draw<F>(stream: RngStream, n: u64, f: F) -> Result<Vec<f64>, CliError>
where
    F: Fn(&mut StreamRng) -> Result<f64, CliError> + Sync,
{
    let chunks: Vec<Vec<f64>> = (0..n.div_ceil(MC_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = stream.child(c).rng();
            let len = MC_CHUNK.min(n - c * MC_CHUNK);
            (0..len).map(|_| f(&mut rng)).collect()
        })
        .collect::<Result<_, _>>()?;
    Ok(chunks.concat())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub count: u64,
    pub frequency: f64,
    /// Probability of the bin under the target law.
    pub model_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSummary {
    pub target: SampleTarget,
    pub n: u64,
    pub ks_distance: f64,
    pub mean: f64,
    pub std_error: f64,
    pub paths_written: u64,
}

#[derive(Debug, Clone, Serialize)]
struct SampleReport {
    #[serde(flatten)]
    summary: SampleSummary,
    histogram: Vec<HistogramBin>,
}

fn alpha_of(section: &SampleSection, cfg: &ExperimentConfig) -> Result<f64, CliError> {
    section
        .alpha
        .or_else(|| cfg.model.as_ref().and_then(|m| m.alpha))
        .ok_or_else(|| CliError::Usage("sample.alpha is required for this target".into()))
}

type Cdf = Box<dyn Fn(f64) -> f64 + Sync>;
type Sampler = Box<dyn Fn(&mut StreamRng) -> Result<f64, CliError> + Sync>;

fn target_law(section: &SampleSection, cfg: &ExperimentConfig) -> Result<(Sampler, Cdf), CliError> {
    let t = section.t;
    let age = section.age;
    Ok(match section.target {
        SampleTarget::Waiting => {
            let law = cfg.model()?.waiting_law()?;
            (
                Box::new(move |r| Ok(sample_ml_waiting(&law, r))),
                Box::new(move |w| 1.0 - law.survival(w).unwrap_or(f64::NAN)),
            )
        }
        SampleTarget::Residual => {
            let law = cfg.model()?.waiting_law()?;
            residual_lifetime_cdf(&law, age, 1.0)?;
            let residual = ResidualLifetime::new(law, age)?;
            (
                Box::new(move |r| Ok(residual.sample(r)?)),
                Box::new(move |w| residual_lifetime_cdf(&law, age, w).unwrap_or(f64::NAN)),
            )
        }
        SampleTarget::Stable => {
            let k = StableKernel::new(alpha_of(section, cfg)?)?;
            let alpha = k.alpha();
            (
                Box::new(move |r| Ok(sample_stable(alpha, t, r))),
                Box::new(move |x| k.stable_cdf(x, t).unwrap_or(f64::NAN)),
            )
        }
        SampleTarget::InverseStable => {
            let k = StableKernel::new(alpha_of(section, cfg)?)?;
            let alpha = k.alpha();
            // L(t) <= s exactly when sigma(s) >= t.
            (
                Box::new(move |r| Ok(sample_inverse_stable(alpha, t, r))),
                Box::new(move |s| {
                    if s <= 0.0 {
                        0.0
                    } else {
                        1.0 - k.stable_cdf(t, s).unwrap_or(f64::NAN)
                    }
                }),
            )
        }
        SampleTarget::AgedLimitRenewal => {
            let alpha = alpha_of(section, cfg)?;
            if !(alpha > 0.0 && alpha <= 1.0 && age > 0.0) {
                return Err(CliError::Usage("aged-limit-renewal needs alpha in (0, 1] and age > 0".into()));
            }
            (
                Box::new(move |r| Ok(sample_aged_limit_renewal(alpha, age, r))),
                Box::new(move |w| if w <= 0.0 { 0.0 } else { 1.0 - (age / (age + w)).powf(alpha) }),
            )
        }
    })
}

fn histogram(sorted: &[f64], bins: usize, cdf: &Cdf) -> Vec<HistogramBin> {
    let n = sorted.len();
    let lo = sorted[0];
    let mut hi = sorted[((HISTOGRAM_COVERAGE * (n - 1) as f64) as usize).min(n - 1)];
    if hi <= lo {
        hi = sorted[n - 1];
    }
    if hi <= lo {
        hi = lo + 1.0;
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins + 1];
    for &v in sorted {
        let k = if v > hi {
            bins
        } else {
            (((v - lo) / width) as usize).min(bins - 1)
        };
        counts[k] += 1;
    }
    let edges: Vec<f64> = (0..=bins)
        .map(|k| if k == bins { hi } else { lo + k as f64 * width })
        .chain(std::iter::once(f64::INFINITY))
        .collect();
    edges
        .windows(2)
        .zip(&counts)
        .map(|(e, &count)| {
            let upper = if e[1].is_finite() { cdf(e[1]) } else { 1.0 };
            HistogramBin {
                bin_lo: e[0],
                bin_hi: e[1],
                count,
                frequency: count as f64 / n as f64,
                model_probability: upper - cdf(e[0]),
            }
        })
        .collect()
}

fn write_paths(section: &SampleSection, cfg: &ExperimentConfig, seed: u64) -> Result<u64, CliError> {
    if section.paths == 0 {
        return Ok(0);
    }
    let dir: PathBuf = section
        .path_dir
        .clone()
        .ok_or_else(|| CliError::Usage("sample.paths needs sample.path_dir".into()))?;
    let model = cfg.model()?;
    let law = model.waiting_law()?;
    let files: Vec<(u64, Vec<u8>)> = (0..section.paths)
        .into_par_iter()
        .map(|i| {
            let stream_id = section.stream_id + i;
            let mut rng = RngStream::new(seed, stream_id).rng();
            let path = simulate_semimarkov_path(
                section.spot,
                model.sigma2,
                &law,
                section.horizon,
                section.age,
                true,
                &mut rng,
            )?;
            let mut buf = Vec::new();
            path.write_csv(&mut buf).expect("writing to memory");
            Ok((stream_id, buf))
        })
        .collect::<Result<_, CliError>>()?;
    create_dir(&dir)?;
    for (id, buf) in &files {
        write_file(&dir.join(PathRecord::file_name(*id)), buf)?;
    }
    Ok(section.paths)
}

pub fn sample(cfg: &ExperimentConfig, settings: &RunSettings) -> Result<(), CliError> {
    let section = cfg
        .sample
        .as_ref()
        .ok_or_else(|| CliError::Usage("missing [sample] section".into()))?;
    section.validate()?;
    let (sampler, cdf) = target_law(section, cfg)?;
    let mut draws = draw(RngStream::new(settings.seed, section.stream_id), section.n, sampler)?;
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let ks = ks_distance(&mut draws, &cdf);
    let hist = histogram(&draws, section.bins, &cdf);
    let paths_written = write_paths(section, cfg, settings.seed)?;
    let summary = SampleSummary {
        target: section.target,
        n: section.n,
        ks_distance: ks,
        mean,
        std_error: (var / n).sqrt(),
        paths_written,
    };

    match settings.format {
        Format::Json => emit(
            settings.out.as_deref(),
            &json_document(&SampleReport {
                summary,
                histogram: hist,
            })?,
        ),
        Format::Csv => {
            let mut t = CsvTable::new(&["bin_lo", "bin_hi", "count", "frequency", "model_probability"]);
            for b in &hist {
                t.row([
                    real(b.bin_lo),
                    real(b.bin_hi),
                    b.count.to_string(),
                    real(b.frequency),
                    real(b.model_probability),
                ]);
            }
            emit(settings.out.as_deref(), &t.finish())?;
            let summary_text = json_document(&summary)?;
            match &settings.out {
                Some(out) => {
                    let mut name = out.clone().into_os_string();
                    name.push(".summary.json");
                    write_file(&PathBuf::from(name), summary_text.as_bytes())
                }
                None => {
                    eprint!("{summary_text}");
                    Ok(())
                }
            }
        }
    }
}
