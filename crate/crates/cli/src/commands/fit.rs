use anyhow::Result;
use rand::Rng;
use serde::Serialize;
use zani_core::diagnostics::{elpd_is, posterior_summary, ParameterSummary, QUANTILE_METHOD};
use zani_core::distributions::Model;
use zani_core::inference::{fit_zanidm_with_rng, fit_zanim_with_rng, ChainDraws, McmcConfig, PriorSpec};
use zani_core::rng::rng_from_seed;
use zani_core::CountDataset;

use crate::cli::FitArgs;
use crate::config::{ModelKind, RunConfig};
use crate::io::{fmt, read_dataset, write_atomic, Metadata, Table};
use crate::Context;

/// Fits `kind` with `cfg.fix_zeta_zero` forced by the model kind.
pub fn fit_model<R: Rng + ?Sized>(
    kind: ModelKind,
    data: &CountDataset,
    priors: &PriorSpec,
    cfg: &McmcConfig,
    rng: &mut R,
) -> zani_core::Result<ChainDraws> {
    let mut cfg = cfg.clone();
    cfg.fix_zeta_zero = kind.fixes_zeta();
    match kind.base() {
        Model::Zanim => fit_zanim_with_rng(data, priors, &cfg, rng),
        Model::Zanidm => fit_zanidm_with_rng(data, priors, &cfg, rng),
    }
}

/// One row of the summary report, keyed by the table column names.
#[derive(Debug, Serialize)]
pub struct SummaryRow {
    #[serde(rename = "Parameter")]
    pub parameter: String,
    #[serde(rename = "Mean")]
    pub mean: f64,
    #[serde(rename = "95% LCI")]
    pub lower: f64,
    #[serde(rename = "95% UCI")]
    pub upper: f64,
    #[serde(rename = "ESS ratio")]
    pub ess_ratio: f64,
}

impl From<&ParameterSummary> for SummaryRow {
    fn from(s: &ParameterSummary) -> Self {
        Self {
            parameter: s.parameter.clone(),
            mean: s.mean,
            lower: s.lower,
            upper: s.upper,
            ess_ratio: s.ess_ratio,
        }
    }
}

pub const SUMMARY_COLUMNS: [&str; 5] = ["Parameter", "Mean", "95% LCI", "95% UCI", "ESS ratio"];

#[derive(Debug, Serialize)]
struct ElpdSection {
    elpd: f64,
    se: f64,
    excluded_draws: usize,
}

#[derive(Debug, Serialize)]
struct SummaryReport<'a> {
    metadata: &'a Metadata,
    quantile_method: &'static str,
    config: &'a RunConfig,
    observations: usize,
    draws: usize,
    summary: Vec<SummaryRow>,
    acceptance: Option<&'a [f64]>,
    elpd: Option<ElpdSection>,
}

/// Writes `draws.csv`, `loglik.csv` and `summary.json` to the output directory.
pub fn run(ctx: &Context, args: &FitArgs) -> Result<()> {
    let cfg = RunConfig::resolve(&ctx.file, args, ctx.seed)?;
    let data = read_dataset(&cfg.data)?;
    let priors = cfg.priors(data.dim())?;
    let mcmc = cfg.mcmc();
    let meta = Metadata::new(cfg.seed, &cfg)?;
    let mut rng = rng_from_seed(cfg.seed);
    let draws = fit_model(cfg.model, &data, &priors, &mcmc, &mut rng)?;
    let summary = posterior_summary(&draws)?;
    let elpd = match elpd_is(&draws.loglik) {
        Ok(r) => Some(ElpdSection {
            elpd: r.elpd,
            se: r.se,
            excluded_draws: r.excluded_draws.iter().sum(),
        }),
        Err(e) => {
            log::warn!("ELPD not available: {e}");
            None
        }
    };

    let mut header = vec!["iteration".to_string()];
    header.extend(draws.columns.iter().cloned());
    let mut t = Table::new(Some(&meta), &header)?;
    for (m, row) in draws.draws.iter().enumerate() {
        let iteration = mcmc.burn_in + (m + 1) * mcmc.thin;
        t.row(std::iter::once(iteration.to_string()).chain(row.iter().map(|&v| fmt(v))))?;
    }
    t.write(&ctx.out.join("draws.csv"))?;

    let header: Vec<String> = (1..=data.len()).map(|i| format!("obs_{i}")).collect();
    let mut t = Table::new(Some(&meta), &header)?;
    for row in &draws.loglik {
        t.row(row.iter().map(|&v| fmt(v)))?;
    }
    t.write(&ctx.out.join("loglik.csv"))?;

    let report = SummaryReport {
        metadata: &meta,
        quantile_method: QUANTILE_METHOD,
        config: &cfg,
        observations: data.len(),
        draws: draws.len(),
        summary: summary.iter().map(SummaryRow::from).collect(),
        acceptance: draws.acceptance.as_deref(),
        elpd,
    };
    let mut json = serde_json::to_vec_pretty(&report)?;
    json.push(b'\n');
    write_atomic(&ctx.out.join("summary.json"), &json)?;

    println!("{:<10} {:>10} {:>10} {:>10} {:>10}", SUMMARY_COLUMNS[0], SUMMARY_COLUMNS[1], SUMMARY_COLUMNS[2], SUMMARY_COLUMNS[3], SUMMARY_COLUMNS[4]);
    for s in &summary {
        println!(
            "{:<10} {:>10.4} {:>10.4} {:>10.4} {:>10.3}",
            s.parameter, s.mean, s.lower, s.upper, s.ess_ratio
        );
    }
    log::info!("wrote draws.csv, loglik.csv and summary.json to {}", ctx.out.display());
    Ok(())
}
