use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context as _, Result};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use zani_core::diagnostics::{
    elpd_is, observed_frequencies, posterior_predictive_bands, posterior_summary, recovery_metrics,
    ParameterSummary, PredictiveBand,
};
use zani_core::distributions::{sample, ModelParams, ZanidmParams, ZanimParams};
use zani_core::inference::{AlphaSampler, McmcConfig, PriorSpec};
use zani_core::rng::stream_rng;
use zani_core::{CountDataset, CountVector};

use crate::cli::{Design, Scale, StudyArgs, StudyName};
use crate::commands::fit::{fit_model, SUMMARY_COLUMNS};
use crate::config::ModelKind;
use crate::io::{dataset_csv, fmt, fmt_opt, write_atomic, Metadata, Table};
use crate::{Context, StudyFailure};

/// Largest tolerated fraction of failed runs.
pub const MAX_FAILURE_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Chain {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
}

impl Chain {
    fn mcmc(self, seed: u64) -> McmcConfig {
        McmcConfig::new(self.iterations, self.burn_in, self.thin, seed)
    }

    fn with_overrides(self, args: &StudyArgs) -> Self {
        Self {
            iterations: args.iterations.unwrap_or(self.iterations),
            burn_in: args.burn_in.unwrap_or(self.burn_in),
            thin: args.thin.unwrap_or(self.thin),
        }
    }
}

pub fn run(ctx: &Context, args: &StudyArgs) -> Result<()> {
    if args.scale == Scale::Paper {
        if !args.confirm {
            bail!("paper scale takes many CPU hours; rerun with --confirm to proceed");
        }
        log::warn!("running at paper scale; expect a very long runtime");
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.jobs)
        .build()
        .context("starting worker threads")?;
    match args.name {
        StudyName::SamplerComparison => pool.install(|| sampler_comparison(ctx, args)),
        StudyName::DgpRecovery => pool.install(|| dgp_recovery(ctx, args)),
    }
}

fn check_failures(failed: usize, total: usize) -> Result<()> {
    if failed as f64 > MAX_FAILURE_FRACTION * total as f64 {
        return Err(StudyFailure { failed, total }.into());
    }
    if failed > 0 {
        log::warn!("{failed} of {total} runs failed; see the failures table");
    }
    Ok(())
}

fn write_failures(path: &Path, meta: &Metadata, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut t = Table::new(Some(meta), header)?;
    for r in rows {
        t.row(r)?;
    }
    t.write(path)
}

// ---------------------------------------------------------------------------
// Sampler comparison
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct SamplerDesign {
    pub dim: usize,
    pub sample_sizes: Vec<usize>,
    pub trials: Vec<u64>,
    pub replicates: usize,
    pub chain: Chain,
    pub zeta_range: [f64; 2],
    pub log_alpha_range: [f64; 2],
}

impl SamplerDesign {
    pub fn desk() -> Self {
        Self {
            dim: 5,
            sample_sizes: vec![50, 200],
            trials: vec![200],
            replicates: 10,
            chain: Chain { iterations: 6_000, burn_in: 1_000, thin: 5 },
            zeta_range: [0.0, 0.5],
            log_alpha_range: [-2.3, 2.3],
        }
    }

    pub fn paper() -> Self {
        Self {
            dim: 20,
            sample_sizes: vec![50, 200, 500],
            trials: vec![50, 200, 500],
            replicates: 50,
            chain: Chain { iterations: 51_000, burn_in: 1_000, thin: 50 },
            zeta_range: [0.0, 0.5],
            log_alpha_range: [-2.3, 2.3],
        }
    }
}

pub const METHODS: [&str; 3] = ["da_ptn", "mh_rw", "slice"];

fn method_setup(method: usize, d: usize) -> zani_core::Result<(AlphaSampler, PriorSpec)> {
    Ok(match method {
        0 => (AlphaSampler::DaPtn, PriorSpec::defaults_gamma_alpha(d)?),
        1 => (AlphaSampler::mh_rw_default(), PriorSpec::defaults(d)),
        _ => (AlphaSampler::slice_default(), PriorSpec::defaults(d)),
    })
}

/// Random stream index for a `(cell, replicate, purpose)` triple.
fn stream_id(cell: usize, replicate: usize, purpose: usize) -> u64 {
    ((cell as u64 * 10_000 + replicate as u64) << 4) | purpose as u64
}

/// True parameters and data of one replicate.
pub fn sampler_replicate(
    design: &SamplerDesign,
    n: usize,
    trials: u64,
    seed: u64,
    stream: u64,
) -> (ZanidmParams, CountDataset) {
    let mut rng = stream_rng(seed, stream);
    let d = design.dim;
    let [z0, z1] = design.zeta_range;
    let [a0, a1] = design.log_alpha_range;
    let zeta: Vec<f64> = (0..d).map(|_| rng.random_range(z0..z1)).collect();
    let alpha: Vec<f64> = (0..d).map(|_| rng.random_range(a0..a1).exp()).collect();
    let p = ZanidmParams::new(alpha, zeta).expect("drawn parameters are valid");
    let pm: ModelParams = p.clone().into();
    let rows: Vec<CountVector> = (0..n).map(|_| sample(trials, &pm, &mut rng)).collect();
    let data = CountDataset::new(rows).expect("simulated rows are consistent");
    (p, data)
}

struct SamplerTask {
    cell: usize,
    n: usize,
    trials: u64,
    replicate: usize,
    method: usize,
}

type SamplerOutcome = std::result::Result<(Vec<ParameterSummary>, Vec<f64>), String>;

fn sampler_comparison(ctx: &Context, args: &StudyArgs) -> Result<()> {
    let mut design = match args.scale {
        Scale::Desk => SamplerDesign::desk(),
        Scale::Paper => SamplerDesign::paper(),
    };
    design.chain = design.chain.with_overrides(args);
    if let Some(r) = args.replicates {
        design.replicates = r;
    }
    design.chain.mcmc(0).validate()?;
    let seed = ctx.seed();
    let meta = Metadata::new(seed, &("sampler-comparison", &design))?;

    let mut tasks = Vec::new();
    let mut cell = 0;
    for &n in &design.sample_sizes {
        for &trials in &design.trials {
            for replicate in 0..design.replicates {
                for method in 0..METHODS.len() {
                    tasks.push(SamplerTask { cell, n, trials, replicate, method });
                }
            }
            cell += 1;
        }
    }
    let total = tasks.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let outcomes: Vec<SamplerOutcome> = tasks
        .par_iter()
        .map(|t| {
            let start = Instant::now();
            let (truth, data) =
                sampler_replicate(&design, t.n, t.trials, seed, stream_id(t.cell, t.replicate, 0));
            let outcome = (|| -> zani_core::Result<_> {
                let (sampler, priors) = method_setup(t.method, design.dim)?;
                let mut cfg = design.chain.mcmc(seed);
                cfg.alpha_sampler = sampler;
                cfg.store_loglik = false;
                let mut rng = stream_rng(seed, stream_id(t.cell, t.replicate, 1 + t.method));
                let draws = fit_model(ModelKind::Zanidm, &data, &priors, &cfg, &mut rng)?;
                let summary = posterior_summary(&draws)?;
                let mut truths = truth.alpha().to_vec();
                truths.extend_from_slice(truth.zeta());
                Ok((summary, truths))
            })()
            .map_err(|e| e.to_string());
            let k = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
            log::info!(
                "[{k}/{total}] n={} N={} replicate {} {}: {} ({:.1}s)",
                t.n,
                t.trials,
                t.replicate + 1,
                METHODS[t.method],
                if outcome.is_ok() { "ok" } else { "failed" },
                start.elapsed().as_secs_f64()
            );
            outcome
        })
        .collect();

    let mut reps = Table::new(
        Some(&meta),
        &["n", "N", "replicate", "method", "parameter", "truth", "mean", "lower", "upper", "ess_ratio"],
    )?;
    let mut failures = Vec::new();
    for (t, o) in tasks.iter().zip(&outcomes) {
        match o {
            Ok((summary, truths)) => {
                for (s, truth) in summary.iter().zip(truths) {
                    reps.row([
                        t.n.to_string(),
                        t.trials.to_string(),
                        (t.replicate + 1).to_string(),
                        METHODS[t.method].to_string(),
                        s.parameter.clone(),
                        fmt(*truth),
                        fmt(s.mean),
                        fmt(s.lower),
                        fmt(s.upper),
                        fmt(s.ess_ratio),
                    ])?;
                }
            }
            Err(e) => failures.push(vec![
                t.n.to_string(),
                t.trials.to_string(),
                (t.replicate + 1).to_string(),
                METHODS[t.method].to_string(),
                e.clone(),
            ]),
        }
    }

    let mut metrics = Table::new(
        Some(&meta),
        &["n", "N", "method", "block", "replicates", "ess_ratio", "bias", "coverage_95"],
    )?;
    let mut cell = 0;
    for &n in &design.sample_sizes {
        for &trials in &design.trials {
            for (m, method) in METHODS.iter().enumerate() {
                let (summaries, truths): (Vec<_>, Vec<_>) = tasks
                    .iter()
                    .zip(&outcomes)
                    .filter(|(t, _)| t.cell == cell && t.method == m)
                    .filter_map(|(_, o)| o.as_ref().ok().cloned())
                    .unzip();
                if summaries.is_empty() {
                    continue;
                }
                let report = recovery_metrics(&summaries, &truths)?;
                for block in ["alpha", "zeta"] {
                    let b = report.block(block);
                    metrics.row([
                        n.to_string(),
                        trials.to_string(),
                        method.to_string(),
                        block.to_string(),
                        summaries.len().to_string(),
                        fmt(b.overall_ess_ratio()),
                        fmt_opt(b.overall_bias()),
                        fmt(b.overall_coverage()),
                    ])?;
                }
            }
            cell += 1;
        }
    }

    reps.write(&ctx.out.join("sampler_comparison_replicates.csv"))?;
    metrics.write(&ctx.out.join("sampler_comparison_metrics.csv"))?;
    write_failures(
        &ctx.out.join("sampler_comparison_failures.csv"),
        &meta,
        &["n", "N", "replicate", "method", "error"],
        &failures,
    )?;
    log::info!("wrote sampler comparison tables to {}", ctx.out.display());
    check_failures(failures.len(), total)
}

// ---------------------------------------------------------------------------
// Data-generating process recovery
// ---------------------------------------------------------------------------

pub const ZETA: [f64; 3] = [0.05, 0.15, 0.10];
pub const MODELS: [ModelKind; 4] =
    [ModelKind::Zanim, ModelKind::Zanidm, ModelKind::Dm, ModelKind::Multinomial];

/// The ZANIM and ZANIDM generating parameters of a design.
pub fn dgp_params(design: Design) -> [(ModelKind, ModelParams); 2] {
    let (theta, alpha) = match design {
        Design::Standard => (vec![0.05, 0.70, 0.25], vec![2.0, 28.0, 10.0]),
        Design::Balanced => (vec![1.0 / 3.0; 3], vec![1.0; 3]),
    };
    [
        (
            ModelKind::Zanim,
            ZanimParams::new(theta, ZETA.to_vec()).expect("valid design").into(),
        ),
        (
            ModelKind::Zanidm,
            ZanidmParams::new(alpha, ZETA.to_vec()).expect("valid design").into(),
        ),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct DgpDesign {
    pub design: &'static str,
    pub n: usize,
    pub trials: u64,
    /// Chain for ZANIM and the multinomial baseline.
    pub zanim_chain: Chain,
    /// Chain for ZANIDM and the Dirichlet-multinomial baseline.
    pub zanidm_chain: Chain,
}

impl DgpDesign {
    pub fn new(scale: Scale, design: Design) -> Self {
        let short = Chain { iterations: 11_000, burn_in: 1_000, thin: 10 };
        let long = match scale {
            Scale::Desk => short,
            Scale::Paper => Chain { iterations: 110_000, burn_in: 10_000, thin: 100 },
        };
        Self {
            design: match design {
                Design::Standard => "standard",
                Design::Balanced => "balanced",
            },
            n: 500,
            trials: 30,
            zanim_chain: short,
            zanidm_chain: long,
        }
    }
}

pub fn dgp_dataset(params: &ModelParams, n: usize, trials: u64, seed: u64, dgp: usize) -> CountDataset {
    let mut rng = stream_rng(seed, 100 + dgp as u64);
    let rows: Vec<CountVector> = (0..n).map(|_| sample(trials, params, &mut rng)).collect();
    CountDataset::new(rows).expect("simulated rows are consistent")
}

struct CellResult {
    summary: Vec<ParameterSummary>,
    elpd: (f64, f64, usize),
    bands: Option<Vec<PredictiveBand>>,
}

fn dgp_recovery(ctx: &Context, args: &StudyArgs) -> Result<()> {
    let mut design = DgpDesign::new(args.scale, args.design);
    design.zanim_chain = design.zanim_chain.with_overrides(args);
    design.zanidm_chain = design.zanidm_chain.with_overrides(args);
    if args.replicates.is_some() {
        log::warn!("--replicates does not apply to dgp-recovery");
    }
    design.zanim_chain.mcmc(0).validate()?;
    design.zanidm_chain.mcmc(0).validate()?;
    let seed = ctx.seed();
    let meta = Metadata::new(seed, &("dgp-recovery", &design))?;
    let dgps = dgp_params(args.design);
    let datasets: Vec<CountDataset> = dgps
        .iter()
        .enumerate()
        .map(|(k, (_, p))| dgp_dataset(p, design.n, design.trials, seed, k))
        .collect();
    for ((kind, _), data) in dgps.iter().zip(&datasets) {
        let rows: Vec<CountVector> = data.rows().to_vec();
        write_atomic(
            &ctx.out.join(format!("dgp_recovery_{}_data.csv", kind.name())),
            &dataset_csv(&rows)?,
        )?;
    }

    let cells: Vec<(usize, usize)> = (0..dgps.len())
        .flat_map(|k| (0..MODELS.len()).map(move |m| (k, m)))
        .collect();
    let total = cells.len();
    let results: Vec<std::result::Result<CellResult, String>> = cells
        .par_iter()
        .map(|&(k, m)| {
            let start = Instant::now();
            let model = MODELS[m];
            let data = &datasets[k];
            let out = (|| -> zani_core::Result<CellResult> {
                let chain = match model.base() {
                    zani_core::distributions::Model::Zanim => design.zanim_chain,
                    zani_core::distributions::Model::Zanidm => design.zanidm_chain,
                };
                let cfg = chain.mcmc(seed);
                let priors = PriorSpec::defaults_gamma_alpha(data.dim())?;
                let stream = 200 + (k * MODELS.len() + m) as u64;
                let mut rng = stream_rng(seed, stream);
                let draws = fit_model(model, data, &priors, &cfg, &mut rng)?;
                let summary = posterior_summary(&draws)?;
                let e = elpd_is(&draws.loglik)?;
                let bands = if model.fixes_zeta() {
                    None
                } else {
                    let trials: Vec<u64> = vec![design.trials; data.len()];
                    let mut rng = stream_rng(seed, stream + 100);
                    Some(posterior_predictive_bands(&draws, &trials, design.trials, &mut rng)?)
                };
                Ok(CellResult {
                    summary,
                    elpd: (e.elpd, e.se, e.excluded_draws.iter().sum()),
                    bands,
                })
            })()
            .map_err(|e| e.to_string());
            log::info!(
                "{} data, {} fit: {} ({:.1}s)",
                dgps[k].0.name(),
                model.name(),
                if out.is_ok() { "ok" } else { "failed" },
                start.elapsed().as_secs_f64()
            );
            out
        })
        .collect();

    let mut header = vec!["dgp", "model"];
    header.extend(SUMMARY_COLUMNS);
    let mut summary = Table::new(Some(&meta), &header)?;
    let mut elpd = Table::new(Some(&meta), &["dgp", "model", "elpd", "se", "excluded_draws"])?;
    let mut bands = Table::new(
        Some(&meta),
        &["dgp", "model", "category", "k", "observed", "mean", "lower", "upper"],
    )?;
    let mut failures = Vec::new();
    for (&(k, m), r) in cells.iter().zip(&results) {
        let dgp = dgps[k].0.name();
        let model = MODELS[m].name();
        match r {
            Ok(c) => {
                for s in &c.summary {
                    summary.row([
                        dgp.to_string(),
                        model.to_string(),
                        s.parameter.clone(),
                        fmt(s.mean),
                        fmt(s.lower),
                        fmt(s.upper),
                        fmt(s.ess_ratio),
                    ])?;
                }
                elpd.row([
                    dgp.to_string(),
                    model.to_string(),
                    fmt(c.elpd.0),
                    fmt(c.elpd.1),
                    c.elpd.2.to_string(),
                ])?;
                if let Some(b) = &c.bands {
                    let observed = observed_frequencies(&datasets[k], design.trials);
                    for (band, (_, _, obs)) in b.iter().zip(observed) {
                        bands.row([
                            dgp.to_string(),
                            model.to_string(),
                            band.category.to_string(),
                            band.k.to_string(),
                            fmt(obs),
                            fmt(band.mean),
                            fmt(band.lower),
                            fmt(band.upper),
                        ])?;
                    }
                }
            }
            Err(e) => failures.push(vec![dgp.to_string(), model.to_string(), e.clone()]),
        }
    }
    summary.write(&ctx.out.join("dgp_recovery_summary.csv"))?;
    elpd.write(&ctx.out.join("dgp_recovery_elpd.csv"))?;
    bands.write(&ctx.out.join("dgp_recovery_bands.csv"))?;
    write_failures(
        &ctx.out.join("dgp_recovery_failures.csv"),
        &meta,
        &["dgp", "model", "error"],
        &failures,
    )?;
    log::info!("wrote dgp recovery tables to {}", ctx.out.display());
    check_failures(failures.len(), total)
}
