use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use zani_core::distributions::Model;
use zani_core::inference::{
    match_gamma_prior, AlphaPrior, AlphaSampler, BetaPrior, GammaPrior, LogNormalPrior,
    McmcConfig, PriorSpec,
};

use crate::cli::FitArgs;

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_OUT_DIR: &str = "zani-out";
pub const OUT_DIR_ENV: &str = "ZANI_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Zanim,
    Zanidm,
    /// ZANIM with every zeta fixed at zero.
    Multinomial,
    /// ZANIDM with every zeta fixed at zero.
    Dm,
}

impl ModelKind {
    pub fn base(self) -> Model {
        match self {
            ModelKind::Zanim | ModelKind::Multinomial => Model::Zanim,
            ModelKind::Zanidm | ModelKind::Dm => Model::Zanidm,
        }
    }

    pub fn fixes_zeta(self) -> bool {
        matches!(self, ModelKind::Multinomial | ModelKind::Dm)
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Zanim => "zanim",
            ModelKind::Zanidm => "zanidm",
            ModelKind::Multinomial => "multinomial",
            ModelKind::Dm => "dm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    DaPtn,
    MhRw,
    Slice,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<ModelKind>,
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub mcmc: McmcSection,
    pub priors: PriorSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcSection {
    pub iterations: Option<usize>,
    pub burn_in: Option<usize>,
    pub thin: Option<usize>,
    pub seed: Option<u64>,
    pub alpha_sampler: Option<SamplerKind>,
    pub mh_step: Option<f64>,
    pub mh_adapt: Option<bool>,
    pub slice_width: Option<f64>,
    pub slice_max_steps: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorSection {
    /// Beta(a, b) on every zeta.
    pub zeta_beta: Option<[f64; 2]>,
    /// Gamma(shape, rate) on every ZANIM weight.
    pub lambda_gamma: Option<[f64; 2]>,
    /// Gamma(shape, rate) on every alpha for DA-PTN; matched to the
    /// log-normal settings when absent.
    pub alpha_gamma: Option<[f64; 2]>,
    pub alpha_log_mean: Option<f64>,
    pub alpha_log_variance: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Fully resolved fit configuration; hashed into output metadata.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub model: ModelKind,
    pub data: PathBuf,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub alpha_sampler: SamplerKind,
    pub mh_step: f64,
    pub mh_adapt: bool,
    pub slice_width: f64,
    pub slice_max_steps: usize,
    pub zeta_beta: [f64; 2],
    pub lambda_gamma: [f64; 2],
    pub alpha_gamma: Option<[f64; 2]>,
    pub alpha_log_mean: f64,
    pub alpha_log_variance: f64,
}

impl RunConfig {
    pub fn resolve(file: &FileConfig, args: &FitArgs, seed: Option<u64>) -> Result<Self> {
        let m = &file.mcmc;
        let p = &file.priors;
        let model = args
            .model
            .or(file.model)
            .context("no model given (use --model or `model` in the config)")?;
        let data = args
            .data
            .clone()
            .or_else(|| file.data.clone())
            .context("no dataset given (use --data or `data` in the config)")?;
        let cfg = Self {
            model,
            data,
            iterations: args.iterations.or(m.iterations).unwrap_or(11_000),
            burn_in: args.burn_in.or(m.burn_in).unwrap_or(1_000),
            thin: args.thin.or(m.thin).unwrap_or(10),
            seed: seed.or(m.seed).unwrap_or(DEFAULT_SEED),
            alpha_sampler: args.alpha_sampler.or(m.alpha_sampler).unwrap_or(SamplerKind::DaPtn),
            mh_step: args.mh_step.or(m.mh_step).unwrap_or(AlphaSampler::DEFAULT_MH_STEP),
            mh_adapt: args.mh_adapt || m.mh_adapt.unwrap_or(false),
            slice_width: args
                .slice_width
                .or(m.slice_width)
                .unwrap_or(AlphaSampler::DEFAULT_SLICE_WIDTH),
            slice_max_steps: args
                .slice_max_steps
                .or(m.slice_max_steps)
                .unwrap_or(AlphaSampler::DEFAULT_SLICE_MAX_STEPS),
            zeta_beta: p.zeta_beta.unwrap_or([1.0, 1.0]),
            lambda_gamma: p.lambda_gamma.unwrap_or([0.1, 0.1]),
            alpha_gamma: p.alpha_gamma,
            alpha_log_mean: p.alpha_log_mean.unwrap_or(0.0),
            alpha_log_variance: p.alpha_log_variance.unwrap_or(5.0),
        };
        cfg.mcmc().validate()?;
        if cfg.alpha_gamma.is_some() && cfg.alpha_sampler != SamplerKind::DaPtn {
            bail!("priors.alpha_gamma applies to the da-ptn sampler only");
        }
        Ok(cfg)
    }

    pub fn mcmc(&self) -> McmcConfig {
        let mut cfg = McmcConfig::new(self.iterations, self.burn_in, self.thin, self.seed);
        cfg.alpha_sampler = match self.alpha_sampler {
            SamplerKind::DaPtn => AlphaSampler::DaPtn,
            SamplerKind::MhRw => AlphaSampler::MhRw {
                step: self.mh_step,
                adapt: self.mh_adapt,
            },
            SamplerKind::Slice => AlphaSampler::Slice {
                width: self.slice_width,
                max_steps: self.slice_max_steps,
            },
        };
        cfg.fix_zeta_zero = self.model.fixes_zeta();
        cfg
    }

    pub fn priors(&self, d: usize) -> Result<PriorSpec> {
        let alpha = match self.alpha_sampler {
            SamplerKind::DaPtn => {
                let g = match self.alpha_gamma {
                    Some([shape, rate]) => GammaPrior { shape, rate },
                    None => {
                        let g = match_gamma_prior(self.alpha_log_variance)?;
                        GammaPrior {
                            shape: g.shape,
                            rate: g.rate * (-self.alpha_log_mean).exp(),
                        }
                    }
                };
                AlphaPrior::Gamma(vec![g; d])
            }
            SamplerKind::MhRw | SamplerKind::Slice => AlphaPrior::LogNormal(vec![
                LogNormalPrior {
                    mean: self.alpha_log_mean,
                    variance: self.alpha_log_variance,
                };
                d
            ]),
        };
        let priors = PriorSpec {
            zeta_beta: vec![BetaPrior { a: self.zeta_beta[0], b: self.zeta_beta[1] }; d],
            zanim_lambda_gamma: vec![
                GammaPrior {
                    shape: self.lambda_gamma[0],
                    rate: self.lambda_gamma[1],
                };
                d
            ],
            zanidm_alpha: alpha,
        };
        priors.validate(d)?;
        Ok(priors)
    }
}

/// Output directory: flag, then config file, then environment, then default.
pub fn resolve_out_dir(flag: Option<&Path>, file: &FileConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| file.out.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}
