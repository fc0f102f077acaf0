//! Bayesian inference by MCMC: the Bernoulli-gamma Gibbs sampler for ZANIM and
//! the collapsed Gibbs sampler for ZANIDM with three concentration updates.

mod alpha;
mod config;
mod draws;
mod priors;
mod ptn;
mod state;
mod zanidm;
mod zanim;

pub use alpha::{
    log_target_alpha, log_target_beta, slice_step, update_alpha_da_ptn, update_alpha_mh_rw,
    update_alpha_slice, SliceStep,
};
pub use config::{AlphaSampler, McmcConfig};
pub use draws::ChainDraws;
pub use priors::{
    match_gamma_prior, AlphaPrior, BetaPrior, GammaPrior, LogNormalPrior, PriorSpec,
};
pub use ptn::{sample_ptn, truncated_normal, PtnSampler};
pub use state::{LatentLambda, LatentState};
pub use zanidm::{fit_zanidm, fit_zanidm_with_rng, ZanidmSampler};
pub use zanim::{fit_zanim, fit_zanim_with_rng, ZanimSampler};
