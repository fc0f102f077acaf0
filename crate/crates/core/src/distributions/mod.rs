//! ZANIM and ZANIDM distributions: PMFs, exact samplers, marginals, moments
//! and the ZANIM moment generating function.

mod marginal;
mod mgf;
mod moments;
mod params;
mod pmf;
mod sample;

pub use marginal::{
    beta_binomial_log_pmf, binomial_log_pmf, ln_binomial_coeff, marginal_log_pmf,
    marginal_log_pmf_all,
};
pub use mgf::{zanim_log_mgf, zanim_mgf};
pub use moments::{moments, zanidm_moments, zanim_moments, MomentsReport, MOMENTS_WARN_DIM};
pub use params::{Model, ModelParams, ZanidmParams, ZanimParams};
pub use pmf::{log_pmf, pmf, zanidm_log_pmf, zanim_log_pmf};
pub use sample::{sample, zanidm_sample, zanim_sample};
