use crate::counts::CountVector;
use crate::error::{Error, Result};
use crate::mixture::{consistent_components, ComponentDescriptor, IndexSet, LogZetaFactors};
use crate::numeric::{ln_gamma, log_multinomial_coeff, LogSumExp};

use super::params::{ModelParams, ZanidmParams, ZanimParams};

/// Renormalizing masses at or below this are treated as an empty component.
pub(crate) const MIN_RENORM: f64 = 1e-14;

fn check_dim(y: &CountVector, d: usize) -> Result<()> {
    if y.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: y.dim(),
        });
    }
    Ok(())
}

/// Sums `log η_c + log f_c(y)` over the consistent components, where `f_c` is
/// supplied for the full and reduced components by `kept_term` (given the zero
/// set `K`, with `K = ∅` for the full component).
fn mixture_log_pmf<F>(y: &CountVector, zeta: &[f64], mut kept_term: F) -> f64
where
    F: FnMut(IndexSet) -> f64,
{
    if y.trials() == 0 {
        // Ω⁰ with N = 0 is the single point 0_d, reached by every component.
        return 0.0;
    }
    let d = y.dim();
    let lz = LogZetaFactors::new(zeta);
    let mut acc = LogSumExp::new();
    for c in consistent_components(y) {
        let ln_eta = lz.log_weight(c.zero_set(d));
        if ln_eta == f64::NEG_INFINITY {
            continue;
        }
        let term = match c {
            ComponentDescriptor::Full => kept_term(IndexSet::EMPTY),
            ComponentDescriptor::Reduced(k) => kept_term(k),
            ComponentDescriptor::NInflated(_) | ComponentDescriptor::AllZero => 0.0,
        };
        acc.add(ln_eta + term);
    }
    acc.value()
}

/// Log-probability of `y` under ZANIM.
pub fn zanim_log_pmf(y: &CountVector, p: &ZanimParams) -> Result<f64> {
    check_dim(y, p.dim())?;
    let theta = p.theta();
    let n = y.trials() as f64;
    let mut common = log_multinomial_coeff(y.counts());
    for (&yj, &tj) in y.counts().iter().zip(theta) {
        if yj > 0 {
            common += yj as f64 * tj.ln();
        }
    }
    Ok(mixture_log_pmf(y, p.zeta(), |k| {
        if k.is_empty() {
            return common;
        }
        let kept: f64 = (0..theta.len())
            .filter(|&j| !k.contains(j))
            .map(|j| theta[j])
            .sum();
        if kept <= MIN_RENORM {
            f64::NEG_INFINITY
        } else {
            common - n * kept.ln()
        }
    }))
}

/// Log-probability of `y` under ZANIDM.
pub fn zanidm_log_pmf(y: &CountVector, p: &ZanidmParams) -> Result<f64> {
    check_dim(y, p.dim())?;
    let alpha = p.alpha();
    let n = y.trials() as f64;
    let mut common = ln_gamma(n + 1.0);
    for (&yj, &aj) in y.counts().iter().zip(alpha) {
        if yj > 0 {
            let yj = yj as f64;
            common += ln_gamma(yj + aj) - ln_gamma(aj) - ln_gamma(yj + 1.0);
        }
    }
    Ok(mixture_log_pmf(y, p.zeta(), |k| {
        let a: f64 = (0..alpha.len())
            .filter(|&j| !k.contains(j))
            .map(|j| alpha[j])
            .sum();
        common + ln_gamma(a) - ln_gamma(n + a)
    }))
}

pub fn log_pmf(y: &CountVector, p: &ModelParams) -> Result<f64> {
    match p {
        ModelParams::Zanim(p) => zanim_log_pmf(y, p),
        ModelParams::Zanidm(p) => zanidm_log_pmf(y, p),
    }
}

/// `exp(log_pmf)`.
pub fn pmf(y: &CountVector, p: &ModelParams) -> Result<f64> {
    log_pmf(y, p).map(f64::exp)
}
