//! Updates for a ZANIDM concentration `α_j` given its conditional sufficient
//! statistics: `t = #{i : z_ij = 1}` and `sum_log_lambda = Σ_{λ_ij > 0} ln λ_ij`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numeric::ln_gamma;
use crate::sampling::{gamma_variate, ln_beta_variate, ln_gamma_variate};

use super::priors::{GammaPrior, LogNormalPrior};
use super::ptn::PtnSampler;

/// Unnormalized log full conditional of `α` under a gamma prior.
pub fn log_target_alpha(alpha: f64, t: u64, sum_log_lambda: f64, prior: &GammaPrior) -> f64 {
    if alpha <= 0.0 {
        return f64::NEG_INFINITY;
    }
    (prior.shape - 1.0) * alpha.ln() - t as f64 * ln_gamma(alpha) - alpha * (prior.rate - sum_log_lambda)
}

/// Unnormalized log full conditional of `β = ln α` under a normal prior.
pub fn log_target_beta(beta: f64, t: u64, sum_log_lambda: f64, prior: &LogNormalPrior) -> f64 {
    let alpha = beta.exp();
    if alpha == 0.0 || !alpha.is_finite() {
        return f64::NEG_INFINITY;
    }
    -(t as f64) * ln_gamma(alpha) + alpha * sum_log_lambda + beta * (prior.mean - 0.5 * beta) / prior.variance
}

/// `ln C(α) = (tα − ½) ln(tα) − ln Γ(tα) − tα`.
fn ln_c(alpha: f64, t: f64) -> f64 {
    let x = t * alpha;
    (x - 0.5) * x.ln() - ln_gamma(x) - x
}

/// One DA-PTN transition. Returns the new value and whether the PTN proposal
/// was accepted. With `t = 0` the conditional is the prior, which is sampled
/// directly.
pub fn update_alpha_da_ptn<R: Rng + ?Sized>(
    t: u64,
    sum_log_lambda: f64,
    prior: &GammaPrior,
    alpha: f64,
    rng: &mut R,
) -> Result<(f64, bool)> {
    if t == 0 {
        return Ok((gamma_variate(prior.shape, prior.rate, rng), true));
    }
    let tf = t as f64;
    let mut sum_log_rho = 0.0;
    for k in 2..=t {
        let kf = k as f64;
        sum_log_rho += ln_beta_variate(alpha + (kf - 1.0) / tf, (tf - kf + 1.0) / tf, rng);
    }
    let ln_w = ln_gamma_variate(tf * alpha, rng) - (tf * alpha * alpha).ln();
    let p_star = tf + prior.shape;
    let a_star = tf * ln_w.exp();
    let b_star = tf * ln_w + 2.0 * tf + sum_log_lambda + sum_log_rho - prior.rate;
    if !(b_star.is_finite() && a_star > 0.0 && a_star.is_finite()) {
        return Err(Error::Numerical {
            iteration: 0,
            message: format!(
                "DA-PTN proposal undefined: t = {t}, sum log lambda = {sum_log_lambda}, \
                 sum log rho = {sum_log_rho}, ln w = {ln_w}, alpha = {alpha}"
            ),
        });
    }
    let proposal = PtnSampler::new(p_star, a_star, b_star)?.sample(rng);
    let log_ratio = 2.0 * (ln_c(proposal, tf) - ln_c(alpha, tf));
    let u: f64 = 1.0 - rng.random::<f64>();
    if u.ln() <= log_ratio {
        Ok((proposal, true))
    } else {
        Ok((alpha, false))
    }
}

/// One Gaussian random-walk Metropolis transition on `β = ln α`.
pub fn update_alpha_mh_rw<R: Rng + ?Sized>(
    t: u64,
    sum_log_lambda: f64,
    prior: &LogNormalPrior,
    beta: f64,
    step: f64,
    rng: &mut R,
) -> (f64, bool) {
    let z: f64 = rng.sample(StandardNormal);
    let proposal = beta + step * z;
    let log_ratio = log_target_beta(proposal, t, sum_log_lambda, prior)
        - log_target_beta(beta, t, sum_log_lambda, prior);
    let u: f64 = 1.0 - rng.random::<f64>();
    if u.ln() <= log_ratio {
        (proposal, true)
    } else {
        (beta, false)
    }
}

/// Endpoints of a slice interval, exposed for checking the stepping-out
/// invariant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceStep {
    pub value: f64,
    pub left: f64,
    pub right: f64,
}

const MAX_CONTRACTIONS: usize = 1000;

/// One slice-sampling transition on `β = ln α`.
pub fn update_alpha_slice<R: Rng + ?Sized>(
    t: u64,
    sum_log_lambda: f64,
    prior: &LogNormalPrior,
    beta: f64,
    width: f64,
    max_steps: usize,
    rng: &mut R,
) -> Result<f64> {
    slice_step(|b| log_target_beta(b, t, sum_log_lambda, prior), beta, width, max_steps, rng)
        .map(|s| s.value)
}

/// Univariate slice sampling with stepping out (at most `max_steps` steps of
/// size `width` in total) and shrinkage.
pub fn slice_step<F, R>(f: F, x0: f64, width: f64, max_steps: usize, rng: &mut R) -> Result<SliceStep>
where
    F: Fn(f64) -> f64,
    R: Rng + ?Sized,
{
    let fx0 = f(x0);
    if !fx0.is_finite() {
        return Err(Error::Numerical {
            iteration: 0,
            message: format!("slice sampler started at {x0} where the log target is {fx0}"),
        });
    }
    let u: f64 = 1.0 - rng.random::<f64>();
    let level = fx0 + u.ln();

    let mut left = x0 - width * rng.random::<f64>();
    let mut right = left + width;
    let mut j = (max_steps as f64 * rng.random::<f64>()).floor() as usize;
    let mut k = (max_steps - 1).saturating_sub(j);
    while j > 0 && level < f(left) {
        left -= width;
        j -= 1;
    }
    while k > 0 && level < f(right) {
        right += width;
        k -= 1;
    }
    let (init_left, init_right) = (left, right);

    for _ in 0..MAX_CONTRACTIONS {
        let x1 = left + rng.random::<f64>() * (right - left);
        if level < f(x1) {
            return Ok(SliceStep {
                value: x1,
                left: init_left,
                right: init_right,
            });
        }
        if x1 < x0 {
            left = x1;
        } else {
            right = x1;
        }
    }
    Err(Error::Numerical {
        iteration: 0,
        message: format!(
            "slice shrinkage found no point after {MAX_CONTRACTIONS} contractions around {x0}"
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn no_active_cells_draws_from_prior() {
        let mut rng = rng_from_seed(1);
        let prior = GammaPrior { shape: 2.0, rate: 4.0 };
        let m = 100_000;
        let mut sum = 0.0;
        for _ in 0..m {
            let (a, acc) = update_alpha_da_ptn(0, 0.0, &prior, 1.0, &mut rng).unwrap();
            assert!(acc);
            sum += a;
        }
        assert!((sum / m as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn zero_step_always_accepts() {
        let mut rng = rng_from_seed(2);
        let prior = LogNormalPrior { mean: 0.0, variance: 5.0 };
        for _ in 0..100 {
            let (b, acc) = update_alpha_mh_rw(20, -15.0, &prior, 0.3, 0.0, &mut rng);
            assert!(acc);
            assert_eq!(b, 0.3);
        }
    }

    #[test]
    fn slice_point_lies_in_interval() {
        let mut rng = rng_from_seed(3);
        let mut x = 0.0;
        for _ in 0..2000 {
            let s = slice_step(|b| -0.5 * b * b, x, 0.7, 10, &mut rng).unwrap();
            assert!(s.left <= s.value && s.value <= s.right);
            assert!(s.left <= x && x <= s.right);
            x = s.value;
        }
    }

    #[test]
    fn slice_reports_nonfinite_start() {
        let mut rng = rng_from_seed(4);
        assert!(slice_step(|_| f64::NEG_INFINITY, 0.0, 1.0, 5, &mut rng).is_err());
    }
}
