use crate::error::{Error, Result};
use crate::numeric::{digamma, trigamma};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaPrior {
    pub a: f64,
    pub b: f64,
}

/// Gamma prior with shape and rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaPrior {
    pub shape: f64,
    pub rate: f64,
}

/// Normal prior on `β = ln α`; `variance` is the variance of `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormalPrior {
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AlphaPrior {
    Gamma(Vec<GammaPrior>),
    LogNormal(Vec<LogNormalPrior>),
}

impl AlphaPrior {
    fn len(&self) -> usize {
        match self {
            AlphaPrior::Gamma(v) => v.len(),
            AlphaPrior::LogNormal(v) => v.len(),
        }
    }
}

/// Per-category prior hyperparameters for both models.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSpec {
    pub zeta_beta: Vec<BetaPrior>,
    pub zanim_lambda_gamma: Vec<GammaPrior>,
    pub zanidm_alpha: AlphaPrior,
}

impl PriorSpec {
    /// `ζ_j ~ Beta(1, 1)`, `λ_j ~ Gamma(0.1, 0.1)` and `ln α_j ~ Normal(0, 5)`.
    pub fn defaults(d: usize) -> Self {
        Self {
            zeta_beta: vec![BetaPrior { a: 1.0, b: 1.0 }; d],
            zanim_lambda_gamma: vec![GammaPrior { shape: 0.1, rate: 0.1 }; d],
            zanidm_alpha: AlphaPrior::LogNormal(vec![
                LogNormalPrior {
                    mean: 0.0,
                    variance: 5.0,
                };
                d
            ]),
        }
    }

    /// Defaults with the gamma prior on `α_j` matched to `ln α_j` having mean
    /// 0 and variance 5.
    pub fn defaults_gamma_alpha(d: usize) -> Result<Self> {
        let g = match_gamma_prior(5.0)?;
        Ok(Self {
            zanidm_alpha: AlphaPrior::Gamma(vec![g; d]),
            ..Self::defaults(d)
        })
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let lens = [
            self.zeta_beta.len(),
            self.zanim_lambda_gamma.len(),
            self.zanidm_alpha.len(),
        ];
        if let Some(&bad) = lens.iter().find(|&&l| l != d) {
            return Err(Error::DimensionMismatch { expected: d, got: bad });
        }
        let positive = |name: &str, j: usize, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("prior {name}[{j}] = {v} must be positive")))
            }
        };
        for (j, p) in self.zeta_beta.iter().enumerate() {
            positive("zeta.a", j, p.a)?;
            positive("zeta.b", j, p.b)?;
        }
        for (j, p) in self.zanim_lambda_gamma.iter().enumerate() {
            positive("lambda.shape", j, p.shape)?;
            positive("lambda.rate", j, p.rate)?;
        }
        match &self.zanidm_alpha {
            AlphaPrior::Gamma(v) => {
                for (j, p) in v.iter().enumerate() {
                    positive("alpha.shape", j, p.shape)?;
                    positive("alpha.rate", j, p.rate)?;
                }
            }
            AlphaPrior::LogNormal(v) => {
                for (j, p) in v.iter().enumerate() {
                    if !p.mean.is_finite() {
                        return Err(Error::Config(format!("prior alpha.mean[{j}] is not finite")));
                    }
                    positive("alpha.variance", j, p.variance)?;
                }
            }
        }
        Ok(())
    }
}

/// Gamma prior on `α` such that `E[ln α] = 0` and `Var[ln α] = var_log`.
///
/// Under `Gamma(c, d)`, `E[ln α] = ψ(c) − ln d` and `Var[ln α] = ψ'(c)`, so `c`
/// solves `ψ'(c) = var_log` and `d = exp(ψ(c))`.
pub fn match_gamma_prior(var_log: f64) -> Result<GammaPrior> {
    if !(var_log > 0.0 && var_log.is_finite()) {
        return Err(Error::InvalidArgument(format!("variance {var_log} must be positive")));
    }
    // ψ' is decreasing from +∞ to 0 on (0, ∞).
    let (mut lo, mut hi) = (1e-8f64, 1e8f64);
    while hi - lo > 1e-10 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if trigamma(mid) > var_log {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    Ok(GammaPrior {
        shape: c,
        rate: digamma(c).exp(),
    })
}
