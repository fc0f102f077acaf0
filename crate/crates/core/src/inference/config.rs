use crate::error::{Error, Result};

/// Strategy for updating the ZANIDM concentrations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaSampler {
    /// Beta and gamma data augmentation with independent PTN proposals.
    DaPtn,
    /// Gaussian random walk on `ln α`. With `adapt`, the step is tuned toward
    /// a 0.44 acceptance rate during burn-in and frozen afterwards.
    MhRw { step: f64, adapt: bool },
    /// Slice sampling on `ln α` with stepping out and shrinkage.
    Slice { width: f64, max_steps: usize },
}

impl AlphaSampler {
    pub const DEFAULT_MH_STEP: f64 = 0.2;
    pub const DEFAULT_SLICE_WIDTH: f64 = 1.0;
    pub const DEFAULT_SLICE_MAX_STEPS: usize = 50;

    pub fn mh_rw_default() -> Self {
        AlphaSampler::MhRw {
            step: Self::DEFAULT_MH_STEP,
            adapt: false,
        }
    }

    pub fn slice_default() -> Self {
        AlphaSampler::Slice {
            width: Self::DEFAULT_SLICE_WIDTH,
            max_steps: Self::DEFAULT_SLICE_MAX_STEPS,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AlphaSampler::DaPtn => "da_ptn",
            AlphaSampler::MhRw { .. } => "mh_rw",
            AlphaSampler::Slice { .. } => "slice",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McmcConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub alpha_sampler: AlphaSampler,
    /// Fix `ζ ≡ 0`, giving the multinomial or Dirichlet-multinomial baseline.
    pub fix_zeta_zero: bool,
    /// Record the per-draw, per-observation log-likelihood matrix.
    pub store_loglik: bool,
}

impl McmcConfig {
    pub fn new(iterations: usize, burn_in: usize, thin: usize, seed: u64) -> Self {
        Self {
            iterations,
            burn_in,
            thin,
            seed,
            alpha_sampler: AlphaSampler::DaPtn,
            fix_zeta_zero: false,
            store_loglik: true,
        }
    }

    /// Number of retained draws.
    pub fn retained(&self) -> usize {
        self.iterations.saturating_sub(self.burn_in) / self.thin.max(1)
    }

    /// Whether 1-based iteration `iter` is kept.
    pub fn keeps(&self, iter: usize) -> bool {
        iter > self.burn_in && (iter - self.burn_in) % self.thin == 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be positive".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::Config(format!(
                "burn-in {} must be below iterations {}",
                self.burn_in, self.iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be positive".into()));
        }
        if self.retained() == 0 {
            return Err(Error::Config("no draws retained after burn-in and thinning".into()));
        }
        match self.alpha_sampler {
            AlphaSampler::DaPtn => {}
            AlphaSampler::MhRw { step, .. } => {
                if !(step > 0.0 && step.is_finite()) {
                    return Err(Error::Config(format!("MH step {step} must be positive")));
                }
            }
            AlphaSampler::Slice { width, max_steps } => {
                if !(width > 0.0 && width.is_finite()) || max_steps == 0 {
                    return Err(Error::Config(
                        "slice width must be positive and max_steps at least 1".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn retained_counts() {
        let c = McmcConfig::new(11_000, 1_000, 10, 0);
        assert_eq!(c.retained(), 1000);
        assert_eq!((1..=11_000).filter(|&t| c.keeps(t)).count(), 1000);
        assert!(c.validate().is_ok());
        assert!(McmcConfig::new(10, 10, 1, 0).validate().is_err());
        assert!(McmcConfig::new(10, 5, 6, 0).validate().is_err());
        assert!(McmcConfig::new(10, 5, 0, 0).validate().is_err());
    }
}
