//! Collapsed Gibbs sampler for ZANIDM.

use rand::Rng;

use crate::counts::CountDataset;
use crate::distributions::Model;
use crate::error::{Error, Result};
use crate::numeric::log_sum_exp_iter;
use crate::rng::rng_from_seed;
use crate::sampling::{bernoulli, beta_variate, ln_gamma_variate};

use super::alpha::{update_alpha_da_ptn, update_alpha_mh_rw, update_alpha_slice};
use super::config::{AlphaSampler, McmcConfig};
use super::draws::{pointwise_loglik, ChainDraws};
use super::priors::{AlphaPrior, BetaPrior, PriorSpec};
use super::state::{FlatData, LatentLambda, LatentState};

const TARGET_ACCEPTANCE: f64 = 0.44;

/// Collapsed Gibbs sampler state for ZANIDM.
///
/// Each sweep visits the categories in order, drawing `ζ_j`, then `α_j`, then
/// `z_ij` with `λ_ij` integrated out, then `λ_ij` given `z_ij`, and finally
/// every `φ_i`. The `λ_ij` are stored on the log scale so that draws with tiny
/// shapes keep `λ_ij > 0` whenever `z_ij = 1`.
#[derive(Debug, Clone)]
pub struct ZanidmSampler {
    data: FlatData,
    zeta_prior: Vec<BetaPrior>,
    alpha_prior: AlphaPrior,
    alpha_sampler: AlphaSampler,
    fix_zeta_zero: bool,
    zeta: Vec<f64>,
    alpha: Vec<f64>,
    z: Vec<bool>,
    ln_lambda: Vec<f64>,
    phi: Vec<f64>,
    /// `t_j = Σ_i z_ij`
    t: Vec<u64>,
    ln_step: Vec<f64>,
    accepted: Vec<u64>,
    proposed: Vec<u64>,
}

impl ZanidmSampler {
    pub fn new(
        data: &CountDataset,
        priors: &PriorSpec,
        alpha_sampler: AlphaSampler,
        fix_zeta_zero: bool,
    ) -> Result<Self> {
        let flat = FlatData::new(data);
        priors.validate(flat.d)?;
        match (&priors.zanidm_alpha, alpha_sampler) {
            (AlphaPrior::Gamma(_), AlphaSampler::DaPtn) => {}
            (AlphaPrior::LogNormal(_), AlphaSampler::MhRw { .. } | AlphaSampler::Slice { .. }) => {}
            (AlphaPrior::Gamma(_), _) => {
                return Err(Error::Config(format!(
                    "the {} update needs a log-normal prior on alpha",
                    alpha_sampler.name()
                )))
            }
            (AlphaPrior::LogNormal(_), _) => {
                return Err(Error::Config("the da_ptn update needs a gamma prior on alpha".into()))
            }
        }
        let (n, d) = (flat.n, flat.d);
        let alpha = vec![1.0; d];
        let mut ln_lambda = vec![0.0; n * d];
        let mut phi = vec![0.0; n];
        for i in 0..n {
            let mut total = 0.0;
            for j in 0..d {
                let l = flat.y(i, j) as f64 + alpha[j];
                ln_lambda[i * d + j] = l.ln();
                total += l;
            }
            phi[i] = flat.trials[i] as f64 / total;
        }
        let step = match alpha_sampler {
            AlphaSampler::MhRw { step, .. } => step,
            _ => 1.0,
        };
        Ok(Self {
            zeta_prior: priors.zeta_beta.clone(),
            alpha_prior: priors.zanidm_alpha.clone(),
            alpha_sampler,
            fix_zeta_zero,
            zeta: vec![0.0; d],
            alpha,
            z: vec![true; n * d],
            ln_lambda,
            phi,
            t: vec![n as u64; d],
            ln_step: vec![step.ln(); d],
            accepted: vec![0; d],
            proposed: vec![0; d],
            data: flat,
        })
    }

    pub fn dim(&self) -> usize {
        self.data.d
    }

    pub fn zeta(&self) -> &[f64] {
        &self.zeta
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn t_stat(&self) -> &[u64] {
        &self.t
    }

    /// Current random-walk step sizes (meaningful for the MH update only).
    pub fn mh_steps(&self) -> Vec<f64> {
        self.ln_step.iter().map(|s| s.exp()).collect()
    }

    /// `Σ_{i: z_ij = 1} ln λ_ij`.
    pub fn sum_log_lambda(&self, j: usize) -> f64 {
        let d = self.data.d;
        (0..self.data.n)
            .filter(|&i| self.z[i * d + j])
            .map(|i| self.ln_lambda[i * d + j])
            .sum()
    }

    pub fn acceptance_rates(&self) -> Vec<f64> {
        self.accepted
            .iter()
            .zip(&self.proposed)
            .map(|(&a, &p)| if p == 0 { f64::NAN } else { a as f64 / p as f64 })
            .collect()
    }

    pub fn reset_acceptance(&mut self) {
        self.accepted.iter_mut().for_each(|a| *a = 0);
        self.proposed.iter_mut().for_each(|p| *p = 0);
    }

    pub fn update_zeta<R: Rng + ?Sized>(&mut self, j: usize, rng: &mut R) {
        if self.fix_zeta_zero {
            self.zeta[j] = 0.0;
            return;
        }
        let prior = self.zeta_prior[j];
        let n = self.data.n as f64;
        let t = self.t[j] as f64;
        self.zeta[j] = beta_variate(n - t + prior.a, t + prior.b, rng);
    }

    /// Updates `α_j` with the configured strategy. `adapt_round` is the
    /// 1-based burn-in iteration when step adaptation is active.
    pub fn update_alpha<R: Rng + ?Sized>(
        &mut self,
        j: usize,
        adapt_round: Option<usize>,
        rng: &mut R,
    ) -> Result<()> {
        let t = self.t[j];
        let sum_log = self.sum_log_lambda(j);
        match (self.alpha_sampler, &self.alpha_prior) {
            (AlphaSampler::DaPtn, AlphaPrior::Gamma(p)) => {
                let (a, acc) = update_alpha_da_ptn(t, sum_log, &p[j], self.alpha[j], rng)?;
                self.alpha[j] = a;
                self.tally(j, acc);
            }
            (AlphaSampler::MhRw { adapt, .. }, AlphaPrior::LogNormal(p)) => {
                let step = self.ln_step[j].exp();
                let (b, acc) = update_alpha_mh_rw(t, sum_log, &p[j], self.alpha[j].ln(), step, rng);
                self.alpha[j] = b.exp();
                self.tally(j, acc);
                if let (true, Some(round)) = (adapt, adapt_round) {
                    let gain = (round as f64).powf(-0.6);
                    let hit = if acc { 1.0 } else { 0.0 };
                    self.ln_step[j] += gain * (hit - TARGET_ACCEPTANCE);
                }
            }
            (AlphaSampler::Slice { width, max_steps }, AlphaPrior::LogNormal(p)) => {
                let b = update_alpha_slice(t, sum_log, &p[j], self.alpha[j].ln(), width, max_steps, rng)?;
                self.alpha[j] = b.exp();
            }
            _ => unreachable!("prior and sampler checked at construction"),
        }
        if !(self.alpha[j] > 0.0 && self.alpha[j].is_finite()) {
            return Err(Error::Numerical {
                iteration: 0,
                message: format!("alpha[{j}] became {} (t = {t}, sum log lambda = {sum_log})", self.alpha[j]),
            });
        }
        Ok(())
    }

    fn tally(&mut self, j: usize, accepted: bool) {
        self.proposed[j] += 1;
        if accepted {
            self.accepted[j] += 1;
        }
    }

    /// Redraws `z_ij` for the zero cells of category `j` with `λ_ij`
    /// integrated out.
    pub fn update_z<R: Rng + ?Sized>(&mut self, j: usize, rng: &mut R) {
        if self.fix_zeta_zero {
            return;
        }
        let d = self.data.d;
        let zeta = self.zeta[j];
        let alpha = self.alpha[j];
        for &i in &self.data.zero_cells[j] {
            let keep = (1.0 - zeta) * (-alpha * self.phi[i].ln_1p()).exp();
            let new = bernoulli(keep / (zeta + keep), rng);
            let cell = &mut self.z[i * d + j];
            if *cell != new {
                if new {
                    self.t[j] += 1;
                } else {
                    self.t[j] -= 1;
                }
                *cell = new;
            }
        }
    }

    /// `λ_ij ~ Gamma(α_j + y_ij, 1 + φ_i)` where `z_ij = 1`, else 0.
    pub fn update_lambda<R: Rng + ?Sized>(&mut self, j: usize, rng: &mut R) {
        let d = self.data.d;
        let alpha = self.alpha[j];
        for i in 0..self.data.n {
            let k = i * d + j;
            self.ln_lambda[k] = if self.z[k] {
                ln_gamma_variate(alpha + self.data.y(i, j) as f64, rng) - self.phi[i].ln_1p()
            } else {
                f64::NEG_INFINITY
            };
        }
    }

    /// `φ_i ~ Gamma(N_i, Σ_j λ_ij)`, with `φ_i = 0` when `N_i = 0`.
    pub fn update_phi<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let d = self.data.d;
        for i in 0..self.data.n {
            let n_i = self.data.trials[i];
            if n_i == 0 {
                self.phi[i] = 0.0;
                continue;
            }
            let ln_rate = log_sum_exp_iter(self.ln_lambda[i * d..(i + 1) * d].iter().copied());
            self.phi[i] = (ln_gamma_variate(n_i as f64, rng) - ln_rate).exp();
        }
    }

    pub fn sweep<R: Rng + ?Sized>(&mut self, adapt_round: Option<usize>, rng: &mut R) -> Result<()> {
        for j in 0..self.data.d {
            self.update_zeta(j, rng);
            self.update_alpha(j, adapt_round, rng)?;
            self.update_z(j, rng);
            self.update_lambda(j, rng);
        }
        self.update_phi(rng);
        Ok(())
    }

    pub fn state(&self) -> LatentState {
        let d = self.data.d;
        LatentState {
            phi: self.phi.clone(),
            z: self.z.chunks(d).map(|c| c.to_vec()).collect(),
            lambda: LatentLambda::PerCell(
                self.ln_lambda
                    .chunks(d)
                    .map(|c| {
                        c.iter()
                            .map(|&l| if l == f64::NEG_INFINITY { 0.0 } else { l.exp().max(f64::MIN_POSITIVE) })
                            .collect()
                    })
                    .collect(),
            ),
        }
    }

    pub fn check_invariants(&self) -> Result<()> {
        let (n, d) = (self.data.n, self.data.d);
        let fail = |message: String| Err(Error::Numerical { iteration: 0, message });
        let mut t = vec![0u64; d];
        for i in 0..n {
            for j in 0..d {
                let k = i * d + j;
                if self.data.y(i, j) > 0 && !self.z[k] {
                    return fail(format!("z[{i}][{j}] = 0 with a positive count"));
                }
                if self.z[k] != (self.ln_lambda[k] > f64::NEG_INFINITY) {
                    return fail(format!("z[{i}][{j}] and lambda[{i}][{j}] disagree"));
                }
                if self.z[k] {
                    t[j] += 1;
                }
            }
            if (self.phi[i] == 0.0) != (self.data.trials[i] == 0) {
                return fail(format!("phi[{i}] = {} with N = {}", self.phi[i], self.data.trials[i]));
            }
        }
        if t != self.t {
            return fail("incremental sufficient statistics drifted".into());
        }
        Ok(())
    }

    fn record(&self) -> Vec<f64> {
        let mut row = self.alpha.clone();
        if !self.fix_zeta_zero {
            row.extend_from_slice(&self.zeta);
        }
        row
    }
}

/// Runs the ZANIDM collapsed Gibbs sampler seeded from `cfg.seed`.
pub fn fit_zanidm(data: &CountDataset, priors: &PriorSpec, cfg: &McmcConfig) -> Result<ChainDraws> {
    let mut rng = rng_from_seed(cfg.seed);
    fit_zanidm_with_rng(data, priors, cfg, &mut rng)
}

pub fn fit_zanidm_with_rng<R: Rng + ?Sized>(
    data: &CountDataset,
    priors: &PriorSpec,
    cfg: &McmcConfig,
    rng: &mut R,
) -> Result<ChainDraws> {
    cfg.validate()?;
    let mut sampler = ZanidmSampler::new(data, priors, cfg.alpha_sampler, cfg.fix_zeta_zero)?;
    let mut out = ChainDraws::empty(Model::Zanidm, data.dim(), cfg.fix_zeta_zero, cfg.retained());
    for iter in 1..=cfg.iterations {
        let adapt_round = (iter <= cfg.burn_in).then_some(iter);
        sampler
            .sweep(adapt_round, rng)
            .map_err(|e| match e {
                Error::Numerical { message, .. } => Error::Numerical { iteration: iter, message },
                other => other,
            })?;
        if iter == cfg.burn_in {
            sampler.reset_acceptance();
        }
        if cfg.keeps(iter) {
            out.draws.push(sampler.record());
            if cfg.store_loglik {
                let params = out.params_at(out.draws.len() - 1)?;
                out.loglik.push(pointwise_loglik(data, &params)?);
            }
        }
    }
    if !matches!(cfg.alpha_sampler, AlphaSampler::Slice { .. }) {
        out.acceptance = Some(sampler.acceptance_rates());
    }
    Ok(out)
}
