//! Bernoulli-gamma data augmentation Gibbs sampler for ZANIM.

use rand::Rng;

use crate::counts::CountDataset;
use crate::distributions::Model;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::sampling::{bernoulli, beta_variate, gamma_variate};

use super::config::McmcConfig;
use super::draws::{pointwise_loglik, ChainDraws};
use super::priors::{BetaPrior, GammaPrior, PriorSpec};
use super::state::{FlatData, LatentLambda, LatentState};

/// Gibbs sampler state for ZANIM.
///
/// Each sweep visits the categories in order, drawing `ζ_j`, then `λ_j`, then
/// the indicators `z_ij` of zero cells, and finally every `φ_i`.
#[derive(Debug, Clone)]
pub struct ZanimSampler {
    data: FlatData,
    zeta_prior: Vec<BetaPrior>,
    lambda_prior: Vec<GammaPrior>,
    fix_zeta_zero: bool,
    zeta: Vec<f64>,
    lambda: Vec<f64>,
    z: Vec<bool>,
    phi: Vec<f64>,
    /// `t_j = Σ_i z_ij`
    t: Vec<u64>,
    /// `r_j = Σ_i y_ij z_ij`
    r: Vec<u64>,
}

impl ZanimSampler {
    pub fn new(data: &CountDataset, priors: &PriorSpec, fix_zeta_zero: bool) -> Result<Self> {
        let flat = FlatData::new(data);
        priors.validate(flat.d)?;
        let (n, d) = (flat.n, flat.d);
        let mut r = vec![0u64; d];
        for i in 0..n {
            for (j, rj) in r.iter_mut().enumerate() {
                *rj += flat.y(i, j);
            }
        }
        let total: u64 = r.iter().sum();
        let lambda = r
            .iter()
            .map(|&rj| (rj as f64 + 1.0) / (total as f64 + d as f64))
            .collect();
        let phi = flat.trials.iter().map(|&t| t as f64).collect();
        Ok(Self {
            zeta_prior: priors.zeta_beta.clone(),
            lambda_prior: priors.zanim_lambda_gamma.clone(),
            fix_zeta_zero,
            zeta: vec![0.0; d],
            lambda,
            z: vec![true; n * d],
            phi,
            t: vec![n as u64; d],
            r,
            data: flat,
        })
    }

    pub fn dim(&self) -> usize {
        self.data.d
    }

    pub fn zeta(&self) -> &[f64] {
        &self.zeta
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn theta(&self) -> Vec<f64> {
        let s: f64 = self.lambda.iter().sum();
        self.lambda.iter().map(|l| l / s).collect()
    }

    /// `(t, r)` as maintained incrementally.
    pub fn counts_stats(&self) -> (&[u64], &[u64]) {
        (&self.t, &self.r)
    }

    /// `s_j = Σ_i φ_i z_ij`.
    pub fn s_stat(&self, j: usize) -> f64 {
        let d = self.data.d;
        (0..self.data.n)
            .filter(|&i| self.z[i * d + j])
            .map(|i| self.phi[i])
            .sum()
    }

    /// `ζ_j ~ Beta(n − t_j + a_j, t_j + b_j)`.
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

    /// `λ_j ~ Gamma(r_j + c_j, s_j + d_j)`.
    pub fn update_lambda<R: Rng + ?Sized>(&mut self, j: usize, rng: &mut R) {
        let prior = self.lambda_prior[j];
        let s = self.s_stat(j);
        self.lambda[j] = gamma_variate(self.r[j] as f64 + prior.shape, s + prior.rate, rng);
    }

    /// Redraws `z_ij` for every zero cell of category `j`.
    pub fn update_z<R: Rng + ?Sized>(&mut self, j: usize, rng: &mut R) {
        if self.fix_zeta_zero {
            return;
        }
        let d = self.data.d;
        let zeta = self.zeta[j];
        let lambda = self.lambda[j];
        for &i in &self.data.zero_cells[j] {
            let keep = (1.0 - zeta) * (-self.phi[i] * lambda).exp();
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

    /// `φ_i ~ Gamma(N_i, Σ_j λ_j z_ij)`, with `φ_i = 0` when `N_i = 0`.
    pub fn update_phi<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let d = self.data.d;
        for i in 0..self.data.n {
            let n_i = self.data.trials[i];
            if n_i == 0 {
                self.phi[i] = 0.0;
                continue;
            }
            let rate: f64 = (0..d)
                .filter(|&j| self.z[i * d + j])
                .map(|j| self.lambda[j])
                .sum();
            self.phi[i] = if rate > 0.0 {
                gamma_variate(n_i as f64, rate, rng)
            } else {
                0.0
            };
        }
    }

    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for j in 0..self.data.d {
            self.update_zeta(j, rng);
            self.update_lambda(j, rng);
            self.update_z(j, rng);
        }
        self.update_phi(rng);
    }

    pub fn state(&self) -> LatentState {
        let d = self.data.d;
        LatentState {
            phi: self.phi.clone(),
            z: self.z.chunks(d).map(|c| c.to_vec()).collect(),
            lambda: LatentLambda::PerCategory(self.lambda.clone()),
        }
    }

    /// Checks the support constraints and that the incremental statistics
    /// match a recomputation from scratch.
    pub fn check_invariants(&self) -> Result<()> {
        let (n, d) = (self.data.n, self.data.d);
        let mut t = vec![0u64; d];
        let mut r = vec![0u64; d];
        for i in 0..n {
            for j in 0..d {
                let y = self.data.y(i, j);
                let z = self.z[i * d + j];
                if y > 0 && !z {
                    return Err(Error::Numerical {
                        iteration: 0,
                        message: format!("z[{i}][{j}] = 0 with a positive count"),
                    });
                }
                if z {
                    t[j] += 1;
                    r[j] += y;
                }
            }
            if (self.phi[i] == 0.0) != (self.data.trials[i] == 0) {
                return Err(Error::Numerical {
                    iteration: 0,
                    message: format!("phi[{i}] = {} with N = {}", self.phi[i], self.data.trials[i]),
                });
            }
        }
        if t != self.t || r != self.r {
            return Err(Error::Numerical {
                iteration: 0,
                message: "incremental sufficient statistics drifted".into(),
            });
        }
        Ok(())
    }

    fn record(&self) -> Vec<f64> {
        let mut row = self.theta();
        if !self.fix_zeta_zero {
            row.extend_from_slice(&self.zeta);
        }
        row
    }
}

/// Runs the ZANIM Gibbs sampler seeded from `cfg.seed`.
pub fn fit_zanim(data: &CountDataset, priors: &PriorSpec, cfg: &McmcConfig) -> Result<ChainDraws> {
    let mut rng = rng_from_seed(cfg.seed);
    fit_zanim_with_rng(data, priors, cfg, &mut rng)
}

pub fn fit_zanim_with_rng<R: Rng + ?Sized>(
    data: &CountDataset,
    priors: &PriorSpec,
    cfg: &McmcConfig,
    rng: &mut R,
) -> Result<ChainDraws> {
    cfg.validate()?;
    let mut sampler = ZanimSampler::new(data, priors, cfg.fix_zeta_zero)?;
    let mut out = ChainDraws::empty(Model::Zanim, data.dim(), cfg.fix_zeta_zero, cfg.retained());
    for iter in 1..=cfg.iterations {
        sampler.sweep(rng);
        if cfg.keeps(iter) {
            let row = sampler.record();
            out.draws.push(row);
            if cfg.store_loglik {
                let params = out.params_at(out.draws.len() - 1)?;
                out.loglik.push(pointwise_loglik(data, &params)?);
            }
        }
    }
    Ok(out)
}
