use crate::error::{Error, Result};
use crate::mixture::{subsets_iter, IndexSet, LogZetaFactors};
use crate::numeric::{ln_beta, ln_factorial, LogSumExp};

use super::params::ModelParams;
use super::pmf::MIN_RENORM;

/// `ln C(n, k)`.
pub fn ln_binomial_coeff(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Binomial log-PMF; `p` may be 0 or 1.
pub fn binomial_log_pmf(k: u64, n: u64, p: f64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let mut v = ln_binomial_coeff(n, k);
    if k > 0 {
        v += k as f64 * p.ln();
    }
    if k < n {
        v += (n - k) as f64 * (-p).ln_1p();
    }
    v
}

/// Beta-binomial log-PMF with shapes `a, b > 0`.
pub fn beta_binomial_log_pmf(k: u64, n: u64, a: f64, b: f64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_binomial_coeff(n, k) + ln_beta(k as f64 + a, (n - k) as f64 + b) - ln_beta(a, b)
}

#[derive(Clone, Copy)]
enum Kernel {
    Binomial(f64),
    BetaBinomial(f64, f64),
}

impl Kernel {
    fn log_pmf(self, k: u64, n: u64) -> f64 {
        match self {
            Kernel::Binomial(p) => binomial_log_pmf(k, n, p),
            Kernel::BetaBinomial(a, b) => beta_binomial_log_pmf(k, n, a, b),
        }
    }
}

/// Mixture representation of the marginal of `Y_j`.
struct MarginalMixture {
    ln_zeta_j: f64,
    ln_eta_n: f64,
    kernels: Vec<(f64, Kernel)>,
}

impl MarginalMixture {
    fn new(p: &ModelParams, j: usize) -> Result<Self> {
        let d = p.dim();
        if j >= d {
            return Err(Error::InvalidArgument(format!(
                "category index {j} out of range for d = {d}"
            )));
        }
        let lz = LogZetaFactors::new(p.zeta());
        let full = (1u64 << d) - 1;
        let others = IndexSet::from_mask(full & !(1 << j));
        let kernel = |zero: IndexSet| -> Option<Kernel> {
            let kept = |v: &[f64]| -> f64 {
                (0..d).filter(|&l| !zero.contains(l)).map(|l| v[l]).sum()
            };
            match p {
                ModelParams::Zanim(q) => {
                    let mass = kept(q.theta());
                    (mass > MIN_RENORM).then(|| Kernel::Binomial((q.theta()[j] / mass).min(1.0)))
                }
                ModelParams::Zanidm(q) => {
                    let a = q.alpha()[j];
                    Some(Kernel::BetaBinomial(a, kept(q.alpha()) - a))
                }
            }
        };
        let mut kernels = Vec::with_capacity(1 << (d - 1));
        let components = std::iter::once(IndexSet::EMPTY).chain(subsets_iter(d, IndexSet::from_indices([j]))?);
        for zero in components {
            let ln_eta = lz.log_weight(zero);
            if ln_eta == f64::NEG_INFINITY {
                continue;
            }
            if let Some(k) = kernel(zero) {
                kernels.push((ln_eta, k));
            }
        }
        Ok(Self {
            ln_zeta_j: p.zeta()[j].ln(),
            ln_eta_n: lz.log_weight(others),
            kernels,
        })
    }

    fn log_pmf(&self, k: u64, n: u64) -> f64 {
        let mut acc = LogSumExp::new();
        if k == 0 {
            acc.add(self.ln_zeta_j);
        }
        if k == n {
            acc.add(self.ln_eta_n);
        }
        for &(ln_eta, kern) in &self.kernels {
            acc.add(ln_eta + kern.log_pmf(k, n));
        }
        acc.value()
    }
}

/// `ln P(Y_j = k)` for an observation with `n` trials (`j` is 0-based).
///
/// The marginal is a mixture of a point mass at 0 (weight `ζ_j`), a point
/// mass at `n`, and binomial (ZANIM) or beta-binomial (ZANIDM) kernels, one
/// per zero pattern that keeps category `j`.
pub fn marginal_log_pmf(p: &ModelParams, j: usize, k: u64, n: u64) -> Result<f64> {
    if k > n {
        return Err(Error::Domain(format!("k = {k} is outside [0, {n}]")));
    }
    Ok(MarginalMixture::new(p, j)?.log_pmf(k, n))
}

/// `ln P(Y_j = k)` for every `k` in `0..=n`.
pub fn marginal_log_pmf_all(p: &ModelParams, j: usize, n: u64) -> Result<Vec<f64>> {
    let m = MarginalMixture::new(p, j)?;
    Ok((0..=n).map(|k| m.log_pmf(k, n)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{ZanidmParams, ZanimParams};

    #[test]
    fn binomial_edges() {
        assert_eq!(binomial_log_pmf(0, 5, 0.0), 0.0);
        assert_eq!(binomial_log_pmf(5, 5, 1.0), 0.0);
        assert_eq!(binomial_log_pmf(2, 5, 0.0), f64::NEG_INFINITY);
        assert!((binomial_log_pmf(1, 2, 0.5) - 0.5f64.ln()).abs() < 1e-13);
        // BB(1, 1) over n trials is uniform.
        for k in 0..=4 {
            assert!((beta_binomial_log_pmf(k, 4, 1.0, 1.0) + 5f64.ln()).abs() < 1e-13);
        }
    }

    #[test]
    fn no_inflation_gives_binomial() {
        let p: ModelParams = ZanimParams::new(vec![0.2, 0.5, 0.3], vec![0.0; 3]).unwrap().into();
        for k in 0..=10 {
            let got = marginal_log_pmf(&p, 1, k, 10).unwrap();
            assert!((got - binomial_log_pmf(k, 10, 0.5)).abs() < 1e-13);
        }
    }

    #[test]
    fn errors() {
        let p: ModelParams = ZanidmParams::new(vec![1.0, 2.0], vec![0.1, 0.2]).unwrap().into();
        assert!(matches!(marginal_log_pmf(&p, 0, 6, 5), Err(Error::Domain(_))));
        assert!(marginal_log_pmf(&p, 2, 0, 5).is_err());
    }

    #[test]
    fn normalizes() {
        let p: ModelParams = ZanidmParams::new(vec![0.7, 2.0, 3.5], vec![0.1, 0.4, 0.2])
            .unwrap()
            .into();
        for j in 0..3 {
            let lp = marginal_log_pmf_all(&p, j, 20).unwrap();
            let total: f64 = lp.iter().map(|v| v.exp()).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
