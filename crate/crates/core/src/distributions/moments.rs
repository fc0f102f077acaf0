use crate::error::Result;
use crate::mixture::{pattern_weight, subsets_iter, IndexSet};

use super::marginal::marginal_log_pmf;
use super::params::{ModelParams, ZanidmParams, ZanimParams};
use super::pmf::MIN_RENORM;

/// Above this many categories the exponential moment sums get slow.
pub const MOMENTS_WARN_DIM: usize = 25;

/// Mean vector, covariance matrix and the per-category dispersion and
/// zero-inflation indices of an observation with a fixed number of trials.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentsReport {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    /// `Var[Y_j] / E[Y_j]`, absent when the mean is zero.
    pub dispersion_index: Vec<Option<f64>>,
    /// `1 + ln P(Y_j = 0) / E[Y_j]`, absent when the mean is zero.
    pub zero_inflation_index: Vec<Option<f64>>,
}

impl MomentsReport {
    pub fn variance(&self) -> Vec<f64> {
        (0..self.mean.len()).map(|j| self.covariance[j][j]).collect()
    }
}

/// Per-component first and second moments for a component that keeps the
/// categories outside `zero`.
trait ComponentMoments {
    /// `(E[Y_j], E[Y_j²])`, or `None` if the component carries no mass.
    fn single(&self, zero: IndexSet, j: usize, n: f64) -> Option<(f64, f64)>;
    /// `E[Y_j Y_h]`.
    fn cross(&self, zero: IndexSet, j: usize, h: usize, n: f64) -> Option<f64>;
}

fn kept_sum(v: &[f64], zero: IndexSet) -> f64 {
    v.iter()
        .enumerate()
        .filter(|(l, _)| !zero.contains(*l))
        .map(|(_, x)| x)
        .sum()
}

impl ComponentMoments for ZanimParams {
    fn single(&self, zero: IndexSet, j: usize, n: f64) -> Option<(f64, f64)> {
        let mass = kept_sum(self.theta(), zero);
        if mass <= MIN_RENORM {
            return None;
        }
        let t = self.theta()[j] / mass;
        Some((n * t, n * t * (1.0 - t) + n * n * t * t))
    }

    fn cross(&self, zero: IndexSet, j: usize, h: usize, n: f64) -> Option<f64> {
        let mass = kept_sum(self.theta(), zero);
        if mass <= MIN_RENORM {
            return None;
        }
        Some(n * (n - 1.0) * self.theta()[j] * self.theta()[h] / (mass * mass))
    }
}

impl ComponentMoments for ZanidmParams {
    fn single(&self, zero: IndexSet, j: usize, n: f64) -> Option<(f64, f64)> {
        let s = kept_sum(self.alpha(), zero);
        let a = self.alpha()[j];
        let b = s - a;
        Some((n * a / s, n * a * (n * (1.0 + a) + b) / (s * (1.0 + s))))
    }

    fn cross(&self, zero: IndexSet, j: usize, h: usize, n: f64) -> Option<f64> {
        let s = kept_sum(self.alpha(), zero);
        Some(n * (n - 1.0) * self.alpha()[j] * self.alpha()[h] / (s * (s + 1.0)))
    }
}

fn mixture_moments<P: ComponentMoments>(p: &P, zeta: &[f64], n: u64) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let d = zeta.len();
    if d >= MOMENTS_WARN_DIM {
        log::warn!("moment sums over 2^{} zero patterns for d = {d}", d - 1);
    }
    let nf = n as f64;
    let full = (1u64 << d) - 1;
    let mut mean = vec![0.0; d];
    let mut second = vec![0.0; d];
    for j in 0..d {
        let eta_n = pattern_weight(zeta, IndexSet::from_mask(full & !(1 << j)));
        mean[j] = eta_n * nf;
        second[j] = eta_n * nf * nf;
        let zero_sets = std::iter::once(IndexSet::EMPTY).chain(subsets_iter(d, IndexSet::from_indices([j]))?);
        for zero in zero_sets {
            let eta = pattern_weight(zeta, zero);
            if eta == 0.0 {
                continue;
            }
            if let Some((m1, m2)) = p.single(zero, j, nf) {
                mean[j] += eta * m1;
                second[j] += eta * m2;
            }
        }
    }
    let mut cov = vec![vec![0.0; d]; d];
    for j in 0..d {
        cov[j][j] = (second[j] - mean[j] * mean[j]).max(0.0);
        for h in (j + 1)..d {
            let mut m11 = 0.0;
            let zero_sets =
                std::iter::once(IndexSet::EMPTY).chain(subsets_iter(d, IndexSet::from_indices([j, h]))?);
            for zero in zero_sets {
                let eta = pattern_weight(zeta, zero);
                if eta == 0.0 {
                    continue;
                }
                if let Some(v) = p.cross(zero, j, h, nf) {
                    m11 += eta * v;
                }
            }
            let c = m11 - mean[j] * mean[h];
            cov[j][h] = c;
            cov[h][j] = c;
        }
    }
    Ok((mean, cov))
}

fn report(p: &ModelParams, n: u64, mean: Vec<f64>, covariance: Vec<Vec<f64>>) -> Result<MomentsReport> {
    let d = mean.len();
    let mut dispersion_index = Vec::with_capacity(d);
    let mut zero_inflation_index = Vec::with_capacity(d);
    for j in 0..d {
        if mean[j] > 0.0 {
            dispersion_index.push(Some(covariance[j][j] / mean[j]));
            let ln_p0 = marginal_log_pmf(p, j, 0, n)?;
            zero_inflation_index.push(Some(1.0 + ln_p0 / mean[j]));
        } else {
            dispersion_index.push(None);
            zero_inflation_index.push(None);
        }
    }
    Ok(MomentsReport {
        mean,
        covariance,
        dispersion_index,
        zero_inflation_index,
    })
}

pub fn zanim_moments(p: &ZanimParams, n: u64) -> Result<MomentsReport> {
    let (mean, cov) = mixture_moments(p, p.zeta(), n)?;
    report(&ModelParams::Zanim(p.clone()), n, mean, cov)
}

pub fn zanidm_moments(p: &ZanidmParams, n: u64) -> Result<MomentsReport> {
    let (mean, cov) = mixture_moments(p, p.zeta(), n)?;
    report(&ModelParams::Zanidm(p.clone()), n, mean, cov)
}

pub fn moments(p: &ModelParams, n: u64) -> Result<MomentsReport> {
    match p {
        ModelParams::Zanim(q) => zanim_moments(q, n),
        ModelParams::Zanidm(q) => zanidm_moments(q, n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn multinomial_limit() {
        let theta = vec![0.2, 0.5, 0.3];
        let r = zanim_moments(&ZanimParams::new(theta.clone(), vec![0.0; 3]).unwrap(), 12).unwrap();
        for j in 0..3 {
            assert!(close(r.mean[j], 12.0 * theta[j], 1e-12));
            assert!(close(r.covariance[j][j], 12.0 * theta[j] * (1.0 - theta[j]), 1e-12));
            for h in 0..3 {
                if h != j {
                    assert!(close(r.covariance[j][h], -12.0 * theta[j] * theta[h], 1e-12));
                }
            }
        }
    }

    #[test]
    fn dirichlet_multinomial_limit() {
        let alpha = [1.0, 2.0, 3.0];
        let r = zanidm_moments(&ZanidmParams::new(alpha.to_vec(), vec![0.0; 3]).unwrap(), 10).unwrap();
        let s = 6.0;
        let n = 10.0;
        for j in 0..3 {
            let pj = alpha[j] / s;
            assert!(close(r.mean[j], n * pj, 1e-12));
            let var = n * pj * (1.0 - pj) * (n + s) / (1.0 + s);
            assert!(close(r.covariance[j][j], var, 1e-11));
            for h in (j + 1)..3 {
                let c = -n * pj * (alpha[h] / s) * (n + s) / (1.0 + s);
                assert!(close(r.covariance[j][h], c, 1e-11));
            }
        }
    }

    #[test]
    fn zero_mean_leaves_indices_absent() {
        let r = zanim_moments(&ZanimParams::new(vec![0.5, 0.5], vec![1.0, 0.0]).unwrap(), 5).unwrap();
        assert_eq!(r.mean[0], 0.0);
        assert_eq!(r.dispersion_index[0], None);
        assert_eq!(r.zero_inflation_index[0], None);
        assert!(r.zero_inflation_index[1].is_some());
    }
}
