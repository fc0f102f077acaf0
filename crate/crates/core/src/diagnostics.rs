//! Chain diagnostics and study metrics.

use rand::Rng;

use crate::distributions::sample;
use crate::error::{Error, Result};
use crate::inference::ChainDraws;
use crate::numeric::{log_sum_exp, quantile_sorted};

/// Effective sample size of a single chain.
///
/// Autocovariances are direct sums; the lag sum stops at the first
/// non-positive pair `γ_{2m} + γ_{2m+1}` and pairs are forced to be
/// non-increasing (Geyer's initial monotone sequence). A constant chain has
/// ESS equal to its length. The autocorrelation time is floored at
/// `1 / log10(M)` so antithetic chains stay finite.
pub fn effective_sample_size(chain: &[f64]) -> Result<f64> {
    let m = chain.len();
    if m < 4 {
        return Err(Error::InvalidArgument(format!(
            "effective sample size needs at least 4 draws, got {m}"
        )));
    }
    if chain.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("chain contains non-finite values".into()));
    }
    let mf = m as f64;
    let mean = chain.iter().sum::<f64>() / mf;
    let centered: Vec<f64> = chain.iter().map(|x| x - mean).collect();
    let autocov = |k: usize| -> f64 {
        centered[..m - k]
            .iter()
            .zip(&centered[k..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / mf
    };
    let gamma0 = autocov(0);
    if gamma0.sqrt() <= 1e-12 * mean.abs() || gamma0 == 0.0 {
        return Ok(mf);
    }
    let mut sum_pairs = 0.0;
    let mut prev = f64::INFINITY;
    let mut k = 0;
    while k + 1 < m {
        let pair = autocov(k) + autocov(k + 1);
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev);
        sum_pairs += pair;
        prev = pair;
        k += 2;
    }
    let tau = (-1.0 + 2.0 * sum_pairs / gamma0).max(1.0 / mf.log10());
    Ok(mf / tau)
}

/// One row of a posterior summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSummary {
    pub parameter: String,
    pub mean: f64,
    /// 2.5% quantile.
    pub lower: f64,
    /// 97.5% quantile.
    pub upper: f64,
    pub ess_ratio: f64,
}

/// Quantile rule used for credible intervals.
pub const QUANTILE_METHOD: &str = "type 7 (linear interpolation between order statistics)";

/// Mean, 95% equal-tailed interval and ESS ratio of one column of draws.
pub fn summarize(parameter: &str, values: &[f64]) -> Result<ParameterSummary> {
    let ess = effective_sample_size(values)?;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(ParameterSummary {
        parameter: parameter.to_string(),
        mean: values.iter().sum::<f64>() / values.len() as f64,
        lower: quantile_sorted(&sorted, 0.025),
        upper: quantile_sorted(&sorted, 0.975),
        ess_ratio: ess / values.len() as f64,
    })
}

/// Summary of every column of a chain.
pub fn posterior_summary(draws: &ChainDraws) -> Result<Vec<ParameterSummary>> {
    draws
        .columns
        .iter()
        .enumerate()
        .map(|(k, name)| summarize(name, &draws.column_at(k)))
        .collect()
}

/// Relative bias, 95% interval coverage and ESS ratio per parameter,
/// averaged over replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport {
    pub parameters: Vec<String>,
    /// `None` when some replicate had a zero true value for the parameter.
    pub relative_bias: Vec<Option<f64>>,
    pub coverage_95: Vec<f64>,
    pub ess_ratio: Vec<f64>,
}

impl RecoveryReport {
    /// Parameters left out of the bias because a true value was zero.
    pub fn excluded_from_bias(&self) -> Vec<&str> {
        self.parameters
            .iter()
            .zip(&self.relative_bias)
            .filter(|(_, b)| b.is_none())
            .map(|(p, _)| p.as_str())
            .collect()
    }

    /// Average relative bias over the parameters with nonzero truths.
    pub fn overall_bias(&self) -> Option<f64> {
        let kept: Vec<f64> = self.relative_bias.iter().flatten().copied().collect();
        (!kept.is_empty()).then(|| kept.iter().sum::<f64>() / kept.len() as f64)
    }

    pub fn overall_coverage(&self) -> f64 {
        mean(&self.coverage_95)
    }

    pub fn overall_ess_ratio(&self) -> f64 {
        mean(&self.ess_ratio)
    }

    /// Report restricted to parameters whose names start with `prefix`.
    pub fn block(&self, prefix: &str) -> RecoveryReport {
        let keep: Vec<usize> = (0..self.parameters.len())
            .filter(|&k| self.parameters[k].starts_with(prefix))
            .collect();
        RecoveryReport {
            parameters: keep.iter().map(|&k| self.parameters[k].clone()).collect(),
            relative_bias: keep.iter().map(|&k| self.relative_bias[k]).collect(),
            coverage_95: keep.iter().map(|&k| self.coverage_95[k]).collect(),
            ess_ratio: keep.iter().map(|&k| self.ess_ratio[k]).collect(),
        }
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Aggregates per-replicate summaries against per-replicate true values.
///
/// `summaries[r]` and `truths[r]` list the same parameters in the same order.
pub fn recovery_metrics(
    summaries: &[Vec<ParameterSummary>],
    truths: &[Vec<f64>],
) -> Result<RecoveryReport> {
    let first = summaries
        .first()
        .ok_or_else(|| Error::InvalidArgument("no replicates".into()))?;
    if truths.len() != summaries.len() {
        return Err(Error::DimensionMismatch {
            expected: summaries.len(),
            got: truths.len(),
        });
    }
    let p = first.len();
    for (s, t) in summaries.iter().zip(truths) {
        if s.len() != p {
            return Err(Error::DimensionMismatch { expected: p, got: s.len() });
        }
        if t.len() != p {
            return Err(Error::DimensionMismatch { expected: p, got: t.len() });
        }
    }
    let r = summaries.len() as f64;
    let mut report = RecoveryReport {
        parameters: first.iter().map(|s| s.parameter.clone()).collect(),
        relative_bias: Vec::with_capacity(p),
        coverage_95: Vec::with_capacity(p),
        ess_ratio: Vec::with_capacity(p),
    };
    for k in 0..p {
        let rows = summaries.iter().zip(truths).map(|(s, t)| (&s[k], t[k]));
        let bias = if truths.iter().any(|t| t[k] == 0.0) {
            log::warn!(
                "parameter {} has a zero true value; excluded from relative bias",
                report.parameters[k]
            );
            None
        } else {
            Some(rows.clone().map(|(s, t)| s.mean / t - 1.0).sum::<f64>() / r)
        };
        let covered = rows
            .clone()
            .filter(|(s, t)| s.lower <= *t && *t <= s.upper)
            .count();
        report.relative_bias.push(bias);
        report.coverage_95.push(covered as f64 / r);
        report.ess_ratio.push(rows.map(|(s, _)| s.ess_ratio).sum::<f64>() / r);
    }
    Ok(report)
}

/// Importance-sampling estimate of the expected log pointwise predictive
/// density.
#[derive(Debug, Clone, PartialEq)]
pub struct ElpdReport {
    pub elpd: f64,
    pub se: f64,
    pub pointwise: Vec<f64>,
    /// Per observation, the number of draws with zero likelihood that were
    /// left out of its weights.
    pub excluded_draws: Vec<usize>,
}

/// ELPD from an `M × n` log-likelihood matrix (rows are draws).
///
/// Raw ratios `1 / p(y_i | ϑ^(m))` are truncated at their mean times `√M`
/// before weighting. Draws with `-∞` log-likelihood for an observation are
/// excluded for that observation only.
pub fn elpd_is(loglik: &[Vec<f64>]) -> Result<ElpdReport> {
    let n = loglik
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::InvalidArgument("log-likelihood matrix has no draws".into()))?;
    if n == 0 {
        return Err(Error::InvalidArgument("log-likelihood matrix has no observations".into()));
    }
    if let Some(row) = loglik.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: row.len() });
    }
    let mut pointwise = Vec::with_capacity(n);
    let mut excluded_draws = Vec::with_capacity(n);
    for i in 0..n {
        let mut ll = Vec::with_capacity(loglik.len());
        for (m, row) in loglik.iter().enumerate() {
            let v = row[i];
            if v.is_nan() || v == f64::INFINITY {
                return Err(Error::Domain(format!(
                    "log-likelihood of observation {} under draw {} is {v}",
                    i + 1,
                    m + 1
                )));
            }
            if v.is_finite() {
                ll.push(v);
            }
        }
        let excluded = loglik.len() - ll.len();
        if ll.is_empty() {
            return Err(Error::Domain(format!(
                "observation {} has zero likelihood under every draw",
                i + 1
            )));
        }
        if excluded > 0 {
            log::warn!("observation {}: {excluded} draws with zero likelihood excluded", i + 1);
        }
        let mf = ll.len() as f64;
        let log_ratio: Vec<f64> = ll.iter().map(|v| -v).collect();
        let cap = log_sum_exp(&log_ratio)? - mf.ln() + 0.5 * mf.ln();
        let log_w: Vec<f64> = log_ratio.iter().map(|&r| r.min(cap)).collect();
        let num: Vec<f64> = log_w.iter().zip(&ll).map(|(w, l)| w + l).collect();
        pointwise.push(log_sum_exp(&num)? - log_sum_exp(&log_w)?);
        excluded_draws.push(excluded);
    }
    let elpd = pointwise.iter().sum::<f64>();
    let se = if n > 1 {
        let mu = elpd / n as f64;
        let var = pointwise.iter().map(|p| (p - mu).powi(2)).sum::<f64>() / (n - 1) as f64;
        (n as f64 * var).sqrt()
    } else {
        0.0
    };
    Ok(ElpdReport { elpd, se, pointwise, excluded_draws })
}

/// Posterior predictive relative frequency of count `k` in one category.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveBand {
    /// Category, numbered from 1.
    pub category: usize,
    pub k: u64,
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

/// For every retained draw, simulates a dataset with the given per-row
/// trials and records the relative frequency of each count `0..=max_k` per
/// category; returns the mean and 95% band of those frequencies.
pub fn posterior_predictive_bands<R: Rng + ?Sized>(
    draws: &ChainDraws,
    trials: &[u64],
    max_k: u64,
    rng: &mut R,
) -> Result<Vec<PredictiveBand>> {
    if draws.is_empty() {
        return Err(Error::InvalidArgument("no posterior draws".into()));
    }
    if trials.is_empty() {
        return Err(Error::InvalidArgument("no rows to simulate".into()));
    }
    let d = draws.dim;
    let width = max_k as usize + 1;
    let n = trials.len() as f64;
    // freq[j * width + k][m]
    let mut freq = vec![Vec::with_capacity(draws.len()); d * width];
    let mut counts = vec![0usize; d * width];
    for m in 0..draws.len() {
        let params = draws.params_at(m)?;
        counts.iter_mut().for_each(|c| *c = 0);
        for &nt in trials {
            let y = sample(nt, &params, rng);
            for (j, &v) in y.counts().iter().enumerate() {
                if v <= max_k {
                    counts[j * width + v as usize] += 1;
                }
            }
        }
        for (cell, &c) in freq.iter_mut().zip(&counts) {
            cell.push(c as f64 / n);
        }
    }
    let mut out = Vec::with_capacity(d * width);
    for j in 0..d {
        for k in 0..width {
            let mut v = std::mem::take(&mut freq[j * width + k]);
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            v.sort_by(f64::total_cmp);
            out.push(PredictiveBand {
                category: j + 1,
                k: k as u64,
                mean,
                lower: quantile_sorted(&v, 0.025),
                upper: quantile_sorted(&v, 0.975),
            });
        }
    }
    Ok(out)
}

/// Observed relative frequency of each count `0..=max_k` per category, in
/// the same layout as [`posterior_predictive_bands`].
pub fn observed_frequencies(data: &crate::CountDataset, max_k: u64) -> Vec<(usize, u64, f64)> {
    let n = data.len() as f64;
    let mut out = Vec::with_capacity(data.dim() * (max_k as usize + 1));
    for j in 0..data.dim() {
        for k in 0..=max_k {
            let c = data.rows().iter().filter(|y| y.counts()[j] == k).count();
            out.push((j + 1, k, c as f64 / n));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Model;
    use crate::rng::rng_from_seed;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn ess_of_iid_and_ar1_chains() {
        let mut rng = rng_from_seed(1);
        let iid: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let r = effective_sample_size(&iid).unwrap() / 1e5;
        assert!((0.9..=1.1).contains(&r), "{r}");

        let rho = 0.5;
        let mut x = 0.0;
        let ar: Vec<f64> = (0..100_000)
            .map(|_| {
                let e: f64 = StandardNormal.sample(&mut rng);
                x = rho * x + (1.0f64 - rho * rho).sqrt() * e;
                x
            })
            .collect();
        let r = effective_sample_size(&ar).unwrap() / 1e5;
        let want = (1.0 - rho) / (1.0 + rho);
        assert!((r - want).abs() < 0.1 * want, "{r}");
    }

    #[test]
    fn ess_edge_cases() {
        assert_eq!(effective_sample_size(&[2.5; 10]).unwrap(), 10.0);
        assert!(effective_sample_size(&[1.0, 2.0, 3.0]).is_err());
        assert!(effective_sample_size(&[1.0, 2.0, f64::NAN, 3.0]).is_err());
        let alt: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(effective_sample_size(&alt).unwrap().is_finite());
    }

    #[test]
    fn summary_of_a_uniform_grid() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        let s = summarize("x", &v).unwrap();
        assert_eq!(s.mean, 500.5);
        assert!((s.lower - 25.975).abs() < 1e-9);
        assert!((s.upper - 975.025).abs() < 1e-9);
        let c = summarize("c", &[3.0; 20]).unwrap();
        assert_eq!((c.mean, c.lower, c.upper, c.ess_ratio), (3.0, 3.0, 3.0, 1.0));
    }

    fn summary(mean: f64, lower: f64, upper: f64) -> ParameterSummary {
        ParameterSummary { parameter: "p".into(), mean, lower, upper, ess_ratio: 0.5 }
    }

    #[test]
    fn recovery_examples() {
        let r = recovery_metrics(&[vec![summary(1.1, 0.9, 1.3)]], &[vec![1.0]]).unwrap();
        assert!((r.relative_bias[0].unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(r.coverage_95[0], 1.0);

        let reps: Vec<Vec<ParameterSummary>> = (0..50)
            .map(|i| vec![if i < 47 { summary(1.0, 0.5, 1.5) } else { summary(3.0, 2.5, 3.5) }])
            .collect();
        let truths = vec![vec![1.0]; 50];
        let r = recovery_metrics(&reps, &truths).unwrap();
        assert!((r.coverage_95[0] - 0.94).abs() < 1e-12);

        let r = recovery_metrics(&[vec![summary(0.1, 0.0, 0.2)]], &[vec![0.0]]).unwrap();
        assert_eq!(r.relative_bias, vec![None]);
        assert_eq!(r.excluded_from_bias(), vec!["p"]);
        assert_eq!(r.overall_bias(), None);
    }

    #[test]
    fn elpd_with_one_draw_is_the_loglik_sum() {
        let ll = vec![vec![-1.5, -2.25, -0.5]];
        let r = elpd_is(&ll).unwrap();
        assert!((r.elpd - (-4.25)).abs() < 1e-14);
        let constant = vec![vec![-1.0, -2.0]; 7];
        let r = elpd_is(&constant).unwrap();
        assert!((r.elpd + 3.0).abs() < 1e-13);
        assert!((r.se - (2.0f64 * 0.5).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn elpd_matches_direct_evaluation() {
        let ll: [[f64; 2]; 3] = [[-1.0, -3.0], [-2.0, -0.5], [-1.5, -2.5]];
        let mut want = 0.0;
        for i in 0..2 {
            let r: Vec<f64> = ll.iter().map(|row| (-row[i]).exp()).collect();
            let cap = r.iter().sum::<f64>() / 3.0 * 3f64.sqrt();
            let w: Vec<f64> = r.iter().map(|&x| x.min(cap)).collect();
            let num: f64 = w.iter().zip(&ll).map(|(w, row)| w * row[i].exp()).sum();
            want += (num / w.iter().sum::<f64>()).ln();
        }
        let got = elpd_is(&ll.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap();
        assert!((got.elpd - want).abs() < 1e-13, "{} vs {want}", got.elpd);
    }

    #[test]
    fn elpd_handles_zero_likelihood_draws() {
        let ll = vec![vec![-1.0, f64::NEG_INFINITY], vec![-1.0, -2.0]];
        let r = elpd_is(&ll).unwrap();
        assert_eq!(r.excluded_draws, vec![0, 1]);
        assert!((r.pointwise[1] + 2.0).abs() < 1e-14);
        let bad = vec![vec![-1.0, f64::NEG_INFINITY], vec![-1.0, f64::NEG_INFINITY]];
        let err = elpd_is(&bad).unwrap_err().to_string();
        assert!(err.contains("observation 2"), "{err}");
        assert!(elpd_is(&[vec![f64::NAN]]).is_err());
    }

    #[test]
    fn degenerate_draws_give_point_mass_bands() {
        let draws = ChainDraws {
            model: Model::Zanim,
            dim: 2,
            columns: vec!["theta_1".into(), "theta_2".into(), "zeta_1".into(), "zeta_2".into()],
            draws: vec![vec![0.5, 0.5, 1.0, 1.0]; 5],
            loglik: Vec::new(),
            acceptance: None,
            zeta_fixed: false,
        };
        let mut rng = rng_from_seed(2);
        let bands = posterior_predictive_bands(&draws, &[4; 10], 4, &mut rng).unwrap();
        for b in bands {
            let want = if b.k == 0 { 1.0 } else { 0.0 };
            assert_eq!((b.mean, b.lower, b.upper), (want, want, want));
        }
    }

    proptest::proptest! {
        #[test]
        fn ess_is_affine_invariant(
            xs in proptest::collection::vec(-10.0f64..10.0, 8..200),
            a in 0.1f64..10.0,
            b in -100.0f64..100.0,
            flip in proptest::bool::ANY,
        ) {
            let a = if flip { -a } else { a };
            let e0 = effective_sample_size(&xs).unwrap();
            let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            let e1 = effective_sample_size(&ys).unwrap();
            proptest::prop_assert!((e0 - e1).abs() <= 1e-6 * e0.max(1.0));
        }

        #[test]
        fn recovery_is_permutation_invariant(
            means in proptest::collection::vec(0.5f64..2.0, 2..12),
            shift in 0usize..12,
        ) {
            let reps: Vec<Vec<ParameterSummary>> =
                means.iter().map(|&m| vec![summary(m, m - 0.3, m + 0.3)]).collect();
            let truths = vec![vec![1.0]; reps.len()];
            let mut rotated = reps.clone();
            rotated.rotate_left(shift % reps.len());
            let a = recovery_metrics(&reps, &truths).unwrap();
            let b = recovery_metrics(&rotated, &truths).unwrap();
            proptest::prop_assert!((a.relative_bias[0].unwrap() - b.relative_bias[0].unwrap()).abs() < 1e-12);
            proptest::prop_assert_eq!(a.coverage_95, b.coverage_95);
        }

        #[test]
        fn bands_contain_their_means(seed in 0u64..1000) {
            let mut rng = rng_from_seed(seed);
            let draws = ChainDraws {
                model: Model::Zanidm,
                dim: 3,
                columns: Vec::new(),
                draws: (0..20).map(|_| {
                    let mut r: Vec<f64> = (0..3).map(|_| rng.random_range(0.2..5.0)).collect();
                    r.extend((0..3).map(|_| rng.random_range(0.0..0.6)));
                    r
                }).collect(),
                loglik: Vec::new(),
                acceptance: None,
                zeta_fixed: false,
            };
            for b in posterior_predictive_bands(&draws, &[6; 15], 6, &mut rng).unwrap() {
                proptest::prop_assert!(b.lower <= b.mean + 1e-12 && b.mean <= b.upper + 1e-12);
            }
        }
    }
}
