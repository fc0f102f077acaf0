use crate::error::{Error, Result};
use crate::mixture::{subsets_iter, IndexSet, LogZetaFactors};
use crate::numeric::{log_sum_exp_iter, LogSumExp};

use super::params::ZanimParams;
use super::pmf::MIN_RENORM;

/// Log of the ZANIM moment generating function `E[exp(t·Y)]` for `n` trials.
pub fn zanim_log_mgf(t: &[f64], p: &ZanimParams, n: u64) -> Result<f64> {
    let d = p.dim();
    if t.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: t.len(),
        });
    }
    if let Some(j) = t.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("t[{j}] = {} is not finite", t[j])));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    let theta = p.theta();
    let lz = LogZetaFactors::new(p.zeta());
    let full = (1u64 << d) - 1;
    let mut acc = LogSumExp::new();

    acc.add(lz.log_weight(IndexSet::from_mask(full)));
    for j in 0..d {
        acc.add(lz.log_weight(IndexSet::from_mask(full & !(1 << j))) + nf * t[j]);
    }
    // ln Σ_{j∉K} θ_j e^{t_j} − ln Σ_{j∉K} θ_j
    let kept_term = |zero: IndexSet| -> f64 {
        let kept = || (0..d).filter(move |&j| !zero.contains(j));
        let mass: f64 = kept().map(|j| theta[j]).sum();
        if mass <= MIN_RENORM {
            return f64::NEG_INFINITY;
        }
        let lse = log_sum_exp_iter(kept().map(|j| theta[j].ln() + t[j]));
        lse - mass.ln()
    };
    for zero in std::iter::once(IndexSet::EMPTY).chain(subsets_iter(d, IndexSet::EMPTY)?) {
        let ln_eta = lz.log_weight(zero);
        if ln_eta == f64::NEG_INFINITY {
            continue;
        }
        acc.add(ln_eta + nf * kept_term(zero));
    }
    Ok(acc.value())
}

/// ZANIM moment generating function.
pub fn zanim_mgf(t: &[f64], p: &ZanimParams, n: u64) -> Result<f64> {
    zanim_log_mgf(t, p, n).map(f64::exp)
}
