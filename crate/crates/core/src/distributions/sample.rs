use rand::Rng;

use crate::counts::CountVector;
use crate::numeric::log_sum_exp_iter;
use crate::sampling::{bernoulli, ln_gamma_variate, multinomial};

use super::params::{ModelParams, ZanidmParams, ZanimParams};

fn zero_vector(d: usize, n: u64) -> CountVector {
    CountVector::new(vec![0; d], n).expect("zero vector is in the extended support")
}

/// Draws one observation with `n` trials from ZANIM.
///
/// Each category survives with probability `1 − ζ_j`; the counts are then
/// multinomial over the survivors with renormalized `θ`. If no survivor has
/// positive probability the draw is `0_d`.
pub fn zanim_sample<R: Rng + ?Sized>(n: u64, p: &ZanimParams, rng: &mut R) -> CountVector {
    let d = p.dim();
    let probs: Vec<f64> = p
        .theta()
        .iter()
        .zip(p.zeta())
        .map(|(&t, &z)| if bernoulli(1.0 - z, rng) { t } else { 0.0 })
        .collect();
    if n == 0 || probs.iter().all(|&w| w <= 0.0) {
        return zero_vector(d, n);
    }
    CountVector::new(multinomial(n, &probs, rng), n).expect("multinomial draw sums to n")
}

/// Draws one observation with `n` trials from ZANIDM.
///
/// Surviving categories receive `Gamma(α_j, 1)` weights; the counts are
/// multinomial in the normalized weights.
pub fn zanidm_sample<R: Rng + ?Sized>(n: u64, p: &ZanidmParams, rng: &mut R) -> CountVector {
    let d = p.dim();
    let ln_w: Vec<f64> = p
        .alpha()
        .iter()
        .zip(p.zeta())
        .map(|(&a, &z)| {
            if bernoulli(1.0 - z, rng) {
                ln_gamma_variate(a, rng)
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    if n == 0 || ln_w.iter().all(|&w| w == f64::NEG_INFINITY) {
        return zero_vector(d, n);
    }
    let total = log_sum_exp_iter(ln_w.iter().copied());
    let probs: Vec<f64> = ln_w.iter().map(|w| (w - total).exp()).collect();
    CountVector::new(multinomial(n, &probs, rng), n).expect("multinomial draw sums to n")
}

pub fn sample<R: Rng + ?Sized>(n: u64, p: &ModelParams, rng: &mut R) -> CountVector {
    match p {
        ModelParams::Zanim(p) => zanim_sample(n, p, rng),
        ModelParams::Zanidm(p) => zanidm_sample(n, p, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn full_inflation_gives_zero() {
        let mut rng = rng_from_seed(5);
        let p = ZanimParams::new(vec![0.2, 0.5, 0.3], vec![1.0; 3]).unwrap();
        let q = ZanidmParams::new(vec![1.0, 2.0, 3.0], vec![1.0; 3]).unwrap();
        for _ in 0..100 {
            assert!(zanim_sample(9, &p, &mut rng).is_all_zero());
            assert!(zanidm_sample(9, &q, &mut rng).is_all_zero());
        }
    }

    #[test]
    fn draws_are_reproducible() {
        let p = ZanidmParams::new(vec![1.0, 2.0, 3.0], vec![0.1, 0.2, 0.3]).unwrap();
        let a: Vec<_> = {
            let mut rng = rng_from_seed(9);
            (0..50).map(|_| zanidm_sample(7, &p, &mut rng)).collect()
        };
        let b: Vec<_> = {
            let mut rng = rng_from_seed(9);
            (0..50).map(|_| zanidm_sample(7, &p, &mut rng)).collect()
        };
        assert_eq!(a, b);
    }
}
