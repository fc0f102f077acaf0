//! Random variate helpers shared by the exact samplers and the MCMC updates.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma};

use crate::numeric::log_sum_exp_iter;

/// Logarithm of a `Gamma(shape, 1)` variate.
///
/// Small shapes use `Gamma(shape + 1) · U^{1/shape}` so that draws far below
/// the smallest positive double keep a finite logarithm.
pub fn ln_gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    debug_assert!(shape > 0.0);
    if shape >= 1.0 {
        let g = Gamma::new(shape, 1.0).expect("positive shape");
        g.sample(rng).ln()
    } else {
        let g = Gamma::new(shape + 1.0, 1.0).expect("positive shape");
        let u: f64 = 1.0 - rng.random::<f64>();
        g.sample(rng).ln() + u.ln() / shape
    }
}

/// `Gamma(shape, rate)` variate.
pub fn gamma_variate<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    ln_gamma_variate(shape, rng).exp() / rate
}

/// Logarithm of a `Beta(a, b)` variate, via two log-gamma draws.
pub fn ln_beta_variate<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let x = ln_gamma_variate(a, rng);
    let y = ln_gamma_variate(b, rng);
    x - log_sum_exp_iter([x, y])
}

pub fn beta_variate<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    ln_beta_variate(a, b, rng).exp()
}

pub fn bernoulli<R: Rng + ?Sized>(p: f64, rng: &mut R) -> bool {
    rng.random::<f64>() < p
}

/// Multinomial draw by sequential conditional binomials. `probs` need not be
/// normalized; categories with zero weight receive zero counts.
pub fn multinomial<R: Rng + ?Sized>(trials: u64, probs: &[f64], rng: &mut R) -> Vec<u64> {
    let mut out = vec![0u64; probs.len()];
    let mut remaining = trials;
    let mut mass: f64 = probs.iter().sum();
    let last = probs.iter().rposition(|&p| p > 0.0);
    for (j, &p) in probs.iter().enumerate() {
        if remaining == 0 || p <= 0.0 {
            continue;
        }
        if Some(j) == last {
            out[j] = remaining;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let k = Binomial::new(remaining, q).expect("valid binomial").sample(rng);
        out[j] = k;
        remaining -= k;
        mass -= p;
    }
    out
}
