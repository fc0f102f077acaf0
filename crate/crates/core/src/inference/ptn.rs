//! Power-truncated-normal variates, density `∝ x^{p−1} exp(−a x² + b x)` on
//! `(0, ∞)`, by exact rejection sampling.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::numeric::{ln_normal_upper_tail, log_sum_exp_iter};
use crate::sampling::ln_gamma_variate;

/// Normal `N(mu, sigma²)` truncated to `(lo, ∞)`.
pub fn truncated_normal<R: Rng + ?Sized>(mu: f64, sigma: f64, lo: f64, rng: &mut R) -> f64 {
    let z_lo = (lo - mu) / sigma;
    if z_lo < 0.5 {
        loop {
            let z: f64 = rng.sample(StandardNormal);
            if z > z_lo {
                return mu + sigma * z;
            }
        }
    }
    // Exponential proposals with the optimal rate for the tail.
    let rate = 0.5 * (z_lo + (z_lo * z_lo + 4.0).sqrt());
    loop {
        let e: f64 = rng.sample(Exp1);
        let z = z_lo + e / rate;
        let u: f64 = rng.random();
        if u.ln() <= -0.5 * (z - rate) * (z - rate) {
            return mu + sigma * z;
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Envelope {
    /// Normal proposal truncated at 0, accepted with `exp(coef·(ln x − ln m) − slope·(x − m))`.
    Normal { mu: f64, sigma: f64, m: f64, coef: f64 },
    /// `Gamma(p, rate)` proposal accepted with `exp(−a (x − m)²)`.
    Gamma { shape: f64, rate: f64, m: f64 },
    /// Split at `c`: `x^{p−1}` on `(0, c]`, truncated normal on `(c, ∞)`.
    Split { c: f64, ln_gmax: f64, prob_left: f64 },
}

/// Exact PTN sampler with a precomputed rejection envelope.
#[derive(Debug, Clone, Copy)]
pub struct PtnSampler {
    p: f64,
    a: f64,
    b: f64,
    env: Envelope,
}

impl PtnSampler {
    pub fn new(p: f64, a: f64, b: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite() && a > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "PTN parameters must satisfy p > 0, a > 0, finite b (p = {p}, a = {a}, b = {b})"
            )));
        }
        let env = if p >= 1.0 {
            let m = (b + (b * b + 8.0 * a * (p - 1.0)).sqrt()) / (4.0 * a);
            let curvature = if p > 1.0 { (p - 1.0) / (m * m) } else { 0.0 };
            if p == 1.0 || 2.0 * a >= curvature {
                // Bound x^{p−1} by its tangent exponential at the mode.
                let slope = if p > 1.0 { (p - 1.0) / m } else { 0.0 };
                Envelope::Normal {
                    mu: (b + slope) / (2.0 * a),
                    sigma: (0.5 / a).sqrt(),
                    m: if p > 1.0 { m } else { 1.0 },
                    coef: p - 1.0,
                }
            } else {
                // Bound −a x² by its tangent line at the mode.
                Envelope::Gamma {
                    shape: p,
                    rate: (p - 1.0) / m,
                    m,
                }
            }
        } else {
            Self::split_envelope(p, a, b)
        };
        Ok(Self { p, a, b, env })
    }

    fn split_envelope(p: f64, a: f64, b: f64) -> Envelope {
        let s = (0.5 / a).sqrt();
        let mu = b / (2.0 * a);
        let ln_gmax = |c: f64| -> f64 {
            if b <= 0.0 {
                0.0
            } else if mu < c {
                b * b / (4.0 * a)
            } else {
                -a * c * c + b * c
            }
        };
        // Log masses of the two envelope pieces.
        let masses = |c: f64| -> (f64, f64) {
            let left = ln_gmax(c) + p * c.ln() - p.ln();
            let right = (p - 1.0) * c.ln()
                + b * b / (4.0 * a)
                + 0.5 * (std::f64::consts::PI / a).ln()
                + ln_normal_upper_tail((c - mu) / s);
            (left, right)
        };
        let scale_grid = (-10..=10).map(|k| s * 2f64.powi(k));
        let near_mean = [-3.0, -1.0, 0.0, 1.0].map(|k| mu + k * s);
        let mut best = (f64::INFINITY, s, 0.0);
        for c in scale_grid.chain(near_mean).filter(|&c| c > 0.0) {
            let (l, r) = masses(c);
            let total = log_sum_exp_iter([l, r]);
            if total < best.0 {
                best = (total, c, (l - total).exp());
            }
        }
        let (_, c, prob_left) = best;
        Envelope::Split {
            c,
            ln_gmax: ln_gmax(c),
            prob_left,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sample_counted(rng).0
    }

    /// A draw together with the number of proposals it took.
    pub fn sample_counted<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, u64) {
        let mut tries = 0u64;
        loop {
            tries += 1;
            let u: f64 = 1.0 - rng.random::<f64>();
            let ln_u = u.ln();
            match self.env {
                Envelope::Normal { mu, sigma, m, coef } => {
                    let x = truncated_normal(mu, sigma, 0.0, rng);
                    if coef == 0.0 {
                        return (x, tries);
                    }
                    if ln_u <= coef * (x.ln() - m.ln() - (x - m) / m) {
                        return (x, tries);
                    }
                }
                Envelope::Gamma { shape, rate, m } => {
                    let x = ln_gamma_variate(shape, rng).exp() / rate;
                    if x > 0.0 && ln_u <= -self.a * (x - m) * (x - m) {
                        return (x, tries);
                    }
                }
                Envelope::Split { c, ln_gmax, prob_left } => {
                    if rng.random::<f64>() < prob_left {
                        let v: f64 = 1.0 - rng.random::<f64>();
                        let x = c * v.powf(1.0 / self.p);
                        if x > 0.0 && ln_u <= -self.a * x * x + self.b * x - ln_gmax {
                            return (x, tries);
                        }
                    } else {
                        let x = truncated_normal(self.b / (2.0 * self.a), (0.5 / self.a).sqrt(), c, rng);
                        if ln_u <= (self.p - 1.0) * (x / c).ln() {
                            return (x, tries);
                        }
                    }
                }
            }
        }
    }
}

/// One exact draw from `PTN(p, a, b)`.
pub fn sample_ptn<R: Rng + ?Sized>(p: f64, a: f64, b: f64, rng: &mut R) -> Result<f64> {
    Ok(PtnSampler::new(p, a, b)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn invalid_parameters() {
        assert!(PtnSampler::new(0.0, 1.0, 0.0).is_err());
        assert!(PtnSampler::new(1.0, 0.0, 0.0).is_err());
        assert!(PtnSampler::new(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn truncated_normal_tail() {
        let mut rng = rng_from_seed(3);
        let m = 100_000;
        let xs: Vec<f64> = (0..m).map(|_| truncated_normal(0.0, 1.0, 3.0, &mut rng)).collect();
        assert!(xs.iter().all(|&x| x > 3.0));
        // E[Z | Z > 3] = φ(3) / (1 − Φ(3)).
        let want = (-4.5f64).exp() / (2.0 * std::f64::consts::PI).sqrt() / ln_normal_upper_tail(3.0).exp();
        let mean = xs.iter().sum::<f64>() / m as f64;
        assert!((mean - want).abs() < 0.01);
    }

    #[test]
    fn draws_are_positive() {
        let mut rng = rng_from_seed(4);
        for &(p, a, b) in &[(0.3, 1.0, -3.0), (5.0, 0.01, 2.0), (1.0, 2.0, -10.0), (200.0, 300.0, 50.0)] {
            let s = PtnSampler::new(p, a, b).unwrap();
            for _ in 0..1000 {
                let x = s.sample(&mut rng);
                assert!(x > 0.0 && x.is_finite());
            }
        }
    }
}
