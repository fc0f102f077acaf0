use rand::Rng;

use zani_core::distributions::{zanidm_sample, zanim_sample, ZanidmParams, ZanimParams};
use zani_core::inference::*;
use zani_core::rng::rng_from_seed;
use zani_core::sampling::gamma_variate;
use zani_core::{CountDataset, CountVector};

// ---------- quadrature oracle ----------

/// Mean and variance of `g(u)` where `u` has unnormalized log density
/// `log_f` on `[lo, hi]`, by the trapezoid rule on a fine grid.
fn quad_moments(log_f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let k = 200_001;
    let h = (hi - lo) / (k - 1) as f64;
    let us: Vec<f64> = (0..k).map(|i| lo + i as f64 * h).collect();
    let lf: Vec<f64> = us.iter().map(|&u| log_f(u)).collect();
    let top = lf.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = lf
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let edge = if i == 0 || i == k - 1 { 0.5 } else { 1.0 };
            edge * (l - top).exp()
        })
        .collect();
    let z: f64 = w.iter().sum();
    let m1: f64 = us.iter().zip(&w).map(|(&u, &wi)| wi * g(u)).sum::<f64>() / z;
    let m2: f64 = us.iter().zip(&w).map(|(&u, &wi)| wi * g(u) * g(u)).sum::<f64>() / z;
    (m1, m2 - m1 * m1)
}

fn sample_moments(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
    (mean, var)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// PTN moments by quadrature over `u = ln x`.
fn ptn_quadrature(p: f64, a: f64, b: f64) -> (f64, f64) {
    let mode = (b + (b * b + 8.0 * a * p).sqrt()) / (4.0 * a);
    let hi = (mode + 40.0 / (2.0 * a).sqrt() + 40.0 * mode).ln();
    quad_moments(
        |u| {
            let x = u.exp();
            p * u - a * x * x + b * x
        },
        f64::exp,
        -60.0 / p.min(1.0),
        hi,
    )
}

const PTN_GRID: [(f64, f64, f64); 12] = [
    (0.3, 1.0, -2.0),
    (0.5, 10.0, 5.0),
    (0.8, 0.5, 0.5),
    (1.0, 1.0, 0.5),
    (1.0, 2.0, -3.0),
    (1.5, 0.01, -0.05),
    (2.0, 50.0, 0.1),
    (3.0, 2.0, -1.0),
    (5.0, 0.1, 1.0),
    (10.0, 1.0, -5.0),
    (51.0, 25.0, 40.0),
    (200.0, 100.0, 150.0),
];

#[test]
fn ptn_matches_quadrature() {
    let mut rng = rng_from_seed(101);
    for &(p, a, b) in &PTN_GRID {
        let s = PtnSampler::new(p, a, b).unwrap();
        let m = 1_000_000;
        let mut tries = 0u64;
        let xs: Vec<f64> = (0..m)
            .map(|_| {
                let (x, k) = s.sample_counted(&mut rng);
                tries += k;
                x
            })
            .collect();
        let (mean, var) = sample_moments(&xs);
        let (qm, qv) = ptn_quadrature(p, a, b);
        assert!(rel(mean, qm) < 0.01, "mean p={p} a={a} b={b}: {mean} vs {qm}");
        assert!(rel(var, qv) < 0.01, "var p={p} a={a} b={b}: {var} vs {qv}");
        let acceptance = m as f64 / tries as f64;
        assert!(acceptance >= 0.1, "acceptance {acceptance} at p={p} a={a} b={b}");
    }
}

#[test]
fn ptn_with_unit_power_is_truncated_normal() {
    let (a, b) = (2.0, -1.0);
    let (mu, sigma) = (b / (2.0 * a), (0.5f64 / a).sqrt());
    let mut rng = rng_from_seed(102);
    let m = 1_000_000;
    let xs: Vec<f64> = (0..m).map(|_| sample_ptn(1.0, a, b, &mut rng).unwrap()).collect();
    let (mean, var) = sample_moments(&xs);
    // Truncated-normal mean μ + σ φ(α)/(1 − Φ(α)) with α = −μ/σ.
    let alpha = -mu / sigma;
    let phi = (-0.5 * alpha * alpha).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let tail = zani_core::numeric::ln_normal_upper_tail(alpha).exp();
    let want = mu + sigma * phi / tail;
    assert!((mean - want).abs() < 3.0 * (var / m as f64).sqrt());
}

// ---------- α updates on frozen statistics ----------

fn synthetic_stats() -> (u64, f64) {
    let mut rng = rng_from_seed(103);
    let t = 50u64;
    let sum_log: f64 = (0..t).map(|_| gamma_variate(1.5, 1.0, &mut rng).ln()).sum();
    (t, sum_log)
}

fn beta_quadrature(t: u64, sum_log: f64, prior: &LogNormalPrior) -> (f64, f64) {
    quad_moments(|b| log_target_beta(b, t, sum_log, prior), f64::exp, -12.0, 8.0)
}

#[test]
fn da_ptn_matches_quadrature() {
    let (t, sum_log) = synthetic_stats();
    let prior = match_gamma_prior(5.0).unwrap();
    // Integrate over β = ln α with the Jacobian α.
    let (qm, qv) = quad_moments(|b| log_target_alpha(b.exp(), t, sum_log, &prior) + b, f64::exp, -12.0, 8.0);
    let mut rng = rng_from_seed(104);
    let mut alpha = 1.0;
    let mut xs = Vec::with_capacity(100_000);
    for it in 0..201_000 {
        alpha = update_alpha_da_ptn(t, sum_log, &prior, alpha, &mut rng).unwrap().0;
        if it >= 1000 && it % 2 == 0 {
            xs.push(alpha);
        }
    }
    let (mean, var) = sample_moments(&xs);
    assert!(rel(mean, qm) < 0.02, "{mean} vs {qm}");
    assert!(rel(var, qv) < 0.02, "{var} vs {qv}");
}

#[test]
fn mh_rw_matches_quadrature() {
    let (t, sum_log) = synthetic_stats();
    let prior = LogNormalPrior { mean: 0.0, variance: 5.0 };
    let (qm, qv) = beta_quadrature(t, sum_log, &prior);
    let mut rng = rng_from_seed(105);
    let mut beta = 0.0;
    let mut xs = Vec::with_capacity(100_000);
    for it in 0..1_001_000 {
        beta = update_alpha_mh_rw(t, sum_log, &prior, beta, 0.2, &mut rng).0;
        if it >= 1000 && it % 10 == 0 {
            xs.push(beta.exp());
        }
    }
    let (mean, var) = sample_moments(&xs);
    assert!(rel(mean, qm) < 0.02, "{mean} vs {qm}");
    assert!(rel(var, qv) < 0.02, "{var} vs {qv}");
}

#[test]
fn slice_matches_quadrature() {
    let (t, sum_log) = synthetic_stats();
    let prior = LogNormalPrior { mean: 0.0, variance: 5.0 };
    let (qm, qv) = beta_quadrature(t, sum_log, &prior);
    let mut rng = rng_from_seed(106);
    let mut beta = 0.0;
    let mut xs = Vec::with_capacity(100_000);
    for it in 0..201_000 {
        beta = update_alpha_slice(t, sum_log, &prior, beta, 1.0, 50, &mut rng).unwrap();
        if it >= 1000 && it % 2 == 0 {
            xs.push(beta.exp());
        }
    }
    let (mean, var) = sample_moments(&xs);
    assert!(rel(mean, qm) < 0.02, "{mean} vs {qm}");
    assert!(rel(var, qv) < 0.02, "{var} vs {qv}");
}

#[test]
fn prior_only_targets_recover_the_normal_prior() {
    let prior = LogNormalPrior { mean: 1.0, variance: 0.5 };
    let mut rng = rng_from_seed(107);
    let mut beta = 1.0;
    let mut mh = Vec::new();
    for it in 0..1_001_000 {
        beta = update_alpha_mh_rw(0, 0.0, &prior, beta, 1.5, &mut rng).0;
        if it >= 1000 && it % 10 == 0 {
            mh.push(beta);
        }
    }
    let mut sl = Vec::new();
    for it in 0..101_000 {
        beta = update_alpha_slice(0, 0.0, &prior, beta, 1.0, 50, &mut rng).unwrap();
        if it >= 1000 {
            sl.push(beta);
        }
    }
    for xs in [mh, sl] {
        let (mean, var) = sample_moments(&xs);
        assert!(rel(mean, 1.0) < 0.02, "mean {mean}");
        assert!(rel(var, 0.5) < 0.02, "var {var}");
    }
}

// ---------- Gibbs samplers ----------

fn zanim_data(n: usize, seed: u64) -> CountDataset {
    let p = ZanimParams::new(vec![0.05, 0.70, 0.25], vec![0.05, 0.15, 0.10]).unwrap();
    let mut rng = rng_from_seed(seed);
    let mut rows: Vec<CountVector> = (0..n).map(|_| zanim_sample(30, &p, &mut rng)).collect();
    // An all-zero row and a row with a single nonzero category.
    rows.push(CountVector::new(vec![0, 0, 0], 30).unwrap());
    rows.push(CountVector::from_counts(vec![0, 30, 0]).unwrap());
    CountDataset::new(rows).unwrap()
}

fn zanidm_data(n: usize, seed: u64) -> CountDataset {
    let p = ZanidmParams::new(vec![1.0, 1.0, 1.0], vec![0.05, 0.15, 0.10]).unwrap();
    let mut rng = rng_from_seed(seed);
    let mut rows: Vec<CountVector> = (0..n).map(|_| zanidm_sample(30, &p, &mut rng)).collect();
    rows.push(CountVector::new(vec![0, 0, 0], 30).unwrap());
    CountDataset::new(rows).unwrap()
}

#[test]
fn zanim_sweeps_preserve_invariants() {
    let data = zanim_data(200, 201);
    let mut s = ZanimSampler::new(&data, &PriorSpec::defaults(3), false).unwrap();
    let mut rng = rng_from_seed(202);
    for _ in 0..300 {
        s.sweep(&mut rng);
        s.check_invariants().unwrap();
    }
}

#[test]
fn zanidm_sweeps_preserve_invariants() {
    let data = zanidm_data(200, 203);
    let mut rng = rng_from_seed(204);
    for (sampler, priors) in [
        (AlphaSampler::DaPtn, PriorSpec::defaults_gamma_alpha(3).unwrap()),
        (AlphaSampler::mh_rw_default(), PriorSpec::defaults(3)),
        (AlphaSampler::slice_default(), PriorSpec::defaults(3)),
    ] {
        let mut s = ZanidmSampler::new(&data, &priors, sampler, false).unwrap();
        for _ in 0..200 {
            s.sweep(None, &mut rng).unwrap();
            s.check_invariants().unwrap();
        }
    }
}

#[test]
fn mismatched_alpha_prior_is_rejected() {
    let data = zanidm_data(10, 205);
    assert!(ZanidmSampler::new(&data, &PriorSpec::defaults(3), AlphaSampler::DaPtn, false).is_err());
    let gamma = PriorSpec::defaults_gamma_alpha(3).unwrap();
    assert!(ZanidmSampler::new(&data, &gamma, AlphaSampler::slice_default(), false).is_err());
}

#[test]
fn zanim_conjugate_updates_match_their_distributions() {
    let data = zanim_data(300, 206);
    let priors = PriorSpec::defaults(3);
    let mut s = ZanimSampler::new(&data, &priors, false).unwrap();
    let mut rng = rng_from_seed(207);
    for _ in 0..50 {
        s.sweep(&mut rng);
    }
    let n = data.len() as f64;
    let m = 100_000;
    for j in 0..3 {
        let (t, r) = s.counts_stats();
        let (t, r) = (t[j] as f64, r[j] as f64);
        let s_j = s.s_stat(j);
        let mut zs = Vec::with_capacity(m);
        let mut ls = Vec::with_capacity(m);
        for _ in 0..m {
            s.update_zeta(j, &mut rng);
            s.update_lambda(j, &mut rng);
            zs.push(s.zeta()[j]);
            ls.push(s.lambda()[j]);
        }
        let (a, b) = (n - t + 1.0, t + 1.0);
        let beta_mean = a / (a + b);
        let beta_var = a * b / ((a + b).powi(2) * (a + b + 1.0));
        let (zm, _) = sample_moments(&zs);
        assert!((zm - beta_mean).abs() < 3.0 * (beta_var / m as f64).sqrt(), "zeta {j}");
        let (shape, rate) = (r + 0.1, s_j + 0.1);
        let (lm, _) = sample_moments(&ls);
        assert!((lm - shape / rate).abs() < 3.0 * (shape.sqrt() / rate) / (m as f64).sqrt(), "lambda {j}");
    }
}

#[test]
fn collapsed_z_update_with_zero_phi() {
    // A row with N = 0 has φ = 0, so its zero cells are kept with
    // probability 1 − ζ.
    let rows = vec![CountVector::new(vec![0, 0], 0).unwrap(), CountVector::from_counts(vec![3, 4]).unwrap()];
    let data = CountDataset::new(rows).unwrap();
    let priors = PriorSpec::defaults_gamma_alpha(2).unwrap();
    let mut s = ZanidmSampler::new(&data, &priors, AlphaSampler::DaPtn, false).unwrap();
    let mut rng = rng_from_seed(208);
    let mut kept = 0usize;
    let mut expect = 0.0;
    let m = 100_000;
    for _ in 0..m {
        s.update_zeta(0, &mut rng);
        let zeta = s.zeta()[0];
        s.update_z(0, &mut rng);
        s.update_lambda(0, &mut rng);
        if s.state().z[0][0] {
            kept += 1;
            assert!(matches!(&s.state().lambda, LatentLambda::PerCell(l) if l[0][0] > 0.0));
        } else {
            assert!(matches!(&s.state().lambda, LatentLambda::PerCell(l) if l[0][0] == 0.0));
        }
        expect += 1.0 - zeta;
    }
    let freq = kept as f64 / m as f64;
    assert!((freq - expect / m as f64).abs() < 0.01);
}

#[test]
fn fits_are_reproducible() {
    let data = zanidm_data(100, 209);
    let mut cfg = McmcConfig::new(300, 100, 2, 77);
    let priors = PriorSpec::defaults_gamma_alpha(3).unwrap();
    let a = fit_zanidm(&data, &priors, &cfg).unwrap();
    let b = fit_zanidm(&data, &priors, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 100);
    assert_eq!(a.loglik.len(), 100);
    cfg.seed = 78;
    assert_ne!(a, fit_zanidm(&data, &priors, &cfg).unwrap());

    let zdata = zanim_data(100, 210);
    let p = PriorSpec::defaults(3);
    assert_eq!(fit_zanim(&zdata, &p, &cfg).unwrap(), fit_zanim(&zdata, &p, &cfg).unwrap());
}

#[test]
fn baseline_omits_zeta_and_matches_dirichlet_posterior() {
    // Without zeros, the z ≡ 1 path with λ_j ~ Gamma(c, d) and a shared rate
    // yields θ | y ~ Dirichlet(c + r).
    let mut rng = rng_from_seed(211);
    let rows: Vec<CountVector> = (0..40)
        .map(|_| {
            let y: Vec<u64> = (0..3).map(|_| rng.random_range(1..10)).collect();
            CountVector::from_counts(y).unwrap()
        })
        .collect();
    let data = CountDataset::new(rows).unwrap();
    let mut cfg = McmcConfig::new(41_000, 1_000, 4, 5);
    cfg.fix_zeta_zero = true;
    cfg.store_loglik = false;
    let draws = fit_zanim(&data, &PriorSpec::defaults(3), &cfg).unwrap();
    assert_eq!(draws.columns, vec!["theta_1", "theta_2", "theta_3"]);
    let r: Vec<f64> = (0..3)
        .map(|j| data.rows().iter().map(|y| y.counts()[j] as f64).sum::<f64>() + 0.1)
        .collect();
    let total: f64 = r.iter().sum();
    for j in 0..3 {
        let col = draws.column(&format!("theta_{}", j + 1)).unwrap();
        let (mean, _) = sample_moments(&col);
        let p = r[j] / total;
        let sd = (p * (1.0 - p) / (total + 1.0)).sqrt();
        // Loose bound: draws are autocorrelated.
        assert!((mean - p).abs() < 10.0 * sd / (col.len() as f64).sqrt(), "theta {j}");
        let params = draws.params_at(0).unwrap();
        assert_eq!(params.zeta(), &[0.0, 0.0, 0.0]);
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let data = zanim_data(10, 212);
    let cfg = McmcConfig::new(10, 10, 1, 0);
    assert!(fit_zanim(&data, &PriorSpec::defaults(3), &cfg).is_err());
    let cfg = McmcConfig::new(10, 0, 1, 0);
    assert!(fit_zanim(&data, &PriorSpec::defaults(4), &cfg).is_err());
}

#[test]
fn mh_adaptation_moves_the_step_during_burn_in_only() {
    let data = zanidm_data(100, 213);
    let mut s = ZanidmSampler::new(
        &data,
        &PriorSpec::defaults(3),
        AlphaSampler::MhRw { step: 0.01, adapt: true },
        false,
    )
    .unwrap();
    let mut rng = rng_from_seed(214);
    for it in 1..=300 {
        s.sweep(Some(it), &mut rng).unwrap();
    }
    let tuned = s.mh_steps();
    assert!(tuned.iter().all(|&st| st > 0.02), "{tuned:?}");
    for _ in 0..50 {
        s.sweep(None, &mut rng).unwrap();
    }
    assert_eq!(s.mh_steps(), tuned);
}
