use std::io::Write;

use anyhow::{bail, Context as _, Result};
use zani_core::distributions::{
    log_pmf, marginal_log_pmf, marginal_log_pmf_all, moments, zanim_log_mgf, ModelParams,
};
use zani_core::CountVector;

use crate::cli::EvalCommand;
use crate::io::{fmt, fmt_opt, Table};

/// Runs an evaluation query and writes CSV to `out`.
pub fn run(query: &EvalCommand, out: &mut dyn Write) -> Result<()> {
    let bytes = match query {
        EvalCommand::Pmf { params, y, trials } => {
            let p = params.resolve()?;
            pmf_table(&p.params, y, *trials)?
        }
        EvalCommand::Marginal { params, trials, category, k } => {
            let p = params.resolve()?;
            marginal_table(&p.params, *trials, *category, *k)?
        }
        EvalCommand::Moments { params, trials } => {
            let p = params.resolve()?;
            moments_table(&p.params, *trials)?
        }
        EvalCommand::Mgf { params, t, trials } => {
            let p = params.resolve()?;
            let ModelParams::Zanim(z) = &p.params else {
                bail!("mgf is available for the zanim and multinomial models only");
            };
            let lm = zanim_log_mgf(t, z, *trials)?;
            let mut table = Table::new(None, &["log_mgf", "mgf"])?;
            table.row([fmt(lm), fmt(lm.exp())])?;
            table.into_bytes()?
        }
    };
    out.write_all(&bytes)?;
    Ok(())
}

fn pmf_table(p: &ModelParams, y: &[i64], trials: Option<u64>) -> Result<Vec<u8>> {
    if y.len() != p.dim() {
        bail!("--y has {} entries but the model has {} categories", y.len(), p.dim());
    }
    let mut counts = Vec::with_capacity(y.len());
    for (j, &v) in y.iter().enumerate() {
        if v < 0 {
            bail!("y[{}] = {v} is negative", j + 1);
        }
        counts.push(v as u64);
    }
    let sum: u64 = counts.iter().sum();
    let y = CountVector::new(counts, trials.unwrap_or(sum)).context("y")?;
    let lp = log_pmf(&y, p)?;
    let mut t = Table::new(None, &["log_pmf", "pmf"])?;
    t.row([fmt(lp), fmt(lp.exp())])?;
    t.into_bytes()
}

fn marginal_table(p: &ModelParams, n: u64, category: Option<usize>, k: Option<u64>) -> Result<Vec<u8>> {
    let cats: Vec<usize> = match category {
        Some(c) if c == 0 || c > p.dim() => {
            bail!("--category {c} is outside 1..={}", p.dim())
        }
        Some(c) => vec![c - 1],
        None => (0..p.dim()).collect(),
    };
    if let Some(k) = k {
        if k > n {
            bail!("--k {k} exceeds --trials {n}");
        }
    }
    let mut t = Table::new(None, &["category", "k", "probability"])?;
    for j in cats {
        match k {
            Some(k) => {
                let lp = marginal_log_pmf(p, j, k, n)?;
                t.row([(j + 1).to_string(), k.to_string(), fmt(lp.exp())])?;
            }
            None => {
                for (k, lp) in marginal_log_pmf_all(p, j, n)?.into_iter().enumerate() {
                    t.row([(j + 1).to_string(), k.to_string(), fmt(lp.exp())])?;
                }
            }
        }
    }
    t.into_bytes()
}

fn moments_table(p: &ModelParams, n: u64) -> Result<Vec<u8>> {
    let r = moments(p, n)?;
    let var = r.variance();
    let mut t = Table::new(None, &["statistic", "j", "h", "value"])?;
    let d = p.dim();
    for j in 0..d {
        t.row(["mean".into(), (j + 1).to_string(), String::new(), fmt(r.mean[j])])?;
    }
    for j in 0..d {
        t.row(["variance".into(), (j + 1).to_string(), String::new(), fmt(var[j])])?;
    }
    for j in 0..d {
        t.row([
            "dispersion_index".into(),
            (j + 1).to_string(),
            String::new(),
            fmt_opt(r.dispersion_index[j]),
        ])?;
    }
    for j in 0..d {
        t.row([
            "zero_inflation_index".into(),
            (j + 1).to_string(),
            String::new(),
            fmt_opt(r.zero_inflation_index[j]),
        ])?;
    }
    for j in 0..d {
        for h in j + 1..d {
            t.row([
                "covariance".into(),
                (j + 1).to_string(),
                (h + 1).to_string(),
                fmt(r.covariance[j][h]),
            ])?;
        }
    }
    t.into_bytes()
}
