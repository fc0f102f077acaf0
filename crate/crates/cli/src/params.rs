use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use zani_core::distributions::{Model, ModelParams, ZanidmParams, ZanimParams};

use crate::cli::ParamsArgs;
use crate::config::ModelKind;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta: Option<Vec<f64>>,
}

impl ParamsFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading parameters {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing parameters {}", path.display()))
    }
}

/// Validated parameters together with the model they belong to.
#[derive(Debug, Clone)]
pub struct ResolvedParams {
    pub kind: ModelKind,
    pub params: ModelParams,
    /// The parameters as given, for metadata.
    pub record: ParamsFile,
}

impl ParamsArgs {
    pub fn resolve(&self) -> Result<ResolvedParams> {
        let mut file = match &self.params {
            Some(path) => ParamsFile::load(path)?,
            None => ParamsFile::default(),
        };
        if self.model.is_some() {
            file.model = self.model;
        }
        if self.theta.is_some() {
            file.theta = self.theta.clone();
        }
        if self.alpha.is_some() {
            file.alpha = self.alpha.clone();
        }
        if self.zeta.is_some() {
            file.zeta = self.zeta.clone();
        }
        resolve(file)
    }
}

fn check_finite(field: &str, v: &[f64]) -> Result<()> {
    for (j, x) in v.iter().enumerate() {
        if !x.is_finite() {
            bail!("{field}[{}] = {x} is not finite", j + 1);
        }
    }
    Ok(())
}

pub fn resolve(file: ParamsFile) -> Result<ResolvedParams> {
    let kind = match file.model {
        Some(k) => k,
        None => match (&file.theta, &file.alpha) {
            (Some(_), None) => ModelKind::Zanim,
            (None, Some(_)) => ModelKind::Zanidm,
            _ => bail!("model: not given and not implied by exactly one of theta/alpha"),
        },
    };
    let (field, values) = match kind.base() {
        Model::Zanim => ("theta", file.theta.clone()),
        Model::Zanidm => ("alpha", file.alpha.clone()),
    };
    let other = if field == "theta" { &file.alpha } else { &file.theta };
    if other.is_some() {
        bail!("{}: not a parameter of the {} model", if field == "theta" { "alpha" } else { "theta" }, kind.name());
    }
    let values = values.with_context(|| format!("{field}: missing for the {} model", kind.name()))?;
    let d = values.len();
    if d < 2 {
        bail!("{field}: needs at least 2 categories, got {d}");
    }
    check_finite(field, &values)?;
    let zeta = match (&file.zeta, kind.fixes_zeta()) {
        (Some(z), true) if z.iter().any(|&v| v != 0.0) => {
            bail!("zeta: the {} model fixes zeta at zero", kind.name())
        }
        (Some(z), _) => z.clone(),
        (None, true) => vec![0.0; d],
        (None, false) => bail!("zeta: missing for the {} model", kind.name()),
    };
    if zeta.len() != d {
        bail!("zeta: has {} entries but {field} has {d}", zeta.len());
    }
    check_finite("zeta", &zeta)?;
    for (j, &z) in zeta.iter().enumerate() {
        if !(0.0..=1.0).contains(&z) {
            bail!("zeta[{}] = {z} is outside [0, 1]", j + 1);
        }
    }
    let params: ModelParams = match kind.base() {
        Model::Zanim => {
            for (j, &t) in values.iter().enumerate() {
                if t < 0.0 {
                    bail!("theta[{}] = {t} is negative", j + 1);
                }
            }
            let sum: f64 = values.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                bail!("theta: entries sum to {sum}, not 1");
            }
            let theta: Vec<f64> = values.iter().map(|t| t / sum).collect();
            ZanimParams::new(theta, zeta).context("theta")?.into()
        }
        Model::Zanidm => {
            for (j, &a) in values.iter().enumerate() {
                if a <= 0.0 {
                    bail!("alpha[{}] = {a} must be positive", j + 1);
                }
            }
            ZanidmParams::new(values, zeta).context("alpha")?.into()
        }
    };
    let record = ParamsFile {
        model: Some(kind),
        theta: file.theta,
        alpha: file.alpha,
        zeta: Some(params.zeta().to_vec()),
    };
    Ok(ResolvedParams { kind, params, record })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(theta: Option<Vec<f64>>, alpha: Option<Vec<f64>>, zeta: Option<Vec<f64>>) -> ParamsFile {
        ParamsFile { model: None, theta, alpha, zeta }
    }

    #[test]
    fn errors_name_the_field() {
        let e = resolve(file(Some(vec![0.5, 0.6]), None, Some(vec![0.0, 0.0]))).unwrap_err();
        assert!(e.to_string().starts_with("theta"), "{e}");
        let e = resolve(file(None, Some(vec![1.0, -1.0]), Some(vec![0.0, 0.0]))).unwrap_err();
        assert!(e.to_string().starts_with("alpha[2]"), "{e}");
        let e = resolve(file(None, Some(vec![1.0, 1.0]), Some(vec![0.0, 1.5]))).unwrap_err();
        assert!(e.to_string().starts_with("zeta[2]"), "{e}");
        let e = resolve(file(None, Some(vec![1.0, 1.0]), None)).unwrap_err();
        assert!(e.to_string().starts_with("zeta"), "{e}");
    }

    #[test]
    fn baselines_default_zeta_to_zero() {
        let mut f = file(Some(vec![0.5, 0.5]), None, None);
        f.model = Some(ModelKind::Multinomial);
        let r = resolve(f).unwrap();
        assert_eq!(r.params.zeta(), &[0.0, 0.0]);
        let mut f = file(None, Some(vec![1.0, 2.0]), Some(vec![0.1, 0.0]));
        f.model = Some(ModelKind::Dm);
        assert!(resolve(f).is_err());
    }
}
