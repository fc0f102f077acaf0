use crate::error::{Error, Result};
use crate::mixture::MAX_DIM;

fn check_dim(d: usize) -> Result<()> {
    if d < 2 || d > MAX_DIM {
        return Err(Error::InvalidDimension(format!(
            "number of categories must be in 2..={MAX_DIM}, got {d}"
        )));
    }
    Ok(())
}

fn check_zeta(zeta: &[f64]) -> Result<()> {
    for (j, &z) in zeta.iter().enumerate() {
        if !(0.0..=1.0).contains(&z) {
            return Err(Error::Domain(format!("zeta[{j}] = {z} is outside [0, 1]")));
        }
    }
    Ok(())
}

/// ZANIM parameters: category probabilities `θ` and zero-inflation
/// probabilities `ζ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZanimParams {
    theta: Vec<f64>,
    zeta: Vec<f64>,
}

impl ZanimParams {
    pub fn new(theta: Vec<f64>, zeta: Vec<f64>) -> Result<Self> {
        check_dim(theta.len())?;
        if zeta.len() != theta.len() {
            return Err(Error::DimensionMismatch {
                expected: theta.len(),
                got: zeta.len(),
            });
        }
        for (j, &t) in theta.iter().enumerate() {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::Domain(format!("theta[{j}] = {t} is negative or not finite")));
            }
        }
        let total: f64 = theta.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("theta sums to {total}, not 1")));
        }
        check_zeta(&zeta)?;
        Ok(Self { theta, zeta })
    }

    /// Normalizes nonnegative weights `λ` into `θ = λ / Σλ`.
    pub fn from_weights(lambda: &[f64], zeta: Vec<f64>) -> Result<Self> {
        let total: f64 = lambda.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::Domain(format!("weights sum to {total}")));
        }
        let theta = lambda.iter().map(|l| l / total).collect();
        Self::new(theta, zeta)
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn zeta(&self) -> &[f64] {
        &self.zeta
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }
}

/// ZANIDM parameters: Dirichlet concentrations `α` and zero-inflation
/// probabilities `ζ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZanidmParams {
    alpha: Vec<f64>,
    zeta: Vec<f64>,
}

impl ZanidmParams {
    pub fn new(alpha: Vec<f64>, zeta: Vec<f64>) -> Result<Self> {
        check_dim(alpha.len())?;
        if zeta.len() != alpha.len() {
            return Err(Error::DimensionMismatch {
                expected: alpha.len(),
                got: zeta.len(),
            });
        }
        for (j, &a) in alpha.iter().enumerate() {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::Domain(format!("alpha[{j}] = {a} must be positive and finite")));
            }
        }
        check_zeta(&zeta)?;
        Ok(Self { alpha, zeta })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn zeta(&self) -> &[f64] {
        &self.zeta
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Zanim,
    Zanidm,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Zanim => "zanim",
            Model::Zanidm => "zanidm",
        }
    }
}

/// Parameters of either model.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    Zanim(ZanimParams),
    Zanidm(ZanidmParams),
}

impl ModelParams {
    pub fn model(&self) -> Model {
        match self {
            ModelParams::Zanim(_) => Model::Zanim,
            ModelParams::Zanidm(_) => Model::Zanidm,
        }
    }

    pub fn zeta(&self) -> &[f64] {
        match self {
            ModelParams::Zanim(p) => p.zeta(),
            ModelParams::Zanidm(p) => p.zeta(),
        }
    }

    pub fn dim(&self) -> usize {
        self.zeta().len()
    }
}

impl From<ZanimParams> for ModelParams {
    fn from(p: ZanimParams) -> Self {
        ModelParams::Zanim(p)
    }
}

impl From<ZanidmParams> for ModelParams {
    fn from(p: ZanidmParams) -> Self {
        ModelParams::Zanidm(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ZanimParams::new(vec![0.2, 0.5, 0.3], vec![0.1, 0.2, 0.3]).is_ok());
        assert!(ZanimParams::new(vec![0.2, 0.5, 0.4], vec![0.1, 0.2, 0.3]).is_err());
        assert!(ZanimParams::new(vec![-0.2, 0.7, 0.5], vec![0.0; 3]).is_err());
        assert!(ZanimParams::new(vec![0.5, 0.5], vec![0.0; 3]).is_err());
        assert!(ZanimParams::new(vec![1.0], vec![0.0]).is_err());
        assert!(ZanimParams::new(vec![0.5, 0.5], vec![0.0, 1.1]).is_err());
        assert!(ZanidmParams::new(vec![1.0, 0.0], vec![0.0; 2]).is_err());
        assert!(ZanidmParams::new(vec![1.0, f64::INFINITY], vec![0.0; 2]).is_err());
        let p = ZanimParams::from_weights(&[1.0, 3.0], vec![0.0, 0.5]).unwrap();
        assert_eq!(p.theta(), &[0.25, 0.75]);
    }
}
