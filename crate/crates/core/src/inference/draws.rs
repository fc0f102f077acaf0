use crate::counts::CountDataset;
use crate::distributions::{log_pmf, Model, ModelParams, ZanidmParams, ZanimParams};
use crate::error::{Error, Result};

/// Retained posterior draws of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainDraws {
    pub model: Model,
    pub dim: usize,
    /// Column names: `theta_j` or `alpha_j`, then `zeta_j` unless `ζ` was
    /// fixed at zero. Categories are numbered from 1.
    pub columns: Vec<String>,
    /// One row per retained iteration.
    pub draws: Vec<Vec<f64>>,
    /// Per-draw, per-observation mixture log-likelihood; empty when not stored.
    pub loglik: Vec<Vec<f64>>,
    /// Per-category acceptance rate of the `α` update after burn-in.
    pub acceptance: Option<Vec<f64>>,
    pub zeta_fixed: bool,
}

pub(crate) fn column_names(model: Model, d: usize, zeta_fixed: bool) -> Vec<String> {
    let head = match model {
        Model::Zanim => "theta",
        Model::Zanidm => "alpha",
    };
    let mut cols: Vec<String> = (1..=d).map(|j| format!("{head}_{j}")).collect();
    if !zeta_fixed {
        cols.extend((1..=d).map(|j| format!("zeta_{j}")));
    }
    cols
}

impl ChainDraws {
    pub(crate) fn empty(model: Model, dim: usize, zeta_fixed: bool, capacity: usize) -> Self {
        Self {
            model,
            dim,
            columns: column_names(model, dim, zeta_fixed),
            draws: Vec::with_capacity(capacity),
            loglik: Vec::new(),
            acceptance: None,
            zeta_fixed,
        }
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        Some(self.draws.iter().map(|row| row[k]).collect())
    }

    pub fn column_at(&self, k: usize) -> Vec<f64> {
        self.draws.iter().map(|row| row[k]).collect()
    }

    /// Model parameters of retained draw `m`.
    pub fn params_at(&self, m: usize) -> Result<ModelParams> {
        let row = self
            .draws
            .get(m)
            .ok_or_else(|| Error::InvalidArgument(format!("draw {m} out of range")))?;
        let d = self.dim;
        let zeta = if self.zeta_fixed {
            vec![0.0; d]
        } else {
            row[d..2 * d].to_vec()
        };
        Ok(match self.model {
            Model::Zanim => ZanimParams::from_weights(&row[..d], zeta)?.into(),
            Model::Zanidm => ZanidmParams::new(row[..d].to_vec(), zeta)?.into(),
        })
    }
}

pub(crate) fn pointwise_loglik(data: &CountDataset, params: &ModelParams) -> Result<Vec<f64>> {
    data.rows().iter().map(|y| log_pmf(y, params)).collect()
}
