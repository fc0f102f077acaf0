//! Count vectors and datasets.

use crate::error::{Error, Result};

/// A single count composition `y` with its number of trials `N`.
///
/// Either the counts sum to `N`, or they are all zero (the extended support
/// point `0_d`, which the mixtures reach through the all-inflated component).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CountVector {
    counts: Vec<u64>,
    trials: u64,
}

impl CountVector {
    pub fn new(counts: Vec<u64>, trials: u64) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::InvalidDimension(format!(
                "need at least 2 categories, got {}",
                counts.len()
            )));
        }
        let total: u64 = counts.iter().sum();
        if total != trials && total != 0 {
            return Err(Error::OutOfSupport(format!(
                "counts sum to {total} but trials = {trials}"
            )));
        }
        Ok(Self { counts, trials })
    }

    /// Count vector whose trials are its own sum.
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        let total = counts.iter().sum();
        Self::new(counts, total)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn is_all_zero(&self) -> bool {
        self.counts.iter().all(|&y| y == 0)
    }

    /// Bitmask of zero categories.
    pub fn zero_mask(&self) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &y)| y == 0)
            .fold(0u64, |m, (j, _)| m | (1 << j))
    }

    pub fn zero_count(&self) -> usize {
        self.counts.iter().filter(|&&y| y == 0).count()
    }
}

/// `n` observations over the same `d` categories; row trials are row sums.
///
/// An all-zero row declared with positive trials is stored with zero trials,
/// since a dataset keeps only the counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDataset {
    dim: usize,
    rows: Vec<CountVector>,
}

impl CountDataset {
    pub fn new(mut rows: Vec<CountVector>) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::Data("dataset has no rows".into()))?;
        let dim = first.dim();
        for (i, row) in rows.iter_mut().enumerate() {
            if row.dim() != dim {
                return Err(Error::Data(format!(
                    "row {} has {} categories, expected {dim}",
                    i + 1,
                    row.dim()
                )));
            }
            let sum: u64 = row.counts().iter().sum();
            if sum == 0 && row.trials() > 0 {
                *row = CountVector::new(vec![0; dim], 0)?;
            } else if sum != row.trials() {
                return Err(Error::Data(format!(
                    "row {} trials {} differ from its sum {sum}",
                    i + 1,
                    row.trials()
                )));
            }
        }
        Ok(Self { dim, rows })
    }

    /// Builds a dataset from raw rows of counts.
    pub fn from_rows<I>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<u64>>,
    {
        let rows = rows
            .into_iter()
            .map(CountVector::from_counts)
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    /// Builds a dataset from signed cells, rejecting negatives with their position.
    pub fn from_signed_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let mut out = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let mut r = Vec::with_capacity(row.len());
            for (j, &v) in row.iter().enumerate() {
                if v < 0 {
                    return Err(Error::Data(format!(
                        "negative count {v} at row {}, column {}",
                        i + 1,
                        j + 1
                    )));
                }
                r.push(v as u64);
            }
            out.push(r);
        }
        Self::from_rows(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[CountVector] {
        &self.rows
    }

    pub fn trials(&self) -> Vec<u64> {
        self.rows.iter().map(CountVector::trials).collect()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.rows[i].counts()[j]
    }

    /// Column means.
    pub fn column_means(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for row in &self.rows {
            for (acc, &y) in m.iter_mut().zip(row.counts()) {
                *acc += y as f64;
            }
        }
        let n = self.rows.len() as f64;
        m.iter_mut().for_each(|v| *v /= n);
        m
    }
}
