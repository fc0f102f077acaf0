//! Zero-pattern enumeration and mixture weights.
//!
//! A zero-&-N-inflated distribution over `d` categories is a mixture with one
//! component per subset of structurally-zero categories. Subsets are stored as
//! bitmasks (`d ≤ 64`); categories are 0-based throughout the library.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::counts::CountVector;
use crate::error::{Error, Result};

/// Largest supported number of categories.
pub const MAX_DIM: usize = 63;

/// A set of category indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct IndexSet(u64);

impl IndexSet {
    pub const EMPTY: IndexSet = IndexSet(0);

    pub fn from_mask(mask: u64) -> Self {
        IndexSet(mask)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        IndexSet(indices.into_iter().fold(0, |m, j| m | (1u64 << j)))
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, j: usize) -> bool {
        self.0 >> j & 1 == 1
    }

    pub fn insert(self, j: usize) -> Self {
        IndexSet(self.0 | (1 << j))
    }

    /// Members in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> + Clone {
        let mut m = self.0;
        std::iter::from_fn(move || {
            if m == 0 {
                None
            } else {
                let j = m.trailing_zeros() as usize;
                m &= m - 1;
                Some(j)
            }
        })
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

// Lexicographic over the sorted member sequences.
impl Ord for IndexSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for IndexSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lazily enumerates the nonempty subsets of `ground` with at most
/// `max_size` members, in lexicographic order of sorted members.
#[derive(Debug, Clone)]
pub struct LexSubsets {
    ground: Vec<usize>,
    max_size: usize,
    stack: Vec<usize>,
    started: bool,
}

impl LexSubsets {
    pub fn new(mut ground: Vec<usize>, max_size: usize) -> Self {
        ground.sort_unstable();
        ground.dedup();
        Self {
            ground,
            max_size,
            stack: Vec::new(),
            started: false,
        }
    }

    fn current(&self) -> IndexSet {
        IndexSet::from_indices(self.stack.iter().map(|&p| self.ground[p]))
    }
}

impl Iterator for LexSubsets {
    type Item = IndexSet;

    fn next(&mut self) -> Option<IndexSet> {
        let len = self.ground.len();
        if !self.started {
            self.started = true;
            if len == 0 || self.max_size == 0 {
                return None;
            }
            self.stack.push(0);
            return Some(self.current());
        }
        let last = *self.stack.last()?;
        if self.stack.len() < self.max_size && last + 1 < len {
            self.stack.push(last + 1);
            return Some(self.current());
        }
        while let Some(p) = self.stack.pop() {
            if p + 1 < len {
                self.stack.push(p + 1);
                return Some(self.current());
            }
        }
        None
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!("d must be at least 2, got {d}")));
    }
    if d > MAX_DIM {
        return Err(Error::InvalidDimension(format!(
            "d must be at most {MAX_DIM}, got {d}"
        )));
    }
    Ok(())
}

/// Subsets `K ⊆ {0..d} \ exclude` with `1 ≤ |K| ≤ d − 2`.
///
/// With an empty `exclude` this is the reduced-component index family; with
/// `{j}` it gives the subsets used by the marginal of `Y_j`; with `{j, h}` the
/// subsets used by the `(j, h)` cross moment.
pub fn subsets_iter(d: usize, exclude: IndexSet) -> Result<LexSubsets> {
    check_dim(d)?;
    if exclude.len() > 2 || exclude.iter().any(|j| j >= d) {
        return Err(Error::InvalidArgument(format!(
            "exclude set {exclude:?} must hold at most two indices below {d}"
        )));
    }
    let ground = (0..d).filter(|&j| !exclude.contains(j)).collect();
    Ok(LexSubsets::new(ground, d - 2))
}

pub fn enumerate_subsets(d: usize, exclude: &[usize]) -> Result<Vec<IndexSet>> {
    Ok(subsets_iter(d, IndexSet::from_indices(exclude.iter().copied()))?.collect())
}

fn check_zeta(zeta: &[f64]) -> Result<()> {
    check_dim(zeta.len())?;
    for (j, &z) in zeta.iter().enumerate() {
        if !(0.0..=1.0).contains(&z) {
            return Err(Error::Domain(format!(
                "zeta[{j}] = {z} is outside [0, 1]"
            )));
        }
    }
    Ok(())
}

/// `Π_{k∈K} ζ_k Π_{j∉K} (1 − ζ_j)`: the probability that exactly the
/// categories in `K` are structurally zero.
pub fn pattern_weight(zeta: &[f64], set: IndexSet) -> f64 {
    zeta.iter()
        .enumerate()
        .map(|(j, &z)| if set.contains(j) { z } else { 1.0 - z })
        .product()
}

/// The full set of `2^d` mixture weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureWeights {
    pub eta_d: f64,
    pub eta_0: f64,
    pub eta_n: Vec<f64>,
    pub eta_k: BTreeMap<IndexSet, f64>,
}

impl MixtureWeights {
    pub fn total(&self) -> f64 {
        self.eta_d + self.eta_0 + self.eta_n.iter().sum::<f64>() + self.eta_k.values().sum::<f64>()
    }

    pub fn iter_all(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.eta_d)
            .chain(std::iter::once(self.eta_0))
            .chain(self.eta_n.iter().copied())
            .chain(self.eta_k.values().copied())
    }
}

/// Computes every mixture weight from `ζ`.
///
/// Products are shared along a depth-first walk over include/exclude
/// decisions, so each of the `2^d` weights costs one multiplication. Factors
/// of exactly 0 or 1 stay exact.
pub fn mixture_weights(zeta: &[f64]) -> Result<MixtureWeights> {
    check_zeta(zeta)?;
    let d = zeta.len();
    let full = (1u64 << d) - 1;
    let mut weights = MixtureWeights {
        eta_d: 0.0,
        eta_0: 0.0,
        eta_n: vec![0.0; d],
        eta_k: BTreeMap::new(),
    };

    fn walk(zeta: &[f64], j: usize, mask: u64, prod: f64, out: &mut Vec<(u64, f64)>) {
        if j == zeta.len() {
            out.push((mask, prod));
            return;
        }
        walk(zeta, j + 1, mask | (1 << j), prod * zeta[j], out);
        walk(zeta, j + 1, mask, prod * (1.0 - zeta[j]), out);
    }
    let mut all = Vec::with_capacity(1 << d);
    walk(zeta, 0, 0, 1.0, &mut all);

    for (mask, w) in all {
        let size = mask.count_ones() as usize;
        if size == 0 {
            weights.eta_d = w;
        } else if size == d {
            weights.eta_0 = w;
        } else if size == d - 1 {
            let j = (full & !mask).trailing_zeros() as usize;
            weights.eta_n[j] = w;
        } else {
            weights.eta_k.insert(IndexSet(mask), w);
        }
    }
    Ok(weights)
}

/// One of the `2^d` mixture components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentDescriptor {
    /// No structural zeros: the full multinomial / DM.
    Full,
    /// Structural zeros exactly on `K`, `1 ≤ |K| ≤ d − 2`.
    Reduced(IndexSet),
    /// Every category but `j` is structurally zero: point mass at `N e_j`.
    NInflated(usize),
    /// Every category is structurally zero: point mass at `0_d`.
    AllZero,
}

impl ComponentDescriptor {
    /// The set of structurally zero categories this component represents.
    pub fn zero_set(&self, d: usize) -> IndexSet {
        let full = (1u64 << d) - 1;
        match *self {
            ComponentDescriptor::Full => IndexSet::EMPTY,
            ComponentDescriptor::Reduced(k) => k,
            ComponentDescriptor::NInflated(j) => IndexSet(full & !(1 << j)),
            ComponentDescriptor::AllZero => IndexSet(full),
        }
    }
}

/// Iterator over the components that give an observation positive support.
#[derive(Debug, Clone)]
pub struct ConsistentComponents {
    stage: u8,
    subsets: LexSubsets,
    n_inflated: Option<usize>,
    all_zero: bool,
}

impl Iterator for ConsistentComponents {
    type Item = ComponentDescriptor;

    fn next(&mut self) -> Option<ComponentDescriptor> {
        loop {
            match self.stage {
                0 => {
                    self.stage = 1;
                    if self.all_zero {
                        self.stage = 3;
                        return Some(ComponentDescriptor::AllZero);
                    }
                    return Some(ComponentDescriptor::Full);
                }
                1 => match self.subsets.next() {
                    Some(k) => return Some(ComponentDescriptor::Reduced(k)),
                    None => self.stage = 2,
                },
                2 => {
                    self.stage = 3;
                    if let Some(j) = self.n_inflated {
                        return Some(ComponentDescriptor::NInflated(j));
                    }
                }
                _ => return None,
            }
        }
    }
}

/// Components whose support contains `y`.
///
/// With `q` zero counts this yields `2^q` components when `q < d` (the full
/// component, every reduced component whose zero set lies inside the zeros of
/// `y`, and the N-inflated component when exactly one category is nonzero),
/// and only the all-zero component when `q = d`.
pub fn consistent_components(y: &CountVector) -> ConsistentComponents {
    let d = y.dim();
    let zeros: Vec<usize> = (0..d).filter(|&j| y.counts()[j] == 0).collect();
    let q = zeros.len();
    let n_inflated = if q + 1 == d {
        (0..d).find(|&j| y.counts()[j] > 0)
    } else {
        None
    };
    ConsistentComponents {
        stage: 0,
        subsets: LexSubsets::new(zeros, d.saturating_sub(2)),
        n_inflated,
        all_zero: q == d,
    }
}

/// Per-category log factors for evaluating log weights of arbitrary patterns.
#[derive(Debug, Clone)]
pub(crate) struct LogZetaFactors {
    ln_zero: Vec<f64>,
    ln_keep: Vec<f64>,
}

impl LogZetaFactors {
    pub fn new(zeta: &[f64]) -> Self {
        Self {
            ln_zero: zeta.iter().map(|z| z.ln()).collect(),
            ln_keep: zeta.iter().map(|z| (-z).ln_1p()).collect(),
        }
    }

    pub fn log_weight(&self, set: IndexSet) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.ln_zero.len() {
            acc += if set.contains(j) {
                self.ln_zero[j]
            } else {
                self.ln_keep[j]
            };
        }
        acc
    }
}
