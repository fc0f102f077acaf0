//! Zero-&-N-inflated multinomial (ZANIM) and Dirichlet-multinomial (ZANIDM)
//! distributions: exact mixture PMFs, sampling, marginals and moments, Gibbs
//! samplers for Bayesian inference, and posterior diagnostics.

pub mod counts;
pub mod diagnostics;
pub mod distributions;
pub mod error;
pub mod inference;
pub mod mixture;
pub mod numeric;
pub mod rng;
pub mod sampling;

pub use counts::{CountDataset, CountVector};
pub use error::{Error, Result};
pub use mixture::{
    consistent_components, enumerate_subsets, mixture_weights, ComponentDescriptor, IndexSet,
    MixtureWeights,
};
