//! Hierarchical beta–negative binomial topic model: a shared top-level beta
//! process over topics, per-document beta processes centered on it, and
//! negative binomial counts of each topic's observations in each document.
//!
//! Two samplers share the same state and kernels: an exact slice sampler
//! over the infinite representation (components ordered by size-biased
//! round) and a fixed-K sampler with the finite beta approximation.

pub mod chain;
pub mod config;
pub mod forward;
pub mod kernels;
pub mod predictive;
pub mod rounds;
pub mod state;
pub mod store;

pub use chain::{PosteriorSample, Sampler, TraceRow};
pub use config::{heuristic_r, SamplerConfig, SamplerMode, ShapeRule};
pub use predictive::{
    classify, predictive_loglik, Classification, ConfusionMatrix, GroupModel, LikelihoodEstimate,
};
pub use rounds::{RoundCursor, RoundPrior};
pub use state::{used_components, HbnbpData, HbnbpState};
