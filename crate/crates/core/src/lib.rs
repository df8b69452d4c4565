//! Majority-vote ensembles of binary classifiers.
//!
//! Given `n` voters that each flag class 1 with probability `p` on positives and
//! `q` on negatives, this crate computes when the majority vote beats a single
//! voter: closed-form limits and normal approximations ([`analytic`]), exact
//! finite-`n` error ([`oracle`]), seeded simulation ([`sampler`],
//! [`montecarlo`]), `(p, q)` sweeps ([`grid`]) and estimation from observed
//! predictions ([`diagnose`]). Voters may be independent, Markov-correlated
//! along their index, or equicorrelated.

pub mod analytic;
pub mod cli;
pub mod diagnose;
pub mod error;
pub mod grid;
pub mod model;
pub mod montecarlo;
pub mod oracle;
pub mod sampler;

pub use analytic::{
    asymptotic_verdict, delta, estimated_error, estimated_error_asymptotic, limiting_delta,
    limiting_error, mean_individual_error, std_normal_cdf, sum_variance, PhaseSign, PhaseVerdict,
    Region,
};
pub use diagnose::{diagnose, DiagnoseOptions, DiagnosisReport, PredictionMatrix};
pub use error::{Error, Result};
pub use grid::{max_improvement, sweep, GridRow, Improvement};
pub use model::{
    Axis, CorrelationModel, EnsembleConfig, GridSpec, Horizon, ModelKind, Prior, RatePair,
};
pub use montecarlo::{mc_conditional_error, mc_correlation, mc_error, McEstimate};
pub use oracle::{exact_error, exact_vote_pmf, VotePmf};
pub use sampler::{majority_vote, sample_votes, RngSeed, VoteSampler, VoteVector};
