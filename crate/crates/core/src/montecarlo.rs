//! Seeded, parallel Monte Carlo estimates of the ensemble error.
//!
//! Replications are cut into fixed-size chunks. Chunk `c` always draws from
//! substream `c` of the run seed, and chunk results are reduced in index
//! order, so an estimate depends only on `(cfg, reps, seed)` and never on the
//! number of worker threads.

use rand::distr::{Bernoulli, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CorrelationModel, EnsembleConfig};
use crate::sampler::{majority_of, RngSeed, VoteSampler};

/// Replications per chunk (and per RNG substream).
pub const CHUNK_REPS: u64 = 4096;

pub const MIN_ERROR_REPS: u64 = 100;
pub const MIN_CORRELATION_REPS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub reps: u64,
    pub seed: RngSeed,
}

impl McEstimate {
    fn from_count(failures: u64, reps: u64, seed: RngSeed) -> Self {
        let value = failures as f64 / reps as f64;
        Self {
            value,
            std_error: (value * (1.0 - value) / reps as f64).sqrt(),
            reps,
            seed,
        }
    }

    /// Whether `target` lies within `k` standard errors of the estimate.
    pub fn covers(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error
    }
}

fn chunks(reps: u64) -> impl IndexedParallelIterator<Item = (u64, u64)> {
    let count = reps.div_ceil(CHUNK_REPS) as usize;
    (0..count).into_par_iter().map(move |c| {
        let c = c as u64;
        (c, CHUNK_REPS.min(reps - c * CHUNK_REPS))
    })
}

fn ensure_reps(reps: u64, min: u64) -> Result<()> {
    if reps < min {
        Err(Error::TooFewReplications { reps, min })
    } else {
        Ok(())
    }
}

/// Estimate of `Err(n)`: each replication draws the class from the prior,
/// then a vote vector for that class, and scores the majority vote.
pub fn mc_error(cfg: &EnsembleConfig, reps: u64, seed: RngSeed) -> Result<McEstimate> {
    ensure_reps(reps, MIN_ERROR_REPS)?;
    let positive = VoteSampler::new(cfg.model(), cfg.n(), cfg.rates().p())?;
    let negative = VoteSampler::new(cfg.model(), cfg.n(), cfg.rates().q())?;
    let class = Bernoulli::new(cfg.prior().pi()).expect("prior validated to lie in (0, 1)");
    let counts: Vec<u64> = chunks(reps)
        .map(|(chunk, len)| {
            let mut rng = seed.substream(chunk);
            let mut buf = Vec::with_capacity(cfg.n());
            let mut wrong = 0;
            for _ in 0..len {
                let y = u8::from(class.sample(&mut rng));
                let sampler = if y == 1 { &positive } else { &negative };
                sampler.fill(&mut rng, &mut buf);
                wrong += u64::from(majority_of(&buf) != y);
            }
            wrong
        })
        .collect();
    Ok(McEstimate::from_count(counts.iter().sum(), reps, seed))
}

/// Estimate of `P(majority != class | y = class)`.
pub fn mc_conditional_error(
    cfg: &EnsembleConfig,
    class: u8,
    reps: u64,
    seed: RngSeed,
) -> Result<McEstimate> {
    ensure_reps(reps, MIN_ERROR_REPS)?;
    if class > 1 {
        return Err(Error::Config(format!("class: {class} is not 0 or 1")));
    }
    let sampler = VoteSampler::new(cfg.model(), cfg.n(), cfg.rates().rate_for(class))?;
    let counts: Vec<u64> = chunks(reps)
        .map(|(chunk, len)| {
            let mut rng = seed.substream(chunk);
            let mut buf = Vec::with_capacity(cfg.n());
            let mut wrong = 0;
            for _ in 0..len {
                sampler.fill(&mut rng, &mut buf);
                wrong += u64::from(majority_of(&buf) != class);
            }
            wrong
        })
        .collect();
    Ok(McEstimate::from_count(counts.iter().sum(), reps, seed))
}

/// Empirical within-class correlation structure of the sampled votes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationSummary {
    pub n: usize,
    pub reps: u64,
    /// Full `n x n` sample correlation matrix, row-major.
    pub matrix: Vec<f64>,
    /// `lag_means[k - 1]` is the mean correlation over pairs with `|i - j| = k`.
    pub lag_means: Vec<f64>,
    pub off_diagonal_mean: f64,
}

impl CorrelationSummary {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n + j]
    }

    pub fn lag(&self, k: usize) -> f64 {
        self.lag_means[k - 1]
    }
}

struct Moments {
    ones: Vec<u64>,
    /// Upper-triangular co-occurrence counts, row-major over `n x n`.
    both: Vec<u64>,
}

impl Moments {
    fn zeros(n: usize) -> Self {
        Self {
            ones: vec![0; n],
            both: vec![0; n * n],
        }
    }

    fn merge(mut self, other: &Moments) -> Self {
        for (a, b) in self.ones.iter_mut().zip(&other.ones) {
            *a += b;
        }
        for (a, b) in self.both.iter_mut().zip(&other.both) {
            *a += b;
        }
        self
    }
}

pub fn mc_correlation(
    model: CorrelationModel,
    n: usize,
    rate: f64,
    reps: u64,
    seed: RngSeed,
) -> Result<CorrelationSummary> {
    ensure_reps(reps, MIN_CORRELATION_REPS)?;
    if n < 2 {
        return Err(Error::Config(
            "n: correlations need at least two classifiers".into(),
        ));
    }
    let sampler = VoteSampler::new(model, n, rate)?;
    let parts: Vec<Moments> = chunks(reps)
        .map(|(chunk, len)| {
            let mut rng = seed.substream(chunk);
            let mut m = Moments::zeros(n);
            let mut buf = Vec::with_capacity(n);
            let mut on = Vec::with_capacity(n);
            for _ in 0..len {
                sampler.fill(&mut rng, &mut buf);
                on.clear();
                on.extend(
                    buf.iter()
                        .enumerate()
                        .filter(|(_, &v)| v == 1)
                        .map(|(i, _)| i),
                );
                for (a, &i) in on.iter().enumerate() {
                    m.ones[i] += 1;
                    for &j in &on[a + 1..] {
                        m.both[i * n + j] += 1;
                    }
                }
            }
            m
        })
        .collect();
    let total = parts.iter().fold(Moments::zeros(n), Moments::merge);

    let r = reps as f64;
    let mean: Vec<f64> = total.ones.iter().map(|&c| c as f64 / r).collect();
    let var: Vec<f64> = mean.iter().map(|m| m * (1.0 - m)).collect();
    if let Some(position) = var.iter().position(|&v| v <= 0.0) {
        return Err(Error::DegenerateVariance { position });
    }
    let mut matrix = vec![1.0; n * n];
    let mut lag_sums = vec![0.0; n - 1];
    let mut off_sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let cov = total.both[i * n + j] as f64 / r - mean[i] * mean[j];
            let corr = cov / (var[i] * var[j]).sqrt();
            matrix[i * n + j] = corr;
            matrix[j * n + i] = corr;
            lag_sums[j - i - 1] += corr;
            off_sum += corr;
        }
    }
    let lag_means = lag_sums
        .iter()
        .enumerate()
        .map(|(k, s)| s / (n - k - 1) as f64)
        .collect();
    Ok(CorrelationSummary {
        n,
        reps,
        matrix,
        lag_means,
        off_diagonal_mean: off_sum / (n * (n - 1) / 2) as f64,
    })
}
