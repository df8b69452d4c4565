//! Random vote vectors for each correlation model, and the majority-vote rule.

use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Beta;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BetaSpec, CorrelationModel};

/// Root of all randomness for one run.
///
/// `(seed, stream)` form the ChaCha key; numbered substreams (one per work
/// chunk) map to ChaCha's 64-bit stream counter, so every chunk sees the same
/// numbers no matter which thread runs it or in what order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn substream(&self, index: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.stream.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index);
        rng
    }

    pub fn rng(&self) -> ChaCha8Rng {
        self.substream(0)
    }
}

/// A realization `(f_1, ..., f_n)` of the votes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VoteVector(Vec<u8>);

impl VoteVector {
    pub fn new(votes: Vec<u8>) -> Result<Self> {
        if let Some(pos) = votes.iter().position(|&v| v > 1) {
            return Err(Error::NonBinaryEntry {
                row: 0,
                column: pos,
                value: votes[pos].to_string(),
            });
        }
        Ok(Self(votes))
    }

    pub fn votes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self) -> usize {
        count_ones(&self.0)
    }
}

fn count_ones(votes: &[u8]) -> usize {
    votes.iter().map(|&v| v as usize).sum()
}

/// Strict majority: class 1 iff more than half of the votes are 1. Ties go to 0.
pub fn majority_vote(votes: &VoteVector) -> u8 {
    majority_of(votes.votes())
}

pub(crate) fn majority_of(votes: &[u8]) -> u8 {
    u8::from(2 * count_ones(votes) > votes.len())
}

/// One-step transition probabilities `(P(1 -> 1), P(0 -> 1))` of the stationary
/// two-state chain with marginal `rate` and lag-1 correlation `gamma`.
pub fn markov_transition_probs(rate: f64, gamma: f64) -> (f64, f64) {
    (rate + gamma * (1.0 - rate), rate * (1.0 - gamma))
}

#[derive(Debug, Clone)]
enum Plan {
    Independent(Bernoulli),
    Heterogeneous(Beta<f64>),
    Markov {
        first: Bernoulli,
        after_one: Bernoulli,
        after_zero: Bernoulli,
    },
    Mixture {
        shared_branch: Bernoulli,
        vote: Bernoulli,
    },
}

/// Prepared sampler for one `(model, n, rate)` triple.
#[derive(Debug, Clone)]
pub struct VoteSampler {
    n: usize,
    plan: Plan,
}

fn bernoulli(p: f64) -> Result<Bernoulli> {
    Bernoulli::new(p).map_err(|_| Error::RateOutOfRange {
        name: "rate",
        value: p,
    })
}

impl VoteSampler {
    pub fn new(model: CorrelationModel, n: usize, rate: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::BadSize { n });
        }
        if !(rate > 0.0 && rate < 1.0) {
            return Err(Error::RateOutOfRange {
                name: "rate",
                value: rate,
            });
        }
        let plan = match model {
            CorrelationModel::Independent {
                heterogeneity: None,
            } => Plan::Independent(bernoulli(rate)?),
            CorrelationModel::Independent {
                heterogeneity: Some(h),
            } => return Self::heterogeneous(h.beta_for(rate)?, n),
            CorrelationModel::Geometric { gamma } => {
                let (t11, t01) = markov_transition_probs(rate, gamma.get());
                Plan::Markov {
                    first: bernoulli(rate)?,
                    after_one: bernoulli(t11)?,
                    after_zero: bernoulli(t01)?,
                }
            }
            CorrelationModel::Equicorrelated { lambda } => Plan::Mixture {
                shared_branch: bernoulli(lambda.get())?,
                vote: bernoulli(rate)?,
            },
        };
        Ok(Self { n, plan })
    }

    /// Per-classifier rates drawn from `spec`, then independent votes.
    pub fn heterogeneous(spec: BetaSpec, n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::BadSize { n });
        }
        let beta = Beta::new(spec.alpha(), spec.beta()).map_err(|_| Error::BadParameter {
            name: "beta",
            value: spec.beta(),
            reason: "invalid Beta shape",
        })?;
        Ok(Self {
            n,
            plan: Plan::Heterogeneous(beta),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Overwrites `out` with a fresh vote vector.
    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<u8>) {
        out.clear();
        match &self.plan {
            Plan::Independent(vote) => out.extend((0..self.n).map(|_| u8::from(vote.sample(rng)))),
            Plan::Heterogeneous(beta) => out.extend((0..self.n).map(|_| {
                let rate = beta.sample(rng);
                u8::from(rng.random::<f64>() < rate)
            })),
            Plan::Markov {
                first,
                after_one,
                after_zero,
            } => {
                let mut last = first.sample(rng);
                out.push(u8::from(last));
                for _ in 1..self.n {
                    last = if last {
                        after_one.sample(rng)
                    } else {
                        after_zero.sample(rng)
                    };
                    out.push(u8::from(last));
                }
            }
            Plan::Mixture {
                shared_branch,
                vote,
            } => {
                if shared_branch.sample(rng) {
                    let shared = u8::from(vote.sample(rng));
                    out.resize(self.n, shared);
                } else {
                    out.extend((0..self.n).map(|_| u8::from(vote.sample(rng))));
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> VoteVector {
        let mut out = Vec::with_capacity(self.n);
        self.fill(rng, &mut out);
        VoteVector(out)
    }
}

/// Draws one vote vector at marginal `rate` from the root stream of `seed`.
pub fn sample_votes(
    model: CorrelationModel,
    n: usize,
    rate: f64,
    seed: RngSeed,
) -> Result<VoteVector> {
    Ok(VoteSampler::new(model, n, rate)?.sample(&mut seed.rng()))
}

pub fn sample_votes_heterogeneous(spec: BetaSpec, n: usize, seed: RngSeed) -> Result<VoteVector> {
    Ok(VoteSampler::heterogeneous(spec, n)?.sample(&mut seed.rng()))
}
