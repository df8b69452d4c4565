//! Exact finite-`n` distribution of the vote count and the exact ensemble error.
//!
//! The correlation structures are realized by concrete generative constructions
//! (shared with [`crate::sampler`]):
//!
//! * independent: `g_n ~ Binomial(n, r)`; per-classifier Beta heterogeneity
//!   leaves every vote unconditionally Bernoulli(r) and independent, so the
//!   pmf is the same binomial;
//! * geometric: a stationary two-state Markov chain over the vote values with
//!   marginal `r` and lag-1 correlation `gamma`, hence lag-`k` correlation
//!   `gamma^k`;
//! * equicorrelated: with probability `lambda` every vote copies one shared
//!   Bernoulli(r) draw, otherwise all votes are independent Bernoulli(r).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CorrelationModel, EnsembleConfig};
use crate::sampler::markov_transition_probs;

/// Largest `n` accepted by the quadratic geometric-chain dynamic program.
pub const GEOMETRIC_DP_LIMIT: usize = 100_000;

/// Largest `n` accepted by [`brute_force_error`].
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// Probability mass function of `g_n` on `{0, ..., n}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VotePmf {
    n: usize,
    mass: Vec<f64>,
}

impl VotePmf {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.mass
            .iter()
            .enumerate()
            .map(|(k, m)| k as f64 * m)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.mass
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let d = k as f64 - mean;
                d * d * m
            })
            .sum()
    }

    /// `P(g_n <= k)`.
    pub fn prob_at_most(&self, k: usize) -> f64 {
        self.mass[..=k.min(self.n)].iter().sum()
    }

    /// `P(g_n > k)`, summed directly over the upper tail.
    pub fn prob_above(&self, k: usize) -> f64 {
        if k >= self.n {
            return 0.0;
        }
        self.mass[k + 1..].iter().sum()
    }
}

/// Binomial(n, r) pmf via the ratio recurrence in log space, anchored at the mode
/// and normalized at the end.
pub fn binomial_pmf(n: usize, rate: f64) -> Vec<f64> {
    let log_odds = rate.ln() - (1.0 - rate).ln();
    let mode = (((n + 1) as f64 * rate).floor() as usize).min(n);
    let mut log_mass = vec![0.0; n + 1];
    for k in mode..n {
        let step = ((n - k) as f64).ln() - ((k + 1) as f64).ln() + log_odds;
        log_mass[k + 1] = log_mass[k] + step;
    }
    for k in (1..=mode).rev() {
        let step = ((n - k + 1) as f64).ln() - (k as f64).ln() + log_odds;
        log_mass[k - 1] = log_mass[k] - step;
    }
    let mut mass: Vec<f64> = log_mass.into_iter().map(f64::exp).collect();
    let total: f64 = mass.iter().sum();
    for m in &mut mass {
        *m /= total;
    }
    mass
}

fn geometric_pmf(n: usize, rate: f64, gamma: f64) -> Vec<f64> {
    let (t11, t01) = markov_transition_probs(rate, gamma);
    // last_one[c] / last_zero[c]: P(count = c and the latest vote is 1 / 0).
    let mut last_one = vec![0.0; n + 1];
    let mut last_zero = vec![0.0; n + 1];
    last_one[1] = rate;
    last_zero[0] = 1.0 - rate;
    let mut next_one = vec![0.0; n + 1];
    let mut next_zero = vec![0.0; n + 1];
    for i in 1..n {
        next_one[..=i + 1].fill(0.0);
        next_zero[..=i + 1].fill(0.0);
        for c in 0..=i {
            let (a, b) = (last_one[c], last_zero[c]);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            next_one[c + 1] += a * t11 + b * t01;
            next_zero[c] += a * (1.0 - t11) + b * (1.0 - t01);
        }
        std::mem::swap(&mut last_one, &mut next_one);
        std::mem::swap(&mut last_zero, &mut next_zero);
    }
    last_one
        .iter()
        .zip(&last_zero)
        .map(|(a, b)| a + b)
        .collect()
}

fn equicorrelated_pmf(n: usize, rate: f64, lambda: f64) -> Vec<f64> {
    let mut mass: Vec<f64> = binomial_pmf(n, rate)
        .into_iter()
        .map(|m| (1.0 - lambda) * m)
        .collect();
    mass[0] += lambda * (1.0 - rate);
    mass[n] += lambda * rate;
    mass
}

/// Exact pmf of the vote count given one class whose vote rate is `rate`.
pub fn exact_vote_pmf(model: CorrelationModel, n: usize, rate: f64) -> Result<VotePmf> {
    if n < 1 {
        return Err(Error::BadSize { n });
    }
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::RateOutOfRange {
            name: "rate",
            value: rate,
        });
    }
    let mass = match model {
        CorrelationModel::Independent { .. } => binomial_pmf(n, rate),
        CorrelationModel::Geometric { gamma } => {
            if n > GEOMETRIC_DP_LIMIT {
                return Err(Error::SizeGuardExceeded {
                    n,
                    limit: GEOMETRIC_DP_LIMIT,
                    what: "the geometric-chain exact pmf",
                });
            }
            geometric_pmf(n, rate, gamma.get())
        }
        CorrelationModel::Equicorrelated { lambda } => equicorrelated_pmf(n, rate, lambda.get()),
    };
    Ok(VotePmf { n, mass })
}

/// The two conditional error pieces of the majority vote.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactError {
    /// `P(g_n <= n/2 | y = 1)`.
    pub miss_given_positive: f64,
    /// `P(g_n > n/2 | y = 0)`.
    pub false_alarm_given_negative: f64,
    /// Prior-weighted total.
    pub total: f64,
}

/// Exact `Err(n)` under the strict-majority rule. Ties (even `n`) go to class 0.
pub fn exact_error_parts(cfg: &EnsembleConfig) -> Result<ExactError> {
    let n = cfg.n();
    let half = n / 2;
    let pi = cfg.prior().pi();
    let positive = exact_vote_pmf(cfg.model(), n, cfg.rates().p())?;
    let negative = exact_vote_pmf(cfg.model(), n, cfg.rates().q())?;
    let miss = positive.prob_at_most(half);
    let false_alarm = negative.prob_above(half);
    Ok(ExactError {
        miss_given_positive: miss,
        false_alarm_given_negative: false_alarm,
        total: miss * pi + false_alarm * (1.0 - pi),
    })
}

pub fn exact_error(cfg: &EnsembleConfig) -> Result<f64> {
    exact_error_parts(cfg).map(|e| e.total)
}

/// Probability of one specific vote vector under the model's construction,
/// computed from first principles.
fn vector_probability(model: CorrelationModel, votes: u32, n: usize, r: f64) -> f64 {
    let bit = |i: usize| (votes >> i) & 1 == 1;
    let independent = || {
        (0..n)
            .map(|i| if bit(i) { r } else { 1.0 - r })
            .product::<f64>()
    };
    match model {
        CorrelationModel::Independent { .. } => independent(),
        CorrelationModel::Geometric { gamma } => {
            // P(1 -> 1) = E[f_i f_{i+1}] / r = (r^2 + gamma r (1 - r)) / r, and
            // P(0 -> 1) = (r - E[f_i f_{i+1}]) / (1 - r).
            let g = gamma.get();
            let joint11 = r * r + g * r * (1.0 - r);
            let up_from_one = joint11 / r;
            let up_from_zero = (r - joint11) / (1.0 - r);
            let mut prob = if bit(0) { r } else { 1.0 - r };
            for i in 1..n {
                let up = if bit(i - 1) {
                    up_from_one
                } else {
                    up_from_zero
                };
                prob *= if bit(i) { up } else { 1.0 - up };
            }
            prob
        }
        CorrelationModel::Equicorrelated { lambda } => {
            let l = lambda.get();
            let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
            let shared = if votes == all {
                r
            } else if votes == 0 {
                1.0 - r
            } else {
                0.0
            };
            l * shared + (1.0 - l) * independent()
        }
    }
}

/// `Err(n)` by enumerating all `2^n` vote vectors for each class.
pub fn brute_force_error(cfg: &EnsembleConfig) -> Result<f64> {
    let n = cfg.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeGuardExceeded {
            n,
            limit: BRUTE_FORCE_LIMIT,
            what: "brute-force enumeration",
        });
    }
    let (p, q) = (cfg.rates().p(), cfg.rates().q());
    let pi = cfg.prior().pi();
    let mut miss = 0.0;
    let mut false_alarm = 0.0;
    for votes in 0u32..(1u32 << n) {
        let says_one = 2 * votes.count_ones() as usize > n;
        if says_one {
            false_alarm += vector_probability(cfg.model(), votes, n, q);
        } else {
            miss += vector_probability(cfg.model(), votes, n, p);
        }
    }
    Ok(miss * pi + false_alarm * (1.0 - pi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::sum_variance;
    use crate::model::CorrelationModel as M;
    use proptest::prelude::*;

    fn cfg(n: usize, p: f64, q: f64, pi: f64, m: M) -> EnsembleConfig {
        EnsembleConfig::from_raw(n, p, q, pi, m).unwrap()
    }

    #[test]
    fn binomial_example() {
        let pmf = exact_vote_pmf(M::independent(), 5, 0.7).unwrap();
        let choose = [1.0, 5.0, 10.0, 10.0, 5.0, 1.0];
        for k in 0..=5 {
            let want = choose[k] * 0.7f64.powi(k as i32) * 0.3f64.powi(5 - k as i32);
            assert!((pmf.mass()[k] - want).abs() < 1e-15);
        }
        assert!((pmf.mass()[5] - 0.16807).abs() < 1e-15);
    }

    #[test]
    fn heterogeneous_pmf_is_binomial() {
        let a = exact_vote_pmf(M::heterogeneous(3.0).unwrap(), 9, 0.35).unwrap();
        let b = exact_vote_pmf(M::independent(), 9, 0.35).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn equicorrelated_example() {
        let pmf = exact_vote_pmf(M::equicorrelated(0.2).unwrap(), 5, 0.7).unwrap();
        assert!((pmf.mass()[0] - 0.061944).abs() < 1e-15);
    }

    #[test]
    fn geometric_example() {
        let pmf = exact_vote_pmf(M::geometric(0.5).unwrap(), 2, 0.6).unwrap();
        assert!((pmf.mass()[2] - 0.48).abs() < 1e-15);
        // 0.4 * (1 - t01) with t01 = 0.3.
        assert!((pmf.mass()[0] - 0.28).abs() < 1e-15);
    }

    #[test]
    fn binomial_is_stable_for_large_n() {
        let n = 100_000;
        let pmf = exact_vote_pmf(M::independent(), n, 0.3).unwrap();
        assert!((pmf.total() - 1.0).abs() < 1e-12);
        assert!(((pmf.mean() - 30_000.0) / 30_000.0).abs() < 1e-9);
        assert!(((pmf.variance() - 21_000.0) / 21_000.0).abs() < 1e-9);
        assert!(pmf.mass().iter().all(|m| *m >= 0.0 && m.is_finite()));
    }

    #[test]
    fn binomial_tail_matches_incomplete_beta() {
        use statrs::function::beta::beta_reg;
        for &(n, r, k) in &[
            (101usize, 0.6, 50usize),
            (1000, 0.45, 500),
            (5000, 0.52, 2500),
            (20, 0.9, 10),
        ] {
            let pmf = exact_vote_pmf(M::independent(), n, r).unwrap();
            // P(X <= k) = I_{1-r}(n - k, k + 1)
            let want = beta_reg((n - k) as f64, (k + 1) as f64, 1.0 - r);
            let got = pmf.prob_at_most(k);
            assert!(
                (got - want).abs() < 1e-12,
                "n {n} r {r} k {k}: {got} vs {want}"
            );
            if want > 1e-300 {
                assert!(((got - want) / want).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn geometric_guard() {
        let err =
            exact_vote_pmf(M::geometric(0.5).unwrap(), GEOMETRIC_DP_LIMIT + 1, 0.5).unwrap_err();
        assert!(matches!(err, Error::SizeGuardExceeded { .. }));
        let c = cfg(21, 0.6, 0.4, 0.5, M::independent());
        assert!(matches!(
            brute_force_error(&c),
            Err(Error::SizeGuardExceeded { .. })
        ));
    }

    #[test]
    fn exact_error_examples() {
        let e = exact_error(&cfg(5, 0.7, 0.3, 0.5, M::independent())).unwrap();
        assert!((e - 0.16308).abs() < 1e-14);
        let e = exact_error(&cfg(5, 0.7, 0.3, 0.5, M::equicorrelated(0.2).unwrap())).unwrap();
        assert!((e - 0.190464).abs() < 1e-14);
        let b = brute_force_error(&cfg(3, 0.5, 0.5, 0.5, M::independent())).unwrap();
        assert!((b - 0.5).abs() < 1e-15);
        let b = brute_force_error(&cfg(5, 0.7, 0.3, 0.5, M::independent())).unwrap();
        assert!((b - 0.16308).abs() < 1e-14);
    }

    #[test]
    fn two_vote_geometric_by_hand() {
        // r = 0.6: t11 = 0.8, t01 = 0.3; r = 0.4: t11 = 0.7, t01 = 0.2.
        // Class 1 errs unless both vote 1: 1 - 0.6 * 0.8 = 0.52.
        // Class 0 errs only when both vote 1: 0.4 * 0.7 = 0.28.
        let c = cfg(2, 0.6, 0.4, 0.5, M::geometric(0.5).unwrap());
        let want = 0.5 * 0.52 + 0.5 * 0.28;
        assert!((exact_error(&c).unwrap() - want).abs() < 1e-15);
        assert!((brute_force_error(&c).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn single_member_is_individual_error() {
        for m in [
            M::independent(),
            M::geometric(0.4).unwrap(),
            M::equicorrelated(0.6).unwrap(),
        ] {
            let c = cfg(1, 0.62, 0.27, 0.35, m);
            let want = 0.38 * 0.35 + 0.27 * 0.65;
            assert!((exact_error(&c).unwrap() - want).abs() < 1e-15);
        }
    }

    #[test]
    fn tie_counts_as_class_zero() {
        let c = cfg(2, 0.5, 0.5, 0.5, M::independent());
        let parts = exact_error_parts(&c).unwrap();
        assert!((parts.miss_given_positive - 0.75).abs() < 1e-15);
        assert!((parts.false_alarm_given_negative - 0.25).abs() < 1e-15);
    }

    fn any_model() -> impl Strategy<Value = M> {
        prop_oneof![
            Just(M::independent()),
            (0.01f64..0.99).prop_map(|g| M::geometric(g).unwrap()),
            (0.01f64..0.99).prop_map(|l| M::equicorrelated(l).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn pmf_moments_match_variance_formula(model in any_model(), n in 1usize..=64, r in 0.02f64..0.98) {
            let pmf = exact_vote_pmf(model, n, r).unwrap();
            prop_assert!((pmf.total() - 1.0).abs() <= 1e-12);
            prop_assert!(pmf.mass().iter().all(|m| *m >= 0.0));
            let mean = n as f64 * r;
            prop_assert!(((pmf.mean() - mean) / mean).abs() <= 1e-9);
            let var = sum_variance(model, n, r);
            prop_assert!(((pmf.variance() - var) / var).abs() <= 1e-9);
        }

        #[test]
        fn exact_matches_brute_force(model in any_model(), n in 1usize..=12,
                                     p in 0.02f64..0.98, q in 0.02f64..0.98, pi in 0.02f64..0.98) {
            let c = cfg(n, p, q, pi, model);
            let a = exact_error(&c).unwrap();
            let b = brute_force_error(&c).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }

        #[test]
        fn odd_n_relabeling_symmetry(model in any_model(), half in 0usize..=20,
                                     p in 0.02f64..0.98, q in 0.02f64..0.98, pi in 0.02f64..0.98) {
            let n = 2 * half + 1;
            let a = exact_error(&cfg(n, p, q, pi, model)).unwrap();
            let b = exact_error(&cfg(n, 1.0 - q, 1.0 - p, 1.0 - pi, model)).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn independent_error_converges_to_limit() {
        use crate::analytic::limiting_error;
        use crate::model::{Prior, RatePair};
        for &(p, q, pi) in &[
            (0.55, 0.45, 0.5),
            (0.6, 0.3, 0.2),
            (0.4, 0.45, 0.7),
            (0.55, 0.6, 0.4),
        ] {
            let c = cfg(10_001, p, q, pi, M::independent());
            let lim = limiting_error(RatePair::new(p, q).unwrap(), Prior::new(pi).unwrap());
            assert!((exact_error(&c).unwrap() - lim).abs() < 1e-3);
        }
    }
}
