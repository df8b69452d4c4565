//! Closed-form error quantities for the majority-vote classifier.
//!
//! Everything here is a pure function of validated inputs: the mean individual
//! error, the conditional variance of the vote count, the normal-approximation
//! estimate of the ensemble error, and the `n -> infinity` limits that produce
//! the phase diagram.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::model::{CorrelationModel, EnsembleConfig, Prior, RatePair};

/// Beyond this many standard deviations the normal CDF is reported as exactly 0 or 1.
const CDF_SATURATION: f64 = 40.0;

/// Standard normal CDF, accurate to about one ulp of `erfc` in both tails.
pub fn std_normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x >= CDF_SATURATION {
        return 1.0;
    }
    if x <= -CDF_SATURATION {
        return 0.0;
    }
    0.5 * libm::erfc(-x / SQRT_2)
}

/// `err = (1 - p) pi + q (1 - pi)`.
pub fn mean_individual_error(rates: RatePair, prior: Prior) -> f64 {
    let pi = prior.pi();
    (1.0 - rates.p()) * pi + rates.q() * (1.0 - pi)
}

/// Exact conditional variance of the vote count `g_n` given one class with vote rate `rate`.
pub fn sum_variance(model: CorrelationModel, n: usize, rate: f64) -> f64 {
    let nf = n as f64;
    let bernoulli = rate * (1.0 - rate);
    match model {
        CorrelationModel::Independent { .. } => nf * bernoulli,
        CorrelationModel::Geometric { gamma } => {
            let g = gamma.get();
            // sum_{j=1}^{n-1} (1 - j/n) g^j = g/(1-g) * [1 - (1 - g^n) / (n (1 - g))]
            let one_minus_gn = -(nf * g.ln()).exp_m1();
            let lag_sum = g / (1.0 - g) * (1.0 - one_minus_gn / (nf * (1.0 - g)));
            nf * bernoulli * (1.0 + 2.0 * lag_sum)
        }
        CorrelationModel::Equicorrelated { lambda } => {
            let l = lambda.get();
            nf * nf * l * bernoulli + nf * (1.0 - l) * bernoulli
        }
    }
}

/// Geometric-model variance by direct summation of the lag series; O(n).
pub fn geometric_sum_variance_series(gamma: f64, n: usize, rate: f64) -> f64 {
    let nf = n as f64;
    let mut lag_sum = 0.0;
    let mut gj = 1.0;
    for j in 1..n {
        gj *= gamma;
        lag_sum += (1.0 - j as f64 / nf) * gj;
    }
    nf * rate * (1.0 - rate) * (1.0 + 2.0 * lag_sum)
}

/// Limit of `Var(g_n) / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum SigmaSq {
    Finite(f64),
    Infinite,
}

impl SigmaSq {
    pub fn is_finite(&self) -> bool {
        matches!(self, SigmaSq::Finite(_))
    }
}

pub fn asymptotic_sigma_sq(model: CorrelationModel, rate: f64) -> SigmaSq {
    let bernoulli = rate * (1.0 - rate);
    match model {
        CorrelationModel::Independent { .. } => SigmaSq::Finite(bernoulli),
        CorrelationModel::Geometric { gamma } => {
            let g = gamma.get();
            SigmaSq::Finite(bernoulli * (1.0 + g) / (1.0 - g))
        }
        CorrelationModel::Equicorrelated { .. } => SigmaSq::Infinite,
    }
}

/// A normal-approximation error estimate.
///
/// `abusive` is set when the model's asymptotic variance is infinite and the
/// exact finite-`n` standard deviation stood in for `sigma * sqrt(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CltEstimate {
    pub value: f64,
    pub abusive: bool,
}

/// `Phi((n/2 - n p)/s_p) pi + [1 - Phi((n/2 - n q)/s_q)] (1 - pi)` with
/// `s_r = sqrt(sum_variance(model, n, r))`.
pub fn estimated_error(cfg: &EnsembleConfig) -> CltEstimate {
    let n = cfg.n();
    let nf = n as f64;
    let rates = cfg.rates();
    let pi = cfg.prior().pi();
    let z = |rate: f64| (nf / 2.0 - nf * rate) / sum_variance(cfg.model(), n, rate).sqrt();
    // 1 - Phi(z) is evaluated as Phi(-z) to keep the upper tail.
    let value = std_normal_cdf(z(rates.p())) * pi + std_normal_cdf(-z(rates.q())) * (1.0 - pi);
    CltEstimate {
        value,
        abusive: !cfg.model().has_finite_sigma(),
    }
}

/// The `n -> infinity` estimate.
///
/// For finite-sigma models this is the nine-cell limit of [`limiting_error`].
/// For the equicorrelated model `n` cancels out of the substituted standard
/// deviation and the limit is
/// `Phi((1/2 - p)/sqrt(lambda p (1-p))) pi + [1 - Phi((1/2 - q)/sqrt(lambda q (1-q)))] (1 - pi)`.
pub fn estimated_error_asymptotic(
    rates: RatePair,
    prior: Prior,
    model: CorrelationModel,
) -> CltEstimate {
    match model {
        CorrelationModel::Equicorrelated { lambda } => {
            let l = lambda.get();
            let pi = prior.pi();
            let z = |rate: f64| (0.5 - rate) / (l * rate * (1.0 - rate)).sqrt();
            CltEstimate {
                value: std_normal_cdf(z(rates.p())) * pi
                    + std_normal_cdf(-z(rates.q())) * (1.0 - pi),
                abusive: true,
            }
        }
        _ => CltEstimate {
            value: limiting_error(rates, prior),
            abusive: false,
        },
    }
}

/// `Delta(n) = estimated_error - mean_individual_error`; negative means the vote helps.
pub fn delta(cfg: &EnsembleConfig) -> f64 {
    estimated_error(cfg).value - mean_individual_error(cfg.rates(), cfg.prior())
}

/// Position of a rate relative to one half. Compared exactly, no epsilon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Below,
    Half,
    Above,
}

impl Side {
    pub fn of(rate: f64) -> Self {
        if rate < 0.5 {
            Side::Below
        } else if rate > 0.5 {
            Side::Above
        } else {
            Side::Half
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Side::Below => "<1/2",
            Side::Half => "=1/2",
            Side::Above => ">1/2",
        }
    }
}

/// One of the nine cells of the phase diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Region {
    pub p: Side,
    pub q: Side,
}

impl Region {
    pub fn of(rates: RatePair) -> Self {
        Region {
            p: Side::of(rates.p()),
            q: Side::of(rates.q()),
        }
    }

    pub const ALL: [Region; 9] = {
        use Side::*;
        [
            Region { p: Below, q: Below },
            Region { p: Below, q: Half },
            Region { p: Below, q: Above },
            Region { p: Half, q: Below },
            Region { p: Half, q: Half },
            Region { p: Half, q: Above },
            Region { p: Above, q: Below },
            Region { p: Above, q: Half },
            Region { p: Above, q: Above },
        ]
    };
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "p{} q{}", self.p.symbol(), self.q.symbol())
    }
}

/// Sign of `Delta(infinity)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseSign {
    /// `Delta < 0`: the vote beats a typical member.
    Beneficial,
    /// `Delta > 0`.
    Harmful,
    /// `Delta == 0` exactly.
    Neutral,
}

impl PhaseSign {
    pub fn of(delta: f64) -> Self {
        if delta < 0.0 {
            PhaseSign::Beneficial
        } else if delta > 0.0 {
            PhaseSign::Harmful
        } else {
            PhaseSign::Neutral
        }
    }

    /// `-`, `+` or `0`, as drawn on the phase diagram.
    pub fn symbol(&self) -> &'static str {
        match self {
            PhaseSign::Beneficial => "-",
            PhaseSign::Harmful => "+",
            PhaseSign::Neutral => "0",
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PhaseSign::Beneficial => "beneficial",
            PhaseSign::Harmful => "harmful",
            PhaseSign::Neutral => "neutral",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseVerdict {
    pub delta_inf: f64,
    pub sign: PhaseSign,
    pub region: Region,
}

/// `lim Err_hat(n)` for finite-sigma models, one value per cell.
pub fn limiting_error(rates: RatePair, prior: Prior) -> f64 {
    use Side::*;
    let pi = prior.pi();
    let Region { p, q } = Region::of(rates);
    match (q, p) {
        (Above, Below) => 1.0,
        (Above, Half) => 1.0 - pi / 2.0,
        (Above, Above) => 1.0 - pi,
        (Half, Below) => (1.0 + pi) / 2.0,
        (Half, Half) => 0.5,
        (Half, Above) => (1.0 - pi) / 2.0,
        (Below, Below) => pi,
        (Below, Half) => pi / 2.0,
        (Below, Above) => 0.0,
    }
}

/// `Delta(infinity)` with its sign and cell.
pub fn limiting_delta(rates: RatePair, prior: Prior) -> PhaseVerdict {
    let delta_inf = limiting_error(rates, prior) - mean_individual_error(rates, prior);
    PhaseVerdict {
        delta_inf,
        sign: PhaseSign::of(delta_inf),
        region: Region::of(rates),
    }
}

/// Model-aware asymptotic verdict.
///
/// Identical to [`limiting_delta`] for finite-sigma models. For the
/// equicorrelated model the delta comes from the substituted-variance
/// estimate and `abusive` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticVerdict {
    pub verdict: PhaseVerdict,
    pub abusive: bool,
}

pub fn asymptotic_verdict(
    rates: RatePair,
    prior: Prior,
    model: CorrelationModel,
) -> AsymptoticVerdict {
    if model.has_finite_sigma() {
        return AsymptoticVerdict {
            verdict: limiting_delta(rates, prior),
            abusive: false,
        };
    }
    let est = estimated_error_asymptotic(rates, prior, model);
    let delta_inf = est.value - mean_individual_error(rates, prior);
    AsymptoticVerdict {
        verdict: PhaseVerdict {
            delta_inf,
            sign: PhaseSign::of(delta_inf),
            region: Region::of(rates),
        },
        abusive: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CorrelationModel as M;

    fn rp(p: f64, q: f64) -> RatePair {
        RatePair::new(p, q).unwrap()
    }

    fn pr(pi: f64) -> Prior {
        Prior::new(pi).unwrap()
    }

    /// Phi by the Taylor series `1/2 + phi(x) sum x^(2k+1) / (2k+1)!!` for moderate
    /// |x| and the Laplace continued fraction in the tails.
    fn phi_oracle(x: f64) -> f64 {
        let density = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        if x.abs() < 6.0 {
            let (mut term, mut sum, mut k) = (x, x, 0.0);
            while term.abs() > 1e-20 * sum.abs().max(1e-300) {
                k += 1.0;
                term *= x * x / (2.0 * k + 1.0);
                sum += term;
            }
            0.5 + density * sum
        } else {
            let t = x.abs();
            let mut frac = t;
            for k in (1..200).rev() {
                frac = t + k as f64 / frac;
            }
            let tail = density / frac;
            if x > 0.0 {
                1.0 - tail
            } else {
                tail
            }
        }
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert!((std_normal_cdf(40.0) - 1.0).abs() <= 1e-15);
        assert!((std_normal_cdf(1.0) - 0.841344746068543).abs() <= 1e-12);
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn cdf_matches_high_precision_values() {
        // Reference values computed at 30-digit precision.
        let table = [
            (-20.0, 2.7536241186062336951e-89),
            (-10.0, 7.619853024160526066e-24),
            (-8.0, 6.2209605742717841235e-16),
            (-6.454972243679028, 5.4119369546745314472e-11),
            (-5.0, 2.8665157187919391167e-7),
            (-3.0, 0.0013498980316300945267),
            (-1.5, 0.066807201268858066004),
            (-1.0, 0.15865525393145705141),
            (-0.5, 0.30853753872598689636),
            (-0.1, 0.46017216272297101633),
            (0.3, 0.61791142218895263307),
            (1.96, 0.97500210485177956379),
            (2.5, 0.99379033467422386483),
            (4.0, 0.99996832875816688008),
            (6.0, 0.99999999901341235496),
            (8.5, 0.99999999999999999052),
        ];
        for (x, want) in table {
            let got = std_normal_cdf(x);
            assert!((got - want).abs() <= 1e-15, "Phi({x}) = {got}, want {want}");
            if want < 1e-3 {
                assert!(
                    ((got - want) / want).abs() <= 1e-13,
                    "relative tail error at {x}"
                );
            }
        }
    }

    #[test]
    fn cdf_agrees_with_series_oracle() {
        let mut x = -12.0;
        while x <= 12.0 {
            let diff = (std_normal_cdf(x) - phi_oracle(x)).abs();
            assert!(diff <= 1e-12, "x = {x}: diff {diff}");
            x += 0.0137;
        }
    }

    #[test]
    fn cdf_is_monotone_and_symmetric() {
        let mut prev = 0.0;
        let mut x = -41.0;
        while x <= 41.0 {
            let v = std_normal_cdf(x);
            assert!(v >= prev, "not monotone at {x}");
            prev = v;
            if x.abs() <= 8.0 {
                assert!((v + std_normal_cdf(-x) - 1.0).abs() <= 1e-14);
            }
            x += 0.001;
        }
        assert_eq!(std_normal_cdf(-41.0), 0.0);
        assert_eq!(std_normal_cdf(41.0), 1.0);
    }

    #[test]
    fn mean_individual_error_examples() {
        assert!((mean_individual_error(rp(0.6, 0.4), pr(0.5)) - 0.4).abs() < 1e-15);
        for pi in [0.1, 0.5, 0.9] {
            assert!((mean_individual_error(rp(0.5, 0.5), pr(pi)) - 0.5).abs() < 1e-15);
        }
        assert!((mean_individual_error(rp(0.9, 0.1), pr(0.25)) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn sum_variance_examples() {
        assert!((sum_variance(M::independent(), 10, 0.5) - 2.5).abs() < 1e-15);
        let g = M::geometric(0.5).unwrap();
        assert!((sum_variance(g, 2, 0.5) - 0.75).abs() < 1e-15);
        let e = M::equicorrelated(0.5).unwrap();
        assert!((sum_variance(e, 3, 0.5) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn geometric_closed_form_matches_series() {
        for &g in &[0.01, 0.1, 0.3, 0.5, 0.8, 0.95, 0.99, 0.999] {
            let model = M::geometric(g).unwrap();
            for n in (1..=300).chain([1000, 5000]) {
                let closed = sum_variance(model, n, 0.37);
                let series = geometric_sum_variance_series(g, n, 0.37);
                assert!(
                    ((closed - series) / series).abs() <= 1e-12,
                    "gamma {g}, n {n}: {closed} vs {series}"
                );
            }
        }
    }

    #[test]
    fn asymptotic_sigma_examples() {
        assert_eq!(
            asymptotic_sigma_sq(M::independent(), 0.5),
            SigmaSq::Finite(0.25)
        );
        match asymptotic_sigma_sq(M::geometric(0.8).unwrap(), 0.5) {
            SigmaSq::Finite(v) => assert!((v - 2.25).abs() < 1e-12),
            SigmaSq::Infinite => panic!("geometric sigma must be finite"),
        }
        for r in [0.1, 0.5, 0.77] {
            assert_eq!(
                asymptotic_sigma_sq(M::equicorrelated(0.1).unwrap(), r),
                SigmaSq::Infinite
            );
        }
    }

    #[test]
    fn geometric_variance_over_n_approaches_sigma() {
        let model = M::geometric(0.6).unwrap();
        let SigmaSq::Finite(s2) = asymptotic_sigma_sq(model, 0.3) else {
            unreachable!()
        };
        let n = 1_000_000;
        let ratio = sum_variance(model, n, 0.3) / n as f64;
        assert!((ratio - s2).abs() < 1e-5);
    }

    #[test]
    fn estimated_error_examples() {
        let cfg = EnsembleConfig::from_raw(1000, 0.6, 0.4, 0.5, M::independent()).unwrap();
        let est = estimated_error(&cfg);
        // Phi(-6.454972243679028) to 20 digits.
        assert!(((est.value - 5.411936954674531e-11) / 5.41e-11).abs() < 1e-10);
        assert!(!est.abusive);

        let cfg = EnsembleConfig::from_raw(4, 0.5, 0.5, 0.5, M::independent()).unwrap();
        assert_eq!(estimated_error(&cfg).value, 0.5);

        let e = M::equicorrelated(0.7).unwrap();
        let asym = estimated_error_asymptotic(rp(0.9, 0.1), pr(0.5), e);
        assert!(asym.abusive);
        let want = phi_oracle(-0.4 / (0.7f64 * 0.09).sqrt());
        assert!((asym.value - want).abs() < 1e-12);
        assert!((asym.value - 0.0555).abs() < 5e-4);
        // Large finite n approaches the same value.
        let big = EnsembleConfig::from_raw(10_000_000, 0.9, 0.1, 0.5, e).unwrap();
        let finite = estimated_error(&big);
        assert!(finite.abusive);
        assert!((finite.value - asym.value).abs() < 1e-6);
    }

    #[test]
    fn delta_examples() {
        let cfg = EnsembleConfig::from_raw(1000, 0.6, 0.4, 0.5, M::independent()).unwrap();
        assert!((delta(&cfg) + 0.4).abs() < 1e-9);
        for n in [1, 2, 7, 100, 10_000] {
            let cfg = EnsembleConfig::from_raw(n, 0.5, 0.5, 0.5, M::independent()).unwrap();
            assert_eq!(delta(&cfg), 0.0);
        }
        // Exact finite-n variance: 100 * 0.24 * [1 + 8 (1 - (1 - 0.8^100)/20)].
        let cfg = EnsembleConfig::from_raw(100, 0.6, 0.4, 0.5, M::geometric(0.8).unwrap()).unwrap();
        let var = 24.0 * (1.0 + 8.0 * (1.0 - (1.0 - 0.8f64.powi(100)) / 20.0));
        let want = phi_oracle(-10.0 / var.sqrt()) - 0.4;
        assert!((delta(&cfg) - want).abs() < 1e-12);
        assert!((delta(&cfg) + 0.1568).abs() < 1e-3);
    }

    #[test]
    fn limiting_error_examples() {
        assert_eq!(limiting_error(rp(0.7, 0.2), pr(0.3)), 0.0);
        assert_eq!(limiting_error(rp(0.2, 0.7), pr(0.3)), 1.0);
        for pi in [0.1, 0.3, 0.9] {
            assert_eq!(limiting_error(rp(0.5, 0.5), pr(pi)), 0.5);
        }
    }

    #[test]
    fn limiting_delta_examples() {
        let v = limiting_delta(rp(0.7, 0.3), pr(0.5));
        assert!((v.delta_inf + 0.3).abs() < 1e-15);
        assert_eq!(v.sign, PhaseSign::Beneficial);
        assert_eq!(
            v.region,
            Region {
                p: Side::Above,
                q: Side::Below
            }
        );

        let v = limiting_delta(rp(0.4, 0.3), pr(0.5));
        assert!((v.delta_inf - 0.05).abs() < 1e-15);
        assert_eq!(v.sign, PhaseSign::Harmful);

        let v = limiting_delta(rp(0.3, 0.6), pr(0.25));
        assert!((v.delta_inf - 0.375).abs() < 1e-15);
        assert_eq!(v.sign, PhaseSign::Harmful);
    }

    #[test]
    fn sign_follows_delta_exactly() {
        assert_eq!(PhaseSign::of(0.0), PhaseSign::Neutral);
        assert_eq!(PhaseSign::of(-0.0), PhaseSign::Neutral);
        assert_eq!(PhaseSign::of(1e-300), PhaseSign::Harmful);
        assert_eq!(PhaseSign::of(-1e-300), PhaseSign::Beneficial);
    }

    #[test]
    fn half_is_classified_exactly() {
        assert_eq!(Side::of(0.5), Side::Half);
        assert_eq!(Side::of(0.5 + f64::EPSILON), Side::Above);
        assert_eq!(Side::of(0.5 - f64::EPSILON / 2.0), Side::Below);
        assert_eq!(Side::of("0.50".parse().unwrap()), Side::Half);
    }
}
