//! Validated domain types shared by every other module.
//!
//! Every type here is checked at construction: a value that exists satisfies
//! its invariants. Fields are private and exposed through accessors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn open_unit(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(Error::RateOutOfRange { name, value })
    }
}

/// Average true positive rate `p` and average false positive rate `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePair {
    p: f64,
    q: f64,
}

impl RatePair {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        Ok(Self {
            p: open_unit("p", p)?,
            q: open_unit("q", q)?,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Conditional vote rate for the given true class: `p` for class 1, `q` for class 0.
    pub fn rate_for(&self, class: u8) -> f64 {
        if class == 1 {
            self.p
        } else {
            self.q
        }
    }
}

/// Prior probability of class 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prior(f64);

impl Prior {
    pub fn new(pi: f64) -> Result<Self> {
        open_unit("pi", pi).map(Prior)
    }

    pub fn pi(&self) -> f64 {
        self.0
    }
}

/// A pairwise correlation parameter strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation(f64);

impl Correlation {
    pub fn new(name: &'static str, value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Correlation(value))
        } else {
            Err(Error::BadParameter {
                name,
                value,
                reason: "correlation must lie strictly inside (0, 1)",
            })
        }
    }

    pub fn get(&self) -> f64 {
        self.0
    }
}

/// Spread of per-classifier rates around the ensemble average.
///
/// Per-classifier rates are drawn from a Beta distribution whose mean is the
/// class rate (`p` or `q`) and whose `alpha + beta` equals `concentration`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Heterogeneity {
    concentration: f64,
}

impl Heterogeneity {
    pub fn new(concentration: f64) -> Result<Self> {
        if concentration.is_finite() && concentration > 0.0 {
            Ok(Self { concentration })
        } else {
            Err(Error::BadParameter {
                name: "beta_concentration",
                value: concentration,
                reason: "concentration must be a positive finite number",
            })
        }
    }

    pub fn concentration(&self) -> f64 {
        self.concentration
    }

    /// Beta distribution of per-classifier rates with the given mean.
    pub fn beta_for(&self, mean: f64) -> Result<BetaSpec> {
        BetaSpec::from_mean_concentration(mean, self.concentration)
    }
}

/// Shape parameters of a Beta distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaSpec {
    alpha: f64,
    beta: f64,
}

impl BetaSpec {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        for (name, value) in [("alpha", alpha), ("beta", beta)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::BadParameter {
                    name,
                    value,
                    reason: "Beta shape parameters must be positive",
                });
            }
        }
        Ok(Self { alpha, beta })
    }

    /// `alpha = mean * concentration`, `beta = (1 - mean) * concentration`.
    pub fn from_mean_concentration(mean: f64, concentration: f64) -> Result<Self> {
        let mean = open_unit("mean", mean)?;
        let spec = Self::new(mean * concentration, (1.0 - mean) * concentration)?;
        let err = (spec.mean() - mean).abs();
        if err > 1e-12 {
            return Err(Error::BadParameter {
                name: "beta_concentration",
                value: concentration,
                reason: "Beta mean cannot be represented to 1e-12 at this concentration",
            });
        }
        Ok(spec)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }
}

/// Within-class dependence structure of the ensemble votes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorrelationModel {
    /// Votes conditionally independent given the class, optionally with
    /// per-classifier rates drawn from a Beta distribution.
    Independent {
        heterogeneity: Option<Heterogeneity>,
    },
    /// `Corr(f_i, f_j) = gamma^|i-j|`.
    Geometric { gamma: Correlation },
    /// `Corr(f_i, f_j) = lambda` for all `i != j`.
    Equicorrelated { lambda: Correlation },
}

impl CorrelationModel {
    pub fn independent() -> Self {
        CorrelationModel::Independent {
            heterogeneity: None,
        }
    }

    pub fn heterogeneous(concentration: f64) -> Result<Self> {
        Ok(CorrelationModel::Independent {
            heterogeneity: Some(Heterogeneity::new(concentration)?),
        })
    }

    pub fn geometric(gamma: f64) -> Result<Self> {
        Ok(CorrelationModel::Geometric {
            gamma: Correlation::new("gamma", gamma)?,
        })
    }

    pub fn equicorrelated(lambda: f64) -> Result<Self> {
        Ok(CorrelationModel::Equicorrelated {
            lambda: Correlation::new("lambda", lambda)?,
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            CorrelationModel::Independent { .. } => ModelKind::Independent,
            CorrelationModel::Geometric { .. } => ModelKind::Geometric,
            CorrelationModel::Equicorrelated { .. } => ModelKind::Equicorrelated,
        }
    }

    /// Whether the asymptotic variance per classifier is finite.
    pub fn has_finite_sigma(&self) -> bool {
        !matches!(self, CorrelationModel::Equicorrelated { .. })
    }
}

impl Default for CorrelationModel {
    fn default() -> Self {
        Self::independent()
    }
}

/// Name of a correlation model without its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Independent,
    Geometric,
    Equicorrelated,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Independent => "independent",
            ModelKind::Geometric => "geometric",
            ModelKind::Equicorrelated => "equicorrelated",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "independent" => Ok(ModelKind::Independent),
            "geometric" => Ok(ModelKind::Geometric),
            "equicorrelated" => Ok(ModelKind::Equicorrelated),
            other => Err(Error::Config(format!(
                "model: unknown model {other:?}; expected independent|geometric|equicorrelated"
            ))),
        }
    }
}

/// A complete experiment: ensemble size, rates, prior and dependence model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    n: usize,
    rates: RatePair,
    prior: Prior,
    model: CorrelationModel,
}

impl EnsembleConfig {
    pub fn new(n: usize, rates: RatePair, prior: Prior, model: CorrelationModel) -> Result<Self> {
        validate_config(Self {
            n,
            rates,
            prior,
            model,
        })
    }

    /// Convenience constructor from raw numbers.
    pub fn from_raw(n: usize, p: f64, q: f64, pi: f64, model: CorrelationModel) -> Result<Self> {
        Self::new(n, RatePair::new(p, q)?, Prior::new(pi)?, model)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rates(&self) -> RatePair {
        self.rates
    }

    pub fn prior(&self) -> Prior {
        self.prior
    }

    pub fn model(&self) -> CorrelationModel {
        self.model
    }

    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(n, self.rates, self.prior, self.model)
    }
}

/// Re-checks every invariant of `cfg` and returns it unchanged when they hold.
pub fn validate_config(cfg: EnsembleConfig) -> Result<EnsembleConfig> {
    if cfg.n < 1 {
        return Err(Error::BadSize { n: cfg.n });
    }
    RatePair::new(cfg.rates.p, cfg.rates.q)?;
    Prior::new(cfg.prior.0)?;
    match cfg.model {
        CorrelationModel::Independent { heterogeneity } => {
            if let Some(h) = heterogeneity {
                Heterogeneity::new(h.concentration)?;
                h.beta_for(cfg.rates.p)?;
                h.beta_for(cfg.rates.q)?;
            }
        }
        CorrelationModel::Geometric { gamma } => {
            Correlation::new("gamma", gamma.0)?;
        }
        CorrelationModel::Equicorrelated { lambda } => {
            Correlation::new("lambda", lambda.0)?;
        }
    }
    Ok(cfg)
}

/// Ensemble size for grid sweeps: a finite `n` or the `n -> infinity` limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    Finite(usize),
    Asymptotic,
}

impl std::str::FromStr for Horizon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("asymptotic") || s.eq_ignore_ascii_case("inf") {
            return Ok(Horizon::Asymptotic);
        }
        let n: usize = s.parse().map_err(|_| {
            Error::Config(format!(
                "n: {s:?} is neither a positive integer nor \"asymptotic\""
            ))
        })?;
        if n < 1 {
            return Err(Error::BadSize { n });
        }
        Ok(Horizon::Finite(n))
    }
}

impl std::fmt::Display for Horizon {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Horizon::Finite(n) => write!(f, "{n}"),
            Horizon::Asymptotic => f.write_str("asymptotic"),
        }
    }
}

/// One axis of an evenly spaced grid, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    min: f64,
    max: f64,
    resolution: usize,
}

/// Decimal places used to snap grid coordinates onto their decimal values.
const GRID_DECIMALS: f64 = 1e12;

impl Axis {
    /// `resolution` points from `min` to `max`. A single point requires `min == max`.
    pub fn new(name: &'static str, min: f64, max: f64, resolution: usize) -> Result<Self> {
        open_unit(name, min)?;
        open_unit(name, max)?;
        match resolution {
            0 => Err(Error::Config(format!(
                "{name}: resolution must be at least 1"
            ))),
            1 if min != max => Err(Error::Config(format!(
                "{name}: a single-point axis needs min == max (got {min} and {max})"
            ))),
            r if r >= 2 && min >= max => Err(Error::Config(format!(
                "{name}: min ({min}) must be below max ({max})"
            ))),
            _ => Ok(Self {
                min,
                max,
                resolution,
            }),
        }
    }

    /// Axis `step, 2*step, ..., 1 - step`.
    pub fn from_step(name: &'static str, step: f64) -> Result<Self> {
        if !(step > 0.0 && step < 0.5) {
            return Err(Error::BadParameter {
                name: "step",
                value: step,
                reason: "step must lie in (0, 0.5)",
            });
        }
        let intervals = ((1.0 - 2.0 * step) / step).round();
        let max = snap(step + intervals * step);
        Self::new(name, step, max, intervals as usize + 1)
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Coordinate of point `i`, computed from the integer index and snapped to
    /// twelve decimals so `0.5` and friends come out exact.
    pub fn point(&self, i: usize) -> f64 {
        if self.resolution == 1 {
            return self.min;
        }
        let step = (self.max - self.min) / (self.resolution - 1) as f64;
        snap(self.min + i as f64 * step)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.resolution).map(|i| self.point(i))
    }
}

fn snap(x: f64) -> f64 {
    (x * GRID_DECIMALS).round() / GRID_DECIMALS
}

/// A sweep over the `(p, q)` square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    p_axis: Axis,
    q_axis: Axis,
    horizon: Horizon,
    prior: Prior,
    model: CorrelationModel,
    exclude_half: bool,
}

impl GridSpec {
    pub fn new(
        p_axis: Axis,
        q_axis: Axis,
        horizon: Horizon,
        prior: Prior,
        model: CorrelationModel,
    ) -> Result<Self> {
        if let Horizon::Finite(0) = horizon {
            return Err(Error::BadSize { n: 0 });
        }
        if let CorrelationModel::Independent {
            heterogeneity: Some(h),
        } = model
        {
            Heterogeneity::new(h.concentration)?;
        }
        Ok(Self {
            p_axis,
            q_axis,
            horizon,
            prior,
            model,
            exclude_half: false,
        })
    }

    /// Square grid `step, ..., 1 - step` on both axes.
    pub fn with_step(
        step: f64,
        horizon: Horizon,
        prior: Prior,
        model: CorrelationModel,
    ) -> Result<Self> {
        Self::new(
            Axis::from_step("p", step)?,
            Axis::from_step("q", step)?,
            horizon,
            prior,
            model,
        )
    }

    /// Drop grid lines lying exactly on `p = 1/2` or `q = 1/2`.
    pub fn excluding_half(mut self, exclude: bool) -> Self {
        self.exclude_half = exclude;
        self
    }

    pub fn p_axis(&self) -> Axis {
        self.p_axis
    }

    pub fn q_axis(&self) -> Axis {
        self.q_axis
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn prior(&self) -> Prior {
        self.prior
    }

    pub fn model(&self) -> CorrelationModel {
        self.model
    }

    pub fn exclude_half(&self) -> bool {
        self.exclude_half
    }

    /// Grid points in row-major order (`p` outer, `q` inner).
    pub fn points(&self) -> Vec<(f64, f64)> {
        let keep = |x: f64| !(self.exclude_half && x == 0.5);
        let qs: Vec<f64> = self.q_axis.points().filter(|&q| keep(q)).collect();
        self.p_axis
            .points()
            .filter(|&p| keep(p))
            .flat_map(|p| qs.iter().map(move |&q| (p, q)))
            .collect()
    }
}
