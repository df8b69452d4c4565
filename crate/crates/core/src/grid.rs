//! Sweeps of the `(p, q)` square built from closed-form quantities only.

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{
    asymptotic_verdict, estimated_error, estimated_error_asymptotic, mean_individual_error,
    PhaseSign,
};
use crate::error::Result;
use crate::model::{EnsembleConfig, GridSpec, Horizon, RatePair};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridRow {
    pub p: f64,
    pub q: f64,
    /// Mean individual error.
    pub err: f64,
    /// Normal-approximation ensemble error at the grid horizon.
    pub err_hat: f64,
    pub delta_n: f64,
    pub delta_inf: f64,
    pub phase: PhaseSign,
    /// The model has infinite asymptotic variance; the substituted finite-`n`
    /// standard deviation was used.
    pub abusive: bool,
}

fn row(spec: &GridSpec, p: f64, q: f64) -> Result<GridRow> {
    let rates = RatePair::new(p, q)?;
    let prior = spec.prior();
    let model = spec.model();
    let err = mean_individual_error(rates, prior);
    let est = match spec.horizon() {
        Horizon::Finite(n) => estimated_error(&EnsembleConfig::new(n, rates, prior, model)?),
        Horizon::Asymptotic => estimated_error_asymptotic(rates, prior, model),
    };
    let limit = asymptotic_verdict(rates, prior, model);
    Ok(GridRow {
        p,
        q,
        err,
        err_hat: est.value,
        delta_n: est.value - err,
        delta_inf: limit.verdict.delta_inf,
        phase: limit.verdict.sign,
        abusive: est.abusive || limit.abusive,
    })
}

/// All grid rows, `p` outer and `q` inner.
pub fn sweep(spec: &GridSpec) -> Result<Vec<GridRow>> {
    spec.points()
        .into_par_iter()
        .map(|(p, q)| row(spec, p, q))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Improvement {
    /// Largest `-Delta(n)` on the grid.
    pub value: f64,
    pub p: f64,
    pub q: f64,
}

/// Maximum of `-delta_n`; ties resolve to the first point in row-major order.
pub fn max_improvement(spec: &GridSpec) -> Result<Improvement> {
    let rows = sweep(spec)?;
    let mut best = Improvement {
        value: f64::NEG_INFINITY,
        p: f64::NAN,
        q: f64::NAN,
    };
    for r in rows {
        if -r.delta_n > best.value {
            best = Improvement {
                value: -r.delta_n,
                p: r.p,
                q: r.q,
            };
        }
    }
    Ok(best)
}
