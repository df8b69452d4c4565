//! Empirical verdicts for real prediction matrices.
//!
//! Given true labels and the 0/1 outputs of `m` classifiers on `N` samples,
//! estimate the average rates and within-class correlation, measure the
//! majority-vote error, and place the ensemble on the phase diagram.

use std::fmt;
use std::io::Read;

use rand::distr::{Bernoulli, Distribution};
use serde::Serialize;

use crate::analytic::{limiting_delta, PhaseVerdict};
use crate::error::{Error, Result};
use crate::model::{CorrelationModel, Prior, RatePair};
use crate::sampler::{majority_of, RngSeed, VoteSampler};

/// Estimated rates exactly 0 or 1 are pulled this far inside the unit interval
/// before computing the verdict.
pub const BOUNDARY_CLAMP: f64 = 1e-9;

pub const HIGH_CORRELATION: f64 = 0.5;

/// Labels plus an `N x m` matrix of binary votes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionMatrix {
    labels: Vec<u8>,
    votes: Vec<u8>,
    width: usize,
}

impl PredictionMatrix {
    pub fn new(labels: Vec<u8>, rows: Vec<Vec<u8>>) -> Result<Self> {
        if labels.len() != rows.len() {
            return Err(Error::Config(format!(
                "votes: {} rows for {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let width = rows.first().map_or(0, Vec::len);
        let mut votes = Vec::with_capacity(width * rows.len());
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != width {
                return Err(Error::Config(format!(
                    "votes: row {r} has {} entries, expected {width}",
                    row.len()
                )));
            }
            votes.extend(row);
        }
        Self::from_flat(labels, votes, width)
    }

    fn from_flat(labels: Vec<u8>, votes: Vec<u8>, width: usize) -> Result<Self> {
        if let Some(r) = labels.iter().position(|&y| y > 1) {
            return Err(Error::NonBinaryEntry {
                row: r,
                column: 0,
                value: labels[r].to_string(),
            });
        }
        if let Some(i) = votes.iter().position(|&v| v > 1) {
            return Err(Error::NonBinaryEntry {
                row: i / width,
                column: i % width + 1,
                value: votes[i].to_string(),
            });
        }
        if width == 0 {
            return Err(Error::Config(
                "votes: at least one classifier column is required".into(),
            ));
        }
        if labels.len() < 2 {
            return Err(Error::Config(format!(
                "labels: need at least 2 samples, got {}",
                labels.len()
            )));
        }
        for class in [0u8, 1] {
            if !labels.contains(&class) {
                return Err(Error::SingleClassData { class });
            }
        }
        Ok(Self {
            labels,
            votes,
            width,
        })
    }

    /// Reads CSV with header `y,f1,...,fm` and one 0/1 row per sample.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(csv_error)?.clone();
        if headers.get(0) != Some("y") {
            return Err(Error::Config(format!(
                "header: first column must be \"y\", found {:?}",
                headers.get(0).unwrap_or("")
            )));
        }
        let width = headers.len() - 1;
        let mut labels = Vec::new();
        let mut votes = Vec::new();
        for (r, record) in rdr.records().enumerate() {
            let record = record.map_err(csv_error)?;
            if record.len() != width + 1 {
                return Err(Error::Config(format!(
                    "row {r}: {} fields, header has {}",
                    record.len(),
                    width + 1
                )));
            }
            for (c, field) in record.iter().enumerate() {
                let bit = match field {
                    "0" => 0,
                    "1" => 1,
                    other => {
                        return Err(Error::NonBinaryEntry {
                            row: r,
                            column: c,
                            value: other.to_string(),
                        })
                    }
                };
                if c == 0 {
                    labels.push(bit);
                } else {
                    votes.push(bit);
                }
            }
        }
        Self::from_flat(labels, votes, width)
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let header: Vec<String> = std::iter::once("y".to_string())
            .chain((1..=self.width).map(|i| format!("f{i}")))
            .collect();
        w.write_record(&header).map_err(csv_error)?;
        for (y, row) in self.labels.iter().zip(self.votes.chunks(self.width)) {
            let record: Vec<&str> = std::iter::once(y)
                .chain(row)
                .map(|&b| if b == 1 { "1" } else { "0" })
                .collect();
            w.write_record(&record).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Synthetic matrix: labels from the prior, each row a vote vector for its class.
    pub fn simulate(
        rates: RatePair,
        prior: Prior,
        model: CorrelationModel,
        samples: usize,
        classifiers: usize,
        seed: RngSeed,
    ) -> Result<Self> {
        let positive = VoteSampler::new(model, classifiers, rates.p())?;
        let negative = VoteSampler::new(model, classifiers, rates.q())?;
        let class = Bernoulli::new(prior.pi()).expect("prior validated to lie in (0, 1)");
        let mut rng = seed.rng();
        let mut labels = Vec::with_capacity(samples);
        let mut votes = Vec::with_capacity(samples * classifiers);
        let mut buf = Vec::with_capacity(classifiers);
        for _ in 0..samples {
            let y = u8::from(class.sample(&mut rng));
            let sampler = if y == 1 { &positive } else { &negative };
            sampler.fill(&mut rng, &mut buf);
            labels.push(y);
            votes.extend_from_slice(&buf);
        }
        Self::from_flat(labels, votes, classifiers)
    }

    pub fn samples(&self) -> usize {
        self.labels.len()
    }

    pub fn classifiers(&self) -> usize {
        self.width
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.votes[i * self.width..(i + 1) * self.width]
    }

    fn rows_of(&self, class: u8) -> impl Iterator<Item = &[u8]> + '_ {
        self.labels
            .iter()
            .zip(self.votes.chunks(self.width))
            .filter(move |(y, _)| **y == class)
            .map(|(_, row)| row)
    }
}

fn csv_error(e: csv::Error) -> Error {
    if e.is_io_error() {
        Error::Io(e.to_string())
    } else {
        Error::Config(format!("csv: {e}"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DiagnoseOptions {
    /// Use this prior instead of the observed class-1 fraction.
    pub prior_override: Option<Prior>,
    /// The classifier columns have a meaningful order; report lag-1 correlation.
    pub ordered: bool,
}

/// Per-class summary of the votes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassSummary {
    pub samples: usize,
    /// Average vote rate over classifiers.
    pub rate: f64,
    /// Standard error of `rate`, from the spread of per-sample vote fractions.
    pub rate_se: f64,
    pub per_classifier: Vec<f64>,
    /// Mean within-class Pearson correlation over classifier pairs with nonzero variance.
    pub mean_correlation: Option<f64>,
    /// Mean correlation of adjacent columns; only with ordered classifiers.
    pub lag1_correlation: Option<f64>,
}

fn summarize(matrix: &PredictionMatrix, class: u8, ordered: bool) -> ClassSummary {
    let m = matrix.width;
    let mut ones = vec![0u64; m];
    let mut both = vec![0u64; m * m];
    let mut fractions = Vec::new();
    let mut on = Vec::with_capacity(m);
    for row in matrix.rows_of(class) {
        on.clear();
        on.extend(
            row.iter()
                .enumerate()
                .filter(|(_, &v)| v == 1)
                .map(|(i, _)| i),
        );
        fractions.push(on.len() as f64 / m as f64);
        for (a, &i) in on.iter().enumerate() {
            ones[i] += 1;
            for &j in &on[a + 1..] {
                both[i * m + j] += 1;
            }
        }
    }
    let count = fractions.len();
    let nf = count as f64;
    let per_classifier: Vec<f64> = ones.iter().map(|&c| c as f64 / nf).collect();
    let rate = per_classifier.iter().sum::<f64>() / m as f64;
    let rate_se = if count >= 2 {
        let var = fractions.iter().map(|f| (f - rate).powi(2)).sum::<f64>() / (nf - 1.0);
        (var / nf).sqrt()
    } else {
        (rate * (1.0 - rate) / (nf * m as f64)).sqrt()
    };

    let corr = |i: usize, j: usize| -> Option<f64> {
        let (mi, mj) = (per_classifier[i], per_classifier[j]);
        let (vi, vj) = (mi * (1.0 - mi), mj * (1.0 - mj));
        if vi <= 0.0 || vj <= 0.0 {
            return None;
        }
        let cov = both[i.min(j) * m + i.max(j)] as f64 / nf - mi * mj;
        Some(cov / (vi * vj).sqrt())
    };
    let mean_of = |pairs: &mut dyn Iterator<Item = (usize, usize)>| -> Option<f64> {
        let (sum, k) = pairs
            .filter_map(|(i, j)| corr(i, j))
            .fold((0.0, 0usize), |(s, k), c| (s + c, k + 1));
        (k > 0).then(|| sum / k as f64)
    };
    let mean_correlation = mean_of(&mut (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))));
    let lag1_correlation = if ordered {
        mean_of(&mut (1..m).map(|j| (j - 1, j)))
    } else {
        None
    };
    ClassSummary {
        samples: count,
        rate,
        rate_se,
        per_classifier,
        mean_correlation,
        lag1_correlation,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosisReport {
    pub samples: usize,
    pub classifiers: usize,
    pub p_hat: f64,
    pub q_hat: f64,
    pub p_hat_se: f64,
    pub q_hat_se: f64,
    pub p_hat_i: Vec<f64>,
    pub q_hat_i: Vec<f64>,
    pub mean_correlation_positive: Option<f64>,
    pub mean_correlation_negative: Option<f64>,
    pub lag1_correlation_positive: Option<f64>,
    pub lag1_correlation_negative: Option<f64>,
    /// Prior used for the individual error and the verdict.
    pub prior: f64,
    pub prior_overridden: bool,
    pub err_hat_individual: f64,
    pub err_majority: f64,
    pub verdict: PhaseVerdict,
    pub warnings: Vec<String>,
}

fn clamp_rate(name: &str, value: f64, warnings: &mut Vec<String>) -> f64 {
    if value <= 0.0 || value >= 1.0 {
        let clamped = value.clamp(BOUNDARY_CLAMP, 1.0 - BOUNDARY_CLAMP);
        warnings.push(format!(
            "{name} = {value} lies on the closed boundary; verdict computed at {clamped}"
        ));
        clamped
    } else {
        value
    }
}

pub fn diagnose(matrix: &PredictionMatrix, options: DiagnoseOptions) -> Result<DiagnosisReport> {
    let pos = summarize(matrix, 1, options.ordered);
    let neg = summarize(matrix, 0, options.ordered);
    let prior = match options.prior_override {
        Some(p) => p,
        None => Prior::new(pos.samples as f64 / matrix.samples() as f64)?,
    };
    let pi = prior.pi();

    let mut warnings = Vec::new();
    let p_clamped = clamp_rate("p_hat", pos.rate, &mut warnings);
    let q_clamped = clamp_rate("q_hat", neg.rate, &mut warnings);
    let verdict = limiting_delta(RatePair::new(p_clamped, q_clamped)?, prior);

    let high = [
        pos.mean_correlation,
        neg.mean_correlation,
        pos.lag1_correlation,
        neg.lag1_correlation,
    ]
    .into_iter()
    .flatten()
    .any(|c| c >= HIGH_CORRELATION);
    if high {
        warnings.push(format!(
            "high mean correlation (>= {HIGH_CORRELATION}): asymptotic verdict unreliable; \
             a strongly correlated ensemble behaves like a much smaller independent one"
        ));
    }
    for (name, rate, se) in [
        ("p_hat", pos.rate, pos.rate_se),
        ("q_hat", neg.rate, neg.rate_se),
    ] {
        if (rate - 0.5).abs() <= 2.0 * se {
            warnings.push(format!(
                "{name} = {rate:.4} is within 2 standard errors ({se:.2e}) of the 0.5 boundary: phase indeterminate"
            ));
        }
    }
    if pos.mean_correlation.is_none() || neg.mean_correlation.is_none() {
        warnings.push("a class has fewer than two classifiers with nonzero vote variance; correlation unavailable".into());
    }

    let wrong = (0..matrix.samples())
        .filter(|&i| majority_of(matrix.row(i)) != matrix.labels[i])
        .count();

    Ok(DiagnosisReport {
        samples: matrix.samples(),
        classifiers: matrix.classifiers(),
        p_hat: pos.rate,
        q_hat: neg.rate,
        p_hat_se: pos.rate_se,
        q_hat_se: neg.rate_se,
        p_hat_i: pos.per_classifier,
        q_hat_i: neg.per_classifier,
        mean_correlation_positive: pos.mean_correlation,
        mean_correlation_negative: neg.mean_correlation,
        lag1_correlation_positive: pos.lag1_correlation,
        lag1_correlation_negative: neg.lag1_correlation,
        prior: pi,
        prior_overridden: options.prior_override.is_some(),
        err_hat_individual: (1.0 - pos.rate) * pi + neg.rate * (1.0 - pi),
        err_majority: wrong as f64 / matrix.samples() as f64,
        verdict,
        warnings,
    })
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}

impl fmt::Display for DiagnosisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "samples            {}", self.samples)?;
        writeln!(f, "classifiers        {}", self.classifiers)?;
        writeln!(
            f,
            "prior              {:.6}{}",
            self.prior,
            if self.prior_overridden {
                " (override)"
            } else {
                ""
            }
        )?;
        writeln!(
            f,
            "p_hat (avg TPR)    {:.6} +- {:.2e}",
            self.p_hat, self.p_hat_se
        )?;
        writeln!(
            f,
            "q_hat (avg FPR)    {:.6} +- {:.2e}",
            self.q_hat, self.q_hat_se
        )?;
        writeln!(
            f,
            "mean corr | y=1    {}   | y=0 {}",
            opt(self.mean_correlation_positive),
            opt(self.mean_correlation_negative)
        )?;
        if self.lag1_correlation_positive.is_some() || self.lag1_correlation_negative.is_some() {
            writeln!(
                f,
                "lag-1 corr | y=1   {}   | y=0 {}",
                opt(self.lag1_correlation_positive),
                opt(self.lag1_correlation_negative)
            )?;
        }
        writeln!(f, "individual error   {:.6}", self.err_hat_individual)?;
        writeln!(f, "majority error     {:.6}", self.err_majority)?;
        writeln!(
            f,
            "verdict            {} (delta_inf = {:+.6}, cell {})",
            self.verdict.sign.name(),
            self.verdict.delta_inf,
            self.verdict.region
        )?;
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}
