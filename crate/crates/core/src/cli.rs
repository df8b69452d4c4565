//! The `majvote` command line: argument parsing, JSON config files, and CSV/JSON output.
//!
//! Every flag has a JSON config key of the same name (dashes become
//! underscores). Values given on the command line override the config file.
//! Exit status: 0 on success, 1 on invalid input, 2 on I/O failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analytic::{
    asymptotic_sigma_sq, asymptotic_verdict, estimated_error, estimated_error_asymptotic,
    mean_individual_error, sum_variance, SigmaSq,
};
use crate::diagnose::{diagnose, DiagnoseOptions, PredictionMatrix};
use crate::error::{Error, Result};
use crate::grid::{sweep, GridRow};
use crate::model::{
    Axis, CorrelationModel, EnsembleConfig, GridSpec, Horizon, ModelKind, Prior, RatePair,
};
use crate::montecarlo::{mc_conditional_error, mc_error};
use crate::oracle::{exact_error_parts, exact_vote_pmf};
use crate::sampler::RngSeed;

/// Significant digits for numbers written to CSV.
pub const CSV_DIGITS: usize = 9;

pub const GRID_CSV_HEADER: &str = "p,q,err,err_hat,delta_n,delta_inf,phase,abusive";

#[derive(Debug, Parser)]
#[command(
    name = "majvote",
    version,
    about = "When does a majority vote of weak classifiers help?"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form error, CLT estimate, limits and phase for one ensemble.
    Analytic(EnsembleArgs),
    /// Exact finite-n error (and optionally the vote-count pmf).
    Oracle {
        #[command(flatten)]
        args: EnsembleArgs,
        /// Also emit the vote-count pmf for both classes.
        #[arg(long)]
        pmf: bool,
    },
    /// Seeded Monte Carlo estimate of the ensemble error.
    Simulate {
        #[command(flatten)]
        args: EnsembleArgs,
        /// Condition on one true class instead of drawing it from the prior.
        #[arg(long)]
        class: Option<u8>,
    },
    /// Sweep the (p, q) square and write one CSV row per grid point.
    PhaseGrid(EnsembleArgs),
    /// Estimate rates and correlation from a prediction CSV (`y,f1,...,fm`).
    Diagnose {
        /// Prediction matrix CSV.
        #[arg(long)]
        input: PathBuf,
        /// Prior to use instead of the observed class-1 fraction.
        #[arg(long)]
        pi: Option<f64>,
        /// Classifier columns are ordered; also report lag-1 correlation.
        #[arg(long)]
        ordered: bool,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Flags shared by the ensemble-level subcommands. Each maps onto a [`ConfigDoc`] key.
#[derive(Debug, Clone, Default, Args)]
pub struct EnsembleArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Ensemble size, or `asymptotic` for phase-grid.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub pi: Option<f64>,
    /// independent | geometric | equicorrelated
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long = "beta-concentration")]
    pub beta_concentration: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub stream: Option<u64>,
    #[arg(long)]
    pub reps: Option<u64>,
    /// Grid spacing; the grid runs from `step` to `1 - step` on both axes.
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long = "p-min")]
    pub p_min: Option<f64>,
    #[arg(long = "p-max")]
    pub p_max: Option<f64>,
    #[arg(long = "q-min")]
    pub q_min: Option<f64>,
    #[arg(long = "q-max")]
    pub q_max: Option<f64>,
    /// Points per axis when an explicit range is given.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Drop grid lines at exactly p = 0.5 or q = 0.5.
    #[arg(long = "exclude-half")]
    pub exclude_half: bool,
    /// Worker threads (defaults to RAYON_NUM_THREADS or the core count). Never affects results.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the merged configuration as JSON and exit.
    #[arg(long = "dump-config")]
    pub dump_config: bool,
}

/// `n` in a config document: a count or the word `asymptotic`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SizeDoc {
    Count(usize),
    Word(String),
}

impl SizeDoc {
    fn horizon(&self) -> Result<Horizon> {
        match self {
            SizeDoc::Count(n) => format!("{n}").parse(),
            SizeDoc::Word(w) => w.parse(),
        }
    }
}

/// JSON configuration document. Keys mirror the command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<SizeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_concentration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stream: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub exclude_half: bool,
}

fn read_file(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

impl ConfigDoc {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config documents always serialize")
    }

    /// Config file (if any) overlaid with the explicit flags.
    pub fn merged(args: &EnsembleArgs) -> Result<Self> {
        let mut doc = match &args.config {
            Some(path) => Self::from_json(&read_file(path)?)?,
            None => Self::default(),
        };
        macro_rules! overlay {
            ($($field:ident),*) => { $( if args.$field.is_some() { doc.$field = args.$field; } )* };
        }
        overlay!(
            p,
            q,
            pi,
            gamma,
            lambda,
            beta_concentration,
            seed,
            stream,
            reps,
            step,
            p_min,
            p_max,
            q_min,
            q_max,
            resolution
        );
        if let Some(n) = &args.n {
            doc.n = Some(match n.parse::<usize>() {
                Ok(count) => SizeDoc::Count(count),
                Err(_) => SizeDoc::Word(n.clone()),
            });
        }
        if let Some(m) = &args.model {
            doc.model = Some(m.parse()?);
        }
        doc.exclude_half |= args.exclude_half;
        Ok(doc)
    }

    fn require<T: Copy>(value: Option<T>, name: &str) -> Result<T> {
        value.ok_or_else(|| {
            Error::Config(format!(
                "{name}: required but not given (flag --{} or config key {name:?})",
                name.replace('_', "-")
            ))
        })
    }

    /// The correlation model, rejecting parameters that do not belong to it.
    pub fn correlation_model(&self) -> Result<CorrelationModel> {
        let kind = self.model.unwrap_or(ModelKind::Independent);
        let stray = |name: &str| {
            Err(Error::Config(format!(
                "{name}: not a parameter of the {} model",
                kind.as_str()
            )))
        };
        match kind {
            ModelKind::Independent => {
                if self.gamma.is_some() {
                    return stray("gamma");
                }
                if self.lambda.is_some() {
                    return stray("lambda");
                }
                match self.beta_concentration {
                    Some(c) => CorrelationModel::heterogeneous(c),
                    None => Ok(CorrelationModel::independent()),
                }
            }
            ModelKind::Geometric => {
                if self.lambda.is_some() {
                    return stray("lambda");
                }
                if self.beta_concentration.is_some() {
                    return stray("beta_concentration");
                }
                CorrelationModel::geometric(Self::require(self.gamma, "gamma")?)
            }
            ModelKind::Equicorrelated => {
                if self.gamma.is_some() {
                    return stray("gamma");
                }
                if self.beta_concentration.is_some() {
                    return stray("beta_concentration");
                }
                CorrelationModel::equicorrelated(Self::require(self.lambda, "lambda")?)
            }
        }
    }

    pub fn prior(&self) -> Result<Prior> {
        Prior::new(Self::require(self.pi, "pi")?)
    }

    pub fn ensemble(&self) -> Result<EnsembleConfig> {
        let n = match Self::require(self.n.clone().map(Some).unwrap_or(None).as_ref(), "n")?
            .horizon()?
        {
            Horizon::Finite(n) => n,
            Horizon::Asymptotic => {
                return Err(Error::Config(
                    "n: this subcommand needs a finite ensemble size".into(),
                ))
            }
        };
        let rates = RatePair::new(Self::require(self.p, "p")?, Self::require(self.q, "q")?)?;
        EnsembleConfig::new(n, rates, self.prior()?, self.correlation_model()?)
    }

    pub fn grid(&self) -> Result<GridSpec> {
        let horizon = Self::require(self.n.as_ref(), "n")?.horizon()?;
        let range = [self.p_min, self.p_max, self.q_min, self.q_max];
        let spec = match (self.step, range.iter().any(Option::is_some)) {
            (Some(_), true) => {
                return Err(Error::Config(
                    "step: give either --step or an explicit --p-min/--p-max/--q-min/--q-max range, not both".into(),
                ))
            }
            (Some(step), false) => GridSpec::with_step(step, horizon, self.prior()?, self.correlation_model()?)?,
            (None, _) => {
                let res = Self::require(self.resolution, "resolution")?;
                GridSpec::new(
                    Axis::new("p", Self::require(self.p_min, "p_min")?, Self::require(self.p_max, "p_max")?, res)?,
                    Axis::new("q", Self::require(self.q_min, "q_min")?, Self::require(self.q_max, "q_max")?, res)?,
                    horizon,
                    self.prior()?,
                    self.correlation_model()?,
                )?
            }
        };
        Ok(spec.excluding_half(self.exclude_half))
    }

    pub fn seed(&self) -> Result<RngSeed> {
        Ok(RngSeed::new(
            Self::require(self.seed, "seed")?,
            self.stream.unwrap_or(0),
        ))
    }
}

/// Formats like C's `%.{digits}g`.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent formatting");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{}", trim(mantissa), exp)
    } else {
        trim(&format!(
            "{:.*}",
            (digits as i32 - 1 - exp).max(0) as usize,
            x
        ))
    }
}

fn csv_num(x: f64) -> String {
    fmt_sig(x, CSV_DIGITS)
}

/// Emits a flat list of `(key, value)` records as text, JSON or two-line CSV.
struct Record {
    fields: Vec<(&'static str, Value)>,
}

enum Value {
    Num(f64),
    Int(u64),
    Str(String),
    Bool(bool),
}

impl Record {
    fn new() -> Self {
        Self { fields: Vec::new() }
    }

    fn num(mut self, k: &'static str, v: f64) -> Self {
        self.fields.push((k, Value::Num(v)));
        self
    }

    fn int(mut self, k: &'static str, v: u64) -> Self {
        self.fields.push((k, Value::Int(v)));
        self
    }

    fn text(mut self, k: &'static str, v: impl Into<String>) -> Self {
        self.fields.push((k, Value::Str(v.into())));
        self
    }

    fn flag(mut self, k: &'static str, v: bool) -> Self {
        self.fields.push((k, Value::Bool(v)));
        self
    }

    fn json_map(&self) -> serde_json::Map<String, serde_json::Value> {
        self.fields
            .iter()
            .map(|(k, v)| {
                let jv = match v {
                    Value::Num(x) => serde_json::Number::from_f64(*x)
                        .map(serde_json::Value::Number)
                        .unwrap_or_else(|| serde_json::Value::String(x.to_string())),
                    Value::Int(i) => serde_json::Value::from(*i),
                    Value::Str(s) => serde_json::Value::String(s.clone()),
                    Value::Bool(b) => serde_json::Value::Bool(*b),
                };
                (k.to_string(), jv)
            })
            .collect()
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json_map()).expect("json");
                s.push('\n');
                s
            }
            Format::Csv => {
                let header: Vec<&str> = self.fields.iter().map(|(k, _)| *k).collect();
                let row: Vec<String> = self
                    .fields
                    .iter()
                    .map(|(_, v)| match v {
                        Value::Num(x) => csv_num(*x),
                        Value::Int(i) => i.to_string(),
                        Value::Str(s) => s.clone(),
                        Value::Bool(b) => b.to_string(),
                    })
                    .collect();
                format!("{}\n{}\n", header.join(","), row.join(","))
            }
            Format::Text => {
                let width = self.fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                let mut s = String::new();
                for (k, v) in &self.fields {
                    let v = match v {
                        Value::Num(x) => format!("{x}"),
                        Value::Int(i) => i.to_string(),
                        Value::Str(s) => s.clone(),
                        Value::Bool(b) => b.to_string(),
                    };
                    let _ = writeln!(s, "{k:width$}  {v}");
                }
                s
            }
        }
    }
}

fn config_record(cfg: &EnsembleConfig) -> Record {
    let mut r = Record::new()
        .int("n", cfg.n() as u64)
        .num("p", cfg.rates().p())
        .num("q", cfg.rates().q())
        .num("pi", cfg.prior().pi())
        .text("model", cfg.model().kind().as_str());
    match cfg.model() {
        CorrelationModel::Independent {
            heterogeneity: Some(h),
        } => {
            r = r.num("beta_concentration", h.concentration());
        }
        CorrelationModel::Geometric { gamma } => r = r.num("gamma", gamma.get()),
        CorrelationModel::Equicorrelated { lambda } => r = r.num("lambda", lambda.get()),
        CorrelationModel::Independent {
            heterogeneity: None,
        } => {}
    }
    r
}

fn sigma_text(s: SigmaSq) -> String {
    match s {
        SigmaSq::Finite(v) => format!("{v}"),
        SigmaSq::Infinite => "infinite".into(),
    }
}

fn analytic_report(cfg: &EnsembleConfig, format: Format) -> String {
    let rates = cfg.rates();
    let err = mean_individual_error(rates, cfg.prior());
    let est = estimated_error(cfg);
    let asym = estimated_error_asymptotic(rates, cfg.prior(), cfg.model());
    let limit = asymptotic_verdict(rates, cfg.prior(), cfg.model());
    let sp = asymptotic_sigma_sq(cfg.model(), rates.p());
    let sq = asymptotic_sigma_sq(cfg.model(), rates.q());
    let mut r = config_record(cfg)
        .num("err", err)
        .num("err_hat", est.value)
        .num("delta_n", est.value - err)
        .num("err_hat_inf", asym.value)
        .num("delta_inf", limit.verdict.delta_inf)
        .num("var_p", sum_variance(cfg.model(), cfg.n(), rates.p()))
        .num("var_q", sum_variance(cfg.model(), cfg.n(), rates.q()));
    r = match (sp, sq) {
        (SigmaSq::Finite(a), SigmaSq::Finite(b)) if format != Format::Text => {
            r.num("sigma_sq_p", a).num("sigma_sq_q", b)
        }
        _ => r
            .text("sigma_sq_p", sigma_text(sp))
            .text("sigma_sq_q", sigma_text(sq)),
    };
    r.flag("sigma_finite", sp.is_finite() && sq.is_finite())
        .text("phase", limit.verdict.sign.name())
        .text("region", limit.verdict.region.to_string())
        .flag("abusive", est.abusive || limit.abusive)
        .render(format)
}

fn oracle_report(cfg: &EnsembleConfig, pmf: bool, format: Format) -> Result<String> {
    let parts = exact_error_parts(cfg)?;
    let record = config_record(cfg)
        .num("exact_error", parts.total)
        .num("miss_given_positive", parts.miss_given_positive)
        .num(
            "false_alarm_given_negative",
            parts.false_alarm_given_negative,
        );
    if !pmf {
        return Ok(record.render(format));
    }
    let pos = exact_vote_pmf(cfg.model(), cfg.n(), cfg.rates().p())?;
    let neg = exact_vote_pmf(cfg.model(), cfg.n(), cfg.rates().q())?;
    Ok(match format {
        Format::Json => {
            let mut map = record.json_map();
            map.insert(
                "pmf_positive".into(),
                serde_json::to_value(pos.mass()).expect("json"),
            );
            map.insert(
                "pmf_negative".into(),
                serde_json::to_value(neg.mass()).expect("json"),
            );
            let mut s = serde_json::to_string_pretty(&map).expect("json");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("k,pmf_positive,pmf_negative\n");
            for (k, (a, b)) in pos.mass().iter().zip(neg.mass()).enumerate() {
                let _ = writeln!(s, "{k},{},{}", csv_num(*a), csv_num(*b));
            }
            s
        }
        Format::Text => {
            let mut s = record.render(format);
            let _ = writeln!(
                s,
                "\n{:>6}  {:>24}  {:>24}",
                "k", "P(g=k | y=1)", "P(g=k | y=0)"
            );
            for (k, (a, b)) in pos.mass().iter().zip(neg.mass()).enumerate() {
                let _ = writeln!(s, "{k:>6}  {a:>24.15e}  {b:>24.15e}");
            }
            s
        }
    })
}

fn simulate_report(doc: &ConfigDoc, class: Option<u8>, format: Format) -> Result<String> {
    let cfg = doc.ensemble()?;
    let seed = doc.seed()?;
    let reps = doc.reps.unwrap_or(100_000);
    let est = match class {
        Some(c) => mc_conditional_error(&cfg, c, reps, seed)?,
        None => mc_error(&cfg, reps, seed)?,
    };
    let mut r = config_record(&cfg)
        .int("seed", seed.seed)
        .int("stream", seed.stream)
        .int("reps", est.reps);
    if let Some(c) = class {
        r = r.int("class", c as u64);
    }
    Ok(r.num("mc_error", est.value)
        .num("std_error", est.std_error)
        .render(format))
}

/// Grid rows as CSV with [`GRID_CSV_HEADER`].
pub fn grid_csv(rows: &[GridRow]) -> String {
    let mut s = String::with_capacity(rows.len() * 80);
    s.push_str(GRID_CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            csv_num(r.p),
            csv_num(r.q),
            csv_num(r.err),
            csv_num(r.err_hat),
            csv_num(r.delta_n),
            csv_num(r.delta_inf),
            r.phase.symbol(),
            r.abusive
        );
    }
    s
}

fn grid_report(spec: &GridSpec, format: Format) -> Result<String> {
    let rows = sweep(spec)?;
    Ok(match format {
        Format::Csv | Format::Text => grid_csv(&rows),
        Format::Json => {
            let records: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "p": r.p, "q": r.q, "err": r.err, "err_hat": r.err_hat,
                        "delta_n": r.delta_n, "delta_inf": r.delta_inf,
                        "phase": r.phase.symbol(), "abusive": r.abusive,
                    })
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&records).expect("json");
            s.push('\n');
            s
        }
    })
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::Config("threads: must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::Config(format!("threads: {e}"))),
    }
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
        }
        None => stdout.write_all(text.as_bytes()).map_err(Error::from),
    }
}

/// Executes a parsed command, writing to `stdout` unless `--out` is given.
pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Diagnose {
            input,
            pi,
            ordered,
            format,
            out,
        } => {
            let file = std::fs::File::open(&input)
                .map_err(|e| Error::Io(format!("{}: {e}", input.display())))?;
            let matrix = PredictionMatrix::from_csv(std::io::BufReader::new(file))?;
            let options = DiagnoseOptions {
                prior_override: pi.map(Prior::new).transpose()?,
                ordered,
            };
            let report = diagnose(&matrix, options)?;
            let text = match format.unwrap_or(Format::Text) {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&report).expect("json");
                    s.push('\n');
                    s
                }
                Format::Csv => {
                    return Err(Error::Config(
                        "format: diagnose supports text or json".into(),
                    ))
                }
                Format::Text => report.to_string(),
            };
            emit(&out, &text, stdout)
        }
        Command::Analytic(args)
        | Command::Oracle { args, .. }
        | Command::Simulate { args, .. }
        | Command::PhaseGrid(args)
            if args.dump_config =>
        {
            let doc = ConfigDoc::merged(&args)?;
            emit(&args.out, &(doc.to_json() + "\n"), stdout)
        }
        Command::Analytic(args) => {
            let cfg = ConfigDoc::merged(&args)?.ensemble()?;
            emit(
                &args.out,
                &analytic_report(&cfg, args.format.unwrap_or(Format::Text)),
                stdout,
            )
        }
        Command::Oracle { args, pmf } => {
            let cfg = ConfigDoc::merged(&args)?.ensemble()?;
            let text = oracle_report(&cfg, pmf, args.format.unwrap_or(Format::Text))?;
            emit(&args.out, &text, stdout)
        }
        Command::Simulate { args, class } => {
            let doc = ConfigDoc::merged(&args)?;
            let format = args.format.unwrap_or(Format::Text);
            let text = with_threads(args.threads, || simulate_report(&doc, class, format))??;
            emit(&args.out, &text, stdout)
        }
        Command::PhaseGrid(args) => {
            let spec = ConfigDoc::merged(&args)?.grid()?;
            let format = args.format.unwrap_or(Format::Csv);
            let text = with_threads(args.threads, || grid_report(&spec, format))??;
            emit(&args.out, &text, stdout)
        }
    }
}

/// Full entry point: parse `args`, run, report errors on stderr, return the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_io() {
                2
            } else {
                1
            }
        }
    }
}
