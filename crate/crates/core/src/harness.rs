//! Monte Carlo "victory count" experiments.
//!
//! Each trial draws one item distribution from the configured generative
//! model, compresses it for every `k` in the configured set, and awards a
//! victory to the smallest `k` with minimal error. Reports carry victory
//! counts, victory fractions and average errors per `k`.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compression::{clamp_regions, compress_pmf, ClampRange, Scheme};
use crate::distributions::{gen_gaussian_pmf, gen_uniform_pmf, GaussianParams, RngSeed, ScorePmf};
use crate::error::{Error, Result};
use crate::fmt::sig6;

/// Trials per work unit. Errors are summed sequentially inside a chunk and
/// chunk sums are combined in chunk order, so averages do not depend on the
/// thread count.
const CHUNK_TRIALS: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Uniform,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeTag {
    Floor,
    Rounding,
}

impl SchemeTag {
    pub fn scheme(self) -> Scheme {
        match self {
            SchemeTag::Floor => Scheme::Floor,
            SchemeTag::Rounding => Scheme::Rounding,
        }
    }
}

impl std::str::FromStr for SchemeTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "floor" => Ok(SchemeTag::Floor),
            "rounding" => Ok(SchemeTag::Rounding),
            other => Err(Error::invalid(format!(
                "unknown scheme `{other}` (expected floor or rounding)"
            ))),
        }
    }
}

/// Experiment configuration. As JSON it is a flat object with keys
/// `model, n, k_set, trials, scheme, clamp, seed, mu, sigma, sample_count`;
/// `clamp` maps a `k` to `{"lo": .., "hi": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: Model,
    #[serde(default = "default_n")]
    pub n: usize,
    pub k_set: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_scheme")]
    pub scheme: SchemeTag,
    #[serde(default)]
    pub clamp: BTreeMap<usize, ClampRange>,
    #[serde(default)]
    pub seed: RngSeed,
    #[serde(flatten)]
    pub gaussian: GaussianParams,
}

const CONFIG_KEYS: [&str; 10] = [
    "model",
    "n",
    "k_set",
    "trials",
    "scheme",
    "clamp",
    "seed",
    "mu",
    "sigma",
    "sample_count",
];

fn default_n() -> usize {
    100
}

fn default_trials() -> u64 {
    100_000
}

fn default_scheme() -> SchemeTag {
    SchemeTag::Floor
}

impl ExperimentConfig {
    pub fn new(model: Model, k_set: Vec<usize>, trials: u64, scheme: SchemeTag) -> Self {
        Self {
            model,
            n: default_n(),
            k_set,
            trials,
            scheme,
            clamp: BTreeMap::new(),
            seed: RngSeed::default(),
            gaussian: GaussianParams::default(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = RngSeed(seed);
        self
    }

    pub fn with_clamp(mut self, k: usize, range: ClampRange) -> Self {
        self.clamp.insert(k, range);
        self
    }

    pub fn with_gaussian(mut self, params: GaussianParams) -> Self {
        self.gaussian = params;
        self
    }

    /// Parses and validates a JSON config. Unknown keys are rejected.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        if let Some(fields) = value.as_object() {
            if let Some(key) = fields.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
                return Err(Error::invalid(format!("unknown config key `{key}`")));
            }
        }
        let config: Self = serde_json::from_value(value)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        validate_k_set(&self.k_set, self.n)?;
        for (k, range) in &self.clamp {
            if !self.k_set.contains(k) {
                return Err(Error::invalid(format!(
                    "clamp given for k={k}, which is not in k_set"
                )));
            }
            range.validate(*k)?;
        }
        if self.model == Model::Gaussian {
            self.gaussian.validate()?;
        }
        Ok(())
    }

    fn generate(&self, trial: u64) -> Result<ScorePmf> {
        let mut rng = self.seed.stream(trial);
        match self.model {
            Model::Uniform => gen_uniform_pmf(self.n, &mut rng),
            Model::Gaussian => gen_gaussian_pmf(self.n, &self.gaussian, &mut rng),
        }
    }
}

/// k sets must be non-empty, strictly increasing, and within `2..=n`.
pub fn validate_k_set(k_set: &[usize], n: usize) -> Result<()> {
    if k_set.is_empty() {
        return Err(Error::invalid("k_set is empty"));
    }
    if k_set.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(format!(
            "k_set {k_set:?} must be strictly increasing without duplicates"
        )));
    }
    if let Some(k) = k_set.iter().find(|k| **k < 2 || **k > n) {
        return Err(Error::invalid(format!("k={k} is outside 2..={n}")));
    }
    Ok(())
}

/// Errors `e_k` for one pmf, in `k_set` order.
pub(crate) fn errors_for_pmf(
    pmf: &ScorePmf,
    k_set: &[usize],
    scheme: SchemeTag,
    clamp: &BTreeMap<usize, ClampRange>,
) -> Result<Vec<f64>> {
    let scheme = scheme.scheme();
    let n = pmf.n();
    let a_f = pmf.mean();
    k_set
        .iter()
        .map(|&k| {
            let mut compressed = compress_pmf(pmf, k, &scheme)?;
            if let Some(range) = clamp.get(&k) {
                compressed = clamp_regions(&compressed, *range)?;
            }
            scheme.error(a_f, compressed.mean(), n, k)
        })
        .collect()
}

pub fn run_trial(pmf: &ScorePmf, config: &ExperimentConfig) -> Result<BTreeMap<usize, f64>> {
    if pmf.n() != config.n {
        return Err(Error::invalid(format!(
            "pmf has {} levels but the experiment uses n={}",
            pmf.n(),
            config.n
        )));
    }
    let errors = errors_for_pmf(pmf, &config.k_set, config.scheme, &config.clamp)?;
    Ok(config.k_set.iter().copied().zip(errors).collect())
}

/// Smallest `k` whose error is minimal.
pub fn victory_index(errors: &BTreeMap<usize, f64>, k_set: &[usize]) -> Result<usize> {
    let mut values = Vec::with_capacity(k_set.len());
    for k in k_set {
        let e = errors
            .get(k)
            .ok_or_else(|| Error::invalid(format!("no error recorded for k={k}")))?;
        values.push(*e);
    }
    winner_position(&values).map(|i| k_set[i])
}

/// Position of the first strict minimum in an ascending-k error list.
pub(crate) fn winner_position(errors: &[f64]) -> Result<usize> {
    if errors.is_empty() {
        return Err(Error::invalid("cannot pick a winner from an empty k_set"));
    }
    let mut best = 0;
    for (i, e) in errors.iter().enumerate().skip(1) {
        if *e < errors[best] {
            best = i;
        }
    }
    Ok(best)
}

/// Running victory counts and error sums over a fixed k set.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Tally {
    pub victories: Vec<u64>,
    pub error_sums: Vec<f64>,
    pub count: u64,
}

impl Tally {
    pub fn new(width: usize) -> Self {
        Self {
            victories: vec![0; width],
            error_sums: vec![0.0; width],
            count: 0,
        }
    }

    /// Records one item's errors and returns the winning position.
    pub fn record(&mut self, errors: &[f64]) -> Result<usize> {
        let winner = winner_position(errors)?;
        self.victories[winner] += 1;
        for (sum, e) in self.error_sums.iter_mut().zip(errors) {
            *sum += e;
        }
        self.count += 1;
        Ok(winner)
    }

    pub fn merge(mut self, other: &Tally) -> Self {
        for (a, b) in self.victories.iter_mut().zip(&other.victories) {
            *a += b;
        }
        for (a, b) in self.error_sums.iter_mut().zip(&other.error_sums) {
            *a += b;
        }
        self.count += other.count;
        self
    }

    pub fn summarize(&self, k_set: &[usize]) -> (BTreeMap<usize, u64>, BTreeMap<usize, f64>) {
        let victories = k_set
            .iter()
            .copied()
            .zip(self.victories.iter().copied())
            .collect();
        let avg = k_set
            .iter()
            .copied()
            .zip(self.error_sums.iter().map(|s| s / self.count.max(1) as f64))
            .collect();
        (victories, avg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub trials: u64,
    pub per_k_victories: BTreeMap<usize, u64>,
    pub per_k_avg_error: BTreeMap<usize, f64>,
}

impl ExperimentReport {
    pub fn victory_fraction(&self, k: usize) -> Option<f64> {
        self.per_k_victories
            .get(&k)
            .map(|v| *v as f64 / self.trials as f64)
    }
}

/// Runs on the current rayon pool.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let chunks = config.trials.div_ceil(CHUNK_TRIALS);
    let width = config.k_set.len();
    let partials: Vec<Tally> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK_TRIALS;
            let end = (start + CHUNK_TRIALS).min(config.trials);
            let mut tally = Tally::new(width);
            for trial in start..end {
                let pmf = config.generate(trial)?;
                let errors = errors_for_pmf(&pmf, &config.k_set, config.scheme, &config.clamp)?;
                tally.record(&errors)?;
            }
            Ok(tally)
        })
        .collect::<Result<_>>()?;
    let total = partials
        .iter()
        .fold(Tally::new(width), |acc, t| acc.merge(t));
    let (per_k_victories, per_k_avg_error) = total.summarize(&config.k_set);
    Ok(ExperimentReport {
        config: config.clone(),
        trials: total.count,
        per_k_victories,
        per_k_avg_error,
    })
}

/// Runs on a dedicated pool of `threads` workers.
pub fn run_experiment_with_threads(
    config: &ExperimentConfig,
    threads: usize,
) -> Result<ExperimentReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    pool.install(|| run_experiment(config))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::invalid(format!(
                "unknown format `{other}` (expected csv or json)"
            ))),
        }
    }
}

pub(crate) fn write_summary_csv<W: Write + ?Sized>(
    victories: &BTreeMap<usize, u64>,
    avg_error: &BTreeMap<usize, f64>,
    total: u64,
    sink: &mut W,
) -> Result<()> {
    writeln!(sink, "k,victories,victory_fraction,avg_error")?;
    for (k, v) in victories {
        let fraction = *v as f64 / total.max(1) as f64;
        let avg = avg_error.get(k).copied().unwrap_or(f64::NAN);
        writeln!(sink, "{k},{v},{},{}", sig6(fraction), sig6(avg))?;
    }
    Ok(())
}

pub fn write_report<W: Write + ?Sized>(
    report: &ExperimentReport,
    format: ReportFormat,
    sink: &mut W,
) -> Result<()> {
    match format {
        ReportFormat::Csv => write_summary_csv(
            &report.per_k_victories,
            &report.per_k_avg_error,
            report.trials,
            sink,
        ),
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut *sink, report)?;
            writeln!(sink)?;
            Ok(())
        }
    }
}
