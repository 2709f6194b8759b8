//! Seeded experiment driver.
//!
//! Replication `j` at sample size `n` always draws from the stream
//! `SeedPath { master, experiment, n, j }`, and per-`n` aggregation folds the
//! replications in index order after the parallel region, so reports do not
//! depend on the number of worker threads.

mod calibrate;
mod fit;
pub mod ks;
pub mod lemma_a;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bahadur::{BoundParams, LogMode, PointBounds, QuantilePoint, RemainderSample, DEFAULT_PSI_GRID};
use crate::distributions::{ModelDescriptor, RatioFunction};
use crate::error::{Error, Result};
use crate::numeric::{edge_distance, sorted_quantile};
use crate::sampling::{fill_iid, QuantileSchedule, SeedPath};

pub use calibrate::{calibrate_constants, Calibration};
pub use fit::{fit_rate, RateFit};
pub use lemma_a::{lemma_a_experiment, lemma_a_experiment_with_budget, LemmaAReport, LemmaStatus};

pub const QUANTILE_LEVELS: [f64; 3] = [0.5, 0.9, 0.99];
/// Rate fits need at least this many replications per `n`.
pub const MIN_FIT_REPLICATIONS: u64 = 100;
/// Rate fits need `max n / min n` of at least 2³.
pub const MIN_FIT_SPAN: f64 = 8.0;

fn default_theorems() -> Vec<u8> {
    vec![1, 2]
}

fn default_psi_grid() -> usize {
    DEFAULT_PSI_GRID
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelDescriptor,
    pub schedule: QuantileSchedule,
    pub n_grid: Vec<u64>,
    pub replications: u64,
    pub seed: u64,
    #[serde(default)]
    pub experiment_id: u64,
    #[serde(default)]
    pub bound_params: BoundParams,
    /// Overrides `bound_params.log_mode` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_mode: Option<LogMode>,
    #[serde(default = "default_theorems")]
    pub theorems: Vec<u8>,
    #[serde(default = "default_psi_grid")]
    pub psi_grid_points: usize,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config JSON: {e}")))
    }

    pub fn params(&self) -> BoundParams {
        match self.log_mode {
            Some(mode) => self.bound_params.with_log_mode(mode),
            None => self.bound_params,
        }
    }

    /// Checks every invariant that can be checked without sampling.
    pub fn validate(&self) -> Result<RatioFunction> {
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.n_grid.is_empty() {
            return Err(Error::Config("n_grid is empty".into()));
        }
        if !self.n_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config("n_grid must be strictly increasing".into()));
        }
        if self.n_grid[0] < 2 {
            return Err(Error::Config("every n in n_grid must be at least 2".into()));
        }
        if self.theorems.is_empty() || self.theorems.iter().any(|t| !matches!(t, 1 | 2)) {
            return Err(Error::Config(format!("theorems must be a nonempty subset of [1, 2], got {:?}", self.theorems)));
        }
        if self.psi_grid_points < 3 {
            return Err(Error::Config("psi_grid_points must be at least 3".into()));
        }
        self.params().validate()?;
        self.schedule.validate_grid(&self.n_grid)?;
        self.model.build().map_err(|e| match e {
            Error::Config(_) => e,
            other => Error::Config(format!("model: {other}")),
        })
    }

    pub fn seed_path(&self, n: u64, replication: u64) -> SeedPath {
        SeedPath::new(self.seed, self.experiment_id, n, replication)
    }

    /// Whether the grid and replication count support a log-log slope.
    pub fn supports_rate_fit(&self) -> bool {
        let (lo, hi) = (self.n_grid[0] as f64, *self.n_grid.last().unwrap() as f64);
        self.replications >= MIN_FIT_REPLICATIONS && self.n_grid.len() >= 3 && hi / lo >= MIN_FIT_SPAN
    }
}

/// Values at the levels in [`QUANTILE_LEVELS`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub q50: f64,
    pub q90: f64,
    pub q99: f64,
}

impl Quantiles {
    fn of(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Self {
            q50: sorted_quantile(&values, QUANTILE_LEVELS[0]),
            q90: sorted_quantile(&values, QUANTILE_LEVELS[1]),
            q99: sorted_quantile(&values, QUANTILE_LEVELS[2]),
        }
    }
}

/// Fractions of replications with `|R| > Δ` (strict).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exceedance {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r1_delta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r1_delta1_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r2_delta2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r2_delta2_hat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeRecord {
    pub n: u64,
    pub k_n: u64,
    pub p_n: f64,
    pub r_n: u64,
    pub xi: f64,
    /// `(g/f)(ξ)`.
    pub gf: f64,
    pub delta1: f64,
    pub delta1_hat: f64,
    pub delta2: f64,
    pub delta2_hat: f64,
    /// Ψ under the configured log mode; it does not depend on the sample.
    pub mean_psi: f64,
    pub exceedance: Exceedance,
    pub abs_r1: Quantiles,
    pub abs_r2: Quantiles,
    /// `|R₁| / [(pₙ ∧ (1−pₙ))^{1/4}(log rₙ/n)^{3/4}|g/f|(ξ)]`.
    pub normalized_r1: Option<Quantiles>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFits {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_abs_r1: Option<RateFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_abs_r2: Option<RateFit>,
    /// Why a fit is absent, when it is.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub records: Vec<SizeRecord>,
    pub rate_fits: RateFits,
    /// Kept out of the JSON so that reports are byte-reproducible.
    #[serde(skip)]
    pub wall_time_secs: f64,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: ExperimentReport,
    /// All replications, ordered by `n` and then replication index.
    pub samples: Vec<RemainderSample>,
}

impl ExperimentOutput {
    pub fn samples_at(&self, n: u64) -> &[RemainderSample] {
        let lo = self.samples.partition_point(|s| s.n < n);
        let hi = self.samples.partition_point(|s| s.n <= n);
        &self.samples[lo..hi]
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    run_inner(config, config.params())
}

/// Runs on a dedicated pool of `threads` workers (`None`: rayon's default).
pub fn run_experiment_with_threads(config: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentOutput> {
    match threads {
        None => run_experiment(config),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| run_experiment(config))
        }
    }
}

/// One `n`: all replications in index order.
pub(crate) fn replicate(
    config: &ExperimentConfig,
    ratio: &RatioFunction,
    bounds: &PointBounds,
) -> Result<Vec<RemainderSample>> {
    let n = bounds.point.n;
    let rows: Vec<Result<RemainderSample>> = (0..config.replications)
        .into_par_iter()
        .map_init(
            || vec![0.0; n as usize],
            |buf, rep| {
                let seed = config.seed_path(n, rep);
                fill_iid(&ratio.model, seed, buf);
                let row = RemainderSample::evaluate(buf, ratio, bounds, seed).map_err(|e| e.at(n, rep))?;
                if !(row.r1.is_finite() && row.r2.is_finite()) {
                    return Err(Error::domain(format!("non-finite remainder (ξ̂ = {})", row.xi_hat)).at(n, rep));
                }
                Ok(row)
            },
        )
        .collect();
    rows.into_iter().collect()
}

pub(crate) fn point_bounds(config: &ExperimentConfig, ratio: &RatioFunction, n: u64, params: &BoundParams) -> Result<PointBounds> {
    let k = config.schedule.k(n)?;
    let point = QuantilePoint::new(ratio, n, k).map_err(|e| e.at_size(n))?;
    PointBounds::new(ratio, point, params, config.psi_grid_points).map_err(|e| e.at_size(n))
}

fn fraction(rows: &[RemainderSample], exceeds: impl Fn(&RemainderSample) -> bool) -> f64 {
    rows.iter().filter(|r| exceeds(r)).count() as f64 / rows.len() as f64
}

fn aggregate(config: &ExperimentConfig, bounds: &PointBounds, rows: &[RemainderSample]) -> SizeRecord {
    let point = &bounds.point;
    let t1 = config.theorems.contains(&1);
    let t2 = config.theorems.contains(&2);
    let exceedance = Exceedance {
        r1_delta1: t1.then(|| fraction(rows, |r| r.r1.abs() > r.delta1)),
        r1_delta1_hat: t1.then(|| fraction(rows, |r| r.r1.abs() > r.delta1_hat)),
        r2_delta2: t2.then(|| fraction(rows, |r| r.r2.abs() > r.delta2)),
        r2_delta2_hat: t2.then(|| fraction(rows, |r| r.r2.abs() > r.delta2_hat)),
    };
    let unit = edge_distance(point.p).powf(0.25)
        * ((point.r as f64).ln() / point.n as f64).powf(0.75)
        * point.gf.abs();
    let normalized_r1 = (unit > 0.0 && unit.is_finite()).then(|| Quantiles::of(rows.iter().map(|r| r.r1.abs() / unit).collect()));
    SizeRecord {
        n: point.n,
        k_n: point.k,
        p_n: point.p,
        r_n: point.r,
        xi: point.xi,
        gf: point.gf,
        delta1: bounds.delta1,
        delta1_hat: bounds.delta1_hat,
        delta2: bounds.delta2,
        delta2_hat: bounds.delta2_hat,
        mean_psi: bounds.psi_value,
        exceedance,
        abs_r1: Quantiles::of(rows.iter().map(|r| r.r1.abs()).collect()),
        abs_r2: Quantiles::of(rows.iter().map(|r| r.r2.abs()).collect()),
        normalized_r1,
    }
}

fn rate_fits(config: &ExperimentConfig, records: &[SizeRecord]) -> RateFits {
    if !config.supports_rate_fit() {
        return RateFits {
            median_abs_r1: None,
            median_abs_r2: None,
            note: Some(format!(
                "rate fits need >= {MIN_FIT_REPLICATIONS} replications and an n grid of >= 3 points spanning >= {MIN_FIT_SPAN}x"
            )),
        };
    }
    let mut notes = Vec::new();
    let mut fit = |theorem: u8, pick: fn(&SizeRecord) -> f64| -> Option<RateFit> {
        if !config.theorems.contains(&theorem) {
            return None;
        }
        let pts: Vec<(f64, f64)> = records.iter().map(|r| (r.n as f64, pick(r))).collect();
        match fit_rate(&pts) {
            Ok(f) => Some(f),
            Err(e) => {
                notes.push(format!("theorem {theorem}: {e}"));
                None
            }
        }
    };
    let median_abs_r1 = fit(1, |r| r.abs_r1.q50);
    let median_abs_r2 = fit(2, |r| r.abs_r2.q50);
    RateFits {
        median_abs_r1,
        median_abs_r2,
        note: (!notes.is_empty()).then(|| notes.join("; ")),
    }
}

fn run_inner(config: &ExperimentConfig, params: BoundParams) -> Result<ExperimentOutput> {
    let started = Instant::now();
    let ratio = config.validate()?;
    let mut records = Vec::with_capacity(config.n_grid.len());
    let mut samples = Vec::with_capacity(config.n_grid.len() * config.replications as usize);
    for &n in &config.n_grid {
        let bounds = point_bounds(config, &ratio, n, &params)?;
        let rows = replicate(config, &ratio, &bounds)?;
        records.push(aggregate(config, &bounds, &rows));
        samples.extend(rows);
    }
    let rate_fits = rate_fits(config, &records);
    Ok(ExperimentOutput {
        report: ExperimentReport {
            config: config.clone(),
            records,
            rate_fits,
            wall_time_secs: started.elapsed().as_secs_f64(),
        },
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{FamilySpec, FunctionalSpec};

    fn uniform_config(reps: u64) -> ExperimentConfig {
        ExperimentConfig {
            model: ModelDescriptor::new(FamilySpec::Uniform01, FunctionalSpec::Identity),
            schedule: QuantileSchedule::fixed_fraction(0.5),
            n_grid: vec![256, 512, 1024, 2048],
            replications: reps,
            seed: 42,
            experiment_id: 0,
            bound_params: BoundParams::default(),
            log_mode: None,
            theorems: vec![1, 2],
            psi_grid_points: 101,
        }
    }

    #[test]
    fn zero_replications_is_config_error() {
        let e = run_experiment(&uniform_config(0)).unwrap_err();
        assert!(e.is_config());
    }

    #[test]
    fn bad_schedule_is_config_error() {
        let mut c = uniform_config(10);
        c.schedule = QuantileSchedule::explicit(vec![(256, 256), (512, 3), (1024, 3), (2048, 3)]);
        assert!(matches!(run_experiment(&c).unwrap_err(), Error::Schedule(_)));
    }

    #[test]
    fn invariants_of_report() {
        let out = run_experiment(&uniform_config(200)).unwrap();
        assert_eq!(out.samples.len(), 800);
        for rec in &out.report.records {
            for f in [rec.exceedance.r1_delta1, rec.exceedance.r2_delta2].into_iter().flatten() {
                assert!((0.0..=1.0).contains(&f));
            }
            assert!(rec.abs_r1.q50 <= rec.abs_r1.q90 && rec.abs_r1.q90 <= rec.abs_r1.q99);
            assert!(rec.abs_r2.q50 <= rec.abs_r2.q90 && rec.abs_r2.q90 <= rec.abs_r2.q99);
            assert_eq!(rec.mean_psi, 0.0);
            assert_eq!(out.samples_at(rec.n).len(), 200);
        }
        assert!(out.report.rate_fits.median_abs_r1.is_some());
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let c = uniform_config(150);
        let a = run_experiment_with_threads(&c, Some(1)).unwrap();
        let b = run_experiment_with_threads(&c, Some(3)).unwrap();
        assert_eq!(a.report.to_json(), b.report.to_json());
        assert_eq!(a.samples, b.samples);
    }

    #[test]
    fn larger_a_never_increases_exceedance() {
        let mut c = uniform_config(200);
        let base = run_experiment(&c).unwrap();
        c.bound_params.a *= 1.5;
        let bigger = run_experiment(&c).unwrap();
        for (x, y) in base.report.records.iter().zip(&bigger.report.records) {
            assert!(y.exceedance.r1_delta1.unwrap() <= x.exceedance.r1_delta1.unwrap());
            assert!(y.exceedance.r2_delta2.unwrap() <= x.exceedance.r2_delta2.unwrap());
            assert!(y.exceedance.r1_delta1_hat.unwrap() <= x.exceedance.r1_delta1_hat.unwrap());
        }
        // same draws, only the bounds moved
        for (x, y) in base.samples.iter().zip(&bigger.samples) {
            assert_eq!(x.r1, y.r1);
        }
    }

    #[test]
    fn runtime_error_names_replication() {
        let mut c = uniform_config(50);
        c.model = ModelDescriptor::new(FamilySpec::SuperHeavyLog { c: 1.0, x0: None }, FunctionalSpec::Identity);
        // ξ = exp(1/0.00145) is finite, but X_{k:n} overflows in a fair share of replications
        c.schedule = QuantileSchedule::explicit(vec![(200_000, 199_710)]);
        c.n_grid = vec![200_000];
        let e = run_experiment(&c).unwrap_err();
        assert!(matches!(e, Error::AtReplication { n: 200_000, .. }), "{e}");
        assert!(e.to_string().contains("replication"));
        assert!(!e.is_config());
    }

    #[test]
    fn config_json_roundtrip() {
        let text = r#"{
            "model": {"family": "gumbel", "G": {"form": "power_int", "k": 0}},
            "schedule": {"rule": "power", "beta": 0.7, "side": "left"},
            "n_grid": [10000, 100000],
            "replications": 100,
            "seed": 7,
            "bound_params": {"A": 1.0, "B": 1.0},
            "log_mode": "n"
        }"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(c.params().log_mode, LogMode::LogN);
        assert_eq!(c.params().window, 2.0);
        assert_eq!(c.theorems, vec![1, 2]);
        let back = ExperimentConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(ExperimentConfig::from_json("{").unwrap_err().is_config());
        assert!(ExperimentConfig::from_json(r#"{"model": 1}"#).unwrap_err().is_config());
    }
}
