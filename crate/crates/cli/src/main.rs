use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use bkquant::bahadur::write_csv;
use bkquant::conditions::worked::examples_report;
use bkquant::conditions::{check_a2, check_psi_absorption, heavy_tail_criterion};
use bkquant::montecarlo::lemma_a::MIN_DRAWS;
use bkquant::montecarlo::{
    calibrate_constants, lemma_a_experiment, lemma_a_experiment_with_budget, run_experiment_with_threads, LemmaStatus,
};
use bkquant::{Error, ExperimentConfig, FamilySpec, LogMode, Side};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

const EXIT_LEMMA_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;
const EXIT_RETRY_BUDGET: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "bkquant", version, about = "Bahadur-Kiefer remainders for intermediate sample quantiles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Master seed; overrides the config's `seed`.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads for the Monte Carlo loop (default: all cores).
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
    /// Logarithm in the bound terms: `r` for log rₙ, `n` for log n; overrides the config.
    #[arg(long, value_name = "MODE")]
    log_mode: Option<LogArg>,
}

#[derive(Args, Debug, Clone)]
struct WithConfig {
    /// Experiment configuration (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the Monte Carlo experiment; writes report.json and samples.csv.
    Simulate(WithConfig),
    /// Run the experiment and fit log-log rates of the median remainders; writes rate.json.
    Rate(WithConfig),
    /// Evaluate the regularity conditions for the configured model and schedule; writes conditions.json.
    Conditions(WithConfig),
    /// Reproduce the worked-example limits and verdicts; writes examples.json.
    Examples {
        #[command(flatten)]
        common: Common,
    },
    /// Test the conditional order-statistic representation with KS statistics; exit 0 iff it passes.
    LemmaA {
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 0.3)]
        alpha: f64,
        #[arg(long, default_value_t = 6)]
        k: usize,
        /// Draws per sampler (at least 1000).
        #[arg(long, default_value_t = 10_000)]
        draws: usize,
        /// Rejection-sampler retry budget (default: max(⌈50/mass⌉, 1000)).
        #[arg(long, value_name = "TRIES")]
        max_tries: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Calibrate the bound constants A, B on a pilot run; writes calibration.json.
    Calibrate {
        #[command(flatten)]
        config: WithConfig,
        /// Pilot sample size.
        #[arg(long, default_value_t = 1024)]
        pilot_n: u64,
        /// Quantile level, in (0.9, 1).
        #[arg(long, default_value_t = 0.99)]
        level: f64,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum LogArg {
    R,
    N,
}

impl From<LogArg> for LogMode {
    fn from(arg: LogArg) -> Self {
        match arg {
            LogArg::R => LogMode::LogR,
            LogArg::N => LogMode::LogN,
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = if err.is_config() {
            EXIT_CONFIG
        } else if matches!(err.root(), Error::RetryBudget { .. }) {
            EXIT_RETRY_BUDGET
        } else {
            EXIT_RUNTIME
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn load_config(args: &WithConfig) -> Result<ExperimentConfig, Failure> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if let Some(seed) = args.common.seed {
        config.seed = seed;
    }
    if let Some(mode) = args.common.log_mode {
        config.log_mode = Some(mode.into());
    }
    config.validate()?;
    Ok(config)
}

fn out_dir(common: &Common) -> Result<&Path, Failure> {
    fs::create_dir_all(&common.out)
        .map_err(|e| Failure::config(format!("cannot create {}: {e}", common.out.display())))?;
    Ok(&common.out)
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), Failure> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| Failure {
        code: EXIT_RUNTIME,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write_file(dir, name, text.as_bytes())
}

fn threads(common: &Common) -> Option<usize> {
    common.threads.map(|t| t as usize)
}

fn simulate(args: &WithConfig) -> Outcome {
    let config = load_config(args)?;
    let dir = out_dir(&args.common)?;
    let out = run_experiment_with_threads(&config, threads(&args.common))?;
    let mut report = out.report.to_json();
    report.push('\n');
    write_file(dir, "report.json", report.as_bytes())?;
    let mut csv = Vec::new();
    write_csv(&mut csv, &out.samples).expect("writing to memory");
    write_file(dir, "samples.csv", &csv)?;
    eprintln!("wall time: {:.3}s", out.report.wall_time_secs);
    Ok(0)
}

#[derive(Serialize)]
struct RatePoint {
    n: u64,
    median_abs_r1: f64,
    median_abs_r2: f64,
}

#[derive(Serialize)]
struct RateOutput<'a> {
    points: Vec<RatePoint>,
    fits: &'a bkquant::montecarlo::RateFits,
}

fn rate(args: &WithConfig) -> Outcome {
    let config = load_config(args)?;
    let dir = out_dir(&args.common)?;
    let out = run_experiment_with_threads(&config, threads(&args.common))?;
    let points = out
        .report
        .records
        .iter()
        .map(|r| RatePoint {
            n: r.n,
            median_abs_r1: r.abs_r1.q50,
            median_abs_r2: r.abs_r2.q50,
        })
        .collect();
    let rate = RateOutput {
        points,
        fits: &out.report.rate_fits,
    };
    write_json(dir, "rate.json", &rate)?;
    eprintln!("wall time: {:.3}s", out.report.wall_time_secs);
    Ok(0)
}

fn conditions(args: &WithConfig) -> Outcome {
    let config = load_config(args)?;
    let dir = out_dir(&args.common)?;
    let ratio = config.validate()?;
    let params = config.params();
    let mut reports = vec![
        check_a2(&config.schedule, &config.n_grid)?,
        check_psi_absorption(&ratio, &config.schedule, &config.n_grid, params.window, params.log_mode)?,
    ];
    // the final admissibility criterion concerns the super-heavy right tail
    let super_heavy = matches!(config.model.family, FamilySpec::SuperHeavyLog { .. });
    if super_heavy && config.schedule.side() == Some(Side::Right) {
        reports.push(heavy_tail_criterion(&config.schedule, &config.n_grid)?);
    }
    write_json(dir, "conditions.json", &reports)?;
    Ok(0)
}

fn examples(common: &Common) -> Outcome {
    let dir = out_dir(common)?;
    write_json(dir, "examples.json", &examples_report()?)?;
    Ok(0)
}

fn lemma_a(n: usize, alpha: f64, k: usize, draws: usize, max_tries: Option<u64>, common: &Common) -> Outcome {
    if draws < MIN_DRAWS {
        return Err(Failure::config(format!("draws = {draws} is below the floor of {MIN_DRAWS}")));
    }
    if k == 0 || k > n {
        return Err(Failure::config(format!("k = {k} must lie in 1..={n}")));
    }
    let seed = common.seed.unwrap_or(0);
    let report = match max_tries {
        Some(tries) => lemma_a_experiment_with_budget(n, alpha, k, draws, seed, tries)?,
        None => lemma_a_experiment(n, alpha, k, draws, seed)?,
    };
    println!("i\tKS(conditional vs rejection)\tKS(conditional vs Beta)");
    for (i, (two, beta)) in report.ks_statistics.iter().zip(&report.beta_ks_statistics).enumerate() {
        println!("{}\t{two:.5}\t{beta:.5}", i + 1);
    }
    println!(
        "critical values: {:.5} (two-sample), {:.5} (Beta); binomial mass {:.4e}; status {:?}",
        report.critical_value, report.beta_critical_value, report.binomial_mass, report.status
    );
    write_json(out_dir(common)?, "lemma_a.json", &report)?;
    Ok(if report.status == LemmaStatus::Pass { 0 } else { EXIT_LEMMA_FAIL })
}

fn calibrate(args: &WithConfig, pilot_n: u64, level: f64) -> Outcome {
    let config = load_config(args)?;
    let dir = out_dir(&args.common)?;
    let start = Instant::now();
    let cal = calibrate_constants(&config, pilot_n, level)?;
    write_json(dir, "calibration.json", &cal)?;
    eprintln!("wall time: {:.3}s", start.elapsed().as_secs_f64());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Simulate(args) | Command::Rate(args) | Command::Conditions(args) => &args.common,
        Command::Calibrate { config, .. } => &config.common,
        Command::Examples { common } | Command::LemmaA { common, .. } => common,
    };
    if let Some(n) = threads(common) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("global pool is configured once");
    }
    let outcome = match &cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Rate(args) => rate(args),
        Command::Conditions(args) => conditions(args),
        Command::Examples { common } => examples(common),
        Command::LemmaA {
            n,
            alpha,
            k,
            draws,
            max_tries,
            common,
        } => lemma_a(*n, *alpha, *k, *draws, *max_tries, common),
        Command::Calibrate { config, pilot_n, level } => calibrate(config, *pilot_n, *level),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
