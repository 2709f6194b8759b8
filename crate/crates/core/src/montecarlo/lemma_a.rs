//! Agreement of the direct and rejection conditional order-statistic samplers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, Discrete};
use statrs::function::beta::beta_reg;

use super::ks::{one_sample_critical, one_sample_ks, two_sample_critical, two_sample_ks, KS_C_1PCT};
use crate::error::{Error, Result};
use crate::sampling::{conditional_uniform_order_stats, rejection_conditional_sampler, SeedPath};

pub const MIN_DRAWS: usize = 1000;
pub const MIN_BINOMIAL_MASS: f64 = 1e-4;

const DIRECT_STREAM: u64 = 0x4c41_0001;
const REJECTION_STREAM: u64 = 0x4c41_0002;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaStatus {
    Pass,
    Fail,
    /// Too few draws for the asymptotic critical value; nothing was run.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaAReport {
    pub n: usize,
    pub alpha: f64,
    pub k: usize,
    pub draws: usize,
    pub seed: u64,
    pub binomial_mass: f64,
    /// Two-sample KS distance per marginal index `i = 1..=k`.
    pub ks_statistics: Vec<f64>,
    pub critical_value: f64,
    /// One-sample KS distance of the direct marginals against `α·Beta(i, k−i+1)`.
    pub beta_ks_statistics: Vec<f64>,
    pub beta_critical_value: f64,
    pub status: LemmaStatus,
    pub pass: bool,
}

fn check(n: usize, alpha: f64, k: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha = {alpha} outside (0, 1)")));
    }
    if k == 0 || k > n {
        return Err(Error::Config(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let mass = Binomial::new(alpha, n as u64)
        .map_err(|e| Error::Config(e.to_string()))?
        .pmf(k as u64);
    if mass < MIN_BINOMIAL_MASS {
        return Err(Error::Config(format!(
            "P(Bin({n}, {alpha}) = {k}) = {mass:e} is below {MIN_BINOMIAL_MASS:e}; rejection is infeasible"
        )));
    }
    Ok(mass)
}

/// Default budget: the chance of `50/mass` consecutive misses is about `e^{−50}`.
pub fn default_budget(mass: f64) -> u64 {
    ((50.0 / mass).ceil() as u64).max(1000)
}

pub fn lemma_a_experiment(n: usize, alpha: f64, k: usize, draws: usize, seed: u64) -> Result<LemmaAReport> {
    let mass = check(n, alpha, k)?;
    lemma_a_experiment_with_budget(n, alpha, k, draws, seed, default_budget(mass))
}

pub fn lemma_a_experiment_with_budget(
    n: usize,
    alpha: f64,
    k: usize,
    draws: usize,
    seed: u64,
    max_tries: u64,
) -> Result<LemmaAReport> {
    let mass = check(n, alpha, k)?;
    let mut report = LemmaAReport {
        n,
        alpha,
        k,
        draws,
        seed,
        binomial_mass: mass,
        ks_statistics: Vec::new(),
        critical_value: two_sample_critical(KS_C_1PCT, draws, draws),
        beta_ks_statistics: Vec::new(),
        beta_critical_value: one_sample_critical(KS_C_1PCT, draws),
        status: LemmaStatus::Inconclusive,
        pass: false,
    };
    if draws < MIN_DRAWS {
        return Ok(report);
    }
    let direct = (0..draws as u64)
        .into_par_iter()
        .map(|d| conditional_uniform_order_stats(n, alpha, k, SeedPath::new(seed, DIRECT_STREAM, n as u64, d)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let rejected = (0..draws as u64)
        .into_par_iter()
        .map(|d| rejection_conditional_sampler(n, alpha, k, SeedPath::new(seed, REJECTION_STREAM, n as u64, d), max_tries))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    for i in 0..k {
        let mut a: Vec<f64> = direct.iter().map(|row| row[i]).collect();
        let mut b: Vec<f64> = rejected.iter().map(|row| row[i]).collect();
        report.ks_statistics.push(two_sample_ks(&mut a, &mut b));
        let (shape_a, shape_b) = ((i + 1) as f64, (k - i) as f64);
        let mut scaled: Vec<f64> = a.iter().map(|x| x / alpha).collect();
        report
            .beta_ks_statistics
            .push(one_sample_ks(&mut scaled, |x| beta_reg(shape_a, shape_b, x.clamp(0.0, 1.0))));
    }
    report.pass = report.ks_statistics.iter().all(|&d| d < report.critical_value);
    report.status = if report.pass { LemmaStatus::Pass } else { LemmaStatus::Fail };
    Ok(report)
}
