//! Finite-grid checks of the regularity conditions behind the representations.
//!
//! Asymptotic claims are judged by two heuristics on a finite grid:
//! a "tends to zero" claim holds when the sequence decreases and ends below a
//! tenth of its start; an `O(·)` claim holds when the sequence stays within
//! 10× its head (the larger of the first two values) and ends within 2× it.

pub mod worked;

use serde::{Deserialize, Serialize};

use crate::bahadur::{psi_relative, LogMode, DEFAULT_PSI_GRID};
use crate::distributions::RatioFunction;
use crate::error::{Error, Result};
use crate::numeric::edge_distance;
use crate::sampling::QuantileSchedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition_id: String,
    pub verdict: Verdict,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Grid point of the largest violation; always present when the verdict is `Fails`.
    pub witness: Option<f64>,
}

impl ConditionReport {
    fn new(condition_id: &str, grid: Vec<f64>, values: Vec<f64>, verdict: Verdict) -> Self {
        let witness = match verdict {
            Verdict::Holds => None,
            _ => argmax(&values).map(|i| grid[i]),
        };
        Self {
            condition_id: condition_id.to_string(),
            verdict,
            grid,
            values,
            witness,
        }
    }
}

/// Index of the largest value, a non-finite value winning outright.
fn argmax(values: &[f64]) -> Option<usize> {
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Some(i);
    }
    values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
}

fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

/// "Tends to zero": the tail (the last half, or everything when `eventually`
/// is false) decreases strictly and the last value is below a tenth of the first.
pub fn decays(values: &[f64], eventually: bool) -> bool {
    if values.len() < 2 || values.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let tail = if eventually {
        &values[values.len() - values.len().div_ceil(2)..]
    } else {
        values
    };
    strictly_decreasing(tail) && values[values.len() - 1] < 0.1 * values[0]
}

/// "Bounded": stays within 10× the head and ends within 2× it.
pub fn bounded(values: &[f64]) -> bool {
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let head = values.iter().take(2).fold(0.0f64, |m, v| m.max(v.abs()));
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let last = values[values.len() - 1].abs();
    if head == 0.0 {
        return max == 0.0;
    }
    max <= 10.0 * head && last <= 2.0 * head
}

fn bounded_verdict(values: &[f64]) -> Verdict {
    if bounded(values) {
        Verdict::Holds
    } else {
        Verdict::Fails
    }
}

fn check_n_grid(n_grid: &[u64]) -> Result<()> {
    if n_grid.len() < 3 {
        return Err(Error::Config("n grid needs at least 3 points".into()));
    }
    if !n_grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Config("n grid must be strictly increasing".into()));
    }
    Ok(())
}

fn as_grid(n_grid: &[u64]) -> Vec<f64> {
    n_grid.iter().map(|&n| n as f64).collect()
}

/// `log n / rₙ` along the grid.
pub fn check_a2(schedule: &QuantileSchedule, n_grid: &[u64]) -> Result<ConditionReport> {
    check_n_grid(n_grid)?;
    let values = n_grid
        .iter()
        .map(|&n| {
            let r = schedule.r(n)?;
            if r < 1 {
                return Err(Error::Schedule(format!("r_n = 0 at n = {n}")));
            }
            Ok((n as f64).ln() / r as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = if decays(&values, true) {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    };
    Ok(ConditionReport::new("A2", as_grid(n_grid), values, verdict))
}

/// `v′(u)·(u ∧ (1−u)) / v(u)`.
pub fn sup1_lhs(ratio: &RatioFunction, u: f64) -> Result<f64> {
    if !ratio.model.in_u(u) {
        return Err(Error::domain(format!("u = {u} outside U")));
    }
    if ratio.v(u)? == 0.0 {
        return Err(Error::Singular(format!("v({u}) = 0")));
    }
    Ok(ratio.log_derivative(u)? * edge_distance(u))
}

/// `v(u + (u ∧ (1−u))·o₁) / v(u)`.
pub fn sup2_ratio(ratio: &RatioFunction, u: f64, o1: f64) -> Result<f64> {
    let (ln0, s0) = ratio.ln_abs_v(u)?;
    if s0 == 0.0 {
        return Err(Error::Singular(format!("v({u}) = 0")));
    }
    if o1 == 0.0 {
        return Ok(1.0);
    }
    let shifted = u + edge_distance(u) * o1;
    if !ratio.model.in_u(shifted) {
        return Err(Error::domain(format!("shifted argument {shifted} outside U")));
    }
    let (ln1, s1) = ratio.ln_abs_v(shifted)?;
    Ok(s1 * s0 * (ln1 - ln0).exp())
}

/// `Ψ / [(L/rₙ)^{1/4}·|g/f|(ξ)]` along the grid.
pub fn check_psi_absorption(
    ratio: &RatioFunction,
    schedule: &QuantileSchedule,
    n_grid: &[u64],
    window: f64,
    log_mode: LogMode,
) -> Result<ConditionReport> {
    check_n_grid(n_grid)?;
    let mut values = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let k = schedule.k(n)?;
        let r = k.min(n - k);
        let p = k as f64 / n as f64;
        let relative = psi_relative(ratio, p, r, n, window, log_mode, DEFAULT_PSI_GRID)?;
        let value = relative / (log_mode.log_term(r, n) / r as f64).powf(0.25);
        values.push(value);
    }
    let verdict = bounded_verdict(&values);
    let id = match log_mode {
        LogMode::LogR => "psi_absorption_log_r",
        LogMode::LogN => "psi_absorption_log_n",
    };
    Ok(ConditionReport::new(id, as_grid(n_grid), values, verdict))
}

/// Increment rule for the SRV check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DxRule {
    /// `Δx = |x|^e`, which is `o(|x|)` for `e < 1`.
    PowerOfMagnitude(f64),
}

impl Default for DxRule {
    fn default() -> Self {
        DxRule::PowerOfMagnitude(0.6)
    }
}

impl DxRule {
    pub fn step(self, x: f64) -> f64 {
        match self {
            DxRule::PowerOfMagnitude(e) => x.abs().powf(e),
        }
    }
}

/// `|f(x+Δx) − f(x)| / (|f(x)|·|Δx/x|^{1/2})` along the grid.
pub fn check_srv_r1(func: impl Fn(f64) -> f64, x_grid: &[f64], dx_rule: DxRule) -> Result<ConditionReport> {
    if x_grid.len() < 3 {
        return Err(Error::Config("x grid needs at least 3 points".into()));
    }
    let mut values = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let fx = func(x);
        if fx == 0.0 || !fx.is_finite() {
            return Err(Error::Singular(format!("f({x}) = {fx}")));
        }
        let dx = dx_rule.step(x);
        values.push((func(x + dx) - fx).abs() / (fx.abs() * (dx / x).abs().sqrt()));
    }
    let verdict = bounded_verdict(&values);
    Ok(ConditionReport::new("srv_r1", x_grid.to_vec(), values, verdict))
}

/// `n^{2/3}(log rₙ)^{1/3} / rₙ` along the grid.
pub fn heavy_tail_criterion(schedule: &QuantileSchedule, n_grid: &[u64]) -> Result<ConditionReport> {
    check_n_grid(n_grid)?;
    let values = n_grid
        .iter()
        .map(|&n| {
            let r = n - schedule.k(n)?;
            Ok((n as f64).powf(2.0 / 3.0) * (r as f64).ln().cbrt() / r as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = if decays(&values, false) {
        Verdict::Holds
    } else {
        Verdict::Fails
    };
    Ok(ConditionReport::new("heavy_tail_criterion", as_grid(n_grid), values, verdict))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{DistributionModel, SmoothFunctional};
    use crate::sampling::Side;

    fn decades(lo: i32, hi: i32) -> Vec<u64> {
        (lo..=hi).map(|e| 10u64.pow(e as u32)).collect()
    }

    #[test]
    fn a2_verdicts() {
        let grid = decades(3, 6);
        assert_eq!(check_a2(&QuantileSchedule::fixed_fraction(0.5), &grid).unwrap().verdict, Verdict::Holds);
        assert_eq!(check_a2(&QuantileSchedule::power(0.5, Side::Left), &grid).unwrap().verdict, Verdict::Holds);
        let lp = check_a2(&QuantileSchedule::log_power(1.0, Side::Left), &grid).unwrap();
        assert_eq!(lp.verdict, Verdict::Inconclusive);
        assert!(lp.witness.is_some());
        for v in &lp.values {
            assert!((v - 1.0).abs() < 0.2);
        }
        assert!(check_a2(&QuantileSchedule::fixed_fraction(0.5), &[10, 100]).is_err());
    }

    #[test]
    fn sup2_at_zero_offset_is_one() {
        let r = RatioFunction::new(DistributionModel::super_heavy_log(1.0, None).unwrap(), SmoothFunctional::identity());
        for &u in &[0.6, 0.9, 0.999] {
            assert_eq!(sup2_ratio(&r, u, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn sup2_gumbel_near_one() {
        let r = RatioFunction::new(DistributionModel::gumbel(), SmoothFunctional::power_int(1));
        let v = sup2_ratio(&r, 1e-6, 0.01).unwrap();
        assert!((v - 1.0).abs() < 0.05, "{v}");
    }

    #[test]
    fn sup2_outside_u_is_domain_error() {
        let r = RatioFunction::new(DistributionModel::gumbel(), SmoothFunctional::identity());
        assert!(matches!(sup2_ratio(&r, 0.5, 1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn psi_absorption_uniform_is_zero() {
        let r = RatioFunction::new(DistributionModel::uniform(), SmoothFunctional::identity());
        let rep = check_psi_absorption(&r, &QuantileSchedule::fixed_fraction(0.5), &decades(3, 6), 2.0, LogMode::LogR).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        assert!(rep.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn psi_absorption_gumbel_intermediate_holds() {
        let r = RatioFunction::new(DistributionModel::gumbel(), SmoothFunctional::power_int(0));
        let rep = check_psi_absorption(&r, &QuantileSchedule::power(0.7, Side::Left), &decades(4, 7), 2.0, LogMode::LogR).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds, "{:?}", rep.values);
    }

    #[test]
    fn psi_absorption_super_heavy_fails() {
        let r = RatioFunction::new(DistributionModel::super_heavy_log(1.0, None).unwrap(), SmoothFunctional::identity());
        let rep = check_psi_absorption(&r, &QuantileSchedule::power(0.7, Side::Right), &decades(4, 19), 2.0, LogMode::LogR).unwrap();
        assert_eq!(rep.verdict, Verdict::Fails, "{:?}", rep.values);
        assert!(rep.witness.is_some());
    }

    fn geometric(lo: f64, hi: f64, m: usize) -> Vec<f64> {
        (0..m).map(|i| lo * (hi / lo).powf(i as f64 / (m - 1) as f64)).collect()
    }

    #[test]
    fn srv_power_function_holds_and_decays() {
        let rep = check_srv_r1(|x: f64| x.abs().powf(-2.5), &geometric(10.0, 1e12, 200), DxRule::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        assert!(rep.values.last().unwrap() < &(0.1 * rep.values[0]));
    }

    #[test]
    fn srv_oscillation_fails() {
        let rep = check_srv_r1(|x: f64| x.sin() + 2.0, &geometric(10.0, 1e12, 2000), DxRule::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Fails);
        assert!(rep.witness.is_some());
    }

    #[test]
    fn srv_zero_is_singular() {
        assert!(matches!(
            check_srv_r1(|_| 0.0, &[1.0, 2.0, 3.0], DxRule::default()),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn heavy_tail_verdicts() {
        let grid = decades(4, 16);
        assert_eq!(heavy_tail_criterion(&QuantileSchedule::power(0.8, Side::Right), &grid).unwrap().verdict, Verdict::Holds);
        let f = heavy_tail_criterion(&QuantileSchedule::power(0.6, Side::Right), &grid).unwrap();
        assert_eq!(f.verdict, Verdict::Fails);
        assert!(f.witness.is_some());
        assert_eq!(heavy_tail_criterion(&QuantileSchedule::fixed_fraction(0.5), &grid).unwrap().verdict, Verdict::Holds);
    }

    #[test]
    fn heuristics() {
        assert!(bounded(&[0.0, 0.0, 0.0]));
        assert!(!bounded(&[0.0, 0.0, 1.0]));
        assert!(bounded(&[1.0, 2.0, 5.0, 3.0]));
        assert!(!bounded(&[1.0, 2.0, 5.0, 4.5]));
        assert!(!bounded(&[1.0, f64::INFINITY, 1.0]));
        assert!(decays(&[1.0, 0.5, 0.05], false));
        assert!(!decays(&[1.0, 0.5, 0.2], false));
        assert!(decays(&[1.0, 2.0, 0.5, 0.05], true));
    }
}
