//! Closed forms of `v′(u)(u ∧ (1−u))/v(u)` for the worked families, coded
//! directly from the family formulas and independent of [`RatioFunction`],
//! plus the report comparing them against the generic route.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{bounded, decays, heavy_tail_criterion, sup1_lhs, sup2_ratio, ConditionReport, Verdict};
use crate::distributions::{DistributionModel, RatioFunction, SmoothFunctional};
use crate::error::Result;
use crate::numeric::edge_distance;
use crate::sampling::{QuantileSchedule, Side};

pub const LIMIT_TOLERANCE: f64 = 0.05;

/// Gumbel with `g(x) = x^k`: the two addends `(first, second)`.
pub fn gumbel_sup1_terms(k: i32, u: f64) -> (f64, f64) {
    let m = edge_distance(u);
    let lu = u.ln();
    let q = -(-lu).ln();
    let first = if k == 0 { 0.0 } else { -f64::from(k) * m / (q * u * lu) };
    let second = m / (-u * lu) * (1.0 + lu);
    (first, second)
}

/// `F(x) = 1 − exp(−x^γ)` with `g(x) = x^ρ`.
pub fn exp_power_sup1_terms(rho: f64, gamma: f64, u: f64) -> (f64, f64) {
    let m = edge_distance(u);
    let l1 = (-u).ln_1p();
    let first = (rho + 1.0 - gamma) / gamma * m / (-(1.0 - u) * l1);
    let second = m / (1.0 - u);
    (first, second)
}

/// `F(x) = exp(−x^{−γ})` with `g(x) = x^ρ`.
pub fn frechet_sup1_terms(rho: f64, gamma: f64, u: f64) -> (f64, f64) {
    let m = edge_distance(u);
    let lu = if u > 0.5 { (-(1.0 - u)).ln_1p() } else { u.ln() };
    let first = -(rho + gamma + 1.0) / gamma * m / (u * lu);
    let second = -m / u;
    (first, second)
}

/// `F(x) = 1 − C/log x` with `g(x) = x^ρ`, for `u > 1/2`.
pub fn super_heavy_sup1(c: f64, rho: f64, u: f64) -> f64 {
    c * (rho + 1.0) / (1.0 - u) + 2.0
}

/// Exact `v(u + (1−u)o₁)/v(u)` for the super-heavy family.
pub fn super_heavy_sup2(c: f64, rho: f64, u: f64, o1: f64) -> f64 {
    let s = 1.0 - u;
    (c * (rho + 1.0) * o1 / (s * (1.0 - o1))).exp() / (1.0 - o1).powi(2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub u: f64,
    pub closed_first: Option<f64>,
    pub closed_second: Option<f64>,
    pub closed: Option<f64>,
    pub generic: f64,
    pub rel_diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCheck {
    pub label: String,
    /// `"u->0"` or `"u->1"`.
    pub side: String,
    pub u: f64,
    pub observed: f64,
    pub expected: Option<f64>,
    pub abs_error: Option<f64>,
    pub within_tolerance: Option<bool>,
}

impl LimitCheck {
    fn new(label: &str, u: f64, observed: f64, expected: Option<f64>) -> Self {
        let abs_error = expected.map(|e| (observed - e).abs());
        Self {
            label: label.to_string(),
            side: if u < 0.5 { "u->0" } else { "u->1" }.to_string(),
            u,
            observed,
            expected,
            abs_error,
            within_tolerance: abs_error.map(|e| e <= LIMIT_TOLERANCE),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleCase {
    pub params: BTreeMap<String, f64>,
    pub grid: Vec<GridRow>,
    pub limits: Vec<LimitCheck>,
    pub verdicts: Vec<ConditionReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleEntry {
    pub id: String,
    pub family: String,
    pub cases: Vec<ExampleCase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExamplesReport {
    pub tolerance: f64,
    pub examples: Vec<ExampleEntry>,
}

impl ExamplesReport {
    pub fn entry(&self, id: &str) -> Option<&ExampleEntry> {
        self.examples.iter().find(|e| e.id == id)
    }
}

/// `{1e−6 … 1e−2}` and `{1−1e−2 … 1−1e−6}` in half-decade steps.
pub fn agreement_grid() -> Vec<f64> {
    let small: Vec<f64> = (0..=8).map(|i| 10f64.powf(-6.0 + 0.5 * i as f64)).collect();
    let large: Vec<f64> = small.iter().rev().map(|d| 1.0 - d).collect();
    small.into_iter().chain(large).collect()
}

fn boundary_grid(toward_one: bool) -> Vec<f64> {
    (2..=8)
        .map(|e| {
            let d = 10f64.powi(-e);
            if toward_one {
                1.0 - d
            } else {
                d
            }
        })
        .collect()
}

fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn table(ratio: &RatioFunction, us: &[f64], closed: impl Fn(f64) -> Option<(f64, f64)>) -> Result<Vec<GridRow>> {
    us.iter()
        .map(|&u| {
            let generic = sup1_lhs(ratio, u)?;
            let c = closed(u);
            let total = c.map(|(a, b)| a + b);
            Ok(GridRow {
                u,
                closed_first: c.map(|t| t.0),
                closed_second: c.map(|t| t.1),
                closed: total,
                generic,
                rel_diff: total.map(|t| rel_diff(t, generic)),
            })
        })
        .collect()
}

fn verdict_report(id: &str, grid: Vec<f64>, values: Vec<f64>, verdict: Verdict) -> ConditionReport {
    ConditionReport::new(id, grid, values, verdict)
}

/// First supremum condition near one boundary: `|sup1_lhs|` bounded along a grid approaching it.
fn sup1_verdict(ratio: &RatioFunction, toward_one: bool, grid: Vec<f64>) -> Result<ConditionReport> {
    let values = grid.iter().map(|&u| Ok(sup1_lhs(ratio, u)?.abs())).collect::<Result<Vec<_>>>()?;
    let verdict = if bounded(&values) { Verdict::Holds } else { Verdict::Fails };
    let id = if toward_one { "sup1_u_to_1" } else { "sup1_u_to_0" };
    Ok(verdict_report(id, grid, values, verdict))
}

/// Perturbation used for the ratio condition: `o₁(u) = (u ∧ (1−u))^{1/4}`.
pub fn sup2_offset(u: f64) -> f64 {
    edge_distance(u).powf(0.25)
}

/// Ratio condition near one boundary: `|v(u + (u∧(1−u))o₁)/v(u) − 1|` tends to zero.
fn sup2_verdict(ratio: &RatioFunction, toward_one: bool, grid: Vec<f64>) -> Result<ConditionReport> {
    let values = grid
        .iter()
        .map(|&u| Ok((sup2_ratio(ratio, u, sup2_offset(u))? - 1.0).abs()))
        .collect::<Result<Vec<_>>>()?;
    let verdict = if decays(&values, true) { Verdict::Holds } else { Verdict::Fails };
    let id = if toward_one { "sup2_u_to_1" } else { "sup2_u_to_0" };
    Ok(verdict_report(id, grid, values, verdict))
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn example_1() -> Result<ExampleEntry> {
    let mut cases = Vec::new();
    for k in [0, 1, 2] {
        let ratio = RatioFunction::new(DistributionModel::gumbel(), SmoothFunctional::power_int(k));
        let grid = table(&ratio, &agreement_grid(), |u| Some(gumbel_sup1_terms(k, u)))?;
        let mut limits = Vec::new();
        for u in [1e-8, 1e-12] {
            limits.push(LimitCheck::new("second_term", u, gumbel_sup1_terms(k, u).1, Some(-1.0)));
            limits.push(LimitCheck::new("total", u, sup1_lhs(&ratio, u)?, Some(-1.0)));
        }
        let u = 1.0 - 1e-8;
        limits.push(LimitCheck::new("first_term", u, gumbel_sup1_terms(k, u).0, Some(0.0)));
        // the u → 1 limit of the second term is recorded, not asserted
        limits.push(LimitCheck::new("second_term", u, gumbel_sup1_terms(k, u).1, None));
        let verdicts = vec![
            sup1_verdict(&ratio, false, boundary_grid(false))?,
            sup1_verdict(&ratio, true, boundary_grid(true))?,
            sup2_verdict(&ratio, false, boundary_grid(false))?,
            sup2_verdict(&ratio, true, boundary_grid(true))?,
        ];
        cases.push(ExampleCase {
            params: params(&[("k", f64::from(k))]),
            grid,
            limits,
            verdicts,
        });
    }
    Ok(ExampleEntry {
        id: "example_1".into(),
        family: "gumbel".into(),
        cases,
    })
}

pub const EXAMPLE_2_PARAMS: [(f64, f64); 3] = [(1.0, 2.0), (0.0, 1.0), (2.0, 0.5)];
pub const EXAMPLE_3_PARAMS: [(f64, f64); 3] = [(1.0, 1.0), (0.0, 2.0), (2.0, 0.5)];

fn example_2() -> Result<ExampleEntry> {
    let mut cases = Vec::new();
    for (rho, gamma) in EXAMPLE_2_PARAMS {
        let ratio = RatioFunction::new(DistributionModel::exp_power_tail(gamma)?, SmoothFunctional::power_abs(rho, 1.0));
        let grid = table(&ratio, &agreement_grid(), |u| Some(exp_power_sup1_terms(rho, gamma, u)))?;
        let constant = (rho + 1.0 - gamma) / gamma;
        let limits = vec![
            LimitCheck::new("total", 1e-8, sup1_lhs(&ratio, 1e-8)?, Some(constant)),
            LimitCheck::new("first_term", 1.0 - 1e-8, exp_power_sup1_terms(rho, gamma, 1.0 - 1e-8).0, Some(0.0)),
            LimitCheck::new("second_term", 1.0 - 1e-8, exp_power_sup1_terms(rho, gamma, 1.0 - 1e-8).1, Some(1.0)),
        ];
        let verdicts = vec![
            sup1_verdict(&ratio, false, boundary_grid(false))?,
            sup1_verdict(&ratio, true, boundary_grid(true))?,
            sup2_verdict(&ratio, false, boundary_grid(false))?,
            sup2_verdict(&ratio, true, boundary_grid(true))?,
        ];
        cases.push(ExampleCase {
            params: params(&[("rho", rho), ("gamma", gamma)]),
            grid,
            limits,
            verdicts,
        });
    }
    Ok(ExampleEntry {
        id: "example_2".into(),
        family: "exp_power_tail".into(),
        cases,
    })
}

fn example_3() -> Result<ExampleEntry> {
    let mut cases = Vec::new();
    for (rho, gamma) in EXAMPLE_3_PARAMS {
        let ratio = RatioFunction::new(DistributionModel::weibull_frechet(gamma)?, SmoothFunctional::power_abs(rho, 1.0));
        let grid = table(&ratio, &agreement_grid(), |u| Some(frechet_sup1_terms(rho, gamma, u)))?;
        let constant = (rho + gamma + 1.0) / gamma;
        let limits = vec![
            LimitCheck::new("total", 1.0 - 1e-8, sup1_lhs(&ratio, 1.0 - 1e-8)?, Some(constant)),
            LimitCheck::new("second_term", 1e-8, frechet_sup1_terms(rho, gamma, 1e-8).1, Some(-1.0)),
        ];
        let verdicts = vec![
            sup1_verdict(&ratio, false, boundary_grid(false))?,
            sup1_verdict(&ratio, true, boundary_grid(true))?,
            sup2_verdict(&ratio, false, boundary_grid(false))?,
            sup2_verdict(&ratio, true, boundary_grid(true))?,
        ];
        cases.push(ExampleCase {
            params: params(&[("rho", rho), ("gamma", gamma)]),
            grid,
            limits,
            verdicts,
        });
    }
    Ok(ExampleEntry {
        id: "example_3".into(),
        family: "weibull_frechet".into(),
        cases,
    })
}

fn example_4() -> Result<ExampleEntry> {
    let mut cases = Vec::new();
    for (rho, gamma, sign) in [(1.0, 2.0, 1.0), (0.5, 1.0, -1.0)] {
        let ratio = RatioFunction::new(
            DistributionModel::symmetric_exp_power(gamma)?,
            SmoothFunctional::power_abs(rho, sign),
        );
        let grid = table(&ratio, &agreement_grid(), |_| None)?;
        let limits = vec![
            LimitCheck::new("total", 1e-8, sup1_lhs(&ratio, 1e-8)?, None),
            LimitCheck::new("total", 1.0 - 1e-8, sup1_lhs(&ratio, 1.0 - 1e-8)?, None),
        ];
        let verdicts = vec![
            sup1_verdict(&ratio, false, boundary_grid(false))?,
            sup1_verdict(&ratio, true, boundary_grid(true))?,
            sup2_verdict(&ratio, false, boundary_grid(false))?,
            sup2_verdict(&ratio, true, boundary_grid(true))?,
        ];
        cases.push(ExampleCase {
            params: params(&[("rho", rho), ("gamma", gamma), ("sign", sign)]),
            grid,
            limits,
            verdicts,
        });
    }
    Ok(ExampleEntry {
        id: "example_4".into(),
        family: "symmetric_exp_power".into(),
        cases,
    })
}

pub fn heavy_tail_grid() -> Vec<u64> {
    (4..=16).map(|e| 10u64.pow(e)).collect()
}

fn example_5() -> Result<ExampleEntry> {
    let mut cases = Vec::new();
    for (c, rho) in [(1.0, 0.0), (2.0, 1.0)] {
        let ratio = RatioFunction::new(DistributionModel::super_heavy_log(c, None)?, SmoothFunctional::power_abs(rho, 1.0));
        let us: Vec<f64> = [0.9, 0.99, 0.999].into_iter().chain(agreement_grid().into_iter().skip(9)).collect();
        let grid = table(&ratio, &us, |u| Some((super_heavy_sup1(c, rho, u), 0.0)))?;
        let u = 1.0 - 1e-3;
        let limits = vec![
            LimitCheck::new("sup2_ratio", u, sup2_ratio(&ratio, u, 1e-2)?, Some(super_heavy_sup2(c, rho, u, 1e-2))),
        ];
        let sup2_grid: Vec<f64> = [0.3, 0.1, 0.03, 0.01, 0.003].iter().map(|d| 1.0 - d).collect();
        let verdicts = vec![
            sup1_verdict(&ratio, true, boundary_grid(true))?,
            sup2_verdict(&ratio, true, sup2_grid)?,
        ];
        cases.push(ExampleCase {
            params: params(&[("C", c), ("rho", rho)]),
            grid,
            limits,
            verdicts,
        });
    }
    let mut criterion = Vec::new();
    for beta in [0.8, 0.6] {
        let mut rep = heavy_tail_criterion(&QuantileSchedule::power(beta, Side::Right), &heavy_tail_grid())?;
        rep.condition_id = format!("heavy_tail_criterion_r_n_pow_{beta}");
        criterion.push(rep);
    }
    cases.push(ExampleCase {
        params: params(&[("C", 1.0), ("rho", 0.0)]),
        grid: Vec::new(),
        limits: Vec::new(),
        verdicts: criterion,
    });
    Ok(ExampleEntry {
        id: "example_5".into(),
        family: "super_heavy_log".into(),
        cases,
    })
}

/// Grid tables, boundary limits and verdicts for all five worked examples.
pub fn examples_report() -> Result<ExamplesReport> {
    Ok(ExamplesReport {
        tolerance: LIMIT_TOLERANCE,
        examples: vec![example_1()?, example_2()?, example_3()?, example_4()?, example_5()?],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_agree(ratio: &RatioFunction, us: &[f64], closed: impl Fn(f64) -> f64) {
        for &u in us {
            let g = sup1_lhs(ratio, u).unwrap();
            let c = closed(u);
            assert!(rel_diff(c, g) <= 1e-8, "{:?} u={u} closed={c} generic={g}", ratio.model.family);
        }
    }

    #[test]
    fn closed_forms_match_generic() {
        let grid = agreement_grid();
        for k in [-1, 0, 1, 2, 3] {
            let r = RatioFunction::new(DistributionModel::gumbel(), SmoothFunctional::power_int(k));
            assert_agree(&r, &grid, |u| {
                let (a, b) = gumbel_sup1_terms(k, u);
                a + b
            });
        }
        for (rho, gamma) in EXAMPLE_2_PARAMS {
            let r = RatioFunction::new(DistributionModel::exp_power_tail(gamma).unwrap(), SmoothFunctional::power_abs(rho, 1.0));
            assert_agree(&r, &grid, |u| {
                let (a, b) = exp_power_sup1_terms(rho, gamma, u);
                a + b
            });
        }
        for (rho, gamma) in EXAMPLE_3_PARAMS {
            let r = RatioFunction::new(DistributionModel::weibull_frechet(gamma).unwrap(), SmoothFunctional::power_abs(rho, 1.0));
            assert_agree(&r, &grid, |u| {
                let (a, b) = frechet_sup1_terms(rho, gamma, u);
                a + b
            });
        }
        for (c, rho) in [(1.0, 0.0), (0.5, 2.0)] {
            let r = RatioFunction::new(DistributionModel::super_heavy_log(c, None).unwrap(), SmoothFunctional::power_abs(rho, 1.0));
            assert_agree(&r, &[0.9, 0.99, 0.999], |u| super_heavy_sup1(c, rho, u));
        }
    }

    #[test]
    fn gumbel_limit_at_small_u() {
        for k in [1, 2] {
            let r = RatioFunction::new(DistributionModel::gumbel(), SmoothFunctional::power_int(k));
            assert!((sup1_lhs(&r, 1e-8).unwrap() + 1.0).abs() < LIMIT_TOLERANCE);
        }
        // with k = 0 only the second term −1 − 1/log u remains
        let (_, second) = gumbel_sup1_terms(0, 1e-8);
        assert!((second - (-1.0 - 1.0 / 1e-8f64.ln())).abs() < 1e-15);
        assert!((second + 1.0).abs() > LIMIT_TOLERANCE);
        assert!((gumbel_sup1_terms(0, 1e-12).1 + 1.0).abs() < LIMIT_TOLERANCE);
    }

    #[test]
    fn example_constants() {
        let r = RatioFunction::new(DistributionModel::exp_power_tail(2.0).unwrap(), SmoothFunctional::power_abs(1.0, 1.0));
        assert!(sup1_lhs(&r, 1e-8).unwrap().abs() < LIMIT_TOLERANCE);
        let r = RatioFunction::new(DistributionModel::weibull_frechet(1.0).unwrap(), SmoothFunctional::power_abs(1.0, 1.0));
        assert!((sup1_lhs(&r, 1.0 - 1e-8).unwrap() - 3.0).abs() < LIMIT_TOLERANCE);
    }

    #[test]
    fn super_heavy_sup2_pin() {
        let r = RatioFunction::new(DistributionModel::super_heavy_log(1.0, None).unwrap(), SmoothFunctional::identity());
        let u = 1.0 - 1e-3;
        let v = sup2_ratio(&r, u, 1e-2).unwrap();
        let expect = (10.0f64 / 0.99).exp() / 0.99f64.powi(2);
        assert!((v - expect).abs() < 1e-9 * expect, "{v} {expect}");
        assert!(v > 2e4);
    }

    #[test]
    fn report_verdicts() {
        let rep = examples_report().unwrap();
        assert_eq!(rep.examples.len(), 5);
        let ex5 = rep.entry("example_5").unwrap();
        assert_eq!(ex5.cases[0].verdicts[0].condition_id, "sup1_u_to_1");
        assert_eq!(ex5.cases[0].verdicts[0].verdict, Verdict::Fails);
        let crit = &ex5.cases.last().unwrap().verdicts;
        assert_eq!(crit[0].verdict, Verdict::Holds);
        assert_eq!(crit[1].verdict, Verdict::Fails);
        for id in ["example_1", "example_2", "example_3"] {
            for case in &rep.entry(id).unwrap().cases {
                for row in &case.grid {
                    assert!(row.rel_diff.unwrap() <= 1e-8, "{id} {row:?}");
                }
                for v in &case.verdicts {
                    assert_eq!(v.verdict, Verdict::Holds, "{id} {:?} {}", case.params, v.condition_id);
                }
            }
        }
    }
}
