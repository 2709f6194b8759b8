//! Exact remainders of the two representations, the modulus Ψ and the
//! bound terms Δₙ, Δ̂ₙ.
//!
//! With `pₙ = kₙ/n`, `ξ = F⁻¹(pₙ)`, `ξ̂ = X_{kₙ:n}` and `d = Fₙ(ξ) − F(ξ)`:
//!
//! ```text
//! R₁ = G(ξ̂) − G(ξ) + d·(g/f)(ξ)
//! L₂ = ∫_{ξ̂}^{ξ} (G(x) − G(ξ)) dFₙ(x)
//! R₂ = L₂ + ½·d²·(g/f)(ξ)
//! ```
//!
//! `L₂` is the signed sum over order statistics with ranks strictly above
//! `kₙ ∧ Nˣ` and up to `kₙ ∨ Nˣ`, where `Nˣ = #{i : Xᵢ ≤ ξ}`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::distributions::RatioFunction;
use crate::error::{Error, Result};
use crate::numeric::exact_sum;
use crate::sampling::{empirical_cdf_at, select_kth_in_place, Sample, SeedPath};

/// Which logarithm enters Ψ and the Δ terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LogMode {
    /// `log rₙ` (Δₙ, Ψ).
    #[default]
    #[serde(rename = "r")]
    LogR,
    /// `log n` (Δ̂ₙ, Ψ̂).
    #[serde(rename = "n")]
    LogN,
}

impl LogMode {
    pub fn log_term(self, r: u64, n: u64) -> f64 {
        match self {
            LogMode::LogR => (r as f64).ln(),
            LogMode::LogN => (n as f64).ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theorem {
    #[serde(rename = "1")]
    Linear,
    #[serde(rename = "2")]
    Quadratic,
}

fn default_window() -> f64 {
    2.0
}

fn default_exponent() -> f64 {
    1.0
}

/// Constants `A`, `B`, `C` of the bounds and the target exceedance exponent `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    /// Half-width of the `t`-window in Ψ.
    #[serde(rename = "C", default = "default_window")]
    pub window: f64,
    #[serde(rename = "c", default = "default_exponent")]
    pub exponent: f64,
    #[serde(default)]
    pub log_mode: LogMode,
}

impl Default for BoundParams {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 1.0,
            window: 2.0,
            exponent: 1.0,
            log_mode: LogMode::LogR,
        }
    }
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("A", self.a), ("B", self.b), ("C", self.window), ("c", self.exponent)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("bound constant {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn with_log_mode(mut self, log_mode: LogMode) -> Self {
        self.log_mode = log_mode;
        self
    }
}

/// The population side at one `(n, kₙ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantilePoint {
    pub n: u64,
    pub k: u64,
    pub p: f64,
    pub r: u64,
    pub xi: f64,
    /// `(g/f)(ξ) = v(pₙ)`.
    pub gf: f64,
}

impl QuantilePoint {
    pub fn new(ratio: &RatioFunction, n: u64, k: u64) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::domain(format!("rank k = {k} outside 1..={n}")));
        }
        let p = k as f64 / n as f64;
        if !ratio.model.in_u(p) {
            let (lo, hi) = ratio.model.u_interval();
            return Err(Error::domain(format!("p_n = {p} outside U = ({lo}, {hi})")));
        }
        let xi = ratio.model.quantile(p)?;
        let roundtrip = ratio.model.cdf(xi)?;
        if (roundtrip - p).abs() > 1e-12 {
            return Err(Error::Inconsistent { p, roundtrip });
        }
        let gf = ratio.v(p)?;
        if !gf.is_finite() {
            return Err(Error::Singular(format!("(g/f)(ξ) is not finite at p = {p}")));
        }
        Ok(Self {
            n,
            k,
            p,
            r: k.min(n - k),
            xi,
            gf,
        })
    }

    fn check_sample(&self, len: usize) -> Result<()> {
        if len as u64 != self.n {
            return Err(Error::domain(format!("sample has {len} values, expected n = {}", self.n)));
        }
        Ok(())
    }
}

/// Sample-side pieces of both representations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSummary {
    pub xi_hat: f64,
    /// `Nˣ = #{i : Xᵢ ≤ ξ}`.
    pub count: u64,
    /// `L₂`.
    pub between_sum: f64,
}

impl SampleSummary {
    /// `Fₙ(ξ) − F(ξ) = (Nˣ − kₙ)/n`.
    pub fn ecdf_deviation(&self, point: &QuantilePoint) -> f64 {
        (self.count as f64 - point.k as f64) / point.n as f64
    }

    pub fn remainder_thm1(&self, ratio: &RatioFunction, point: &QuantilePoint) -> f64 {
        let g = &ratio.functional;
        g.value(self.xi_hat) - g.value(point.xi) + self.ecdf_deviation(point) * point.gf
    }

    pub fn remainder_thm2(&self, point: &QuantilePoint) -> f64 {
        let d = self.ecdf_deviation(point);
        self.between_sum + 0.5 * d * d * point.gf
    }
}

/// Computes ξ̂, `Nˣ` and `L₂`, reordering `values` in the process.
pub fn summarize_in_place(values: &mut [f64], ratio: &RatioFunction, point: &QuantilePoint) -> Result<SampleSummary> {
    point.check_sample(values.len())?;
    let n = values.len();
    let k = point.k as usize;
    let xi_hat = select_kth_in_place(values, k)?;
    let count = values.iter().filter(|&&v| v <= point.xi).count();

    let g = &ratio.functional;
    let g_xi = g.value(point.xi);
    let between = match count.cmp(&k) {
        std::cmp::Ordering::Equal => 0.0,
        std::cmp::Ordering::Greater => {
            // ranks k+1..=N sit in the right part
            let right = &mut values[k..];
            let m = count - k;
            if m < right.len() {
                right.select_nth_unstable_by(m - 1, f64::total_cmp);
            }
            exact_sum(right[..m].iter().map(|&x| g.value(x) - g_xi)) / n as f64
        }
        std::cmp::Ordering::Less => {
            // ranks N+1..=k sit in the left part, pivot included
            let left = &mut values[..k];
            if count > 0 {
                left.select_nth_unstable_by(count, f64::total_cmp);
            }
            -exact_sum(left[count..].iter().map(|&x| g.value(x) - g_xi)) / n as f64
        }
    };
    Ok(SampleSummary {
        xi_hat,
        count: count as u64,
        between_sum: between,
    })
}

fn summarize(sample: &Sample, ratio: &RatioFunction, k_n: u64) -> Result<(QuantilePoint, SampleSummary)> {
    let point = QuantilePoint::new(ratio, sample.n() as u64, k_n)?;
    let mut scratch = sample.values.clone();
    let summary = summarize_in_place(&mut scratch, ratio, &point)?;
    Ok((point, summary))
}

/// `R₁ = G(ξ̂) − G(ξ) + [Fₙ(ξ) − F(ξ)]·(g/f)(ξ)`.
pub fn remainder_thm1(sample: &Sample, ratio: &RatioFunction, k_n: u64) -> Result<f64> {
    let (point, s) = summarize(sample, ratio, k_n)?;
    Ok(s.remainder_thm1(ratio, &point))
}

/// `∫_{ξ̂}^{ξ} (G(x) − G(ξ)) dFₙ(x)`; exactly 0 when `Nˣ = kₙ`.
pub fn between_sum(sample: &Sample, ratio: &RatioFunction, k_n: u64) -> Result<f64> {
    let (_, s) = summarize(sample, ratio, k_n)?;
    Ok(s.between_sum)
}

/// `R₂ = L₂ + ½[Fₙ(ξ) − F(ξ)]²·(g/f)(ξ)`.
pub fn remainder_thm2(sample: &Sample, ratio: &RatioFunction, k_n: u64) -> Result<f64> {
    let (point, s) = summarize(sample, ratio, k_n)?;
    Ok(s.remainder_thm2(&point))
}

/// `Fₙ(ξ)` for the population quantile at `kₙ/n`.
pub fn ecdf_at_population_quantile(sample: &Sample, ratio: &RatioFunction, k_n: u64) -> Result<f64> {
    let point = QuantilePoint::new(ratio, sample.n() as u64, k_n)?;
    Ok(empirical_cdf_at(&sample.values, point.xi).value())
}

pub const DEFAULT_PSI_GRID: usize = 2001;

/// Validates the window and returns the step `√(r·L)/n` and the half-count
/// of a symmetric grid with at least `grid_points` points.
fn psi_window(
    ratio: &RatioFunction,
    p: f64,
    r: u64,
    n: u64,
    window: f64,
    log_mode: LogMode,
    grid_points: usize,
) -> Result<(f64, usize)> {
    if !(window.is_finite() && window > 0.0) {
        return Err(Error::domain(format!("window C = {window} must be positive")));
    }
    if grid_points < 3 {
        return Err(Error::domain("Ψ grid needs at least 3 points"));
    }
    let log_term = log_mode.log_term(r, n).max(0.0);
    let scale = (r as f64 * log_term).sqrt() / n as f64;
    let (lo, hi) = ratio.model.u_interval();
    let (a, b) = (p - window * scale, p + window * scale);
    if !(a > lo && b < hi) {
        return Err(Error::domain(format!(
            "Ψ window [{a}, {b}] leaves U = ({lo}, {hi}): n = {n} too small for this schedule"
        )));
    }
    Ok((scale, grid_points / 2))
}

/// `Ψ = sup_{|t| ≤ C} |v(p + t·√(r·L)/n) − v(p)|` with `L = log r` or `log n`,
/// approximated on a uniform `t`-grid containing `±C` and 0.
pub fn psi(
    ratio: &RatioFunction,
    p: f64,
    r: u64,
    n: u64,
    window: f64,
    log_mode: LogMode,
    grid_points: usize,
) -> Result<f64> {
    let (scale, half) = psi_window(ratio, p, r, n, window, log_mode, grid_points)?;
    let centre = ratio.v(p)?;
    let mut sup: f64 = 0.0;
    for j in 0..=2 * half {
        let t = window * (j as f64 - half as f64) / half as f64;
        let diff = (ratio.v(p + t * scale)? - centre).abs();
        if diff.is_nan() {
            return Err(Error::Singular(format!("v undefined near p = {p}")));
        }
        sup = sup.max(diff);
    }
    Ok(sup)
}

/// `Ψ / |v(p)|` on the same grid as [`psi`], computed from log-ratios so that
/// it stays finite where `v` itself overflows.
pub fn psi_relative(
    ratio: &RatioFunction,
    p: f64,
    r: u64,
    n: u64,
    window: f64,
    log_mode: LogMode,
    grid_points: usize,
) -> Result<f64> {
    let (scale, half) = psi_window(ratio, p, r, n, window, log_mode, grid_points)?;
    let (ln0, s0) = ratio.ln_abs_v(p)?;
    if s0 == 0.0 {
        return Err(Error::Singular(format!("v({p}) = 0")));
    }
    let mut sup: f64 = 0.0;
    for j in 0..=2 * half {
        let t = window * (j as f64 - half as f64) / half as f64;
        let (ln1, s1) = ratio.ln_abs_v(p + t * scale)?;
        let diff = (s1 * s0 * (ln1 - ln0).exp() - 1.0).abs();
        if diff.is_nan() {
            return Err(Error::Singular(format!("v undefined near p = {p}")));
        }
        sup = sup.max(diff);
    }
    Ok(sup)
}

fn check_bound_inputs(params: &BoundParams, p: f64, r: u64, n: u64, psi_value: f64) -> Result<f64> {
    if r < 2 {
        return Err(Error::domain(format!("r_n = {r} < 2: log r_n is not positive")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("p_n = {p} outside (0, 1)")));
    }
    if params.a < 0.0 || params.b < 0.0 || psi_value < 0.0 {
        return Err(Error::domain("bound constants and Ψ must be nonnegative"));
    }
    Ok(params.log_mode.log_term(r, n) / n as f64)
}

/// First-order bound `A(p(1−p))^{1/4}(L/n)^{3/4}|g/f|(ξ) + B(p(1−p))^{1/2}(L/n)^{1/2}Ψ`.
pub fn delta_thm1(params: &BoundParams, p: f64, r: u64, n: u64, psi_value: f64, gf_at_xi: f64) -> Result<f64> {
    let ln_n = check_bound_inputs(params, p, r, n, psi_value)?;
    let pq = p * (1.0 - p);
    Ok(params.a * pq.powf(0.25) * ln_n.powf(0.75) * gf_at_xi.abs() + params.b * pq.sqrt() * ln_n.sqrt() * psi_value)
}

/// Second-order bound `A(p(1−p))^{3/4}(L/n)^{5/4}|g/f|(ξ) + B·p(1−p)·(L/n)·Ψ`.
pub fn delta_thm2(params: &BoundParams, p: f64, r: u64, n: u64, psi_value: f64, gf_at_xi: f64) -> Result<f64> {
    let ln_n = check_bound_inputs(params, p, r, n, psi_value)?;
    let pq = p * (1.0 - p);
    Ok(params.a * pq.powf(0.75) * ln_n.powf(1.25) * gf_at_xi.abs() + params.b * pq * ln_n * psi_value)
}

/// Single-term bound, valid once the Ψ term is absorbed.
pub fn delta_simple(
    params: &BoundParams,
    p: f64,
    r: u64,
    n: u64,
    gf_at_xi: f64,
    theorem: Theorem,
    log_mode: LogMode,
) -> Result<f64> {
    let first_only = BoundParams { b: 0.0, log_mode, ..*params };
    match theorem {
        Theorem::Linear => delta_thm1(&first_only, p, r, n, 0.0, gf_at_xi),
        Theorem::Quadratic => delta_thm2(&first_only, p, r, n, 0.0, gf_at_xi),
    }
}

/// Everything at one `(n, kₙ)` that does not depend on the sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointBounds {
    pub point: QuantilePoint,
    pub psi: f64,
    pub psi_hat: f64,
    pub delta1: f64,
    pub delta1_hat: f64,
    pub delta2: f64,
    pub delta2_hat: f64,
    /// Ψ under the configured log mode.
    pub psi_value: f64,
}

impl PointBounds {
    pub fn new(ratio: &RatioFunction, point: QuantilePoint, params: &BoundParams, grid_points: usize) -> Result<Self> {
        let (p, r, n) = (point.p, point.r, point.n);
        let psi_r = psi(ratio, p, r, n, params.window, LogMode::LogR, grid_points)?;
        let psi_n = psi(ratio, p, r, n, params.window, LogMode::LogN, grid_points)?;
        let by_r = params.with_log_mode(LogMode::LogR);
        let by_n = params.with_log_mode(LogMode::LogN);
        Ok(Self {
            point,
            psi: psi_r,
            psi_hat: psi_n,
            delta1: delta_thm1(&by_r, p, r, n, psi_r, point.gf)?,
            delta1_hat: delta_thm1(&by_n, p, r, n, psi_n, point.gf)?,
            delta2: delta_thm2(&by_r, p, r, n, psi_r, point.gf)?,
            delta2_hat: delta_thm2(&by_n, p, r, n, psi_n, point.gf)?,
            psi_value: match params.log_mode {
                LogMode::LogR => psi_r,
                LogMode::LogN => psi_n,
            },
        })
    }
}

/// One replication's remainders and bound terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemainderSample {
    pub n: u64,
    pub k_n: u64,
    pub p_n: f64,
    pub r_n: u64,
    pub xi: f64,
    pub xi_hat: f64,
    pub r1: f64,
    pub r2: f64,
    pub lhs2: f64,
    pub delta1: f64,
    pub delta1_hat: f64,
    pub delta2: f64,
    pub delta2_hat: f64,
    pub psi_value: f64,
    pub seed_path: SeedPath,
}

impl RemainderSample {
    pub const CSV_HEADER: &'static str =
        "n,k_n,p_n,r_n,xi,xi_hat,R1,R2,lhs2,delta1,delta1_hat,delta2,delta2_hat,psi_value,seed_path";

    pub fn evaluate(
        values: &mut [f64],
        ratio: &RatioFunction,
        bounds: &PointBounds,
        seed_path: SeedPath,
    ) -> Result<Self> {
        let point = &bounds.point;
        let s = summarize_in_place(values, ratio, point)?;
        Ok(Self {
            n: point.n,
            k_n: point.k,
            p_n: point.p,
            r_n: point.r,
            xi: point.xi,
            xi_hat: s.xi_hat,
            r1: s.remainder_thm1(ratio, point),
            r2: s.remainder_thm2(point),
            lhs2: s.between_sum,
            delta1: bounds.delta1,
            delta1_hat: bounds.delta1_hat,
            delta2: bounds.delta2,
            delta2_hat: bounds.delta2_hat,
            psi_value: bounds.psi_value,
            seed_path,
        })
    }

    /// One CSV row in [`Self::CSV_HEADER`] order.
    pub fn csv_row(&self) -> String {
        let mut row = String::new();
        let _ = write!(
            row,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.k_n,
            self.p_n,
            self.r_n,
            self.xi,
            self.xi_hat,
            self.r1,
            self.r2,
            self.lhs2,
            self.delta1,
            self.delta1_hat,
            self.delta2,
            self.delta2_hat,
            self.psi_value,
            self.seed_path
        );
        row
    }
}

pub fn write_csv<W: std::io::Write>(mut out: W, rows: &[RemainderSample]) -> std::io::Result<()> {
    writeln!(out, "{}", RemainderSample::CSV_HEADER)?;
    for row in rows {
        writeln!(out, "{}", row.csv_row())?;
    }
    Ok(())
}
