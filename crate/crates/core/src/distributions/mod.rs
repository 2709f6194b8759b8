//! Analytic distribution families, the smooth functional `G` and the ratio
//! function `v(u) = (g/f)∘F⁻¹(u)`.
//!
//! Every closed-form family also exposes a [`QuantileJet`]: the quantile
//! `Q(u) = F⁻¹(u)` together with the logarithms and log-derivatives of `Q` and
//! `Q′ = 1/f(Q)`. Working on the quantile side keeps `v` and `v′/v` finite in
//! regimes where `x = Q(u)` itself overflows (the super-heavy log tail reaches
//! `exp(1000)` at `u = 0.999`).

mod descriptor;
mod functional;
mod ratio;

use std::fmt;
use std::sync::Arc;

use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};

pub use descriptor::{FamilySpec, FunctionalSpec, ModelDescriptor};
pub use functional::{FunctionalForm, SmoothFunctional};
pub use ratio::RatioFunction;

/// Smallest argument passed to a closed-form quantile.
pub const U_MIN: f64 = 1e-300;
/// Largest argument passed to a closed-form quantile, `1 − 2⁻⁵³`.
pub const U_MAX: f64 = 1.0 - f64::EPSILON / 2.0;

/// Quantile-only family: `cdf` and `density` are obtained numerically.
#[derive(Clone)]
pub struct CustomQuantile {
    pub name: String,
    quantile: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Open interval on which the quantile is differentiable.
    pub u_range: (f64, f64),
}

impl CustomQuantile {
    pub fn new(
        name: impl Into<String>,
        u_range: (f64, f64),
        quantile: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            quantile: Arc::new(quantile),
            u_range,
        }
    }
}

impl fmt::Debug for CustomQuantile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomQuantile")
            .field("name", &self.name)
            .field("u_range", &self.u_range)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum Family {
    /// `F(x) = exp(−exp(−x))`.
    Gumbel,
    /// `F(x) = 1 − exp(−x^γ)`, `x ≥ 0`.
    ExpPowerTail { gamma: f64 },
    /// `F(x) = exp(−x^{−γ})`, `x > 0`.
    WeibullFrechet { gamma: f64 },
    /// Density `C_γ exp(−|x|^γ)`.
    SymmetricExpPower { gamma: f64 },
    /// `F(x) = 1 − C/log x` for `x ≥ x₀`; the mass `F(x₀)` sits at `x₀`.
    SuperHeavyLog { c: f64, x0: f64 },
    Uniform01,
    Custom(CustomQuantile),
}

/// Quantile-side quantities at a fixed `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileJet {
    /// `Q(u)`; may be infinite for the super-heavy tail.
    pub x: f64,
    /// `ln |Q(u)|`, finite whenever `Q(u) ≠ 0`.
    pub ln_abs_x: f64,
    /// `d ln|Q| / du = Q′/Q`.
    pub dln_x: f64,
    /// `ln Q′(u) = −ln f(Q(u))`.
    pub ln_qprime: f64,
    /// `d ln Q′ / du = Q″/Q′`.
    pub dln_qprime: f64,
}

impl QuantileJet {
    pub fn qprime(&self) -> f64 {
        self.ln_qprime.exp()
    }
}

#[derive(Debug, Clone)]
pub struct DistributionModel {
    pub family: Family,
    /// Regular-variation index of the density at −∞, where applicable.
    pub tail_exponent_left: Option<f64>,
    /// Regular-variation index of the density at +∞, where applicable.
    pub tail_exponent_right: Option<f64>,
}

fn positive(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Config(format!("{name} must be positive and finite, got {value}")))
    }
}

/// `−ln u`, accurate for `u` near 1.
#[inline]
fn neg_ln(u: f64) -> f64 {
    if u > 0.5 {
        -(-(1.0 - u)).ln_1p()
    } else {
        -u.ln()
    }
}

impl DistributionModel {
    fn with_family(family: Family) -> Self {
        Self {
            family,
            tail_exponent_left: None,
            tail_exponent_right: None,
        }
    }

    pub fn gumbel() -> Self {
        Self::with_family(Family::Gumbel)
    }

    pub fn uniform() -> Self {
        Self::with_family(Family::Uniform01)
    }

    pub fn exp_power_tail(gamma: f64) -> Result<Self> {
        let gamma = positive("gamma", gamma)?;
        Ok(Self::with_family(Family::ExpPowerTail { gamma }))
    }

    pub fn weibull_frechet(gamma: f64) -> Result<Self> {
        let gamma = positive("gamma", gamma)?;
        let mut m = Self::with_family(Family::WeibullFrechet { gamma });
        m.tail_exponent_right = Some(-(1.0 + gamma));
        Ok(m)
    }

    pub fn symmetric_exp_power(gamma: f64) -> Result<Self> {
        let gamma = positive("gamma", gamma)?;
        Ok(Self::with_family(Family::SymmetricExpPower { gamma }))
    }

    /// Super-heavy log tail. `x0` defaults to `e^C`, which makes `F(x₀) = 0`.
    pub fn super_heavy_log(c: f64, x0: Option<f64>) -> Result<Self> {
        let c = positive("C", c)?;
        let x0 = match x0 {
            Some(x0) => positive("x0", x0)?,
            None => c.exp(),
        };
        if x0.ln() < c * (1.0 - 1e-15) {
            return Err(Error::Config(format!(
                "super-heavy tail needs log x0 >= C for a proper df (C = {c}, x0 = {x0})"
            )));
        }
        let mut m = Self::with_family(Family::SuperHeavyLog { c, x0 });
        m.tail_exponent_right = Some(-1.0);
        Ok(m)
    }

    /// Pareto-type tail `Q(u) = (1 − u)^{−1/α}`, built as a quantile-only family.
    /// Its density `α x^{−α−1}` is regularly varying at +∞ with index `−(1+α)`.
    pub fn pareto(alpha: f64) -> Result<Self> {
        let alpha = positive("alpha", alpha)?;
        let q = CustomQuantile::new(format!("pareto({alpha})"), (0.0, 1.0), move |u: f64| {
            (-(-u).ln_1p() / alpha).exp()
        });
        let mut m = Self::with_family(Family::Custom(q));
        m.tail_exponent_right = Some(-(1.0 + alpha));
        Ok(m)
    }

    pub fn custom(q: CustomQuantile) -> Self {
        Self::with_family(Family::Custom(q))
    }

    pub fn is_custom(&self) -> bool {
        matches!(self.family, Family::Custom(_))
    }

    /// The open set `U = (lo, hi)` on which `F⁻¹` is differentiable.
    pub fn u_interval(&self) -> (f64, f64) {
        match &self.family {
            Family::SuperHeavyLog { c, x0 } => ((1.0 - c / x0.ln()).max(0.0), 1.0),
            Family::Custom(q) => q.u_range,
            _ => (0.0, 1.0),
        }
    }

    pub fn in_u(&self, u: f64) -> bool {
        let (lo, hi) = self.u_interval();
        u > lo && u < hi
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::domain("cdf of NaN"));
        }
        let value = match &self.family {
            Family::Gumbel => (-(-x).exp()).exp(),
            Family::ExpPowerTail { gamma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x.powf(*gamma)).exp_m1()
                }
            }
            Family::WeibullFrechet { gamma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    (-x.powf(-*gamma)).exp()
                }
            }
            Family::SymmetricExpPower { gamma } => sym_cdf(*gamma, x),
            Family::SuperHeavyLog { c, x0 } => {
                if x < *x0 {
                    0.0
                } else {
                    1.0 - c / x.ln()
                }
            }
            Family::Uniform01 => x.clamp(0.0, 1.0),
            Family::Custom(q) => custom_cdf(q, x),
        };
        Ok(value)
    }

    /// Left-continuous inverse `F⁻¹(u)`. Arguments are clamped into
    /// `[U_MIN, U_MAX]` before evaluation.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::domain(format!("quantile argument {u} outside [0, 1]")));
        }
        Ok(self.quantile_unchecked(u.clamp(U_MIN, U_MAX)))
    }

    /// Quantile without range checks; `u` must already lie in `(0, 1)`.
    #[inline]
    pub fn quantile_unchecked(&self, u: f64) -> f64 {
        match &self.family {
            Family::Gumbel => -neg_ln(u).ln(),
            Family::ExpPowerTail { gamma } => (-(-u).ln_1p()).powf(1.0 / gamma),
            Family::WeibullFrechet { gamma } => neg_ln(u).powf(-1.0 / gamma),
            Family::SymmetricExpPower { gamma } => sym_quantile(*gamma, u),
            Family::SuperHeavyLog { c, x0 } => {
                let s = 1.0 - u;
                let lnx = c / s;
                if lnx <= x0.ln() {
                    *x0
                } else {
                    lnx.exp()
                }
            }
            Family::Uniform01 => u,
            Family::Custom(q) => (q.quantile)(u),
        }
    }

    /// Density `f = F′`. Outside the support the density is 0.
    pub fn density(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::domain("density of NaN"));
        }
        let value = match &self.family {
            Family::Gumbel => (-x - (-x).exp()).exp(),
            Family::ExpPowerTail { gamma } => {
                let g = *gamma;
                if x < 0.0 {
                    0.0
                } else if x == 0.0 {
                    match g.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Less) => f64::INFINITY,
                        Some(std::cmp::Ordering::Equal) => 1.0,
                        _ => 0.0,
                    }
                } else {
                    g * x.powf(g - 1.0) * (-x.powf(g)).exp()
                }
            }
            Family::WeibullFrechet { gamma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    gamma * x.powf(-gamma - 1.0) * (-x.powf(-gamma)).exp()
                }
            }
            Family::SymmetricExpPower { gamma } => (sym_ln_norm(*gamma) - x.abs().powf(*gamma)).exp(),
            Family::SuperHeavyLog { c, x0 } => {
                if x < *x0 {
                    0.0
                } else {
                    let l = x.ln();
                    c / (x * l * l)
                }
            }
            Family::Uniform01 => {
                if (0.0..=1.0).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
            Family::Custom(q) => {
                let u = custom_cdf(q, x);
                if !(u > q.u_range.0 && u < q.u_range.1) {
                    0.0
                } else {
                    1.0 / custom_qprime(q, u)
                }
            }
        };
        Ok(value)
    }

    /// Quantile-side derivatives at `u ∈ U`.
    pub fn quantile_jet(&self, u: f64) -> Result<QuantileJet> {
        if !self.in_u(u) {
            let (lo, hi) = self.u_interval();
            return Err(Error::domain(format!("u = {u} outside U = ({lo}, {hi})")));
        }
        let jet = match &self.family {
            Family::Gumbel => {
                let w = neg_ln(u);
                let x = -w.ln();
                QuantileJet {
                    x,
                    ln_abs_x: x.abs().ln(),
                    dln_x: 1.0 / (u * w * x),
                    ln_qprime: w - w.ln(),
                    dln_qprime: (1.0 - w) / (u * w),
                }
            }
            Family::ExpPowerTail { gamma } => {
                let g = *gamma;
                let s = 1.0 - u;
                let w = -(-u).ln_1p();
                let ln_x = w.ln() / g;
                QuantileJet {
                    x: ln_x.exp(),
                    ln_abs_x: ln_x,
                    dln_x: 1.0 / (g * w * s),
                    ln_qprime: ln_x - g.ln() - w.ln() - s.ln(),
                    dln_qprime: (1.0 / g - 1.0) / (w * s) + 1.0 / s,
                }
            }
            Family::WeibullFrechet { gamma } => {
                let g = *gamma;
                let w = neg_ln(u);
                let ln_x = -w.ln() / g;
                QuantileJet {
                    x: ln_x.exp(),
                    ln_abs_x: ln_x,
                    dln_x: 1.0 / (g * w * u),
                    ln_qprime: ln_x - g.ln() - w.ln() - u.ln(),
                    dln_qprime: (1.0 + 1.0 / g) / (u * w) - 1.0 / u,
                }
            }
            Family::SymmetricExpPower { gamma } => {
                let g = *gamma;
                let x = sym_quantile(g, u);
                let t = x.abs().powf(g);
                let ln_qprime = t - sym_ln_norm(g);
                let qprime = ln_qprime.exp();
                QuantileJet {
                    x,
                    ln_abs_x: x.abs().ln(),
                    dln_x: qprime / x,
                    ln_qprime,
                    dln_qprime: g * x.abs().powf(g - 1.0) * x.signum() * qprime,
                }
            }
            Family::SuperHeavyLog { c, .. } => {
                let s = 1.0 - u;
                let ln_x = c / s;
                QuantileJet {
                    x: ln_x.exp(),
                    ln_abs_x: ln_x,
                    dln_x: c / (s * s),
                    ln_qprime: ln_x + c.ln() - 2.0 * s.ln(),
                    dln_qprime: c / (s * s) + 2.0 / s,
                }
            }
            Family::Uniform01 => QuantileJet {
                x: u,
                ln_abs_x: u.ln(),
                dln_x: 1.0 / u,
                ln_qprime: 0.0,
                dln_qprime: 0.0,
            },
            Family::Custom(q) => {
                let x = (q.quantile)(u);
                let qprime = custom_qprime(q, u);
                let h = 1e-3 * custom_step_base(q, u);
                let q2 = custom_second(q, u, h);
                QuantileJet {
                    x,
                    ln_abs_x: x.abs().ln(),
                    dln_x: qprime / x,
                    ln_qprime: qprime.ln(),
                    dln_qprime: q2 / qprime,
                }
            }
        };
        if !jet.ln_qprime.is_finite() {
            return Err(Error::Singular(format!("density vanishes at F⁻¹({u})")));
        }
        Ok(jet)
    }
}

fn custom_step_base(q: &CustomQuantile, u: f64) -> f64 {
    (u - q.u_range.0).min(q.u_range.1 - u).min(u).min(1.0 - u)
}

/// Five-point first derivative of a custom quantile.
fn custom_qprime(q: &CustomQuantile, u: f64) -> f64 {
    let h = 1e-3 * custom_step_base(q, u);
    let f = &q.quantile;
    (f(u - 2.0 * h) - 8.0 * f(u - h) + 8.0 * f(u + h) - f(u + 2.0 * h)) / (12.0 * h)
}

fn custom_second(q: &CustomQuantile, u: f64, h: f64) -> f64 {
    let f = &q.quantile;
    (-f(u + 2.0 * h) + 16.0 * f(u + h) - 30.0 * f(u) + 16.0 * f(u - h) - f(u - 2.0 * h))
        / (12.0 * h * h)
}

/// `sup{u : Q(u) ≤ x}` by bisection; lower precision than the closed forms.
fn custom_cdf(q: &CustomQuantile, x: f64) -> f64 {
    let f = &q.quantile;
    let (mut lo, mut hi) = (U_MIN, U_MAX);
    if f(lo) > x {
        return 0.0;
    }
    if f(hi) <= x {
        return 1.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `ln C_γ` with `C_γ = γ / (2Γ(1/γ))`.
fn sym_ln_norm(gamma: f64) -> f64 {
    gamma.ln() - std::f64::consts::LN_2 - ln_gamma(1.0 / gamma)
}

fn sym_cdf(gamma: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.5;
    }
    let tail = 0.5 * gamma_ur(1.0 / gamma, x.abs().powf(gamma));
    if x < 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

fn sym_quantile(gamma: f64, u: f64) -> f64 {
    if u == 0.5 {
        return 0.0;
    }
    if u > 0.5 {
        return -sym_quantile(gamma, 1.0 - u);
    }
    // Solve ½·Q(1/γ, t) = u for t = |x|^γ by bisection on ln t.
    let a = 1.0 / gamma;
    let target = 2.0 * u;
    let (mut lo, mut hi) = (-60.0f64, 8.0f64);
    while gamma_ur(a, hi.exp()) > target {
        hi += 4.0;
    }
    while gamma_ur(a, lo.exp()) < target {
        lo -= 20.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gamma_ur(a, mid.exp()) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = (0.5 * (lo + hi)).exp();
    -t.powf(a)
}
