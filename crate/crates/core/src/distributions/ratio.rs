use super::{DistributionModel, QuantileJet, SmoothFunctional};
use crate::error::{Error, Result};
use crate::numeric::edge_distance;

/// `v(u) = (g/f)(F⁻¹(u)) = g(Q(u))·Q′(u)`.
///
/// For closed-form families and non-custom `G` both `v` and `v′/v` come from
/// the quantile jet. Otherwise `v′` is a central difference of `v` with step
/// `1e−7·(u ∧ (1−u))`.
#[derive(Debug, Clone)]
pub struct RatioFunction {
    pub model: DistributionModel,
    pub functional: SmoothFunctional,
}

impl RatioFunction {
    pub fn new(model: DistributionModel, functional: SmoothFunctional) -> Self {
        Self { model, functional }
    }

    pub fn closed_form(&self) -> bool {
        !self.model.is_custom() && !self.functional.is_custom()
    }

    fn jet(&self, u: f64) -> Result<QuantileJet> {
        self.model.quantile_jet(u)
    }

    /// `(ln|v(u)|, sign v(u))`. The sign is 0 where `g` vanishes.
    pub fn ln_abs_v(&self, u: f64) -> Result<(f64, f64)> {
        let jet = self.jet(u)?;
        let sign = self.functional.derivative_sign(jet.x);
        if sign.is_nan() {
            return Err(Error::Singular(format!("g is singular at F⁻¹({u}) = {}", jet.x)));
        }
        if sign == 0.0 {
            return Ok((f64::NEG_INFINITY, 0.0));
        }
        let ln = self.functional.ln_abs_derivative(jet.x, jet.ln_abs_x) + jet.ln_qprime;
        Ok((ln, sign))
    }

    pub fn v(&self, u: f64) -> Result<f64> {
        let (ln, sign) = self.ln_abs_v(u)?;
        if sign == 0.0 {
            return Ok(0.0);
        }
        Ok(sign * ln.exp())
    }

    /// `v′(u) / v(u)`; requires `v(u) ≠ 0`.
    pub fn log_derivative(&self, u: f64) -> Result<f64> {
        if self.closed_form() {
            let jet = self.jet(u)?;
            let sign = self.functional.derivative_sign(jet.x);
            if sign == 0.0 || sign.is_nan() {
                return Err(Error::Singular(format!("v({u}) = 0")));
            }
            let e = self.functional.elasticity(jet.x);
            let g_part = if e == 0.0 { 0.0 } else { e * jet.dln_x };
            Ok(g_part + jet.dln_qprime)
        } else {
            let v = self.v(u)?;
            if v == 0.0 {
                return Err(Error::Singular(format!("v({u}) = 0")));
            }
            Ok(self.numeric_v_prime(u)? / v)
        }
    }

    pub fn v_prime(&self, u: f64) -> Result<f64> {
        if !self.closed_form() {
            return self.numeric_v_prime(u);
        }
        let jet = self.jet(u)?;
        let sign = self.functional.derivative_sign(jet.x);
        if sign == 0.0 {
            // v = g(Q)·Q′ with g(Q) = 0 leaves v′ = g′(Q)·Q′².
            let qp = jet.qprime();
            return Ok(self.functional.second_derivative(jet.x) * qp * qp);
        }
        Ok(self.v(u)? * self.log_derivative(u)?)
    }

    fn numeric_v_prime(&self, u: f64) -> Result<f64> {
        let h = 1e-7 * edge_distance(u);
        Ok((self.v(u + h)? - self.v(u - h)?) / (2.0 * h))
    }

    /// `(g/f)(x)` evaluated directly on the data side.
    pub fn ratio_at_x(&self, x: f64) -> Result<f64> {
        let f = self.model.density(x)?;
        if f <= 0.0 {
            return Err(Error::Singular(format!("density vanishes at x = {x}")));
        }
        Ok(self.functional.derivative(x) / f)
    }
}
