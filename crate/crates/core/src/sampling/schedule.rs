use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// Limit points `a₁ = liminf pₙ`, `a₂ = limsup pₙ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub a1: f64,
    pub a2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ScheduleRule {
    /// `kₙ = ⌈α n⌉`.
    FixedFraction { alpha: f64 },
    /// `kₙ = ⌈n^β⌉` on the left, `n − ⌈n^β⌉` on the right.
    Power { beta: f64, side: Side },
    /// `kₙ = ⌈(log n)^q⌉` on the left, `n − ⌈(log n)^q⌉` on the right.
    LogPower { q: f64, side: Side },
    /// Lookup table of `(n, kₙ)` pairs.
    Explicit { table: Vec<(u64, u64)> },
}

/// Rule producing the rank `kₙ` from the sample size `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileSchedule {
    #[serde(flatten)]
    pub rule: ScheduleRule,
    /// Declared limit regime; built-in rules derive it when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<Regime>,
}

impl From<ScheduleRule> for QuantileSchedule {
    fn from(rule: ScheduleRule) -> Self {
        Self { rule, regime: None }
    }
}

impl QuantileSchedule {
    pub fn fixed_fraction(alpha: f64) -> Self {
        ScheduleRule::FixedFraction { alpha }.into()
    }

    pub fn power(beta: f64, side: Side) -> Self {
        ScheduleRule::Power { beta, side }.into()
    }

    pub fn log_power(q: f64, side: Side) -> Self {
        ScheduleRule::LogPower { q, side }.into()
    }

    pub fn explicit(table: Vec<(u64, u64)>) -> Self {
        ScheduleRule::Explicit { table }.into()
    }

    pub fn regime(&self) -> Option<Regime> {
        if self.regime.is_some() {
            return self.regime;
        }
        let edge = |side: &Side| match side {
            Side::Left => Regime { a1: 0.0, a2: 0.0 },
            Side::Right => Regime { a1: 1.0, a2: 1.0 },
        };
        match &self.rule {
            ScheduleRule::FixedFraction { alpha } => Some(Regime { a1: *alpha, a2: *alpha }),
            ScheduleRule::Power { side, .. } | ScheduleRule::LogPower { side, .. } => Some(edge(side)),
            ScheduleRule::Explicit { .. } => None,
        }
    }

    pub fn side(&self) -> Option<Side> {
        match &self.rule {
            ScheduleRule::Power { side, .. } | ScheduleRule::LogPower { side, .. } => Some(*side),
            _ => self.regime().and_then(|r| {
                if r.a2 <= 0.0 {
                    Some(Side::Left)
                } else if r.a1 >= 1.0 {
                    Some(Side::Right)
                } else {
                    None
                }
            }),
        }
    }

    fn check_parameters(&self) -> Result<()> {
        let ok = match &self.rule {
            ScheduleRule::FixedFraction { alpha } => *alpha > 0.0 && *alpha < 1.0,
            ScheduleRule::Power { beta, .. } => *beta > 0.0 && *beta < 1.0,
            ScheduleRule::LogPower { q, .. } => *q > 0.0 && q.is_finite(),
            ScheduleRule::Explicit { .. } => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Schedule(format!("invalid schedule parameters: {:?}", self.rule)))
        }
    }

    /// `kₙ`, guaranteed to satisfy `1 ≤ kₙ ≤ n − 1`.
    pub fn k(&self, n: u64) -> Result<u64> {
        self.check_parameters()?;
        let nf = n as f64;
        let from_side = |depth: f64, side: &Side| -> i128 {
            let d = depth.ceil() as i128;
            match side {
                Side::Left => d,
                Side::Right => n as i128 - d,
            }
        };
        let k: i128 = match &self.rule {
            ScheduleRule::FixedFraction { alpha } => (alpha * nf).ceil() as i128,
            ScheduleRule::Power { beta, side } => from_side(nf.powf(*beta), side),
            ScheduleRule::LogPower { q, side } => from_side(nf.ln().powf(*q), side),
            ScheduleRule::Explicit { table } => match table.iter().find(|(m, _)| *m == n) {
                Some((_, k)) => *k as i128,
                None => return Err(Error::Schedule(format!("explicit schedule has no entry for n = {n}"))),
            },
        };
        if k < 1 || k > n as i128 - 1 {
            return Err(Error::Schedule(format!("k_n = {k} outside 1..={} at n = {n}", n.saturating_sub(1))));
        }
        Ok(k as u64)
    }

    /// `rₙ = kₙ ∧ (n − kₙ)`.
    pub fn r(&self, n: u64) -> Result<u64> {
        let k = self.k(n)?;
        Ok(k.min(n - k))
    }

    /// Checks every grid point and returns the `(n, kₙ)` pairs.
    pub fn validate_grid(&self, n_grid: &[u64]) -> Result<Vec<(u64, u64)>> {
        n_grid.iter().map(|&n| Ok((n, self.k(n)?))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn built_in_rules() {
        assert_eq!(QuantileSchedule::fixed_fraction(0.5).k(1024).unwrap(), 512);
        assert_eq!(QuantileSchedule::fixed_fraction(0.5).k(1001).unwrap(), 501);
        assert_eq!(QuantileSchedule::power(0.5, Side::Left).k(10_000).unwrap(), 100);
        assert_eq!(QuantileSchedule::power(0.5, Side::Right).k(10_000).unwrap(), 9_900);
        assert_eq!(QuantileSchedule::power(0.7, Side::Left).k(10_000).unwrap(), 631);
        let lp = QuantileSchedule::log_power(1.0, Side::Left);
        assert_eq!(lp.k(1000).unwrap(), 7);
        assert_eq!(lp.r(1000).unwrap(), 7);
    }

    #[test]
    fn rejects_out_of_range_ranks() {
        let t = QuantileSchedule::explicit(vec![(10, 10), (20, 5)]);
        assert!(matches!(t.k(10), Err(Error::Schedule(_))));
        assert_eq!(t.k(20).unwrap(), 5);
        assert!(t.k(30).is_err());
        assert!(QuantileSchedule::fixed_fraction(1.5).k(10).is_err());
        assert!(QuantileSchedule::power(0.9, Side::Left).k(1).is_err());
    }

    #[test]
    fn regimes() {
        assert_eq!(QuantileSchedule::fixed_fraction(0.3).regime(), Some(Regime { a1: 0.3, a2: 0.3 }));
        assert_eq!(QuantileSchedule::power(0.7, Side::Right).side(), Some(Side::Right));
        assert_eq!(QuantileSchedule::explicit(vec![]).regime(), None);
    }

    #[test]
    fn depth_is_nondecreasing_along_grids() {
        let grid: Vec<u64> = (4..=24).map(|j| 1u64 << j).collect();
        for s in [
            QuantileSchedule::fixed_fraction(0.5),
            QuantileSchedule::fixed_fraction(0.9),
            QuantileSchedule::power(0.7, Side::Left),
            QuantileSchedule::power(0.3, Side::Right),
            QuantileSchedule::log_power(2.0, Side::Left),
        ] {
            let rs: Vec<u64> = grid.iter().map(|&n| s.r(n).unwrap()).collect();
            assert!(rs.windows(2).all(|w| w[0] <= w[1]), "{:?}", s.rule);
        }
    }

    #[test]
    fn json_form() {
        let s: QuantileSchedule = serde_json::from_str(r#"{"rule": "power", "beta": 0.7, "side": "left"}"#).unwrap();
        assert_eq!(s, QuantileSchedule::power(0.7, Side::Left));
        let s: QuantileSchedule =
            serde_json::from_str(r#"{"rule": "explicit", "table": [[10, 3]], "regime": {"a1": 0.3, "a2": 0.3}}"#).unwrap();
        assert_eq!(s.k(10).unwrap(), 3);
        assert_eq!(s.regime().unwrap().a1, 0.3);
    }
}
