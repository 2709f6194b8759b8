//! Empirical constants `A`, `B` for the first-order bound.

use serde::{Deserialize, Serialize};

use super::{point_bounds, replicate, ExperimentConfig};
use crate::bahadur::BoundParams;
use crate::error::{Error, Result};
use crate::numeric::sorted_quantile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub params: BoundParams,
    pub pilot_n: u64,
    pub level: f64,
    pub replications: u64,
    /// Set when every pilot remainder vanished and `A = B = 1` were kept.
    pub degenerate: bool,
    /// Set when the Ψ-normalized residual carried no information and `B = 1` was kept.
    pub b_defaulted: bool,
}

/// `A` is the `level`-quantile of `|R₁|` over the first addend of Δₙ (unit
/// constant, `B = 0`) at `pilot_n`; `B` is the same quantile of the part of
/// `|R₁|` left over after `A` over the Ψ addend. `C` is reset to 2. The pilot
/// reuses the configuration's seed, so its draws are those of the experiment
/// at `n = pilot_n`.
pub fn calibrate_constants(config: &ExperimentConfig, pilot_n: u64, level: f64) -> Result<Calibration> {
    if !(level > 0.9 && level < 1.0) {
        return Err(Error::Config(format!("quantile level {level} outside (0.9, 1)")));
    }
    let mut pilot = config.clone();
    pilot.n_grid = vec![pilot_n];
    let ratio = pilot.validate()?;
    let base = BoundParams {
        a: 1.0,
        b: 1.0,
        window: 2.0,
        ..config.params()
    };
    let bounds = point_bounds(&pilot, &ratio, pilot_n, &base)?;
    let rows = replicate(&pilot, &ratio, &bounds)?;

    let point = &bounds.point;
    let pq = point.p * (1.0 - point.p);
    let ln_n = base.log_mode.log_term(point.r, point.n) / point.n as f64;
    let first_unit = pq.powf(0.25) * ln_n.powf(0.75) * point.gf.abs();
    let second_unit = pq.sqrt() * ln_n.sqrt() * bounds.psi_value;

    let done = |params, degenerate, b_defaulted| Calibration {
        params,
        pilot_n,
        level,
        replications: pilot.replications,
        degenerate,
        b_defaulted,
    };
    let magnitudes: Vec<f64> = rows.iter().map(|r| r.r1.abs()).collect();
    if magnitudes.iter().all(|&m| m == 0.0) || !(first_unit > 0.0 && first_unit.is_finite()) {
        return Ok(done(base, true, true));
    }
    let mut normalized: Vec<f64> = magnitudes.iter().map(|m| m / first_unit).collect();
    normalized.sort_by(f64::total_cmp);
    let a = sorted_quantile(&normalized, level);
    if a <= 0.0 {
        return Ok(done(base, true, true));
    }

    let mut b = 1.0;
    let mut b_defaulted = true;
    if second_unit > 0.0 && second_unit.is_finite() {
        let mut residual: Vec<f64> = magnitudes
            .iter()
            .map(|m| (m - a * first_unit).max(0.0) / second_unit)
            .collect();
        residual.sort_by(f64::total_cmp);
        let q = sorted_quantile(&residual, level);
        if q > 0.0 && q.is_finite() {
            b = q;
            b_defaulted = false;
        }
    }
    Ok(done(BoundParams { a, b, ..base }, false, b_defaulted))
}
