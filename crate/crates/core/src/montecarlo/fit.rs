use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares line through `(log n, log magnitude)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_std_error: f64,
}

pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::domain(format!("rate fit needs at least 3 points, got {}", points.len())));
    }
    for &(n, y) in points {
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::domain(format!("sample size {n} is not positive")));
        }
        if !(y > 0.0 && y.is_finite()) {
            return Err(Error::domain(format!("magnitude {y} at n = {n} is not positive")));
        }
    }
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let x_bar = xs.iter().sum::<f64>() / m;
    let y_bar = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - x_bar).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_bar) * (y - y_bar)).sum();
    if sxx == 0.0 {
        return Err(Error::Singular("all sample sizes are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;
    let sst: f64 = ys.iter().map(|y| (y - y_bar).powi(2)).sum();
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if sst == 0.0 { 1.0 } else { 1.0 - sse / sst };
    let slope_std_error = (sse / (m - 2.0) / sxx).sqrt();
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        slope_std_error,
    })
}
