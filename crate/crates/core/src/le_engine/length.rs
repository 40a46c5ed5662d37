//! Entanglement length from a distance series.
//!
//! `-log E_n` is fitted linearly in `n` over the trailing half of the series
//! (at least three points). A finite length `1/slope` is reported only when
//! the slope exceeds a threshold, the fit residual is small, and a straight
//! line in `log n` does not fit the window better; otherwise the decay is
//! classified as polynomial or saturating and the length is infinite.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LengthConfig {
    pub slope_threshold: f64,
    /// Largest RMS residual of the linear fit accepted for a finite length.
    pub residual_threshold: f64,
    pub min_points: usize,
}

impl Default for LengthConfig {
    fn default() -> Self {
        Self { slope_threshold: 0.02, residual_threshold: 0.05, min_points: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthFit {
    /// `f64::INFINITY` for polynomial or saturating decay.
    pub xi_e: f64,
    pub slope: f64,
    pub intercept: f64,
    /// RMS residual of `-log E` against the linear fit in `n`.
    pub residual: f64,
    /// RMS residual of the alternative fit in `log n`.
    pub power_residual: f64,
    /// Distances used in the fit.
    pub window: Vec<f64>,
}

impl LengthFit {
    pub fn is_finite(&self) -> bool {
        self.xi_e.is_finite()
    }
}

/// Least-squares line `y = slope x + intercept` and its RMS residual.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

/// Fits the decay of `(n, E_n)` pairs, sorted by distance.
pub fn entanglement_length(series: &[(f64, f64)], cfg: &LengthConfig) -> Result<LengthFit> {
    let min = cfg.min_points.max(3);
    if series.len() < min {
        return Err(Error::InvalidArgument(format!("need at least {min} points, got {}", series.len())));
    }
    let mut pts = series.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let take = series.len().div_ceil(2).max(min);
    let window = &pts[pts.len() - take..];
    if let Some(&(n, e)) = window.iter().find(|p| p.1.is_nan() || p.1 <= 0.0 || p.0.is_nan() || p.0 <= 0.0) {
        return Err(Error::InvalidArgument(format!("nonpositive point (n={n}, E={e}) in fit window")));
    }
    let x: Vec<f64> = window.iter().map(|p| p.0).collect();
    let y: Vec<f64> = window.iter().map(|p| -p.1.ln()).collect();
    let (slope, intercept, residual) = linear_fit(&x, &y);
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let (_, _, power_residual) = linear_fit(&lx, &y);
    let exponential = slope > cfg.slope_threshold && residual < cfg.residual_threshold && residual <= power_residual;
    Ok(LengthFit {
        xi_e: if exponential { 1.0 / slope } else { f64::INFINITY },
        slope,
        intercept,
        residual,
        power_residual,
        window: x,
    })
}
