//! Derivative-free maximization over the Bloch sphere.

use std::f64::consts::PI;

use crate::qstate::MeasurementDirection;

#[derive(Clone, Debug)]
pub(crate) struct SearchConfig {
    /// Coarse grid resolution used to seed the search (`k x k` points).
    pub multistart: usize,
    /// Number of best starting points refined by compass search.
    pub polish: usize,
    pub initial_step: f64,
    pub min_step: f64,
    /// Evaluation budget of one compass run.
    pub max_evals: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { multistart: 6, polish: 4, initial_step: 0.4, min_step: 1e-7, max_evals: 400 }
    }
}

/// Direction with spherical angles that may lie outside their canonical ranges.
fn spherical(theta: f64, phi: f64) -> MeasurementDirection {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    MeasurementDirection::from_bloch([st * cp, st * sp, ct])
}

/// Coarse `k x k` grid covering the sphere (cell centres in θ).
pub(crate) fn coarse_grid(k: usize) -> Vec<MeasurementDirection> {
    let mut out = Vec::with_capacity(k * k);
    for a in 0..k {
        for b in 0..k {
            let theta = PI * (a as f64 + 0.5) / k as f64;
            out.push(MeasurementDirection::new(theta, 2.0 * PI * b as f64 / k as f64));
        }
    }
    out
}

/// Compass search from the best few of `seeds` and the coarse grid. Returns
/// the best direction and its value; earlier starts win ties.
pub(crate) fn maximize<F>(f: F, cfg: &SearchConfig, seeds: &[MeasurementDirection]) -> (MeasurementDirection, f64)
where
    F: Fn(MeasurementDirection) -> f64,
{
    let mut starts: Vec<(MeasurementDirection, f64)> =
        seeds.iter().copied().chain(coarse_grid(cfg.multistart)).map(|d| (d, f(d))).collect();
    assert!(!starts.is_empty(), "at least one candidate");
    // Stable sort keeps the earlier start first among equal values.
    starts.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut best: Option<(MeasurementDirection, f64)> = None;
    for &(dir, val) in starts.iter().take(cfg.polish.max(1)) {
        let (d, v) = compass(&f, cfg, dir, val);
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((d, v));
        }
    }
    best.expect("at least one start")
}

fn compass<F>(f: &F, cfg: &SearchConfig, mut dir: MeasurementDirection, mut val: f64) -> (MeasurementDirection, f64)
where
    F: Fn(MeasurementDirection) -> f64,
{
    let (mut theta, mut phi) = (dir.theta, dir.phi);
    let mut step = cfg.initial_step;
    let mut evals = 0;
    while step >= cfg.min_step && evals < cfg.max_evals {
        let mut moved = false;
        for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let cand = spherical(theta + dt, phi + dp);
            let v = f(cand);
            evals += 1;
            if v > val + 1e-15 {
                val = v;
                dir = cand;
                theta += dt;
                phi += dp;
                moved = true;
                break;
            }
        }
        // Growing after a success keeps long climbs from crawling at tiny steps.
        step = if moved { (2.0 * step).min(cfg.initial_step) } else { 0.5 * step };
    }
    (dir, val)
}
