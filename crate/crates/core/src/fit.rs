//! Experiment records and log-log power-law fits.

use serde::Serialize;

use crate::error::{Error, Result};

/// Fits drop problem sizes below this by default.
pub const DEFAULT_BURN_IN: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CostUnit {
    OracleQueries,
    WalkSteps,
    Gates,
    MultiplyAdds,
    Butterflies,
    LatticeUnits,
}

/// One measured data point of a scaling experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRecord {
    #[serde(rename = "N")]
    pub n: f64,
    pub cost: f64,
    pub unit: CostUnit,
    pub success: f64,
    pub seed: u64,
}

impl ScalingRecord {
    pub fn new(n: f64, cost: f64, unit: CostUnit, success: f64, seed: u64) -> Result<Self> {
        if !(cost >= 0.0) || !(0.0..=1.0).contains(&success) {
            return Err(Error::Validation(format!(
                "record needs cost >= 0 and success in [0, 1], got {cost}, {success}"
            )));
        }
        Ok(Self { n, cost, unit, success, seed })
    }
}

/// Least-squares line through `(ln N, ln cost)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub exponent: f64,
    pub log_intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl FitResult {
    /// Fitted cost at problem size `n`.
    pub fn predict(&self, n: f64) -> f64 {
        (self.log_intercept + self.exponent * n.ln()).exp()
    }
}

pub fn fit_power_law(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::Usage(format!("power-law fit needs >= 3 points, got {}", points.len())));
    }
    if points.iter().any(|&(n, c)| !(n > 0.0 && c > 0.0 && n.is_finite() && c.is_finite())) {
        return Err(Error::Usage("power-law fit needs strictly positive finite points".into()));
    }
    let mut sizes: Vec<f64> = points.iter().map(|p| p.0).collect();
    sizes.sort_by(f64::total_cmp);
    sizes.dedup();
    if sizes.len() < 3 {
        return Err(Error::Usage("power-law fit needs >= 3 distinct sizes".into()));
    }

    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = points.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let exponent = sxy / sxx;
    let log_intercept = my - exponent * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(FitResult { exponent, log_intercept, r_squared, points: points.len() })
}

/// Fit over the points with `N >= burn_in`.
pub fn fit_with_burn_in(points: &[(f64, f64)], burn_in: f64) -> Result<FitResult> {
    let kept: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0 >= burn_in).collect();
    fit_power_law(&kept)
}

pub fn fit_records(records: &[ScalingRecord], burn_in: f64) -> Result<FitResult> {
    let points: Vec<(f64, f64)> = records.iter().map(|r| (r.n, r.cost)).collect();
    fit_with_burn_in(&points, burn_in)
}
