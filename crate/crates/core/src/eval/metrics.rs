use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_pair(actuals: &[f64], predictions: &[f64]) -> Result<()> {
    if actuals.len() != predictions.len() {
        return Err(Error::invalid(format!(
            "{} actuals but {} predictions",
            actuals.len(),
            predictions.len()
        )));
    }
    if actuals.is_empty() {
        return Err(Error::invalid("metrics need at least one observation"));
    }
    Ok(())
}

/// Mean absolute percentage error, in percent.
pub fn mape(actuals: &[f64], predictions: &[f64]) -> Result<f64> {
    check_pair(actuals, predictions)?;
    if let Some(i) = actuals.iter().position(|&a| a == 0.0) {
        return Err(Error::invalid(format!(
            "MAPE is undefined: actual value at position {i} is zero"
        )));
    }
    let total: f64 = actuals
        .iter()
        .zip(predictions)
        .map(|(a, p)| ((a - p) / a).abs())
        .sum();
    Ok(100.0 * total / actuals.len() as f64)
}

pub fn mse(actuals: &[f64], predictions: &[f64]) -> Result<f64> {
    check_pair(actuals, predictions)?;
    let total: f64 = actuals
        .iter()
        .zip(predictions)
        .map(|(a, p)| (a - p) * (a - p))
        .sum();
    Ok(total / actuals.len() as f64)
}

pub fn rmse(actuals: &[f64], predictions: &[f64]) -> Result<f64> {
    mse(actuals, predictions).map(f64::sqrt)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mape_percent: f64,
    pub rmse: f64,
    pub mse: f64,
}

impl MetricReport {
    pub fn compute(actuals: &[f64], predictions: &[f64]) -> Result<Self> {
        let mse = mse(actuals, predictions)?;
        Ok(Self {
            mape_percent: mape(actuals, predictions)?,
            rmse: mse.sqrt(),
            mse,
        })
    }
}
