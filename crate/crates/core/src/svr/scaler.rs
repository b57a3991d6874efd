use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::check_width;

/// Per-feature z-score transform fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    /// Population standard deviation; zero-spread features are only centered.
    pub std: Vec<f64>,
}

impl Scaler {
    /// Identity transform for `width` features.
    pub fn identity(width: usize) -> Self {
        Self {
            mean: vec![0.0; width],
            std: vec![0.0; width],
        }
    }

    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::invalid("standardization needs at least 2 rows"));
        }
        let width = rows[0].len();
        for r in rows {
            check_width(width, r.len())?;
        }
        let n = rows.len() as f64;
        let mean: Vec<f64> = (0..width)
            .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n)
            .collect();
        let std = (0..width)
            .map(|j| {
                let var = rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
                var.sqrt()
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn width(&self) -> usize {
        self.mean.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| if *s > 0.0 { (x - m) / s } else { x - m })
            .collect()
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rows.iter()
            .map(|r| {
                check_width(self.width(), r.len())?;
                Ok(self.transform_row(r))
            })
            .collect()
    }
}

/// Fits a scaler on `rows` and returns it with the transformed rows.
pub fn standardize(rows: &[Vec<f64>]) -> Result<(Scaler, Vec<Vec<f64>>)> {
    let scaler = Scaler::fit(rows)?;
    let out = rows.iter().map(|r| scaler.transform_row(r)).collect();
    Ok((scaler, out))
}
