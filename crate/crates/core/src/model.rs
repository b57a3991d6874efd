//! Common interface of fitted regressors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::ForestModel;
use crate::svr::SvrModel;

/// A fitted single-step regressor over named feature columns.
pub trait Regressor: Send + Sync {
    fn feature_names(&self) -> &[String];

    /// Prediction for one row; the row width is checked by [`Regressor::predict`].
    fn predict_row(&self, row: &[f64]) -> f64;

    fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        let width = self.feature_names().len();
        rows.iter()
            .map(|r| {
                check_width(width, r.len())?;
                Ok(self.predict_row(r))
            })
            .collect()
    }
}

pub(crate) fn check_width(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::WidthMismatch { expected, actual })
    }
}

/// A fitted machine-learning model with its preprocessing state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "model", rename_all = "lowercase")]
pub enum TrainedModel {
    Forest(ForestModel),
    Svr(SvrModel),
}

impl TrainedModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl Regressor for TrainedModel {
    fn feature_names(&self) -> &[String] {
        match self {
            TrainedModel::Forest(m) => m.feature_names(),
            TrainedModel::Svr(m) => m.feature_names(),
        }
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        match self {
            TrainedModel::Forest(m) => m.predict_row(row),
            TrainedModel::Svr(m) => m.predict_row(row),
        }
    }
}
