//! Random forest regression: bagged CART trees with averaged predictions.

mod tree;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::FeatureTable;
use crate::error::{Error, Result};
use crate::model::{check_width, Regressor};
use crate::rng;

pub use tree::{best_split, fit_tree, Node, RegressionTree, Split};

/// Optimizer search range for `n_estimators`.
pub const ESTIMATORS_RANGE: (i64, i64) = (5, 200);
/// Optimizer search range for `max_depth`.
pub const MAX_DEPTH_RANGE: (i64, i64) = (50, 200);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_estimators: usize,
    /// `None` grows trees until leaves are pure or unsplittable.
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    /// Fraction of features considered at each split, in `(0, 1]`.
    pub max_features: f64,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_estimators: 100,
            max_depth: None,
            bootstrap: true,
            max_features: 1.0,
            min_samples_split: 2,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_estimators == 0 {
            return Err(Error::invalid("n_estimators must be positive"));
        }
        if !(self.max_features > 0.0 && self.max_features <= 1.0) {
            return Err(Error::invalid(format!(
                "max_features {} outside (0, 1]",
                self.max_features
            )));
        }
        if self.min_samples_split < 2 {
            return Err(Error::invalid("min_samples_split must be at least 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<RegressionTree>,
    pub params: ForestParams,
    pub feature_names: Vec<String>,
}

impl ForestModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: ForestModel = serde_json::from_str(text)?;
        if model.trees.is_empty() {
            return Err(Error::invalid("forest has no trees"));
        }
        Ok(model)
    }
}

impl Regressor for ForestModel {
    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        // offsets from the first tree keep agreeing trees exact
        let first = self.trees[0].predict_row(row);
        let spread: f64 = self.trees[1..]
            .iter()
            .map(|t| t.predict_row(row) - first)
            .sum();
        first + spread / self.trees.len() as f64
    }
}

/// Fits a forest on a training table.
pub fn fit_forest(table: &FeatureTable, params: &ForestParams) -> Result<ForestModel> {
    fit_forest_rows(&table.rows(), table.target(), table.feature_names(), params)
}

/// Fits a forest on raw rows. Tree `t` draws from the stream `(seed, t)`, so
/// the model does not depend on how many threads fit it.
pub fn fit_forest_rows(
    rows: &[Vec<f64>],
    targets: &[f64],
    feature_names: Vec<String>,
    params: &ForestParams,
) -> Result<ForestModel> {
    params.validate()?;
    if rows.len() < 2 {
        return Err(Error::invalid(format!(
            "forest needs at least 2 training rows, got {}",
            rows.len()
        )));
    }
    if let Some(r) = rows.iter().find(|r| r.len() != feature_names.len()) {
        check_width(feature_names.len(), r.len())?;
    }
    let n = rows.len();
    let trees = (0..params.n_estimators)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::stream(params.seed, &[t as u64]);
            let indices: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rand::Rng::random_range(&mut rng, 0..n)).collect()
            } else {
                (0..n).collect()
            };
            tree::fit_tree_on(rows, targets, &indices, params, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ForestModel {
        trees,
        params: params.clone(),
        feature_names,
    })
}

/// Per-row mean of the tree predictions.
pub fn predict(model: &ForestModel, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    model.predict(rows)
}
