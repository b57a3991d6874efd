//! Hyperparameter genomes for the two learners and the holdout fitness that
//! scores them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{add_lag_features, train_test_split, FeatureTable, MAX_LAGS};
use crate::error::{Error, Result};
use crate::eval::{mse, recursive_forecast, ModelKind};
use crate::forest::{fit_forest, ForestParams, ESTIMATORS_RANGE, MAX_DEPTH_RANGE};
use crate::ga::{FitnessTask, GeneSpec, GeneValue, GenomeSchema};
use crate::model::TrainedModel;
use crate::svr::{fit_svr, KernelKind, KernelSpec, SvrParams, C_RANGE, EPSILON_RANGE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelFamily {
    Rf,
    Svr,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 2] = [ModelFamily::Rf, ModelFamily::Svr];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelFamily::Rf => "rf",
            ModelFamily::Svr => "svr",
        }
    }

    pub fn kind(self) -> ModelKind {
        match self {
            ModelFamily::Rf => ModelKind::Rf,
            ModelFamily::Svr => ModelKind::Svr,
        }
    }

    /// Searchable hyperparameters and their ranges.
    pub fn schema(self) -> GenomeSchema {
        let lags = GeneSpec::int("lags", 0, MAX_LAGS as i64);
        let genes = match self {
            ModelFamily::Rf => vec![
                GeneSpec::int("estimators", ESTIMATORS_RANGE.0, ESTIMATORS_RANGE.1),
                GeneSpec::int("max_depth", MAX_DEPTH_RANGE.0, MAX_DEPTH_RANGE.1),
                lags,
            ],
            ModelFamily::Svr => vec![
                GeneSpec::choice(
                    "kernel",
                    &KernelKind::ALL.map(KernelKind::as_str),
                ),
                GeneSpec::float("epsilon", EPSILON_RANGE.0, EPSILON_RANGE.1),
                GeneSpec::float("c", C_RANGE.0, C_RANGE.1),
                lags,
            ],
        };
        GenomeSchema::new(genes).expect("built-in schemas are valid")
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rf" => Ok(ModelFamily::Rf),
            "svr" => Ok(ModelFamily::Svr),
            other => Err(Error::invalid(format!("unknown model family `{other}` (expected rf or svr)"))),
        }
    }
}

/// Concrete model settings decoded from a genome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ModelSpec {
    Rf { params: ForestParams, lags: usize },
    Svr { params: SvrParams, lags: usize },
}

impl ModelSpec {
    pub fn lags(&self) -> usize {
        match self {
            ModelSpec::Rf { lags, .. } | ModelSpec::Svr { lags, .. } => *lags,
        }
    }

    pub fn family(&self) -> ModelFamily {
        match self {
            ModelSpec::Rf { .. } => ModelFamily::Rf,
            ModelSpec::Svr { .. } => ModelFamily::Svr,
        }
    }

    pub fn fit(&self, train: &FeatureTable) -> Result<TrainedModel> {
        match self {
            ModelSpec::Rf { params, .. } => fit_forest(train, params).map(TrainedModel::Forest),
            ModelSpec::Svr { params, .. } => fit_svr(train, params).map(TrainedModel::Svr),
        }
    }
}

fn gene<'a>(schema: &GenomeSchema, genes: &'a [GeneValue], name: &str) -> Result<&'a GeneValue> {
    schema
        .index_of(name)
        .map(|i| &genes[i])
        .ok_or_else(|| Error::invalid(format!("genome lacks gene `{name}`")))
}

fn int_gene(schema: &GenomeSchema, genes: &[GeneValue], name: &str) -> Result<usize> {
    gene(schema, genes, name)?
        .as_int()
        .and_then(|v| usize::try_from(v).ok())
        .ok_or_else(|| Error::invalid(format!("gene `{name}` must be a non-negative integer")))
}

fn float_gene(schema: &GenomeSchema, genes: &[GeneValue], name: &str) -> Result<f64> {
    gene(schema, genes, name)?
        .as_float()
        .ok_or_else(|| Error::invalid(format!("gene `{name}` must be a decimal")))
}

/// Turns a genome into model settings; `seed` drives forest bootstraps.
pub fn decode(family: ModelFamily, genes: &[GeneValue], seed: u64) -> Result<ModelSpec> {
    let schema = family.schema();
    if !schema.admits(genes) {
        return Err(Error::invalid(format!(
            "genome `{}` is outside the {family} search space",
            genes.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(", ")
        )));
    }
    let lags = int_gene(&schema, genes, "lags")?;
    Ok(match family {
        ModelFamily::Rf => ModelSpec::Rf {
            params: ForestParams {
                n_estimators: int_gene(&schema, genes, "estimators")?,
                max_depth: Some(int_gene(&schema, genes, "max_depth")?),
                seed,
                ..Default::default()
            },
            lags,
        },
        ModelFamily::Svr => {
            let kind: KernelKind = gene(&schema, genes, "kernel")?
                .as_choice()
                .ok_or_else(|| Error::invalid("gene `kernel` must be categorical"))?
                .parse()?;
            ModelSpec::Svr {
                params: SvrParams {
                    kernel: KernelSpec::new(kind),
                    c: float_gene(&schema, genes, "c")?,
                    epsilon: float_gene(&schema, genes, "epsilon")?,
                    ..Default::default()
                },
                lags,
            }
        }
    })
}

/// Outcome of training a spec and forecasting the holdout.
#[derive(Debug, Clone)]
pub struct HoldoutForecast {
    pub model: TrainedModel,
    pub predictions: Vec<f64>,
    pub actuals: Vec<f64>,
    /// Training-period target values (after lag trimming).
    pub train_target: Vec<f64>,
}

/// Adds the spec's lags, trains on all but the last `horizon` rows and
/// forecasts those rows recursively.
pub fn holdout_forecast(table: &FeatureTable, spec: &ModelSpec, horizon: usize) -> Result<HoldoutForecast> {
    let lags = spec.lags();
    let lagged = add_lag_features(table, lags)?;
    let split = train_test_split(&lagged, horizon)?;
    let model = spec.fit(&split.train)?;
    let history = &table.target()[..table.len() - horizon];
    let predictions = recursive_forecast(&model, history, &split.test, horizon, lags)?;
    Ok(HoldoutForecast {
        model,
        predictions,
        actuals: split.test.target().to_vec(),
        train_target: split.train.target().to_vec(),
    })
}

/// GA fitness: holdout MSE of the recursive forecast.
#[derive(Debug, Clone)]
pub struct HoldoutFitness {
    pub family: ModelFamily,
    /// Joined feature table without lag columns.
    pub table: FeatureTable,
    pub horizon: usize,
    pub seed: u64,
}

impl FitnessTask for HoldoutFitness {
    fn evaluate(&self, genes: &[GeneValue]) -> Result<f64> {
        let spec = decode(self.family, genes, self.seed)?;
        let f = holdout_forecast(&self.table, &spec, self.horizon)?;
        mse(&f.actuals, &f.predictions)
    }
}
