use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::metrics::MetricReport;
use crate::baselines::SmoothingMethod;
use crate::data::{lag_column_name, FeatureTable};
use crate::error::{Error, Result};
use crate::model::Regressor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "rf")]
    Rf,
    #[serde(rename = "svr")]
    Svr,
    #[serde(rename = "ses")]
    Ses,
    #[serde(rename = "brown")]
    Brown,
    #[serde(rename = "hw-add")]
    HwAdd,
    #[serde(rename = "hw-mul")]
    HwMul,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Ses,
        ModelKind::Brown,
        ModelKind::HwAdd,
        ModelKind::HwMul,
        ModelKind::Rf,
        ModelKind::Svr,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Rf => "rf",
            ModelKind::Svr => "svr",
            ModelKind::Ses => "ses",
            ModelKind::Brown => "brown",
            ModelKind::HwAdd => "hw-add",
            ModelKind::HwMul => "hw-mul",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ModelKind::Rf => "Random Forest",
            ModelKind::Svr => "SVR",
            ModelKind::Ses => SmoothingMethod::Ses.title(),
            ModelKind::Brown => SmoothingMethod::Brown.title(),
            ModelKind::HwAdd => SmoothingMethod::HoltWintersAdditive.title(),
            ModelKind::HwMul => SmoothingMethod::HoltWintersMultiplicative.title(),
        }
    }

    pub fn smoothing(self) -> Option<SmoothingMethod> {
        match self {
            ModelKind::Ses => Some(SmoothingMethod::Ses),
            ModelKind::Brown => Some(SmoothingMethod::Brown),
            ModelKind::HwAdd => Some(SmoothingMethod::HoltWintersAdditive),
            ModelKind::HwMul => Some(SmoothingMethod::HoltWintersMultiplicative),
            ModelKind::Rf | ModelKind::Svr => None,
        }
    }
}

impl From<SmoothingMethod> for ModelKind {
    fn from(m: SmoothingMethod) -> Self {
        match m {
            SmoothingMethod::Ses => ModelKind::Ses,
            SmoothingMethod::Brown => ModelKind::Brown,
            SmoothingMethod::HoltWintersAdditive => ModelKind::HwAdd,
            SmoothingMethod::HoltWintersMultiplicative => ModelKind::HwMul,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown model kind `{s}`")))
    }
}

/// Whether climate predictors are part of the feature set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureConfig {
    #[serde(rename = "with-climate")]
    WithClimate,
    #[serde(rename = "without-climate")]
    WithoutClimate,
}

impl FeatureConfig {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureConfig::WithClimate => "with-climate",
            FeatureConfig::WithoutClimate => "without-climate",
        }
    }

    pub fn includes_climate(self) -> bool {
        self == FeatureConfig::WithClimate
    }
}

impl fmt::Display for FeatureConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "with-climate" => Ok(FeatureConfig::WithClimate),
            "without-climate" => Ok(FeatureConfig::WithoutClimate),
            other => Err(Error::invalid(format!("unknown feature configuration `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRun {
    pub model_kind: ModelKind,
    pub feature_config: FeatureConfig,
    pub horizon: usize,
    pub predictions: Vec<f64>,
    pub actuals: Vec<f64>,
}

impl ForecastRun {
    pub fn new(
        model_kind: ModelKind,
        feature_config: FeatureConfig,
        predictions: Vec<f64>,
        actuals: Vec<f64>,
    ) -> Result<Self> {
        let run = Self {
            model_kind,
            feature_config,
            horizon: actuals.len(),
            predictions,
            actuals,
        };
        run.validate()?;
        Ok(run)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::invalid("forecast horizon must be positive"));
        }
        if self.predictions.len() != self.horizon || self.actuals.len() != self.horizon {
            return Err(Error::invalid(format!(
                "horizon {} but {} predictions and {} actuals",
                self.horizon,
                self.predictions.len(),
                self.actuals.len()
            )));
        }
        Ok(())
    }
}

pub fn evaluate_run(run: &ForecastRun) -> Result<MetricReport> {
    run.validate()?;
    MetricReport::compute(&run.actuals, &run.predictions)
}

/// Multi-step forecast feeding predictions back into the lag columns.
///
/// Step `t` (0-based) reads `lag_k` from `history` while `k > t` and from
/// the prediction made `k` steps earlier otherwise. All other columns come
/// from the first `horizon` rows of `future`, matched by name.
pub fn recursive_forecast(
    model: &dyn Regressor,
    history: &[f64],
    future: &FeatureTable,
    horizon: usize,
    lags: usize,
) -> Result<Vec<f64>> {
    if horizon == 0 {
        return Err(Error::invalid("forecast horizon must be positive"));
    }
    if future.len() < horizon {
        return Err(Error::invalid(format!(
            "forecast needs {horizon} exogenous rows, got {}",
            future.len()
        )));
    }
    if history.len() < lags {
        return Err(Error::invalid(format!(
            "{lags} lags need at least {lags} history values, got {}",
            history.len()
        )));
    }
    enum Source<'a> {
        Lag(usize),
        Column(&'a [f64]),
    }
    let lag_names: Vec<String> = (1..=lags).map(lag_column_name).collect();
    let model_lags = model
        .feature_names()
        .iter()
        .filter(|n| n.strip_prefix("lag_").is_some_and(|k| k.parse::<usize>().is_ok()))
        .count();
    if model_lags != lags
        || lag_names
            .iter()
            .any(|l| !model.feature_names().contains(l))
    {
        return Err(Error::invalid(format!(
            "model was trained with {model_lags} lag columns, forecast asked for {lags}"
        )));
    }
    let sources = model
        .feature_names()
        .iter()
        .map(|name| {
            if let Some(k) = lag_names.iter().position(|l| l == name) {
                Ok(Source::Lag(k + 1))
            } else {
                future
                    .column(name)
                    .map(|c| Source::Column(&c.values))
                    .ok_or_else(|| Error::invalid(format!("future rows lack feature `{name}`")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut predictions: Vec<f64> = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let row: Vec<f64> = sources
            .iter()
            .map(|s| match s {
                Source::Lag(k) if *k > t => history[history.len() - (k - t)],
                Source::Lag(k) => predictions[t - k],
                Source::Column(values) => values[t],
            })
            .collect();
        predictions.push(model.predict_row(&row));
    }
    Ok(predictions)
}
