//! Multi-step forecasting, error metrics and model comparison.

mod chart;
mod compare;
mod forecast;
mod metrics;

pub use chart::forecast_chart_svg;
pub use compare::{compare_models, ComparisonRow, ComparisonTable};
pub use forecast::{evaluate_run, recursive_forecast, FeatureConfig, ForecastRun, ModelKind};
pub use metrics::{mape, mse, rmse, MetricReport};
