use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::forecast::{evaluate_run, FeatureConfig, ForecastRun, ModelKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model_kind: ModelKind,
    pub feature_config: FeatureConfig,
    pub mape_percent: f64,
    pub rmse: f64,
    /// Lowest MAPE in the table (ties all flagged).
    pub best_mape: bool,
    pub best_rmse: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub series: String,
    pub horizon: usize,
    pub rows: Vec<ComparisonRow>,
}

/// One row per run with the lowest-error cell of each metric flagged.
pub fn compare_models(series: &str, runs: &[ForecastRun]) -> Result<ComparisonTable> {
    let first = runs
        .first()
        .ok_or_else(|| Error::invalid("nothing to compare"))?;
    for r in runs {
        if r.actuals != first.actuals || r.horizon != first.horizon {
            return Err(Error::invalid(format!(
                "run {} / {} was scored on different actuals",
                r.model_kind, r.feature_config
            )));
        }
    }
    let reports = runs.iter().map(evaluate_run).collect::<Result<Vec<_>>>()?;
    let min_mape = reports.iter().map(|r| r.mape_percent).fold(f64::INFINITY, f64::min);
    let min_rmse = reports.iter().map(|r| r.rmse).fold(f64::INFINITY, f64::min);
    let rows = runs
        .iter()
        .zip(&reports)
        .map(|(run, rep)| ComparisonRow {
            model_kind: run.model_kind,
            feature_config: run.feature_config,
            mape_percent: rep.mape_percent,
            rmse: rep.rmse,
            best_mape: rep.mape_percent == min_mape,
            best_rmse: rep.rmse == min_rmse,
        })
        .collect();
    Ok(ComparisonTable {
        series: series.to_string(),
        horizon: first.horizon,
        rows,
    })
}

impl ComparisonTable {
    pub const CSV_HEADER: &'static str = "series,model,features,mape_percent,rmse,best_mape,best_rmse";

    /// CSV body lines (no header), one per row.
    pub fn csv_lines(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| {
                format!(
                    "{},{},{},{},{},{},{}",
                    self.series,
                    r.model_kind,
                    r.feature_config,
                    r.mape_percent,
                    r.rmse,
                    r.best_mape,
                    r.best_rmse
                )
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for line in self.csv_lines() {
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    /// Markdown table with the best cells in bold.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "### {} ({}-month horizon)\n", self.series, self.horizon);
        out.push_str("| Model | Features | MAPE (%) | RMSE |\n|---|---|---:|---:|\n");
        let cell = |v: f64, best: bool| {
            if best {
                format!("**{v:.2}**")
            } else {
                format!("{v:.2}")
            }
        };
        for r in &self.rows {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} |",
                r.model_kind.title(),
                r.feature_config,
                cell(r.mape_percent, r.best_mape),
                cell(r.rmse, r.best_rmse)
            );
        }
        out
    }
}
