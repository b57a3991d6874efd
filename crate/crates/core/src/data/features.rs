use std::collections::HashSet;

use chrono::{Datelike, Weekday};
use serde::{Deserialize, Serialize};

use super::{MonthlySeries, YearMonth};
use crate::error::{Error, Result};

/// Largest lag count a table may carry.
pub const MAX_LAGS: usize = 20;

/// Default forecast horizon in months.
pub const DEFAULT_HORIZON: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Activity,
    Climate,
    Time,
    Lag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureColumn {
    pub name: String,
    pub kind: FeatureKind,
    pub values: Vec<f64>,
}

impl FeatureColumn {
    pub fn new(name: impl Into<String>, kind: FeatureKind, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            kind,
            values,
        }
    }
}

/// Month-aligned design matrix with its target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    months: Vec<YearMonth>,
    columns: Vec<FeatureColumn>,
    target: Vec<f64>,
}

impl FeatureTable {
    pub fn new(months: Vec<YearMonth>, columns: Vec<FeatureColumn>, target: Vec<f64>) -> Result<Self> {
        if target.len() != months.len() {
            return Err(Error::invalid(format!(
                "target has {} rows but {} months given",
                target.len(),
                months.len()
            )));
        }
        let mut names = HashSet::new();
        for c in &columns {
            if c.values.len() != months.len() {
                return Err(Error::invalid(format!(
                    "column `{}` has {} rows, expected {}",
                    c.name,
                    c.values.len(),
                    months.len()
                )));
            }
            if !names.insert(c.name.as_str()) {
                return Err(Error::invalid(format!("duplicate column `{}`", c.name)));
            }
        }
        Ok(Self {
            months,
            columns,
            target,
        })
    }

    pub fn len(&self) -> usize {
        self.months.len()
    }

    pub fn is_empty(&self) -> bool {
        self.months.is_empty()
    }

    pub fn months(&self) -> &[YearMonth] {
        &self.months
    }

    pub fn columns(&self) -> &[FeatureColumn] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&FeatureColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c.values[i]).collect()
    }

    /// Row-major copy of the feature matrix.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.row(i)).collect()
    }

    pub fn lag_count(&self) -> usize {
        self.columns.iter().filter(|c| c.kind == FeatureKind::Lag).count()
    }

    /// Rows `[from, to)`.
    pub fn slice(&self, from: usize, to: usize) -> FeatureTable {
        FeatureTable {
            months: self.months[from..to].to_vec(),
            columns: self
                .columns
                .iter()
                .map(|c| FeatureColumn {
                    values: c.values[from..to].to_vec(),
                    ..c.clone()
                })
                .collect(),
            target: self.target[from..to].to_vec(),
        }
    }

    pub fn without_kind(&self, kind: FeatureKind) -> FeatureTable {
        FeatureTable {
            columns: self.columns.iter().filter(|c| c.kind != kind).cloned().collect(),
            ..self.clone()
        }
    }
}

fn weekday_name(day: Weekday) -> &'static str {
    match day {
        Weekday::Mon => "days_mon",
        Weekday::Tue => "days_tue",
        Weekday::Wed => "days_wed",
        Weekday::Thu => "days_thu",
        Weekday::Fri => "days_fri",
        Weekday::Sat => "days_sat",
        Weekday::Sun => "days_sun",
    }
}

const WEEK: [Weekday; 7] = [
    Weekday::Mon,
    Weekday::Tue,
    Weekday::Wed,
    Weekday::Thu,
    Weekday::Fri,
    Weekday::Sat,
    Weekday::Sun,
];

/// Month-of-year (1-12) plus the number of times each weekday occurs in the
/// month.
pub fn build_time_features(months: &[YearMonth]) -> Vec<FeatureColumn> {
    let mut counts = vec![vec![0.0; months.len()]; 7];
    for (row, m) in months.iter().enumerate() {
        let first = m.first_day();
        for d in 0..m.days() {
            let wd = (first + chrono::Duration::days(d as i64)).weekday();
            counts[wd.num_days_from_monday() as usize][row] += 1.0;
        }
    }
    let mut cols = vec![FeatureColumn::new(
        "month",
        FeatureKind::Time,
        months.iter().map(|m| m.month() as f64).collect(),
    )];
    cols.extend(
        WEEK.iter()
            .zip(counts)
            .map(|(wd, values)| FeatureColumn::new(weekday_name(*wd), FeatureKind::Time, values)),
    );
    cols
}

pub fn lag_column_name(k: usize) -> String {
    format!("lag_{k}")
}

/// Appends `lag_1..lag_L` target lags and drops the first `L` rows.
pub fn add_lag_features(table: &FeatureTable, lags: usize) -> Result<FeatureTable> {
    if lags > MAX_LAGS {
        return Err(Error::invalid(format!("lags {lags} exceeds maximum {MAX_LAGS}")));
    }
    if lags == 0 {
        return Ok(table.clone());
    }
    if lags >= table.len() {
        return Err(Error::invalid(format!(
            "lags {lags} needs more than {} rows",
            table.len()
        )));
    }
    if table.lag_count() > 0 {
        return Err(Error::invalid("table already carries lag columns"));
    }
    let n = table.len();
    let mut out = table.slice(lags, n);
    for k in 1..=lags {
        let values = (lags..n).map(|t| table.target[t - k]).collect();
        out.columns
            .push(FeatureColumn::new(lag_column_name(k), FeatureKind::Lag, values));
    }
    Ok(out)
}

/// Temporal train/test partition; the test set is the final `horizon` rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: FeatureTable,
    pub test: FeatureTable,
    pub horizon: usize,
}

pub fn train_test_split(table: &FeatureTable, horizon: usize) -> Result<DatasetSplit> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be positive"));
    }
    if horizon >= table.len() {
        return Err(Error::invalid(format!(
            "horizon {horizon} leaves no training rows in a {}-row table",
            table.len()
        )));
    }
    let cut = table.len() - horizon;
    Ok(DatasetSplit {
        train: table.slice(0, cut),
        test: table.slice(cut, table.len()),
        horizon,
    })
}

/// Monthly predictor series with its group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExogenousSeries {
    pub series: MonthlySeries,
    pub kind: FeatureKind,
}

/// Aligns exogenous series to the target's months and appends calendar
/// features. Climate columns are dropped when `include_climate` is false.
pub fn join_exogenous(
    target: &MonthlySeries,
    exogenous: &[ExogenousSeries],
    include_climate: bool,
) -> Result<FeatureTable> {
    let months = target.months();
    let mut columns = Vec::new();
    for exo in exogenous {
        if matches!(exo.kind, FeatureKind::Time | FeatureKind::Lag) {
            return Err(Error::invalid(format!(
                "exogenous series `{}` must be an activity or climate series",
                exo.series.name()
            )));
        }
        let missing: Vec<YearMonth> = months
            .iter()
            .copied()
            .filter(|m| exo.series.get(*m).is_none())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingMonths {
                series: exo.series.name().to_string(),
                missing,
            });
        }
        if exo.kind == FeatureKind::Climate && !include_climate {
            continue;
        }
        let values = months
            .iter()
            .map(|m| exo.series.get(*m).expect("coverage checked"))
            .collect();
        columns.push(FeatureColumn::new(exo.series.name(), exo.kind, values));
    }
    columns.extend(build_time_features(&months));
    FeatureTable::new(months, columns, target.values().to_vec())
}
