//! Ingestion, frequency aggregation, feature construction and splitting.

mod aggregate;
mod features;
mod ingest;
mod month;
mod series;

pub use aggregate::{
    aggregate_daily_to_monthly, aggregate_daily_to_monthly_with, aggregate_hourly_to_daily,
    partition_by_series,
};
pub use features::{
    add_lag_features, build_time_features, join_exogenous, lag_column_name, train_test_split,
    DatasetSplit, ExogenousSeries, FeatureColumn, FeatureKind, FeatureTable, DEFAULT_HORIZON,
    MAX_LAGS,
};
pub use ingest::{
    load_csv, parse_csv, write_csv, ColumnKind, ColumnMeta, CsvSchema, DecimalLocale, Frequency,
    MonthlyAggregation, Sidecar, TimedRecord,
};
pub use month::YearMonth;
pub use series::{MonthlySeries, SeriesSummary};
