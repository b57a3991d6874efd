//! Frequency harmonization: hourly to daily by mean, daily to monthly by sum
//! (or mean for intensities).

use std::collections::BTreeMap;

use chrono::NaiveDate;

use super::ingest::{MonthlyAggregation, TimedRecord};
use super::{MonthlySeries, YearMonth};
use crate::error::{Error, Result};

/// One record per (series, calendar day), valued at the mean of that day's
/// records. Output is ordered by series id, then day.
pub fn aggregate_hourly_to_daily(records: &[TimedRecord]) -> Result<Vec<TimedRecord>> {
    if records.is_empty() {
        return Err(Error::NoRecords);
    }
    let mut days: BTreeMap<(&str, NaiveDate), (f64, usize)> = BTreeMap::new();
    for r in records {
        let acc = days
            .entry((r.series_id.as_str(), r.timestamp.date()))
            .or_insert((0.0, 0));
        acc.0 += r.value;
        acc.1 += 1;
    }
    Ok(days
        .into_iter()
        .map(|((id, day), (sum, n))| TimedRecord {
            timestamp: day.and_hms_opt(0, 0, 0).expect("midnight"),
            value: sum / n as f64,
            series_id: id.to_string(),
        })
        .collect())
}

/// Sums daily records of a single series into months.
pub fn aggregate_daily_to_monthly(records: &[TimedRecord]) -> Result<MonthlySeries> {
    aggregate_daily_to_monthly_with(records, MonthlyAggregation::Sum)
}

/// Combines daily records of a single series into a gap-free monthly series.
/// Any month between the first and last one without records is an error.
pub fn aggregate_daily_to_monthly_with(
    records: &[TimedRecord],
    how: MonthlyAggregation,
) -> Result<MonthlySeries> {
    let first = records.first().ok_or(Error::NoRecords)?;
    let series = first.series_id.as_str();
    if let Some(other) = records.iter().find(|r| r.series_id != series) {
        return Err(Error::invalid(format!(
            "monthly aggregation expects one series, got `{series}` and `{}`",
            other.series_id
        )));
    }
    let mut months: BTreeMap<YearMonth, (f64, usize)> = BTreeMap::new();
    for r in records {
        let acc = months
            .entry(YearMonth::of_date(r.timestamp.date()))
            .or_insert((0.0, 0));
        acc.0 += r.value;
        acc.1 += 1;
    }
    let start = *months.keys().next().expect("non-empty");
    let end = *months.keys().next_back().expect("non-empty");
    let missing: Vec<YearMonth> = start
        .range_to(end)
        .filter(|m| !months.contains_key(m))
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingMonths {
            series: series.to_string(),
            missing,
        });
    }
    let values = months
        .values()
        .map(|&(sum, n)| match how {
            MonthlyAggregation::Sum => sum,
            MonthlyAggregation::Mean => sum / n as f64,
        })
        .collect();
    MonthlySeries::new(series, "", start, values)
}

/// Splits a mixed record list by series id, preserving order within each.
pub fn partition_by_series(records: &[TimedRecord]) -> BTreeMap<String, Vec<TimedRecord>> {
    let mut out: BTreeMap<String, Vec<TimedRecord>> = BTreeMap::new();
    for r in records {
        out.entry(r.series_id.clone()).or_default().push(r.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDateTime;
    use proptest::prelude::*;

    fn rec(ts: &str, value: f64) -> TimedRecord {
        TimedRecord {
            timestamp: NaiveDateTime::parse_from_str(ts, "%Y-%m-%d %H:%M").unwrap(),
            value,
            series_id: "s".into(),
        }
    }

    #[test]
    fn hourly_mean_per_day() {
        let daily = aggregate_hourly_to_daily(&[rec("2021-01-01 00:00", 2.0), rec("2021-01-01 01:00", 4.0)])
            .unwrap();
        assert_eq!(daily.len(), 1);
        assert_eq!(daily[0].value, 3.0);

        let single = aggregate_hourly_to_daily(&[rec("2021-01-02 05:00", 7.0)]).unwrap();
        assert_eq!(single[0].value, 7.0);

        let four: Vec<_> = (0..4)
            .map(|h| rec(&format!("2021-01-03 0{h}:00"), (h + 1) as f64))
            .collect();
        assert_eq!(aggregate_hourly_to_daily(&four).unwrap()[0].value, 2.5);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(aggregate_hourly_to_daily(&[]).is_err());
        assert!(aggregate_daily_to_monthly(&[]).is_err());
    }

    #[test]
    fn daily_sum_per_month() {
        let m = aggregate_daily_to_monthly(&[rec("2021-01-01 00:00", 3.0), rec("2021-01-02 00:00", 5.0)])
            .unwrap();
        assert_eq!(m.values(), &[8.0]);
        let single = aggregate_daily_to_monthly(&[rec("2021-05-09 00:00", 10.0)]).unwrap();
        assert_eq!(single.values(), &[10.0]);
    }

    #[test]
    fn monthly_mean_for_intensities() {
        let m = aggregate_daily_to_monthly_with(
            &[rec("2021-01-01 00:00", 10.0), rec("2021-01-02 00:00", 20.0)],
            MonthlyAggregation::Mean,
        )
        .unwrap();
        assert_eq!(m.values(), &[15.0]);
    }

    #[test]
    fn gap_month_named_in_error() {
        let err = aggregate_daily_to_monthly(&[rec("2021-01-10 00:00", 1.0), rec("2021-03-10 00:00", 1.0)])
            .unwrap_err();
        match &err {
            Error::MissingMonths { missing, .. } => {
                assert_eq!(missing, &vec![YearMonth::new(2021, 2).unwrap()])
            }
            other => panic!("unexpected {other}"),
        }
        assert!(err.to_string().contains("2021-02"));
    }

    proptest! {
        // Monthly sum of daily means equals the two-stage aggregation for
        // whole-day hourly input.
        #[test]
        fn aggregation_composes(values in prop::collection::vec(0.0f64..100.0, 24 * 40)) {
            let start = NaiveDate::from_ymd_opt(2021, 1, 20).unwrap().and_hms_opt(0, 0, 0).unwrap();
            let hourly: Vec<TimedRecord> = values.iter().enumerate().map(|(i, &v)| TimedRecord {
                timestamp: start + chrono::Duration::hours(i as i64),
                value: v,
                series_id: "s".into(),
            }).collect();
            let monthly = aggregate_daily_to_monthly(&aggregate_hourly_to_daily(&hourly).unwrap()).unwrap();

            let mut expected: BTreeMap<YearMonth, f64> = BTreeMap::new();
            for day in values.chunks(24).enumerate() {
                let date = (start + chrono::Duration::days(day.0 as i64)).date();
                *expected.entry(YearMonth::of_date(date)).or_default() += day.1.iter().sum::<f64>() / 24.0;
            }
            let expected: Vec<f64> = expected.into_values().collect();
            prop_assert_eq!(monthly.len(), expected.len());
            for (a, b) in monthly.values().iter().zip(&expected) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
