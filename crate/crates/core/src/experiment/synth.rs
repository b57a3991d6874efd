//! Seeded stand-in dataset: hourly institutional activity, daily weather and
//! two monthly consumption targets driven by both.
//!
//! The calendar has teaching weekdays, fixed holidays, a summer break
//! (Dec 20 – Feb 10), a winter break (Jul 10 – Jul 31) and a long suspension
//! of in-person activity (Mar 16 2020 – Oct 31 2021). Targets are affinely
//! calibrated to fixed moments and clamped to fixed bounds.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate, Weekday};
use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};

use crate::data::{
    write_csv, ColumnKind, ColumnMeta, DecimalLocale, Frequency, MonthlyAggregation, MonthlySeries, Sidecar,
    YearMonth,
};
use crate::error::{Error, Result};
use crate::rng;

use super::config::ExperimentConfig;

/// Moments and bounds a generated target is calibrated to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetProfile {
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
}

pub const WATER_PROFILE: TargetProfile = TargetProfile {
    mean: 502.03,
    std_dev: 207.01,
    min: 206.0,
    max: 1074.0,
};

pub const ELECTRICITY_PROFILE: TargetProfile = TargetProfile {
    mean: 15828.60,
    std_dev: 4733.04,
    min: 7252.0,
    max: 25339.0,
};

pub const WATER_MONTHS: usize = 63;
pub const ELECTRICITY_MONTHS: usize = 62;

pub const ACTIVITY_FILE: &str = "activity_hourly.csv";
pub const CLIMATE_FILE: &str = "climate_daily.csv";
pub const WATER_FILE: &str = "water_monthly.csv";
pub const ELECTRICITY_FILE: &str = "electricity_monthly.csv";
pub const CONFIG_FILE: &str = "experiment.toml";

const ACTIVITY_COLUMNS: [&str; 4] = ["courses", "holiday_hours", "suspended_hours", "other_hours"];
const CLIMATE_COLUMNS: [&str; 4] = ["temp_min", "temp_max", "temp_avg", "precipitation"];

/// One generated CSV file with its sidecar.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFile {
    pub name: &'static str,
    pub timestamp_header: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<(String, Vec<f64>)>,
    pub sidecar: Sidecar,
}

impl SyntheticFile {
    pub fn to_csv(&self, locale: DecimalLocale) -> Result<String> {
        let mut buf = Vec::new();
        write_csv(&mut buf, self.timestamp_header, &self.columns, &self.rows, locale)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub files: Vec<SyntheticFile>,
    pub water: MonthlySeries,
    pub electricity: MonthlySeries,
}

fn first_month() -> YearMonth {
    YearMonth::new(2018, 8).expect("valid month")
}

fn in_range(d: NaiveDate, from: (i32, u32, u32), to: (i32, u32, u32)) -> bool {
    let f = NaiveDate::from_ymd_opt(from.0, from.1, from.2).expect("valid date");
    let t = NaiveDate::from_ymd_opt(to.0, to.1, to.2).expect("valid date");
    f <= d && d <= t
}

fn is_break(d: NaiveDate) -> bool {
    let (m, day) = (d.month(), d.day());
    const HOLIDAYS: [(u32, u32); 8] = [(1, 1), (4, 21), (5, 1), (9, 7), (10, 12), (11, 2), (11, 15), (12, 25)];
    (m == 12 && day >= 20)
        || m == 1
        || (m == 2 && day <= 10)
        || (m == 7 && day >= 10)
        || HOLIDAYS.contains(&(m, day))
}

fn is_suspended(d: NaiveDate) -> bool {
    in_range(d, (2020, 3, 16), (2021, 10, 31))
}

fn is_weekday(d: NaiveDate) -> bool {
    !matches!(d.weekday(), Weekday::Sat | Weekday::Sun)
}

struct DailyDrivers {
    /// Mean hourly course count per day, summed per month.
    activity: BTreeMap<YearMonth, f64>,
    /// Mean daily average temperature per month.
    temperature: BTreeMap<YearMonth, (f64, usize)>,
}

fn generate_activity(seed: u64, days: &[NaiveDate], drivers: &mut DailyDrivers) -> SyntheticFile {
    let mut rng = rng::stream(seed, &[1]);
    let mut rows = Vec::with_capacity(days.len() * 24);
    for &d in days {
        let closed = is_break(d);
        let suspended = !closed && is_suspended(d);
        let teaching = !closed && !suspended && is_weekday(d);
        let event = rng.random_bool(if is_weekday(d) { 0.1 } else { 0.3 }) && !closed;
        let mut course_sum = 0.0;
        for h in 0..24u32 {
            let courses = if teaching && (7..=22).contains(&h) && h != 12 && h != 18 {
                rng.random_range(2..=9) as f64
            } else {
                0.0
            };
            let holiday = if closed { 1.0 } else { 0.0 };
            let susp = if suspended && is_weekday(d) && (7..=22).contains(&h) { 1.0 } else { 0.0 };
            let other = if event && (14..=17).contains(&h) { 1.0 } else { 0.0 };
            course_sum += courses;
            rows.push((
                format!("{}T{h:02}:00", d.format("%Y-%m-%d")),
                vec![courses, holiday, susp, other],
            ));
        }
        *drivers.activity.entry(YearMonth::of_date(d)).or_default() += course_sum / 24.0;
    }
    let columns = ACTIVITY_COLUMNS
        .iter()
        .map(|c| {
            let unit = if *c == "courses" { "count" } else { "h" };
            (c.to_string(), meta(unit, ColumnKind::Activity, MonthlyAggregation::Sum))
        })
        .collect();
    SyntheticFile {
        name: ACTIVITY_FILE,
        timestamp_header: "timestamp",
        columns: ACTIVITY_COLUMNS.to_vec(),
        rows,
        sidecar: Sidecar {
            frequency: Frequency::Hourly,
            columns,
        },
    }
}

fn round1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

fn generate_climate(seed: u64, days: &[NaiveDate], drivers: &mut DailyDrivers) -> SyntheticFile {
    let mut rng = rng::stream(seed, &[2]);
    let shock: Normal<f64> = Normal::new(0.0, 1.5).expect("valid normal");
    let unit: Normal<f64> = Normal::new(0.0, 1.0).expect("valid normal");
    let rain = Exp::new(1.0 / 14.0).expect("valid rate");
    let mut anomaly = 0.0;
    let mut rows = Vec::with_capacity(days.len());
    for &d in days {
        anomaly = 0.7 * anomaly + shock.sample(&mut rng);
        let phase = 2.0 * std::f64::consts::PI * (d.ordinal() as f64 - 20.0) / 365.25;
        let avg = round1(16.0 + 5.0 * phase.cos() + anomaly);
        let min = round1(avg - 4.5 - unit.sample(&mut rng).abs());
        let max = round1(avg + 5.5 + 1.2 * unit.sample(&mut rng).abs());
        let precipitation = if rng.random_bool(0.38) {
            round1(rain.sample(&mut rng))
        } else {
            0.0
        };
        let acc = drivers.temperature.entry(YearMonth::of_date(d)).or_insert((0.0, 0));
        acc.0 += avg;
        acc.1 += 1;
        rows.push((d.format("%Y-%m-%d").to_string(), vec![min, max, avg, precipitation]));
    }
    let columns = CLIMATE_COLUMNS
        .iter()
        .map(|c| {
            let (unit, how) = if *c == "precipitation" {
                ("mm", MonthlyAggregation::Sum)
            } else {
                ("C", MonthlyAggregation::Mean)
            };
            (c.to_string(), meta(unit, ColumnKind::Climate, how))
        })
        .collect();
    SyntheticFile {
        name: CLIMATE_FILE,
        timestamp_header: "timestamp",
        columns: CLIMATE_COLUMNS.to_vec(),
        rows,
        sidecar: Sidecar {
            frequency: Frequency::Daily,
            columns,
        },
    }
}

fn meta(unit: &str, kind: ColumnKind, monthly: MonthlyAggregation) -> ColumnMeta {
    ColumnMeta {
        unit: unit.to_string(),
        kind,
        monthly,
    }
}

fn moments(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Affine map of `raw` onto the profile's moments, clamped to its bounds.
/// The map is refined so the clamped values keep the target moments.
pub fn calibrate(raw: &[f64], profile: TargetProfile) -> Vec<f64> {
    let (m, s) = moments(raw);
    let z: Vec<f64> = raw.iter().map(|v| if s > 0.0 { (v - m) / s } else { 0.0 }).collect();
    let (mut scale, mut shift) = (profile.std_dev, profile.mean);
    let apply = |scale: f64, shift: f64| -> Vec<f64> {
        z.iter()
            .map(|v| round2((shift + scale * v).clamp(profile.min, profile.max)))
            .collect()
    };
    for _ in 0..100 {
        let (mean, sd) = moments(&apply(scale, shift));
        if sd > 0.0 {
            scale *= profile.std_dev / sd;
        }
        shift += profile.mean - mean;
    }
    apply(scale, shift)
}

fn target_file(name: &'static str, column: &'static str, unit: &str, series: &MonthlySeries) -> SyntheticFile {
    SyntheticFile {
        name,
        timestamp_header: "timestamp",
        columns: vec![column],
        rows: series
            .months()
            .iter()
            .zip(series.values())
            .map(|(m, v)| (m.to_string(), vec![*v]))
            .collect(),
        sidecar: Sidecar {
            frequency: Frequency::Monthly,
            columns: BTreeMap::from([(column.to_string(), meta(unit, ColumnKind::Target, MonthlyAggregation::Sum))]),
        },
    }
}

/// Builds the dataset in memory; identical seeds give identical data.
pub fn generate_synthetic(seed: u64) -> Result<SyntheticDataset> {
    let start = first_month();
    let end = start.plus(WATER_MONTHS.max(ELECTRICITY_MONTHS) - 1);
    let mut days = Vec::new();
    let mut d = start.first_day();
    let stop = end.first_day() + chrono::Days::new(end.days() as u64);
    while d < stop {
        days.push(d);
        d = d.succ_opt().ok_or_else(|| Error::invalid("calendar overflow"))?;
    }
    let mut drivers = DailyDrivers {
        activity: BTreeMap::new(),
        temperature: BTreeMap::new(),
    };
    let activity = generate_activity(seed, &days, &mut drivers);
    let climate = generate_climate(seed, &days, &mut drivers);

    let months: Vec<YearMonth> = drivers.activity.keys().copied().collect();
    let act_max = drivers.activity.values().copied().fold(f64::MIN, f64::max).max(1.0);
    let act: Vec<f64> = months.iter().map(|m| drivers.activity[m] / act_max).collect();
    let temp: Vec<f64> = months
        .iter()
        .map(|m| {
            let (sum, n) = drivers.temperature[m];
            (sum / n as f64 - 16.0) / 5.0
        })
        .collect();
    let noise = Normal::new(0.0, 1.0).expect("valid normal");
    let mut water_rng = rng::stream(seed, &[3]);
    let mut power_rng = rng::stream(seed, &[4]);
    let water_raw: Vec<f64> = (0..WATER_MONTHS)
        .map(|i| 1.0 + 1.2 * act[i] + 0.25 * temp[i] + 0.25 * noise.sample(&mut water_rng))
        .collect();
    let power_raw: Vec<f64> = (0..ELECTRICITY_MONTHS)
        .map(|i| 1.0 + act[i] + 0.35 * temp[i] * temp[i] + 0.25 * noise.sample(&mut power_rng))
        .collect();
    let water = MonthlySeries::new("water", "m3", start, calibrate(&water_raw, WATER_PROFILE))?;
    let electricity = MonthlySeries::new(
        "electricity",
        "kWh",
        start,
        calibrate(&power_raw, ELECTRICITY_PROFILE),
    )?;
    let files = vec![
        target_file(WATER_FILE, "water", "m3", &water),
        target_file(ELECTRICITY_FILE, "electricity", "kWh", &electricity),
        activity,
        climate,
    ];
    Ok(SyntheticDataset {
        files,
        water,
        electricity,
    })
}

/// Config pointing at the generated files, relative to `dir`.
pub fn synthetic_config(seed: u64, locale: DecimalLocale) -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        seed,
        locale,
        ..Default::default()
    };
    cfg.data.targets = vec![PathBuf::from(WATER_FILE), PathBuf::from(ELECTRICITY_FILE)];
    cfg.data.exogenous = vec![PathBuf::from(ACTIVITY_FILE), PathBuf::from(CLIMATE_FILE)];
    cfg
}

/// Writes every file, its sidecar and an `experiment.toml` into `dir`.
pub fn write_synthetic(dir: &Path, seed: u64, locale: DecimalLocale) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let data = generate_synthetic(seed)?;
    let mut written = Vec::new();
    let mut put = |path: PathBuf, text: String| -> Result<()> {
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    for f in &data.files {
        let path = dir.join(f.name);
        put(Sidecar::path_for(&path), f.sidecar.to_toml())?;
        put(path, f.to_csv(locale)?)?;
    }
    put(dir.join(CONFIG_FILE), synthetic_config(seed, locale).to_toml())?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SeriesSummary;

    #[test]
    fn calendar_rules() {
        let d = |y, m, day| NaiveDate::from_ymd_opt(y, m, day).unwrap();
        assert!(is_break(d(2019, 1, 15)) && is_break(d(2019, 12, 25)) && is_break(d(2019, 7, 20)));
        assert!(!is_break(d(2019, 3, 12)));
        assert!(is_suspended(d(2020, 6, 1)) && !is_suspended(d(2021, 11, 1)));
    }

    #[test]
    fn calibration_hits_moments_within_bounds() {
        let raw: Vec<f64> = (0..63).map(|i| ((i * 37) % 23) as f64 + (i as f64 * 0.3).sin()).collect();
        let v = calibrate(&raw, WATER_PROFILE);
        let (m, s) = moments(&v);
        assert!((m - WATER_PROFILE.mean).abs() < 0.5, "{m}");
        assert!((s - WATER_PROFILE.std_dev).abs() < 0.5, "{s}");
        assert!(v.iter().all(|x| (206.0..=1074.0).contains(x)));
    }

    #[test]
    fn generated_targets_match_profiles() {
        let data = generate_synthetic(42).unwrap();
        assert_eq!(data.water.len(), 63);
        assert_eq!(data.electricity.len(), 62);
        assert_eq!(data.water.start().to_string(), "2018-08");
        assert_eq!(data.water.end().to_string(), "2023-10");
        let w = SeriesSummary::of(&data.water);
        assert!(w.min >= 206.0 && w.max <= 1074.0);
        assert!((w.mean - 502.03).abs() / 502.03 < 0.01, "{}", w.mean);
        assert!((w.std_dev - 207.01).abs() / 207.01 < 0.05, "{}", w.std_dev);
        let e = SeriesSummary::of(&data.electricity);
        assert!((e.mean - 15828.6).abs() / 15828.6 < 0.1, "{}", e.mean);
        assert_eq!(generate_synthetic(42).unwrap(), data);
        assert_ne!(generate_synthetic(43).unwrap().water, data.water);
    }
}
