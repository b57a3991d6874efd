use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// A calendar month, ordered chronologically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    year: i32,
    month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self, Error> {
        if !(1..=12).contains(&month) {
            return Err(Error::invalid(format!("month {month} out of range 1-12")));
        }
        Ok(Self { year, month })
    }

    pub fn of_date(date: NaiveDate) -> Self {
        Self {
            year: date.year(),
            month: date.month(),
        }
    }

    pub fn year(self) -> i32 {
        self.year
    }

    /// Month of year, 1-12.
    pub fn month(self) -> u32 {
        self.month
    }

    pub fn succ(self) -> Self {
        if self.month == 12 {
            Self {
                year: self.year + 1,
                month: 1,
            }
        } else {
            Self {
                year: self.year,
                month: self.month + 1,
            }
        }
    }

    pub fn plus(self, months: usize) -> Self {
        let idx = self.index() + months as i64;
        Self::from_index(idx)
    }

    /// Months elapsed since year 0; consecutive months differ by one.
    pub fn index(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    fn from_index(idx: i64) -> Self {
        Self {
            year: idx.div_euclid(12) as i32,
            month: (idx.rem_euclid(12) + 1) as u32,
        }
    }

    pub fn months_until(self, other: YearMonth) -> i64 {
        other.index() - self.index()
    }

    pub fn first_day(self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year, self.month, 1).expect("valid month")
    }

    pub fn days(self) -> u32 {
        let next = self.succ().first_day();
        (next - self.first_day()).num_days() as u32
    }

    /// Inclusive range `[self, last]`.
    pub fn range_to(self, last: YearMonth) -> impl Iterator<Item = YearMonth> {
        let n = (last.index() - self.index() + 1).max(0) as usize;
        (0..n).map(move |k| self.plus(k))
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    /// Accepts `YYYY-MM` or a full ISO date (`YYYY-MM-DD...`).
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let bad = || Error::invalid(format!("cannot parse month `{s}`"));
        let mut parts = s.splitn(3, '-');
        let year: i32 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let month: u32 = parts
            .next()
            .ok_or_else(bad)?
            .get(..2)
            .ok_or_else(bad)?
            .parse()
            .map_err(|_| bad())?;
        YearMonth::new(year, month)
    }
}

impl Serialize for YearMonth {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for YearMonth {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn succ_wraps_year() {
        let dec = YearMonth::new(2019, 12).unwrap();
        assert_eq!(dec.succ(), YearMonth::new(2020, 1).unwrap());
        assert_eq!(dec.plus(14), YearMonth::new(2021, 2).unwrap());
    }

    #[test]
    fn parse_and_display() {
        let m: YearMonth = "2018-08".parse().unwrap();
        assert_eq!(m.to_string(), "2018-08");
        let d: YearMonth = "2023-10-01T00:00".parse().unwrap();
        assert_eq!(d, YearMonth::new(2023, 10).unwrap());
        assert!("2023-13".parse::<YearMonth>().is_err());
    }

    #[test]
    fn day_counts() {
        assert_eq!(YearMonth::new(2021, 2).unwrap().days(), 28);
        assert_eq!(YearMonth::new(2020, 2).unwrap().days(), 29);
        assert_eq!(YearMonth::new(2021, 12).unwrap().days(), 31);
    }

    #[test]
    fn observation_window_lengths() {
        // Aug 2018 .. Oct 2023 and Aug 2018 .. Sep 2023
        let start = YearMonth::new(2018, 8).unwrap();
        assert_eq!(start.range_to(YearMonth::new(2023, 10).unwrap()).count(), 63);
        assert_eq!(start.range_to(YearMonth::new(2023, 9).unwrap()).count(), 62);
    }
}
