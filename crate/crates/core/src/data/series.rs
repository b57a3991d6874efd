use serde::{Deserialize, Serialize};

use super::YearMonth;
use crate::error::{Error, Result};

/// A gap-free monthly target series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthlySeries {
    name: String,
    unit: String,
    start: YearMonth,
    values: Vec<f64>,
}

impl MonthlySeries {
    pub fn new(
        name: impl Into<String>,
        unit: impl Into<String>,
        start: YearMonth,
        values: Vec<f64>,
    ) -> Result<Self> {
        let name = name.into();
        if values.is_empty() {
            return Err(Error::invalid(format!("series `{name}` has no values")));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "series `{name}` has a non-finite value at {}",
                start.plus(i)
            )));
        }
        Ok(Self {
            name,
            unit: unit.into(),
            start,
            values,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn unit(&self) -> &str {
        &self.unit
    }

    pub fn with_unit(mut self, unit: impl Into<String>) -> Self {
        self.unit = unit.into();
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn start(&self) -> YearMonth {
        self.start
    }

    pub fn end(&self) -> YearMonth {
        self.start.plus(self.values.len() - 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn months(&self) -> Vec<YearMonth> {
        self.start.range_to(self.end()).collect()
    }

    pub fn get(&self, month: YearMonth) -> Option<f64> {
        let offset = self.start.months_until(month);
        if offset < 0 {
            return None;
        }
        self.values.get(offset as usize).copied()
    }

    /// Keeps the first `len` months.
    pub fn head(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.values.len() {
            return Err(Error::invalid(format!(
                "cannot take {len} months of a {}-month series",
                self.values.len()
            )));
        }
        Ok(Self {
            values: self.values[..len].to_vec(),
            ..self.clone()
        })
    }
}

/// Descriptive statistics of a series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub name: String,
    pub unit: String,
    pub frequency: String,
    pub observations: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std_dev: f64,
}

impl SeriesSummary {
    pub fn of(series: &MonthlySeries) -> Self {
        let v = series.values();
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = if v.len() > 1 {
            v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            name: series.name().to_string(),
            unit: series.unit().to_string(),
            frequency: "Monthly".to_string(),
            observations: v.len(),
            min: v.iter().copied().fold(f64::INFINITY, f64::min),
            max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean,
            std_dev: var.sqrt(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ym(y: i32, m: u32) -> YearMonth {
        YearMonth::new(y, m).unwrap()
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(MonthlySeries::new("w", "m3", ym(2020, 1), vec![]).is_err());
        assert!(MonthlySeries::new("w", "m3", ym(2020, 1), vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn lookup_by_month() {
        let s = MonthlySeries::new("w", "m3", ym(2019, 11), vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.end(), ym(2020, 1));
        assert_eq!(s.get(ym(2020, 1)), Some(3.0));
        assert_eq!(s.get(ym(2019, 10)), None);
        assert_eq!(s.get(ym(2020, 2)), None);
    }

    #[test]
    fn summary_moments() {
        let s = MonthlySeries::new("w", "m3", ym(2019, 1), vec![2.0, 4.0, 6.0]).unwrap();
        let sum = SeriesSummary::of(&s);
        assert_eq!(sum.observations, 3);
        assert_eq!(sum.mean, 4.0);
        assert_eq!(sum.std_dev, 2.0);
        assert_eq!((sum.min, sum.max), (2.0, 6.0));
    }
}
