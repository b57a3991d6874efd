use std::collections::BTreeMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{check_alpha, Conclusion, TestResult};
use crate::data::MonthlySeries;
use crate::error::{Error, Result};

/// Kruskal-Wallis H over arbitrary groups, with tie correction. Returns
/// `(H, degrees of freedom)`.
pub fn kruskal_wallis_h(groups: &[Vec<f64>]) -> Result<(f64, usize)> {
    if groups.len() < 2 || groups.iter().any(|g| g.is_empty()) {
        return Err(Error::invalid("Kruskal-Wallis needs at least two non-empty groups"));
    }
    let mut pooled: Vec<(f64, usize)> = groups
        .iter()
        .enumerate()
        .flat_map(|(g, vals)| vals.iter().map(move |&v| (v, g)))
        .collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pooled.len();
    let mut rank_sums = vec![0.0; groups.len()];
    let mut tie_sum = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        // average of ranks i+1 ..= j
        let rank = (i + j + 1) as f64 / 2.0;
        for item in &pooled[i..j] {
            rank_sums[item.1] += rank;
        }
        let t = (j - i) as f64;
        tie_sum += t * t * t - t;
        i = j;
    }
    let nf = n as f64;
    let correction = 1.0 - tie_sum / (nf * nf * nf - nf);
    if correction <= 0.0 {
        return Err(Error::Degenerate("all observations are tied".into()));
    }
    let h = 12.0 / (nf * (nf + 1.0))
        * rank_sums
            .iter()
            .zip(groups)
            .map(|(r, g)| r * r / g.len() as f64)
            .sum::<f64>()
        - 3.0 * (nf + 1.0);
    Ok(((h / correction).max(0.0), groups.len() - 1))
}

pub fn kruskal_wallis(groups: &[Vec<f64>], alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    let (h, df) = kruskal_wallis_h(groups)?;
    let chi = ChiSquared::new(df as f64).expect("df >= 1");
    Ok(TestResult::from_p_value(
        "Kruskal-Wallis",
        h,
        chi.sf(h),
        alpha,
        Conclusion::Seasonal,
        Conclusion::NoSeasonality,
    ))
}

/// Seasonality test grouping observations by calendar month. Months with
/// fewer than two observations are left out.
pub fn kruskal_wallis_seasonality(series: &MonthlySeries, alpha: f64) -> Result<TestResult> {
    let mut by_month: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for (m, v) in series.months().iter().zip(series.values()) {
        by_month.entry(m.month()).or_default().push(*v);
    }
    let groups: Vec<Vec<f64>> = by_month.into_values().filter(|g| g.len() >= 2).collect();
    if groups.len() < 2 {
        return Err(Error::invalid(
            "seasonality test needs at least two calendar months observed twice",
        ));
    }
    kruskal_wallis(&groups, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::YearMonth;

    #[test]
    fn hand_computed_h() {
        let (h, df) = kruskal_wallis_h(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        // 12/42 * (36/3 + 225/3) - 21 = 27/7
        assert!((h - 27.0 / 7.0).abs() < 1e-12);
        assert_eq!(df, 1);
        let r = kruskal_wallis(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]], 0.05).unwrap();
        // scipy.stats.kruskal([1,2,3],[4,5,6]).pvalue
        assert!((r.p_value.unwrap() - 0.049534613435626915).abs() < 1e-9);
    }

    #[test]
    fn identical_rank_sums_give_zero() {
        let groups = vec![vec![1.0, 4.0, 5.0, 8.0], vec![2.0, 3.0, 6.0, 7.0]];
        let (h, _) = kruskal_wallis_h(&groups).unwrap();
        assert!(h.abs() < 1e-12);
    }

    #[test]
    fn ties_use_average_ranks() {
        // ranks: 1, 2.5, 2.5 | 4, 5.5, 5.5
        let (h, _) = kruskal_wallis_h(&[vec![1.0, 2.0, 2.0], vec![3.0, 4.0, 4.0]]).unwrap();
        let raw = 12.0 / 42.0 * (36.0 / 3.0 + 225.0 / 3.0) - 21.0;
        let corr = 1.0 - 12.0 / 210.0;
        assert!((h - raw / corr).abs() < 1e-12);
    }

    #[test]
    fn single_month_coverage_rejected() {
        let s = MonthlySeries::new("w", "", YearMonth::new(2020, 1).unwrap(), vec![1.0]).unwrap();
        assert!(kruskal_wallis_seasonality(&s, 0.05).is_err());
        // 13 months: only January appears twice
        let s = MonthlySeries::new("w", "", YearMonth::new(2020, 1).unwrap(), vec![1.0; 13]).unwrap();
        assert!(kruskal_wallis_seasonality(&s, 0.05).is_err());
    }

    #[test]
    fn strong_seasonality_detected() {
        let values: Vec<f64> = (0..48).map(|i| ((i % 12) as f64) * 10.0 + (i / 12) as f64).collect();
        let s = MonthlySeries::new("w", "", YearMonth::new(2019, 1).unwrap(), values).unwrap();
        let r = kruskal_wallis_seasonality(&s, 0.05).unwrap();
        assert_eq!(r.conclusion, Conclusion::Seasonal);
    }
}
