use super::{check_alpha, two_sided_normal_p, Conclusion, TestResult};
use crate::error::{Error, Result};

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Wald-Wolfowitz runs test above/below the median.
///
/// Values equal to the median are dropped before counting runs; the statistic
/// is the normal-approximation z score.
pub fn runs_test(series: &[f64], alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    if series.len() < 10 {
        return Err(Error::invalid(format!(
            "runs test needs at least 10 observations, got {}",
            series.len()
        )));
    }
    let med = median(series);
    let signs: Vec<bool> = series
        .iter()
        .filter(|&&x| x != med)
        .map(|&x| x > med)
        .collect();
    let n1 = signs.iter().filter(|&&s| s).count() as f64;
    let n2 = signs.len() as f64 - n1;
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::Degenerate(
            "all values equal the median; runs are undefined".into(),
        ));
    }
    let runs = 1 + signs.windows(2).filter(|w| w[0] != w[1]).count();
    let n = n1 + n2;
    let mean = 2.0 * n1 * n2 / n + 1.0;
    let var = 2.0 * n1 * n2 * (2.0 * n1 * n2 - n) / (n * n * (n - 1.0));
    if var <= 0.0 {
        return Err(Error::Degenerate("runs variance is zero".into()));
    }
    let z = (runs as f64 - mean) / var.sqrt();
    Ok(TestResult::from_p_value(
        "Wald-Wolfowitz runs",
        z,
        two_sided_normal_p(z),
        alpha,
        Conclusion::NonRandom,
        Conclusion::Random,
    ))
}

/// Mann-Kendall S statistic, `sum_{i<j} sign(x_j - x_i)`.
pub fn mann_kendall_s(series: &[f64]) -> i64 {
    let mut s = 0i64;
    for i in 0..series.len() {
        for j in i + 1..series.len() {
            s += match series[j].partial_cmp(&series[i]) {
                Some(std::cmp::Ordering::Greater) => 1,
                Some(std::cmp::Ordering::Less) => -1,
                _ => 0,
            };
        }
    }
    s
}

/// Mann-Kendall trend test with tie-corrected variance and continuity
/// correction. The reported statistic is S.
pub fn mann_kendall(series: &[f64], alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    let n = series.len();
    if n < 8 {
        return Err(Error::invalid(format!(
            "Mann-Kendall needs at least 8 observations, got {n}"
        )));
    }
    let s = mann_kendall_s(series);

    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * (t - 1.0) * (2.0 * t + 5.0);
        i = j;
    }
    let nf = n as f64;
    let var = (nf * (nf - 1.0) * (2.0 * nf + 5.0) - tie_term) / 18.0;
    let z = if var <= 0.0 || s == 0 {
        0.0
    } else if s > 0 {
        (s as f64 - 1.0) / var.sqrt()
    } else {
        (s as f64 + 1.0) / var.sqrt()
    };
    Ok(TestResult::from_p_value(
        "Mann-Kendall",
        s as f64,
        two_sided_normal_p(z),
        alpha,
        Conclusion::Trend,
        Conclusion::NoTrend,
    ))
}

/// Number of (first-half, second-half) pairs and how many of the non-tied
/// ones increase.
pub(crate) fn cox_stuart_pairs(series: &[f64]) -> (usize, usize, usize) {
    let n = series.len();
    let offset = n.div_ceil(2);
    let pairs = n / 2;
    let mut up = 0;
    let mut down = 0;
    for i in 0..pairs {
        let d = series[i + offset] - series[i];
        if d > 0.0 {
            up += 1;
        } else if d < 0.0 {
            down += 1;
        }
    }
    (pairs, up, down)
}

/// Cox-Stuart sign test for trend with an exact two-sided binomial p-value.
/// The reported statistic is the count of increasing pairs.
pub fn cox_stuart(series: &[f64], alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    if series.len() < 6 {
        return Err(Error::invalid(format!(
            "Cox-Stuart needs at least 6 observations, got {}",
            series.len()
        )));
    }
    let (_, up, down) = cox_stuart_pairs(series);
    let m = up + down;
    if m == 0 {
        return Err(Error::Degenerate("all Cox-Stuart pairs are tied".into()));
    }
    let k = up.min(down);
    // P(X <= k), X ~ Binomial(m, 1/2)
    let mut coeff = 1.0f64;
    let mut tail = 0.0;
    for i in 0..=k {
        if i > 0 {
            coeff *= (m - i + 1) as f64 / i as f64;
        }
        tail += coeff;
    }
    tail *= 0.5f64.powi(m as i32);
    let p = (2.0 * tail).min(1.0);
    Ok(TestResult::from_p_value(
        "Cox-Stuart",
        up as f64,
        p,
        alpha,
        Conclusion::Trend,
        Conclusion::NoTrend,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runs_alternating_is_maximal() {
        let x: Vec<f64> = (0..20).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = runs_test(&x, 0.05).unwrap();
        // R = 20, mu = 11, var = 36000 / 7600
        let z = 9.0 / (36000.0f64 / 7600.0).sqrt();
        assert!((r.statistic - z).abs() < 1e-12);
        assert!(r.p_value.unwrap() < 0.01);
        assert_eq!(r.conclusion, Conclusion::NonRandom);
    }

    #[test]
    fn runs_two_blocks() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let r = runs_test(&x, 0.05).unwrap();
        let z = (2.0 - 11.0) / (36000.0f64 / 7600.0).sqrt();
        assert!((r.statistic - z).abs() < 1e-12);
        assert!(r.p_value.unwrap() < 0.01);
    }

    #[test]
    fn runs_rejects_constant_and_short() {
        assert!(matches!(runs_test(&[1.0; 12], 0.05), Err(Error::Degenerate(_))));
        assert!(runs_test(&[1.0, 1.0, 1.0, 1.0], 0.05).is_err());
    }

    #[test]
    fn runs_drops_median_ties() {
        // odd length: the median itself is dropped
        let x = [1.0, 5.0, 2.0, 6.0, 3.0, 4.0, 7.0, 0.0, 8.0, 9.0, 4.5];
        let r = runs_test(&x, 0.05).unwrap();
        assert!(r.p_value.unwrap() > 0.0);
    }

    #[test]
    fn mann_kendall_pairs() {
        assert_eq!(mann_kendall_s(&[1.0, 3.0, 2.0]), 1);
        let inc: Vec<f64> = (0..10).map(f64::from).collect();
        let r = mann_kendall(&inc, 0.05).unwrap();
        assert_eq!(r.statistic, 45.0);
        assert_eq!(r.conclusion, Conclusion::Trend);
    }

    #[test]
    fn mann_kendall_constant() {
        let r = mann_kendall(&[4.0; 10], 0.05).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, Some(1.0));
        assert_eq!(r.conclusion, Conclusion::NoTrend);
        assert!(mann_kendall(&[1.0; 7], 0.05).is_err());
    }

    #[test]
    fn mann_kendall_known_p() {
        // n = 10, S = 45, var = 10*9*25/18 = 125, z = 44/sqrt(125)
        let inc: Vec<f64> = (0..10).map(f64::from).collect();
        let r = mann_kendall(&inc, 0.05).unwrap();
        // scipy.stats.norm.sf(44 / sqrt(125)) * 2
        assert!((r.p_value.unwrap() - 8.303070332644974e-05).abs() < 1e-12);
    }

    #[test]
    fn cox_stuart_exact() {
        let inc: Vec<f64> = (0..10).map(f64::from).collect();
        let r = cox_stuart(&inc, 0.05).unwrap();
        assert_eq!(r.statistic, 5.0);
        assert!((r.p_value.unwrap() - 0.0625).abs() < 1e-15);
        assert_eq!(r.conclusion, Conclusion::NoTrend);
    }

    #[test]
    fn cox_stuart_odd_drops_middle() {
        let x = [1.0, 2.0, 3.0, 100.0, 5.0, 6.0, 7.0];
        assert_eq!(cox_stuart_pairs(&x), (3, 3, 0));
    }

    #[test]
    fn cox_stuart_all_tied() {
        assert!(matches!(cox_stuart(&[2.0; 8], 0.05), Err(Error::Degenerate(_))));
    }
}
