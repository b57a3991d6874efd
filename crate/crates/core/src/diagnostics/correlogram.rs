use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{check_alpha, Conclusion, TestResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlogram {
    pub lags: Vec<usize>,
    pub coefficients: Vec<f64>,
    /// Half-width of the 95% band, `1.96 / sqrt(n)`.
    pub confidence_band: f64,
}

impl Correlogram {
    /// Lags (excluding 0) whose coefficient leaves the band.
    pub fn significant_lags(&self) -> Vec<usize> {
        self.lags
            .iter()
            .zip(&self.coefficients)
            .filter(|(l, c)| **l > 0 && c.abs() > self.confidence_band)
            .map(|(l, _)| *l)
            .collect()
    }
}

fn band(n: usize) -> f64 {
    1.96 / (n as f64).sqrt()
}

/// Sample autocorrelations for lags `0..=max_lag` with the biased (1/n)
/// autocovariance.
pub fn acf(series: &[f64], max_lag: usize) -> Result<Correlogram> {
    let n = series.len();
    if max_lag >= n {
        return Err(Error::invalid(format!(
            "max lag {max_lag} must be below series length {n}"
        )));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let c0: f64 = dev.iter().map(|d| d * d).sum();
    if !(c0 > 0.0) {
        return Err(Error::Degenerate("zero-variance series".into()));
    }
    let coefficients = (0..=max_lag)
        .map(|k| {
            let ck: f64 = dev[k..].iter().zip(&dev).map(|(a, b)| a * b).sum();
            (ck / c0).clamp(-1.0, 1.0)
        })
        .collect();
    Ok(Correlogram {
        lags: (0..=max_lag).collect(),
        coefficients,
        confidence_band: band(n),
    })
}

/// Partial autocorrelations for lags `1..=max_lag` by Durbin-Levinson
/// recursion on the sample ACF.
pub fn pacf(series: &[f64], max_lag: usize) -> Result<Correlogram> {
    let n = series.len();
    if max_lag == 0 || 2 * max_lag >= n {
        return Err(Error::invalid(format!(
            "PACF max lag {max_lag} must be in 1..{}",
            n.div_ceil(2)
        )));
    }
    let r = acf(series, max_lag)?.coefficients;
    let mut phi_prev: Vec<f64> = Vec::new();
    let mut out = Vec::with_capacity(max_lag);
    for k in 1..=max_lag {
        let num = r[k] - (1..k).map(|j| phi_prev[j - 1] * r[k - j]).sum::<f64>();
        let den = 1.0 - (1..k).map(|j| phi_prev[j - 1] * r[j]).sum::<f64>();
        if den.abs() < 1e-12 {
            return Err(Error::Degenerate("Durbin-Levinson recursion broke down".into()));
        }
        let phi_kk = num / den;
        let mut phi = Vec::with_capacity(k);
        for j in 1..k {
            phi.push(phi_prev[j - 1] - phi_kk * phi_prev[k - j - 1]);
        }
        phi.push(phi_kk);
        out.push(phi_kk.clamp(-1.0, 1.0));
        phi_prev = phi;
    }
    Ok(Correlogram {
        lags: (1..=max_lag).collect(),
        coefficients: out,
        confidence_band: band(n),
    })
}

/// Ljung-Box portmanteau test on the first `lags` autocorrelations; rejects
/// when the series shows serial correlation.
pub fn ljung_box(series: &[f64], lags: usize, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    if lags == 0 {
        return Err(Error::invalid("Ljung-Box needs at least one lag"));
    }
    let n = series.len() as f64;
    let r = acf(series, lags)?.coefficients;
    let q = n * (n + 2.0)
        * (1..=lags)
            .map(|k| r[k] * r[k] / (n - k as f64))
            .sum::<f64>();
    let chi = ChiSquared::new(lags as f64).expect("df >= 1");
    Ok(TestResult::from_p_value(
        "Ljung-Box",
        q,
        chi.sf(q),
        alpha,
        Conclusion::NonRandom,
        Conclusion::Random,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = stream(seed, &[]);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn lag_zero_is_one() {
        let c = acf(&[1.0, 3.0, 2.0, 5.0, 4.0], 3).unwrap();
        assert_eq!(c.coefficients[0], 1.0);
        assert_eq!(c.lags, vec![0, 1, 2, 3]);
    }

    #[test]
    fn hand_acf() {
        // mean 2; deviations -1, 0, 1; c0 = 2; c1 = 0; c2 = -1
        let c = acf(&[1.0, 2.0, 3.0], 2).unwrap();
        assert_eq!(c.coefficients, vec![1.0, 0.0, -0.5]);
        assert!((c.confidence_band - 1.96 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn constant_series_rejected() {
        assert!(matches!(acf(&[2.0; 10], 3), Err(Error::Degenerate(_))));
        assert!(pacf(&[2.0; 10], 3).is_err());
        assert!(acf(&[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn pacf_lag_one_equals_acf() {
        let x = noise(9, 100);
        let a = acf(&x, 5).unwrap();
        let p = pacf(&x, 5).unwrap();
        assert!((a.coefficients[1] - p.coefficients[0]).abs() < 1e-15);
    }

    #[test]
    fn pacf_second_lag_closed_form() {
        let x = noise(10, 100);
        let r = acf(&x, 2).unwrap().coefficients;
        let p = pacf(&x, 2).unwrap().coefficients;
        let expected = (r[2] - r[1] * r[1]) / (1.0 - r[1] * r[1]);
        assert!((p[1] - expected).abs() < 1e-12);
    }

    #[test]
    fn ljung_box_flags_ar_process() {
        let e = noise(11, 300);
        let mut x = vec![0.0; 300];
        for t in 1..300 {
            x[t] = 0.7 * x[t - 1] + e[t];
        }
        assert_eq!(ljung_box(&x, 10, 0.05).unwrap().conclusion, Conclusion::NonRandom);
    }
}
