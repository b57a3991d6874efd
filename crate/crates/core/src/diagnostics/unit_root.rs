//! Augmented Dickey-Fuller and KPSS level-stationarity tests (constant, no
//! trend).

use nalgebra::{DMatrix, DVector};

use super::{check_alpha, Conclusion, Decision, TestResult};
use crate::error::{Error, Result};

/// Lag-order choice for the ADF regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdfLag {
    /// AIC selection over `0..=floor(12 * (n / 100)^(1/4))`.
    #[default]
    Auto,
    /// AIC selection over `0..=max`.
    MaxAic(usize),
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KpssBandwidth {
    /// Newey-West rule of thumb, `floor(4 * (n / 100)^(2/9))`.
    #[default]
    Auto,
    /// Data-dependent Newey-West bandwidth (Hobijn, Franses and Ooms).
    DataDependent,
    Fixed(usize),
}

pub fn schwert_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

pub fn newey_west_bandwidth(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// Dickey-Fuller tau_mu critical values by sample size (Fuller 1976,
/// constant-only regression) at 1%, 5%, 10%.
const ADF_TABLE: [(f64, [f64; 3]); 6] = [
    (25.0, [-3.75, -3.00, -2.63]),
    (50.0, [-3.58, -2.93, -2.60]),
    (100.0, [-3.51, -2.89, -2.58]),
    (250.0, [-3.46, -2.88, -2.57]),
    (500.0, [-3.44, -2.87, -2.57]),
    (f64::INFINITY, [-3.43, -2.86, -2.57]),
];

/// KPSS level-stationarity critical values at 1%, 5%, 10%.
const KPSS_LEVEL: [f64; 3] = [0.739, 0.463, 0.347];

const LEVELS: [f64; 3] = [0.01, 0.05, 0.10];

/// Interpolates a critical value across significance levels 1%..10%.
fn at_alpha(values: [f64; 3], alpha: f64) -> Result<f64> {
    if !(LEVELS[0]..=LEVELS[2]).contains(&alpha) {
        return Err(Error::invalid(format!(
            "critical values are tabulated for alpha in [0.01, 0.10], got {alpha}"
        )));
    }
    let k = if alpha <= LEVELS[1] { 0 } else { 1 };
    let w = (alpha - LEVELS[k]) / (LEVELS[k + 1] - LEVELS[k]);
    Ok(values[k] + w * (values[k + 1] - values[k]))
}

/// ADF critical values for sample size `n`, linear in `1/n` between rows.
pub fn adf_critical_values(n: usize) -> [f64; 3] {
    let inv = 1.0 / n as f64;
    if n as f64 <= ADF_TABLE[0].0 {
        return ADF_TABLE[0].1;
    }
    for pair in ADF_TABLE.windows(2) {
        let (n0, lo) = pair[0];
        let (n1, hi) = pair[1];
        if (n as f64) <= n1 {
            let (i0, i1) = (1.0 / n0, 1.0 / n1);
            let w = (i0 - inv) / (i0 - i1);
            return [0, 1, 2].map(|k| lo[k] + w * (hi[k] - lo[k]));
        }
    }
    ADF_TABLE[5].1
}

struct OlsFit {
    beta: DVector<f64>,
    se: DVector<f64>,
    ssr: f64,
}

fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<OlsFit> {
    let (m, k) = x.shape();
    if m <= k {
        return Err(Error::invalid(format!(
            "regression has {m} observations for {k} parameters"
        )));
    }
    let xtx = x.transpose() * x;
    let chol = xtx.clone().cholesky().ok_or(Error::SingularMatrix)?;
    let beta = chol.solve(&(x.transpose() * y));
    let inv = chol.inverse();
    // reject numerically rank-deficient designs
    let cond = (0..k).map(|i| xtx[(i, i)] * inv[(i, i)]).fold(0.0, f64::max);
    if !cond.is_finite() || cond > 1e12 {
        return Err(Error::SingularMatrix);
    }
    let resid = y - x * &beta;
    let ssr = resid.norm_squared();
    let s2 = ssr / (m - k) as f64;
    let se = DVector::from_iterator(k, (0..k).map(|i| (s2 * inv[(i, i)]).sqrt()));
    Ok(OlsFit { beta, se, ssr })
}

/// ADF design with `p` lagged differences, using rows `t = skip+1 ..= n-1`
/// (`skip >= p`). Columns: constant, `x_{t-1}`, `dx_{t-1} .. dx_{t-p}`.
fn adf_design(series: &[f64], p: usize, skip: usize) -> (DMatrix<f64>, DVector<f64>) {
    let n = series.len();
    let rows = n - 1 - skip;
    let mut x = DMatrix::zeros(rows, 2 + p);
    let mut y = DVector::zeros(rows);
    for r in 0..rows {
        let t = r + skip + 1;
        y[r] = series[t] - series[t - 1];
        x[(r, 0)] = 1.0;
        x[(r, 1)] = series[t - 1];
        for j in 1..=p {
            x[(r, 1 + j)] = series[t - j] - series[t - j - 1];
        }
    }
    (x, y)
}

fn gaussian_aic(ssr: f64, m: usize, k: usize) -> f64 {
    let m = m as f64;
    m * ((2.0 * std::f64::consts::PI).ln() + (ssr / m).ln() + 1.0) + 2.0 * k as f64
}

/// Lag minimizing AIC, all candidates fitted on the same sample.
fn select_adf_lag(series: &[f64], max_lag: usize) -> Result<usize> {
    let (x_full, y) = adf_design(series, max_lag, max_lag);
    let m = y.len();
    let mut best = (f64::INFINITY, 0);
    for p in 0..=max_lag {
        let x = x_full.columns(0, 2 + p).into_owned();
        let fit = ols(&x, &y)?;
        let aic = gaussian_aic(fit.ssr, m, 2 + p);
        if aic < best.0 {
            best = (aic, p);
        }
    }
    Ok(best.1)
}

/// Augmented Dickey-Fuller test with a constant.
///
/// Regresses `dx_t` on `x_{t-1}`, `dx_{t-1}..dx_{t-p}` and a constant; the
/// statistic is the t ratio of the `x_{t-1}` coefficient. Rejecting the unit
/// root means the series is concluded stationary. Returns the result and
/// the lag order used.
pub fn adf_test_with_lag(series: &[f64], lag: AdfLag, alpha: f64) -> Result<(TestResult, usize)> {
    check_alpha(alpha)?;
    let n = series.len();
    if n < 20 {
        return Err(Error::invalid(format!(
            "ADF needs at least 20 observations, got {n}"
        )));
    }
    // leave at least 2 + max_lag residual degrees of freedom
    let cap = (n / 2).saturating_sub(2);
    let p = match lag {
        AdfLag::Auto => select_adf_lag(series, schwert_lag(n).min(cap))?,
        AdfLag::MaxAic(max) => select_adf_lag(series, max.min(cap))?,
        AdfLag::Fixed(p) if p > cap => {
            return Err(Error::invalid(format!(
                "ADF lag {p} too large for {n} observations (max {cap})"
            )))
        }
        AdfLag::Fixed(p) => p,
    };
    let (x, y) = adf_design(series, p, p);
    let fit = ols(&x, &y)?;
    if !(fit.se[1] > 0.0) || !fit.se[1].is_finite() {
        return Err(Error::Degenerate("ADF regression has a perfect fit".into()));
    }
    let tau = fit.beta[1] / fit.se[1];
    let critical = at_alpha(adf_critical_values(n), alpha)?;
    let result = TestResult::from_critical(
        "Augmented Dickey-Fuller",
        tau,
        critical,
        alpha,
        Decision::LowerTail {
            rejected: Conclusion::Stationary,
            retained: Conclusion::NonStationary,
        },
    );
    Ok((result, p))
}

pub fn adf_test(series: &[f64], lag: AdfLag, alpha: f64) -> Result<TestResult> {
    adf_test_with_lag(series, lag, alpha).map(|(r, _)| r)
}

fn autocov_sum(e: &[f64], lag: usize) -> f64 {
    e[lag..].iter().zip(e).map(|(a, b)| a * b).sum()
}

fn kpss_auto_bandwidth(e: &[f64]) -> usize {
    let n = e.len();
    let nf = n as f64;
    let cov_lags = nf.powf(2.0 / 9.0) as usize;
    let mut s0 = e.iter().map(|v| v * v).sum::<f64>() / nf;
    let mut s1 = 0.0;
    for i in 1..=cov_lags.min(n - 1) {
        let prod = autocov_sum(e, i) / (nf / 2.0);
        s0 += prod;
        s1 += i as f64 * prod;
    }
    let s_hat = s1 / s0;
    let gamma = 1.1447 * (s_hat * s_hat).powf(1.0 / 3.0);
    let lags = (gamma * nf.powf(1.0 / 3.0)) as usize;
    lags.min(n - 1)
}

/// KPSS test of level stationarity with a Bartlett-kernel long-run variance.
pub fn kpss_test(series: &[f64], bandwidth: KpssBandwidth, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    let n = series.len();
    if n < 20 {
        return Err(Error::invalid(format!(
            "KPSS needs at least 20 observations, got {n}"
        )));
    }
    let nf = n as f64;
    let mean = series.iter().sum::<f64>() / nf;
    let e: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let lags = match bandwidth {
        KpssBandwidth::Auto => newey_west_bandwidth(n).min(n - 1),
        KpssBandwidth::DataDependent => kpss_auto_bandwidth(&e),
        KpssBandwidth::Fixed(l) => l.min(n - 1),
    };
    let mut lrv = autocov_sum(&e, 0);
    for l in 1..=lags {
        let w = 1.0 - l as f64 / (lags as f64 + 1.0);
        lrv += 2.0 * w * autocov_sum(&e, l);
    }
    lrv /= nf;
    if !(lrv > 1e-300) {
        return Err(Error::Degenerate("KPSS long-run variance is zero".into()));
    }
    let mut partial = 0.0;
    let mut eta = 0.0;
    for v in &e {
        partial += v;
        eta += partial * partial;
    }
    let stat = eta / (nf * nf * lrv);
    let critical = at_alpha(KPSS_LEVEL, alpha)?;
    Ok(TestResult::from_critical(
        "KPSS",
        stat,
        critical,
        alpha,
        Decision::UpperTail {
            rejected: Conclusion::NonStationary,
            retained: Conclusion::Stationary,
        },
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

    fn walk(seed: u64, n: usize) -> Vec<f64> {
        noise(seed, n)
            .into_iter()
            .scan(0.0, |acc, e| {
                *acc += e;
                Some(*acc)
            })
            .collect()
    }

    #[test]
    fn bandwidth_rules() {
        assert_eq!(newey_west_bandwidth(200), 4);
        assert_eq!(newey_west_bandwidth(63), 3);
        assert_eq!(schwert_lag(100), 12);
        assert_eq!(schwert_lag(200), 14);
        assert_eq!(schwert_lag(63), 10);
    }

    #[test]
    fn critical_table_interpolation() {
        assert_eq!(adf_critical_values(100), [-3.51, -2.89, -2.58]);
        assert_eq!(adf_critical_values(10), [-3.75, -3.00, -2.63]);
        let mid = adf_critical_values(200)[1];
        assert!(mid < -2.88 && mid > -2.89);
        assert!((at_alpha(KPSS_LEVEL, 0.05).unwrap() - 0.463).abs() < 1e-15);
        assert!(at_alpha(KPSS_LEVEL, 0.2).is_err());
    }

    #[test]
    fn adf_short_series_rejected() {
        assert!(adf_test(&noise(1, 10), AdfLag::Auto, 0.05).is_err());
    }

    #[test]
    fn adf_constant_series_is_singular() {
        let err = adf_test(&[3.0; 40], AdfLag::Fixed(1), 0.05).unwrap_err();
        assert!(matches!(err, Error::SingularMatrix | Error::Degenerate(_)), "{err}");
    }

    #[test]
    fn adf_separates_noise_from_walk() {
        let w = adf_test(&noise(3, 200), AdfLag::Auto, 0.05).unwrap();
        assert_eq!(w.conclusion, Conclusion::Stationary, "{w:?}");
        let r = adf_test(&walk(3, 200), AdfLag::Auto, 0.05).unwrap();
        assert_eq!(r.conclusion, Conclusion::NonStationary, "{r:?}");
    }

    #[test]
    fn kpss_constant_series_errors() {
        assert!(matches!(
            kpss_test(&[1.0; 50], KpssBandwidth::Auto, 0.05),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn kpss_fixed_bandwidth_zero_matches_hand_formula() {
        let x: Vec<f64> = (0..20).map(|i| ((i * 7) % 5) as f64).collect();
        let r = kpss_test(&x, KpssBandwidth::Fixed(0), 0.05).unwrap();
        let m = x.iter().sum::<f64>() / 20.0;
        let var = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / 20.0;
        let mut s = 0.0;
        let mut eta = 0.0;
        for v in &x {
            s += v - m;
            eta += s * s;
        }
        assert!((r.statistic - eta / (400.0 * var)).abs() < 1e-12);
    }

    #[test]
    fn kpss_separates_noise_from_walk() {
        let w = kpss_test(&noise(5, 200), KpssBandwidth::Auto, 0.05).unwrap();
        assert_eq!(w.conclusion, Conclusion::Stationary, "{w:?}");
        let r = kpss_test(&walk(5, 200), KpssBandwidth::Auto, 0.05).unwrap();
        assert_eq!(r.conclusion, Conclusion::NonStationary, "{r:?}");
    }
}
