mod support;

use rand::Rng;
use utilcast::baselines::{
    fit_smoothing, forecast, holt_winters_forecast, one_step_mse, ses_forecast, Seasonality,
    SmoothingMethod, SmoothingParams,
};

fn seasonal_cycle(n: usize) -> Vec<f64> {
    let cycle = [5.0, 7.0, 9.5, 11.0, 10.0, 8.0, 6.5, 4.0, 3.0, 3.5, 4.5, 6.0];
    (0..n).map(|t| 100.0 + cycle[t % 12]).collect()
}

#[test]
fn every_method_reproduces_a_constant_series() {
    let xs = vec![731.4; 48];
    let p = SmoothingParams::new(0.35, 0.2, 0.15);
    for m in SmoothingMethod::ALL {
        assert_eq!(forecast(&xs, m, &p, 12).unwrap(), vec![731.4; 12], "{m}");
        let fitted = fit_smoothing(&xs, m, 12).unwrap();
        assert_eq!(forecast(&xs, m, &fitted.params, 12).unwrap(), vec![731.4; 12], "{m} fitted");
    }
}

#[test]
fn additive_hw_continues_an_exact_cycle() {
    let xs = seasonal_cycle(60);
    let expected = seasonal_cycle(72)[60..].to_vec();
    for p in [SmoothingParams::new(0.3, 0.1, 0.2), SmoothingParams::new(0.9, 0.5, 0.9)] {
        let f = holt_winters_forecast(&xs, &p, Seasonality::Additive, 12).unwrap();
        let err = f.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "max error {err}");
    }
}

#[test]
fn multiplicative_constant_has_unit_indices() {
    let xs = vec![3.0; 36];
    let f = holt_winters_forecast(&xs, &SmoothingParams::new(0.5, 0.5, 0.5), Seasonality::Multiplicative, 24)
        .unwrap();
    assert!(f.iter().all(|&v| v == 3.0));
}

#[test]
fn ses_forecast_is_within_observed_range() {
    let mut rng = support::rng(1);
    for _ in 0..50 {
        let xs: Vec<f64> = (0..20).map(|_| rng.random_range(-50.0..50.0)).collect();
        let alpha = rng.random_range(0.01..1.0);
        let f = ses_forecast(&xs, alpha, 1).unwrap()[0];
        let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(f >= lo && f <= hi);
    }
}

#[test]
fn holt_winters_equivariance() {
    let mut rng = support::rng(2);
    let xs: Vec<f64> = (0..48)
        .map(|t| 50.0 + t as f64 * 0.4 + 6.0 * (t as f64 * std::f64::consts::FRAC_PI_6).sin() + rng.random_range(0.0..2.0))
        .collect();
    let p = SmoothingParams::new(0.4, 0.15, 0.3);
    let add = holt_winters_forecast(&xs, &p, Seasonality::Additive, 12).unwrap();
    let shifted: Vec<f64> = xs.iter().map(|x| x + 123.0).collect();
    let add_shifted = holt_winters_forecast(&shifted, &p, Seasonality::Additive, 12).unwrap();
    for (a, b) in add.iter().zip(&add_shifted) {
        assert!((a + 123.0 - b).abs() < 1e-9);
    }
    let mul = holt_winters_forecast(&xs, &p, Seasonality::Multiplicative, 12).unwrap();
    let scaled: Vec<f64> = xs.iter().map(|x| x * 3.5).collect();
    let mul_scaled = holt_winters_forecast(&scaled, &p, Seasonality::Multiplicative, 12).unwrap();
    for (a, b) in mul.iter().zip(&mul_scaled) {
        assert!((a * 3.5 - b).abs() < 1e-9 * b.abs());
    }
}

#[test]
fn ses_fit_recovers_generating_alpha() {
    let mut rng = support::rng(3);
    let mut level = 100.0;
    let mut xs = vec![level];
    for _ in 0..300 {
        let shock = 5.0 * support::normal(&mut rng);
        let x = level + shock;
        xs.push(x);
        level += 0.6 * (x - level);
    }
    let fitted = fit_smoothing(&xs, SmoothingMethod::Ses, 12).unwrap();
    assert!((fitted.params.alpha - 0.6).abs() <= 0.1, "{}", fitted.params.alpha);
}

#[test]
fn hw_fit_beats_series_variance() {
    let mut rng = support::rng(4);
    let xs: Vec<f64> = (0..60)
        .map(|t| 200.0 + 1.5 * t as f64 + 25.0 * (t as f64 * std::f64::consts::PI / 6.0).cos() + rng.random_range(-3.0..3.0))
        .collect();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
    for m in [SmoothingMethod::HoltWintersAdditive, SmoothingMethod::HoltWintersMultiplicative] {
        let f = fit_smoothing(&xs, m, 12).unwrap();
        assert!(f.mse < var, "{m}: {} vs {var}", f.mse);
        assert_eq!(f.mse, one_step_mse(&xs, m, &f.params).unwrap());
    }
}
