//! Diagnostics checked against values produced by statsmodels 0.14 on a
//! fixed deterministic series.

use utilcast::diagnostics::{acf, adf_test, adf_test_with_lag, kpss_test, pacf, AdfLag, KpssBandwidth};

fn series() -> Vec<f64> {
    (0..80)
        .map(|t| {
            let t = t as f64;
            (0.7 * t).sin() + 0.3 * (2.3 * t).cos() + 0.01 * t + ((t as i64 * 37) % 11) as f64 / 10.0
        })
        .collect()
}

#[test]
fn adf_matches_statsmodels() {
    let x = series();
    for (lag, expected) in [
        (5, -3.2388615138689096),
        (11, -0.15367789401441043),
        (0, -5.3874439727570875),
    ] {
        let r = adf_test(&x, AdfLag::Fixed(lag), 0.05).unwrap();
        assert!((r.statistic - expected).abs() < 1e-8, "lag {lag}: {}", r.statistic);
    }
}

#[test]
fn adf_aic_selection_matches_statsmodels() {
    let x = series();
    for (max, lag, stat) in [(11, 11, -0.15367789401441043), (6, 6, -1.968857568809713)] {
        let (r, used) = adf_test_with_lag(&x, AdfLag::MaxAic(max), 0.05).unwrap();
        assert_eq!(used, lag);
        assert!((r.statistic - stat).abs() < 1e-8, "max {max}: {}", r.statistic);
    }
}

#[test]
fn kpss_matches_statsmodels() {
    let x = series();
    let auto = kpss_test(&x, KpssBandwidth::Auto, 0.05).unwrap();
    let hobijn = kpss_test(&x, KpssBandwidth::DataDependent, 0.05).unwrap();
    assert!((hobijn.statistic - 0.2703860439200953).abs() < 1e-10, "{}", hobijn.statistic);
    assert!((auto.statistic - 0.2703860439200953).abs() < 1e-10, "{}", auto.statistic);
    let fixed = kpss_test(&x, KpssBandwidth::Fixed(4), 0.05).unwrap();
    assert!((fixed.statistic - 0.317750701222474).abs() < 1e-10, "{}", fixed.statistic);
}

#[test]
fn correlograms_match_statsmodels() {
    let x = series();
    let a = acf(&x, 5).unwrap().coefficients;
    let expected_acf = [
        1.0,
        0.4557801771096474,
        0.12289217416598879,
        -0.12729552597197832,
        -0.7294267582928007,
        -0.48953438161933854,
    ];
    for (got, want) in a.iter().zip(expected_acf) {
        assert!((got - want).abs() < 1e-12);
    }
    let p = pacf(&x, 5).unwrap().coefficients;
    let expected_pacf = [
        0.45578017710964747,
        -0.1070897448515161,
        -0.17939235840683032,
        -0.7702638086929526,
        0.2827422182054496,
    ];
    for (got, want) in p.iter().zip(expected_pacf) {
        assert!((got - want).abs() < 1e-10);
    }
}
