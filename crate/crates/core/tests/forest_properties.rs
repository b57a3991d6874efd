mod support;

use rand::Rng;
use utilcast::forest::{best_split, fit_forest_rows, fit_tree, ForestParams};
use utilcast::Regressor;

#[test]
fn splits_match_brute_force_on_small_nodes() {
    let mut rng = support::rng(3);
    for node in 0..100 {
        let n = rng.random_range(3..=12);
        let width = rng.random_range(1..=4);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..width).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let idx: Vec<usize> = (0..n).collect();
        let features: Vec<usize> = (0..width).collect();
        let got = best_split(&rows, &ys, &idx, &features).unwrap();
        let (f, t, gain) = support::brute_force_split(&rows, &ys);
        assert!((got.gain - gain).abs() < 1e-9, "node {node}: gain {} vs {gain}", got.gain);
        assert_eq!(got.feature, f, "node {node}");
        assert!((got.threshold - t).abs() < 1e-12, "node {node}: {} vs {t}", got.threshold);
    }
}

#[test]
fn unbounded_tree_interpolates_distinct_rows() {
    let mut rng = support::rng(4);
    let rows: Vec<Vec<f64>> = (0..150)
        .map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
        .collect();
    let ys: Vec<f64> = (0..150).map(|_| support::normal(&mut rng)).collect();
    let params = ForestParams { bootstrap: false, ..Default::default() };
    let tree = fit_tree(&rows, &ys, &params, &mut support::rng(0)).unwrap();
    for (r, y) in rows.iter().zip(&ys) {
        assert_eq!(tree.predict_row(r), *y);
    }
}

#[test]
fn depth_bound_is_respected() {
    let rows: Vec<Vec<f64>> = (0..64).map(|i| vec![i as f64]).collect();
    let ys: Vec<f64> = (0..64).map(|i| ((i * 37) % 64) as f64).collect();
    for depth in [1, 3, 5] {
        let params = ForestParams { max_depth: Some(depth), ..Default::default() };
        let t = fit_tree(&rows, &ys, &params, &mut support::rng(0)).unwrap();
        assert!(t.depth() <= depth);
    }
}

fn linear_data(seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = support::rng(seed);
    let rows: Vec<Vec<f64>> = (0..200).map(|_| vec![rng.random_range(0.0..10.0)]).collect();
    let ys = rows.iter().map(|r| 3.0 * r[0] + 0.1 * support::normal(&mut rng)).collect();
    (rows, ys)
}

#[test]
fn forest_fits_linear_signal() {
    let (rows, ys) = linear_data(5);
    let params = ForestParams { seed: 1, ..Default::default() };
    let m = fit_forest_rows(&rows[..100], &ys[..100], vec!["x1".into()], &params).unwrap();
    let preds = m.predict(&rows[100..]).unwrap();
    let rmse = (preds.iter().zip(&ys[100..]).map(|(p, y)| (p - y).powi(2)).sum::<f64>() / 100.0).sqrt();
    assert!(rmse <= 0.5, "rmse {rmse}");
}

#[test]
fn predictions_stay_within_training_range() {
    let (rows, ys) = linear_data(6);
    let m = fit_forest_rows(&rows, &ys, vec!["x1".into()], &ForestParams { n_estimators: 20, ..Default::default() })
        .unwrap();
    let (lo, hi) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    let probes: Vec<Vec<f64>> = (-20..40).map(|i| vec![i as f64]).collect();
    for p in m.predict(&probes).unwrap() {
        assert!(p >= lo - 1e-9 && p <= hi + 1e-9);
    }
}

#[test]
fn same_seed_is_bitwise_reproducible_across_thread_counts() {
    let (rows, ys) = linear_data(7);
    let params = ForestParams { n_estimators: 16, max_features: 0.5, seed: 42, ..Default::default() };
    let rows2: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[0], r[0].sin()]).collect();
    let names = vec!["a".to_string(), "b".to_string()];
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let parallel = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = serial.install(|| fit_forest_rows(&rows2, &ys, names.clone(), &params).unwrap());
    let b = parallel.install(|| fit_forest_rows(&rows2, &ys, names.clone(), &params).unwrap());
    assert_eq!(a, b);
    let pa: Vec<u64> = a.predict(&rows2).unwrap().iter().map(|v| v.to_bits()).collect();
    let pb: Vec<u64> = b.predict(&rows2).unwrap().iter().map(|v| v.to_bits()).collect();
    assert_eq!(pa, pb);
}

#[test]
fn constant_target_forest_predicts_constant() {
    let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64]).collect();
    let m = fit_forest_rows(&rows, &[7.25; 30], vec!["x".into()], &ForestParams::default()).unwrap();
    assert!(m.predict(&rows).unwrap().iter().all(|&p| p == 7.25));
}
