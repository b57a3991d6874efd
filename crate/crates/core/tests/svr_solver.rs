mod support;

use support::qp::{self, Kind};
use utilcast::svr::{fit_svr_rows, Gamma, KernelKind, KernelSpec, SmoSolver, StepOutcome, SvrParams};
use utilcast::Regressor;

const KINDS: [Kind; 3] = [Kind::Rbf, Kind::Poly { degree: 3 }, Kind::Sigmoid];

fn solver_for(inst: &qp::Instance, tolerance: f64) -> SmoSolver {
    SmoSolver::new(inst.gram(), &inst.targets, inst.c, inst.epsilon, tolerance).unwrap()
}

#[test]
fn smo_matches_projected_gradient_oracle() {
    let mut rng = support::rng(11);
    for trial in 0..30 {
        let inst = qp::random_instance(&mut rng, KINDS[trial % 3]);
        let (_, oracle) = qp::solve(&inst);
        let mut s = solver_for(&inst, 1e-3);
        let (_, converged) = s.run(100_000);
        assert!(converged);
        assert!(
            (s.objective() - oracle).abs() < 1e-4,
            "trial {trial} {:?}: smo {} oracle {oracle}",
            inst.kind,
            s.objective()
        );
        assert!(support::kkt_violation(&inst, &s) <= 1e-3);
    }
}

#[test]
fn step_invariants_hold_throughout() {
    let mut rng = support::rng(12);
    for trial in 0..30 {
        let inst = qp::random_instance(&mut rng, KINDS[trial % 3]);
        let mut s = solver_for(&inst, 1e-6);
        let mut last = s.objective();
        assert_eq!(last, 0.0);
        for _ in 0..10_000 {
            if s.step() == StepOutcome::Converged {
                break;
            }
            assert!(s.betas().iter().all(|&b| (0.0..=inst.c).contains(&b)));
            let balance: f64 = s.dual_coefficients().iter().sum();
            assert!(balance.abs() < 1e-8, "equality drift {balance}");
            let obj = s.objective();
            assert!(obj >= last - 1e-12, "objective fell from {last} to {obj}");
            last = obj;
        }
    }
}

#[test]
fn fit_reports_the_solver_objective() {
    let mut rng = support::rng(13);
    let inst = qp::random_instance(&mut rng, Kind::Rbf);
    let params = SvrParams {
        kernel: KernelSpec::rbf(inst.gamma),
        c: inst.c,
        epsilon: inst.epsilon,
        standardize: false,
        ..Default::default()
    };
    let names = (0..inst.rows[0].len()).map(|i| format!("x{i}")).collect();
    let model = fit_svr_rows(&inst.rows, &inst.targets, names, &params).unwrap();
    let (_, oracle) = qp::solve(&inst);
    assert!((model.dual_objective - oracle).abs() < 1e-4);
    assert!(model.dual_coefficients.iter().all(|&c| c != 0.0));
}

#[test]
fn free_support_vectors_sit_on_the_tube() {
    let xs: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64 / 8.0]).collect();
    let ys: Vec<f64> = xs.iter().map(|x| x[0].sin() * 3.0 + 0.2 * (x[0] * 7.0).cos()).collect();
    let params = SvrParams {
        kernel: KernelSpec { gamma: Gamma::Value(0.5), ..KernelSpec::new(KernelKind::Rbf) },
        c: 5.0,
        epsilon: 0.1,
        tolerance: 1e-6,
        ..Default::default()
    };
    let m = fit_svr_rows(&xs, &ys, vec!["x".into()], &params).unwrap();
    let preds = m.predict(&xs).unwrap();
    let sv_rows: Vec<Vec<f64>> = m.support_vectors.clone();
    for (i, (x, y)) in xs.iter().zip(&ys).enumerate() {
        let scaled = m.scaler.transform_row(x);
        let coef = sv_rows
            .iter()
            .position(|r| *r == scaled)
            .map_or(0.0, |k| m.dual_coefficients[k]);
        let r = (y - preds[i]).abs();
        if coef == 0.0 {
            assert!(r <= 0.1 + 1e-5, "row {i}: residual {r} outside tube");
        } else if coef.abs() < 5.0 {
            assert!((r - 0.1).abs() <= 1e-5, "row {i}: free SV residual {r}");
        }
    }
}

#[test]
fn duplicate_rows_predict_identically() {
    let rows = vec![vec![1.0, 2.0], vec![3.0, 1.0], vec![1.0, 2.0], vec![0.0, 0.0]];
    let m = fit_svr_rows(&rows, &[1.0, 2.0, 1.5, 0.0], vec!["a".into(), "b".into()], &SvrParams::default())
        .unwrap();
    let p = m.predict(&rows).unwrap();
    assert_eq!(p[0], p[2]);
}

#[test]
fn empty_model_predicts_bias() {
    let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
    let params = SvrParams { epsilon: 10.0, ..Default::default() };
    let m = fit_svr_rows(&rows, &[1.0, 2.0, 3.0, 2.0, 1.0], vec!["x".into()], &params).unwrap();
    assert!(m.support_vectors.is_empty());
    for p in m.predict(&[vec![100.0], vec![-3.0]]).unwrap() {
        assert_eq!(p, m.bias);
    }
}
