#![allow(dead_code)]

pub mod qp;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use utilcast::svr::SmoSolver;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(rand_distr::StandardNormal)
}

/// Largest complementary-slackness violation of a solved epsilon-SVR dual.
pub fn kkt_violation(inst: &qp::Instance, solver: &SmoSolver) -> f64 {
    let n = inst.rows.len();
    let g = inst.gram();
    let theta = solver.dual_coefficients();
    let bias = solver.bias();
    let (c, eps) = (inst.c, inst.epsilon);
    let mut worst = 0.0f64;
    for i in 0..n {
        let f: f64 = (0..n).map(|j| theta[j] * g[i * n + j]).sum::<f64>() + bias;
        let r = inst.targets[i] - f;
        let t = theta[i];
        let v = if t == 0.0 {
            (r.abs() - eps).max(0.0)
        } else if t >= c {
            (eps - r).max(0.0)
        } else if t <= -c {
            (r + eps).max(0.0)
        } else if t > 0.0 {
            (r - eps).abs()
        } else {
            (r + eps).abs()
        };
        worst = worst.max(v);
    }
    worst
}

/// Exhaustive best split: every feature, every midpoint, SSE recomputed
/// from scratch for both children.
pub fn brute_force_split(rows: &[Vec<f64>], ys: &[f64]) -> (usize, f64, f64) {
    let sse = |v: &[f64]| -> f64 {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m).powi(2)).sum()
    };
    let parent = sse(ys);
    let mut best = (usize::MAX, f64::NAN, f64::NEG_INFINITY);
    for f in 0..rows[0].len() {
        let mut values: Vec<f64> = rows.iter().map(|r| r[f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let (l, r): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .zip(ys)
                .map(|(row, y)| (row[f] <= t, *y))
                .fold((vec![], vec![]), |(mut l, mut r), (left, y)| {
                    if left { l.push(y) } else { r.push(y) }
                    (l, r)
                });
            let gain = parent - sse(&l) - sse(&r);
            if gain > best.2 + 1e-9 {
                best = (f, t, gain);
            }
        }
    }
    best
}
