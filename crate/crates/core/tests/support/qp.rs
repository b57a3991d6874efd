//! Dense projected-gradient oracle for the epsilon-SVR dual, written
//! independently of the SMO solver: its own kernels, its own objective and
//! an accelerated projected-gradient iteration.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Poly { degree: i32 },
    Rbf,
    Sigmoid,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub kind: Kind,
    pub gamma: f64,
    pub coef0: f64,
    pub c: f64,
    pub epsilon: f64,
    pub rows: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

impl Instance {
    pub fn kernel(&self, a: &[f64], b: &[f64]) -> f64 {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        match self.kind {
            Kind::Rbf => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
                (-self.gamma * d2).exp()
            }
            Kind::Poly { degree } => (self.gamma * dot + self.coef0).powi(degree),
            Kind::Sigmoid => (self.gamma * dot + self.coef0).tanh(),
        }
    }

    pub fn gram(&self) -> Vec<f64> {
        let n = self.rows.len();
        let mut g = Vec::with_capacity(n * n);
        for a in &self.rows {
            for b in &self.rows {
                g.push(self.kernel(a, b));
            }
        }
        g
    }

    fn min_eigenvalue(&self) -> f64 {
        let n = self.rows.len();
        let g = DMatrix::from_row_slice(n, n, &self.gram());
        SymmetricEigen::new(g).eigenvalues.min()
    }
}

/// Random instance with `n <= 6` rows. Sigmoid Gram matrices are not PSD in
/// general, so sigmoid draws are repeated until the dual is convex.
pub fn random_instance(rng: &mut ChaCha8Rng, kind: Kind) -> Instance {
    loop {
        let n = rng.random_range(2..=6);
        let width = rng.random_range(1..=3);
        let inst = Instance {
            kind,
            gamma: rng.random_range(0.2..2.0),
            coef0: match kind {
                Kind::Sigmoid => rng.random_range(-1.0..1.0),
                _ => rng.random_range(0.0..1.0),
            },
            c: rng.random_range(0.5..10.0),
            epsilon: rng.random_range(0.01..0.5),
            rows: (0..n)
                .map(|_| (0..width).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect(),
            targets: (0..n).map(|_| rng.random_range(-2.0..2.0)).collect(),
        };
        if inst.min_eigenvalue() > -1e-10 {
            return inst;
        }
    }
}

/// Standard dual objective `-(1/2 b'Qb + p'b)` over `b = (alpha, alpha*)`.
pub fn dual_objective(inst: &Instance, beta: &[f64]) -> f64 {
    let n = inst.rows.len();
    let g = inst.gram();
    let theta: Vec<f64> = (0..n).map(|i| beta[i] - beta[i + n]).collect();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += theta[i] * theta[j] * g[i * n + j];
        }
    }
    let lin: f64 = (0..n)
        .map(|i| inst.epsilon * (beta[i] + beta[i + n]) - inst.targets[i] * theta[i])
        .sum();
    -(0.5 * quad + lin)
}

/// Euclidean projection onto `{0 <= b <= C, sum(b[..n]) = sum(b[n..])}`,
/// by bisection on the multiplier of the equality constraint.
fn project(v: &[f64], n: usize, c: f64, out: &mut [f64]) {
    let sign = |t: usize| if t < n { 1.0 } else { -1.0 };
    let balance = |lambda: f64| -> f64 {
        (0..2 * n)
            .map(|t| sign(t) * (v[t] - lambda * sign(t)).clamp(0.0, c))
            .sum()
    };
    let bound = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) + c + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if balance(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    for t in 0..2 * n {
        out[t] = (v[t] - lambda * sign(t)).clamp(0.0, c);
    }
}

/// Maximizes the dual by FISTA with gradient restarts; returns `(beta, objective)`.
pub fn solve(inst: &Instance) -> (Vec<f64>, f64) {
    let n = inst.rows.len();
    let g = inst.gram();
    let sign = |t: usize| if t < n { 1.0 } else { -1.0 };
    let q = |t: usize, u: usize| sign(t) * sign(u) * g[(t % n) * n + u % n];
    let p: Vec<f64> = (0..2 * n)
        .map(|t| inst.epsilon - sign(t) * inst.targets[t % n])
        .collect();
    let qm = DMatrix::from_fn(2 * n, 2 * n, &q);
    let lipschitz = SymmetricEigen::new(qm).eigenvalues.max().max(1e-12);
    let step = 1.0 / lipschitz;
    let grad = |b: &[f64]| -> Vec<f64> {
        (0..2 * n)
            .map(|t| (0..2 * n).map(|u| q(t, u) * b[u]).sum::<f64>() + p[t])
            .collect()
    };
    let mut x = vec![0.0; 2 * n];
    let mut y = x.clone();
    let mut next = x.clone();
    let mut trial = x.clone();
    let mut momentum = 1.0f64;
    for _ in 0..200_000 {
        let gy = grad(&y);
        for t in 0..2 * n {
            trial[t] = y[t] - step * gy[t];
        }
        project(&trial, n, inst.c, &mut next);
        let moved = (0..2 * n).map(|t| (next[t] - x[t]).abs()).fold(0.0, f64::max);
        let restart = (0..2 * n).map(|t| gy[t] * (next[t] - x[t])).sum::<f64>() > 0.0;
        let m_next = if restart { 1.0 } else { 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt()) };
        let w = if restart { 0.0 } else { (momentum - 1.0) / m_next };
        for t in 0..2 * n {
            y[t] = next[t] + w * (next[t] - x[t]);
        }
        std::mem::swap(&mut x, &mut next);
        momentum = m_next;
        if moved < 1e-14 && !restart {
            break;
        }
    }
    let obj = dual_objective(inst, &x);
    (x, obj)
}
