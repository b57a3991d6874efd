//! Pairwise dual solver for epsilon-SVR.
//!
//! The dual is written over `2n` variables `beta = (alpha, alpha*)` with
//! signs `s = (+1.., -1..)`:
//!
//! ```text
//! minimize   f(beta) = 1/2 beta' Q beta + p' beta
//! subject to 0 <= beta_t <= C,  sum_t s_t beta_t = 0
//! ```
//!
//! where `Q_tu = s_t s_u K(t mod n, u mod n)`, `p_t = eps - z_t` for the
//! first half and `eps + z_t` for the second. The standard (maximization)
//! dual objective is `-f`.

use crate::error::{Error, Result};

/// Curvature floor for non positive semi-definite kernels.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    /// The maximal violation was already within tolerance; nothing changed.
    Converged,
    Updated { i: usize, j: usize },
}

#[derive(Debug, Clone)]
pub struct SmoSolver {
    n: usize,
    gram: Vec<f64>,
    c: f64,
    tolerance: f64,
    beta: Vec<f64>,
    grad: Vec<f64>,
    p: Vec<f64>,
}

impl SmoSolver {
    /// `gram` is the row-major `n x n` kernel matrix of the training rows.
    pub fn new(gram: Vec<f64>, targets: &[f64], c: f64, epsilon: f64, tolerance: f64) -> Result<Self> {
        let n = targets.len();
        if n == 0 {
            return Err(Error::invalid("SVR needs at least one training row"));
        }
        if gram.len() != n * n {
            return Err(Error::invalid(format!(
                "gram matrix has {} entries, expected {}",
                gram.len(),
                n * n
            )));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid(format!("C must be > 0, got {c}")));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid(format!("epsilon must be >= 0, got {epsilon}")));
        }
        if !(tolerance > 0.0) {
            return Err(Error::invalid(format!("tolerance must be > 0, got {tolerance}")));
        }
        if gram.iter().chain(targets).any(|v| !v.is_finite()) {
            return Err(Error::invalid("SVR inputs must be finite"));
        }
        let p: Vec<f64> = targets
            .iter()
            .map(|z| epsilon - z)
            .chain(targets.iter().map(|z| epsilon + z))
            .collect();
        Ok(Self {
            n,
            gram,
            c,
            tolerance,
            beta: vec![0.0; 2 * n],
            grad: p.clone(),
            p,
        })
    }

    fn sign(&self, t: usize) -> f64 {
        if t < self.n {
            1.0
        } else {
            -1.0
        }
    }

    fn q(&self, t: usize, u: usize) -> f64 {
        self.sign(t) * self.sign(u) * self.gram[(t % self.n) * self.n + u % self.n]
    }

    fn in_up(&self, t: usize) -> bool {
        if t < self.n {
            self.beta[t] < self.c
        } else {
            self.beta[t] > 0.0
        }
    }

    fn in_low(&self, t: usize) -> bool {
        if t < self.n {
            self.beta[t] > 0.0
        } else {
            self.beta[t] < self.c
        }
    }

    /// Maximal violating pair `(i, j, m - M)`; lowest indices win ties.
    fn select_pair(&self) -> Option<(usize, usize, f64)> {
        let mut up: Option<(usize, f64)> = None;
        let mut low: Option<(usize, f64)> = None;
        for t in 0..2 * self.n {
            let v = -self.sign(t) * self.grad[t];
            if self.in_up(t) && up.is_none_or(|(_, b)| v > b) {
                up = Some((t, v));
            }
            if self.in_low(t) && low.is_none_or(|(_, b)| v < b) {
                low = Some((t, v));
            }
        }
        match (up, low) {
            (Some((i, m)), Some((j, big_m))) => Some((i, j, m - big_m)),
            _ => None,
        }
    }

    /// Largest KKT violation `m(beta) - M(beta)`; zero or negative at optimum.
    pub fn max_violation(&self) -> f64 {
        self.select_pair().map_or(0.0, |(_, _, v)| v)
    }

    /// One pairwise update on the maximal violating pair.
    pub fn step(&mut self) -> StepOutcome {
        let Some((i, j, gap)) = self.select_pair() else {
            return StepOutcome::Converged;
        };
        if gap <= self.tolerance {
            return StepOutcome::Converged;
        }
        let c = self.c;
        let (old_i, old_j) = (self.beta[i], self.beta[j]);
        let (qii, qjj, qij) = (self.q(i, i), self.q(j, j), self.q(i, j));
        let (gi, gj) = (self.grad[i], self.grad[j]);
        let (mut ai, mut aj) = (old_i, old_j);
        if self.sign(i) != self.sign(j) {
            let quad = positive(qii + qjj + 2.0 * qij);
            let delta = (-gi - gj) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let quad = positive(qii + qjj - 2.0 * qij);
            let delta = (gi - gj) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        self.beta[i] = ai;
        self.beta[j] = aj;
        let (di, dj) = (ai - old_i, aj - old_j);
        for t in 0..2 * self.n {
            self.grad[t] += self.q(t, i) * di + self.q(t, j) * dj;
        }
        StepOutcome::Updated { i, j }
    }

    /// Steps until convergence or `max_iterations`; returns the step count.
    pub fn run(&mut self, max_iterations: usize) -> (usize, bool) {
        for it in 0..max_iterations {
            if self.step() == StepOutcome::Converged {
                return (it, true);
            }
        }
        let converged = self.max_violation() <= self.tolerance;
        (max_iterations, converged)
    }

    /// Standard dual objective (to be maximized), `-f(beta)`.
    pub fn objective(&self) -> f64 {
        -0.5 * self
            .beta
            .iter()
            .zip(self.grad.iter().zip(&self.p))
            .map(|(b, (g, p))| b * (g + p))
            .sum::<f64>()
    }

    /// The `2n` dual variables `(alpha, alpha*)`.
    pub fn betas(&self) -> &[f64] {
        &self.beta
    }

    /// `alpha_i - alpha*_i` per training row.
    pub fn dual_coefficients(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.beta[i] - self.beta[i + self.n])
            .collect()
    }

    /// Intercept: mean over free variables, else the midpoint of the
    /// feasible interval.
    pub fn bias(&self) -> f64 {
        let (mut upper, mut lower) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut free_sum, mut free_count) = (0.0, 0usize);
        for t in 0..2 * self.n {
            let yg = self.sign(t) * self.grad[t];
            let positive = t < self.n;
            if self.beta[t] >= self.c {
                if positive {
                    lower = lower.max(yg);
                } else {
                    upper = upper.min(yg);
                }
            } else if self.beta[t] <= 0.0 {
                if positive {
                    upper = upper.min(yg);
                } else {
                    lower = lower.max(yg);
                }
            } else {
                free_sum += yg;
                free_count += 1;
            }
        }
        let rho = if free_count > 0 {
            free_sum / free_count as f64
        } else {
            (upper + lower) / 2.0
        };
        -rho
    }
}

fn positive(quad: f64) -> f64 {
    if quad > 0.0 {
        quad
    } else {
        TAU
    }
}
