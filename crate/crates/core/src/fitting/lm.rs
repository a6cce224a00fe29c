//! Levenberg–Marquardt least squares.
//!
//! Damped Gauss–Newton steps `(JᵀJ + λ·D)·δ = −Jᵀr` with `D` the diagonal of
//! `JᵀJ` (Marquardt scaling, floored so flat directions stay regular). The
//! damping follows Nielsen's gain-ratio rule.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg;
use crate::math::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    /// Stop when the largest cosine between the residual vector and a
    /// Jacobian column drops below this.
    pub gradient_tol: f64,
    /// Stop when `‖δ‖ < step_tol·(‖x‖ + step_tol)`.
    pub step_tol: f64,
    pub max_iterations: usize,
    /// Initial λ. The damping term is `λ·diag(JᵀJ)`, so λ is dimensionless.
    pub initial_damping: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            gradient_tol: 1e-12,
            step_tol: 1e-10,
            max_iterations: 500,
            initial_damping: 1e-3,
        }
    }
}

/// Outcome of a least-squares run. `x` is the best point seen.
#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome {
    pub x: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Row-major `m × n` Jacobian at `x`.
    pub jacobian: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl LmOutcome {
    /// Parameter covariance `s²·(JᵀJ)⁻¹` with `s² = ‖r‖² / (m − n)`.
    ///
    /// Returns infinite variances when `JᵀJ` is singular or there are no
    /// spare degrees of freedom.
    pub fn covariance(&self) -> Vec<f64> {
        let n = self.x.len();
        let m = self.residuals.len();
        let jtj = normal_matrix(&self.jacobian, m, n);
        let s2 = if m > n {
            2.0 * self.cost / (m - n) as f64
        } else {
            f64::INFINITY
        };
        match linalg::spd_inverse(&jtj, n) {
            Some(inv) if s2.is_finite() => inv.into_iter().map(|v| v * s2).collect(),
            _ => {
                let mut cov = vec![0.0; n * n];
                for i in 0..n {
                    cov[i * n + i] = f64::INFINITY;
                }
                cov
            }
        }
    }

    /// Square roots of the covariance diagonal.
    pub fn standard_errors(&self) -> Vec<f64> {
        let n = self.x.len();
        let cov = self.covariance();
        (0..n).map(|i| cov[i * n + i].max(0.0).sqrt()).collect()
    }
}

fn normal_matrix(jac: &[f64], m: usize, n: usize) -> Vec<f64> {
    let mut a = vec![0.0; n * n];
    for row in jac.chunks_exact(n).take(m) {
        for j in 0..n {
            for k in 0..=j {
                a[j * n + k] += row[j] * row[k];
            }
        }
    }
    for j in 0..n {
        for k in j + 1..n {
            a[j * n + k] = a[k * n + j];
        }
    }
    a
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Minimizes `½·‖r(x)‖²`.
///
/// `eval(x, r, jac)` fills the `m` residuals and, when `jac` is given, the
/// row-major `m × n` Jacobian `∂r/∂x`. It returns `false` if `x` is outside
/// the model's domain; such trial points are rejected like uphill steps.
/// Returns `None` if the starting point itself cannot be evaluated.
pub fn minimize<F>(mut eval: F, x0: &[f64], m: usize, options: &LmOptions) -> Option<LmOutcome>
where
    F: FnMut(&[f64], &mut [f64], Option<&mut [f64]>) -> bool,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = vec![0.0; m];
    let mut jac = vec![0.0; m * n];
    if !eval(&x, &mut r, Some(&mut jac)) || r.iter().chain(&jac).any(|v| !v.is_finite()) {
        return None;
    }
    let mut cost = 0.5 * norm(&r).powi(2);

    let mut trial_r = vec![0.0; m];
    let mut lambda = -1.0;
    let mut nu = 2.0;
    let mut converged = false;
    let mut iterations = 0;

    'outer: while iterations < options.max_iterations {
        if cost == 0.0 {
            converged = true;
            break;
        }
        let jtj = normal_matrix(&jac, m, n);
        let mut grad = vec![0.0; n];
        for (row, ri) in jac.chunks_exact(n).zip(&r) {
            for j in 0..n {
                grad[j] += row[j] * ri;
            }
        }
        let r_norm = norm(&r);
        let cosine = (0..n)
            .map(|j| {
                let col = jtj[j * n + j].sqrt();
                if col == 0.0 {
                    0.0
                } else {
                    grad[j].abs() / (col * r_norm)
                }
            })
            .fold(0.0f64, f64::max);
        if cosine < options.gradient_tol {
            converged = true;
            break;
        }

        let diag_max = (0..n).map(|j| jtj[j * n + j]).fold(0.0f64, f64::max);
        let diag: Vec<f64> = (0..n).map(|j| jtj[j * n + j].max(diag_max * 1e-12)).collect();
        if lambda < 0.0 {
            lambda = options.initial_damping;
        }
        let neg_grad: Vec<f64> = grad.iter().map(|g| -g).collect();

        // Raise the damping until a step goes downhill.
        loop {
            if iterations >= options.max_iterations {
                break 'outer;
            }
            iterations += 1;
            let mut a = jtj.clone();
            for j in 0..n {
                a[j * n + j] += lambda * diag[j];
            }
            if let Some(l) = linalg::cholesky(&a, n) {
                let step = linalg::cholesky_solve(&l, n, &neg_grad);
                if norm(&step) <= options.step_tol * (norm(&x) + options.step_tol) {
                    converged = true;
                    break 'outer;
                }
                let trial: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
                let mut jtrial = vec![0.0; m * n];
                let ok = eval(&trial, &mut trial_r, Some(&mut jtrial))
                    && trial_r.iter().chain(&jtrial).all(|v| v.is_finite());
                let trial_cost = if ok {
                    0.5 * norm(&trial_r).powi(2)
                } else {
                    f64::INFINITY
                };
                let predicted = 0.5
                    * (0..n)
                        .map(|j| step[j] * (lambda * diag[j] * step[j] - grad[j]))
                        .sum::<f64>();
                if trial_cost < cost && predicted > 0.0 {
                    let gain = (cost - trial_cost) / predicted;
                    x = trial;
                    r.copy_from_slice(&trial_r);
                    jac = jtrial;
                    cost = trial_cost;
                    lambda *= (1.0f64 / 3.0).max(1.0 - (2.0 * gain - 1.0).powi(3));
                    nu = 2.0;
                    continue 'outer;
                }
            }
            lambda *= nu;
            nu *= 2.0;
            if !lambda.is_finite() {
                break 'outer;
            }
        }
    }

    Some(LmOutcome {
        x,
        residuals: r,
        jacobian: jac,
        cost,
        iterations,
        converged,
    })
}
