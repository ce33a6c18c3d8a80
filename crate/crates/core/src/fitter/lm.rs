//! Damped least squares (Levenberg–Marquardt) with Marquardt diagonal scaling.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::Result;

/// Residual vector and Jacobian of a least-squares objective.
pub trait Objective {
    fn residuals(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// ∂r/∂x by central differences with per-coordinate steps `h`. `r0` is the
    /// residual vector at `x`, available for implementations that cache.
    fn jacobian(&self, x: &[f64], r0: &[f64], h: &[f64]) -> Result<DMatrix<f64>>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when an accepted step lowers the cost by less than this fraction.
    pub cost_tolerance: f64,
    /// Stop when ‖δx‖ < step_tolerance · (1 + ‖x‖).
    pub step_tolerance: f64,
    /// Finite-difference step relative to max(|x|, 1).
    pub fd_step: f64,
    pub initial_lambda: f64,
    /// Cost at or below which the residuals count as exactly zero.
    pub zero_cost: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iterations: 200,
            cost_tolerance: 1e-10,
            step_tolerance: 1e-8,
            fd_step: 1e-5,
            initial_lambda: 1e-3,
            zero_cost: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ZeroResidual,
    CostTolerance,
    StepTolerance,
    MaxIterations,
    /// Damping diverged without finding a lower cost.
    Stalled,
    /// The model could not be differentiated at the current point.
    ModelFailure,
}

impl Termination {
    pub fn converged(&self) -> bool {
        matches!(self, Termination::ZeroResidual | Termination::CostTolerance | Termination::StepTolerance)
    }
}

#[derive(Debug, Clone)]
pub struct LmReport {
    pub x: Vec<f64>,
    pub residuals: Vec<f64>,
    /// ‖r‖².
    pub cost: f64,
    /// Jacobian evaluations.
    pub iterations: usize,
    pub step_norm: f64,
    pub termination: Termination,
    /// Cost after the start and after every accepted step.
    pub cost_history: Vec<f64>,
}

fn cost_of(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(cost_of(v))
}

pub fn fd_steps(x: &[f64], rel: f64) -> Vec<f64> {
    x.iter().map(|v| rel * v.abs().max(1.0)).collect()
}

/// Minimizes ‖r(x)‖² from `x0`.
///
/// `project` maps a trial point back into the feasible set (identity for
/// unconstrained coordinates).
pub fn minimize<O: Objective>(
    obj: &O,
    x0: &[f64],
    options: &LmOptions,
    project: &dyn Fn(&mut [f64]),
) -> Result<LmReport> {
    let n = x0.len();
    let mut x = x0.to_vec();
    project(&mut x);
    let mut r = obj.residuals(&x)?;
    let mut cost = cost_of(&r);
    let mut history = alloc::vec![cost];
    let mut lambda = options.initial_lambda;
    let mut iterations = 0;
    let mut step_norm = 0.0;

    let termination = 'outer: loop {
        if cost <= options.zero_cost || n == 0 {
            break Termination::ZeroResidual;
        }
        if iterations >= options.max_iterations {
            break Termination::MaxIterations;
        }
        iterations += 1;
        let h = fd_steps(&x, options.fd_step);
        let Ok(j) = obj.jacobian(&x, &r, &h) else {
            break Termination::ModelFailure;
        };
        let jt = j.transpose();
        let a = &jt * &j;
        let g = &jt * DVector::from_column_slice(&r);
        let dmax = a.diagonal().iter().copied().fold(0.0, f64::max);
        let floor = if dmax > 0.0 { 1e-12 * dmax } else { 1.0 };
        let diag: Vec<f64> = a.diagonal().iter().map(|&d| d.max(floor)).collect();

        loop {
            let mut damped = a.clone();
            for k in 0..n {
                damped[(k, k)] += lambda * diag[k];
            }
            let Some(chol) = damped.cholesky() else {
                lambda *= 10.0;
                if lambda > 1e16 {
                    break 'outer Termination::Stalled;
                }
                continue;
            };
            let delta = chol.solve(&(-&g));
            let mut trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            project(&mut trial);
            let actual: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
            step_norm = norm(&actual);
            let small_step = step_norm < options.step_tolerance * (1.0 + norm(&x));

            // Model failures in the trial region count as a cost increase.
            let trial_r = obj.residuals(&trial).ok();
            let trial_cost = trial_r.as_deref().map(cost_of).unwrap_or(f64::INFINITY);
            if trial_cost < cost {
                let decrease = (cost - trial_cost) / cost;
                x = trial;
                r = trial_r.unwrap_or_default();
                cost = trial_cost;
                history.push(cost);
                lambda = (lambda / 10.0).max(1e-12);
                if decrease < options.cost_tolerance {
                    break 'outer Termination::CostTolerance;
                }
                if small_step {
                    break 'outer Termination::StepTolerance;
                }
                break;
            }
            if small_step {
                break 'outer Termination::StepTolerance;
            }
            lambda *= 10.0;
            if lambda > 1e16 {
                break 'outer Termination::Stalled;
            }
        }
    };

    Ok(LmReport {
        x,
        residuals: r,
        cost,
        iterations,
        step_norm,
        termination,
        cost_history: history,
    })
}

/// Central-difference Jacobian of a plain residual function.
pub fn central_jacobian(
    f: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    x: &[f64],
    m: usize,
    h: &[f64],
) -> Result<DMatrix<f64>> {
    let mut j = DMatrix::zeros(m, x.len());
    let mut xp = x.to_vec();
    for k in 0..x.len() {
        xp[k] = x[k] + h[k];
        let plus = f(&xp)?;
        xp[k] = x[k] - h[k];
        let minus = f(&xp)?;
        xp[k] = x[k];
        for i in 0..m {
            j[(i, k)] = (plus[i] - minus[i]) / (2.0 * h[k]);
        }
    }
    Ok(j)
}
