//! Damped Gauss–Newton (Levenberg–Marquardt) least squares.
//!
//! Each trial step solves `(JᵀJ + μ·D) δ = −Jᵀr` with `D = diag(JᵀJ)`.
//! A step is accepted only if it strictly lowers the sum of squares; the
//! damping μ is divided by 10 on acceptance and multiplied by 10 on
//! rejection. Trial points are projected onto the parameter bounds.
//!
//! Stopping rule, first to fire:
//! - relative objective decrease below 1e-10 on 3 consecutive accepted steps
//! - ∞-norm of the gradient of ½·SSE below 1e-10
//! - zero residual
//! - 500 trial steps (not converged)
//!
//! If the damping saturates without finding a lower objective, no descent
//! step exists at working precision (or the bounds block every descent
//! direction) and the run ends as converged.

use nalgebra::{DMatrix, DVector};

use super::family::Family;
use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 500;
pub const RELATIVE_DECREASE_TOL: f64 = 1e-10;
pub const GRADIENT_TOL: f64 = 1e-10;
pub const SMALL_DECREASE_STREAK: usize = 3;

const INITIAL_DAMPING: f64 = 1e-3;
const MAX_DAMPING: f64 = 1e20;
const MIN_DAMPING: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    RelativeDecrease,
    SmallGradient,
    ZeroResidual,
    /// Damping saturated with the residual at round-off level.
    ResidualFloor,
    /// Damping saturated at a nonzero residual: no descent step exists.
    NoDescent,
    MaxIterations,
}

impl StopReason {
    pub fn converged(self) -> bool {
        self != StopReason::MaxIterations
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::RelativeDecrease => "relative-decrease",
            StopReason::SmallGradient => "small-gradient",
            StopReason::ZeroResidual => "zero-residual",
            StopReason::ResidualFloor => "residual-floor",
            StopReason::NoDescent => "no-descent",
            StopReason::MaxIterations => "max-iterations",
        }
    }
}

pub struct Problem<'a> {
    pub family: Family,
    pub lambdas: &'a [f64],
    pub values: &'a [f64],
    pub sqrt_weights: &'a [f64],
    pub free: &'a [bool],
    pub bounds: &'a [Option<(f64, f64)>],
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub params: Vec<f64>,
    /// Weighted sum of squared residuals.
    pub cost: f64,
    /// Trial steps taken.
    pub iterations: usize,
    pub stop: StopReason,
    /// Objective after the initial point and after every accepted step.
    pub trace: Vec<f64>,
}

impl Problem<'_> {
    fn free_indices(&self) -> Vec<usize> {
        (0..self.free.len()).filter(|&j| self.free[j]).collect()
    }

    fn project(&self, p: &mut [f64]) {
        for (x, b) in p.iter_mut().zip(self.bounds) {
            if let Some((lo, hi)) = *b {
                *x = x.clamp(lo, hi);
            }
        }
    }

    fn residuals(&self, p: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.lambdas.len(),
            self.lambdas
                .iter()
                .zip(self.values)
                .zip(self.sqrt_weights)
                .map(|((&l, &y), &sw)| sw * (self.family.value(p, l) - y)),
        )
    }

    fn jacobian(&self, p: &[f64], free: &[usize]) -> DMatrix<f64> {
        let mut row = vec![0.0; p.len()];
        let mut jac = DMatrix::zeros(self.lambdas.len(), free.len());
        for (i, (&l, &sw)) in self.lambdas.iter().zip(self.sqrt_weights).enumerate() {
            self.family.gradient(p, l, &mut row);
            for (col, &j) in free.iter().enumerate() {
                jac[(i, col)] = sw * row[j];
            }
        }
        jac
    }

    fn data_energy(&self) -> f64 {
        self.values
            .iter()
            .zip(self.sqrt_weights)
            .map(|(y, sw)| (sw * y).powi(2))
            .sum()
    }
}

pub fn solve(problem: &Problem<'_>, initial: &[f64]) -> Result<Solution> {
    let free = problem.free_indices();
    let names = problem.family.param_names();
    let mut p = initial.to_vec();
    problem.project(&mut p);

    let mut r = problem.residuals(&p);
    let mut cost = r.norm_squared();
    if !cost.is_finite() {
        return Err(Error::Conditioning("objective is not finite at the initial point".into()));
    }
    let mut trace = vec![cost];
    if free.is_empty() {
        return Ok(Solution { params: p, cost, iterations: 0, stop: StopReason::ZeroResidual, trace });
    }

    let mut jac = problem.jacobian(&p, &free);
    for (col, &j) in free.iter().enumerate() {
        if jac.column(col).iter().all(|&v| v == 0.0) {
            return Err(Error::Conditioning(format!(
                "parameter `{}` has no influence on the model at the initial point (zero Jacobian column)",
                names[j]
            )));
        }
    }

    // round-off floor for the residual energy
    let floor = (64.0 * f64::EPSILON).powi(2) * problem.data_energy().max(f64::MIN_POSITIVE);

    let mut damping = INITIAL_DAMPING;
    let mut streak = 0;
    let mut iterations = 0;

    let stop = loop {
        if cost == 0.0 {
            break StopReason::ZeroResidual;
        }
        let jt = jac.transpose();
        let grad = &jt * &r;
        if grad.amax() < GRADIENT_TOL {
            break StopReason::SmallGradient;
        }
        let normal = &jt * &jac;
        let max_diag = normal.diagonal().amax();
        let scale: DVector<f64> = normal.diagonal().map(|d| d.max(1e-15 * max_diag).max(f64::MIN_POSITIVE));

        let mut accepted = false;
        while !accepted {
            if iterations >= MAX_ITERATIONS {
                break;
            }
            if damping > MAX_DAMPING {
                break;
            }
            iterations += 1;
            let mut a = normal.clone();
            for k in 0..free.len() {
                a[(k, k)] += damping * scale[k];
            }
            let Some(chol) = a.cholesky() else {
                damping *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&grad));
            let mut trial = p.clone();
            for (k, &j) in free.iter().enumerate() {
                trial[j] += step[k];
            }
            problem.project(&mut trial);
            let r_trial = problem.residuals(&trial);
            let cost_trial = r_trial.norm_squared();
            if cost_trial.is_finite() && cost_trial < cost {
                let relative = (cost - cost_trial) / cost;
                p = trial;
                r = r_trial;
                cost = cost_trial;
                trace.push(cost);
                jac = problem.jacobian(&p, &free);
                damping = (damping / 10.0).max(MIN_DAMPING);
                streak = if relative < RELATIVE_DECREASE_TOL { streak + 1 } else { 0 };
                accepted = true;
            } else {
                damping *= 10.0;
            }
        }
        if !accepted {
            if iterations >= MAX_ITERATIONS {
                break StopReason::MaxIterations;
            }
            break if cost <= floor { StopReason::ResidualFloor } else { StopReason::NoDescent };
        }
        if streak >= SMALL_DECREASE_STREAK {
            break StopReason::RelativeDecrease;
        }
    };

    Ok(Solution {
        params: p,
        cost,
        iterations,
        stop,
        trace,
    })
}
