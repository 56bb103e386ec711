//! Projected gradient descent with Armijo backtracking.
//!
//! Iterates in bound-normalized coordinates `z = (x - lo) / (hi - lo)`, so
//! the tolerances below are dimensionless. Trial steps use the
//! short Barzilai-Borwein length `sᵀy / yᵀy` from the previous iterate pair; the Armijo test
//! then backtracks along the projection arc.

use super::gradient::fd_gradient;
use super::{ConvergenceHistory, OptimResult, Stage};
use crate::error::{Error, Result};
use crate::solver::Bounds;
use serde::{Deserialize, Serialize};

/// Backtracks allowed before the line search is declared stalled.
pub const MAX_BACKTRACKS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradConfig {
    /// Finite-difference step relative to each bound range.
    pub fd_step_rel: f64,
    pub max_iterations: usize,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    /// Stop when the normalized projected-gradient infinity norm drops below this.
    pub grad_tol: f64,
    /// Stop when an accepted normalized step is shorter than this.
    pub step_tol: f64,
}

impl Default for GradConfig {
    fn default() -> Self {
        GradConfig {
            fd_step_rel: 1e-6,
            max_iterations: 1000,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            grad_tol: 1e-10,
            step_tol: 1e-12,
        }
    }
}

impl GradConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [("fd_step_rel", self.fd_step_rel), ("grad_tol", self.grad_tol), ("step_tol", self.step_tol)];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::invalid(format!("{name} must be positive, got {v}")));
        }
        for (name, v) in [("armijo_c", self.armijo_c), ("backtrack_factor", self.backtrack_factor)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::invalid(format!("{name} must be in (0, 1), got {v}")));
            }
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        Ok(())
    }
}

pub fn run_gradient<F>(cost: F, start: &[f64], bounds: &Bounds, config: &GradConfig) -> Result<OptimResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    descend(&cost, start, None, bounds, config)
}

/// As [`run_gradient`], reusing a known cost at the start point.
pub(crate) fn descend<F>(
    cost: &F,
    start: &[f64],
    start_cost: Option<f64>,
    bounds: &Bounds,
    config: &GradConfig,
) -> Result<OptimResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    config.validate()?;
    if !bounds.contains(start) {
        return Err(Error::invalid(format!("start design {start:?} lies outside the bounds")));
    }
    let free: Vec<usize> = (0..bounds.len()).filter(|&k| !bounds.is_fixed(k)).collect();
    let to_x = |z: &[f64]| {
        let mut x = start.to_vec();
        for (&k, &zk) in free.iter().zip(z) {
            x[k] = bounds.lo()[k] + zk.clamp(0.0, 1.0) * bounds.range(k);
        }
        x
    };
    let mut z: Vec<f64> = free.iter().map(|&k| (start[k] - bounds.lo()[k]) / bounds.range(k)).collect();
    let mut x = to_x(&z);

    let mut evaluations = 0;
    let mut f = match start_cost {
        Some(f) => f,
        None => {
            evaluations += 1;
            cost(&x)?
        }
    };
    let mut history = ConvergenceHistory::default();
    history.push(Stage::Gradient, 0, f, &x, evaluations);
    let mut stalled = false;
    let mut previous: Option<(Vec<f64>, Vec<f64>)> = None;

    for iteration in 1..=config.max_iterations {
        if free.is_empty() {
            break;
        }
        let g = fd_gradient(cost, &x, bounds, config.fd_step_rel, Some(f))?;
        evaluations += g.evaluations;
        let gz: Vec<f64> = free.iter().map(|&k| g.values[k] * bounds.range(k)).collect();

        let pg = z.iter().zip(&gz).map(|(zk, gk)| (zk - (zk - gk).clamp(0.0, 1.0)).abs()).fold(0.0, f64::max);
        if pg < config.grad_tol {
            break;
        }

        let gmax = gz.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut alpha = 0.1 / gmax;
        if let Some((pz, pg)) = &previous {
            let s: Vec<f64> = z.iter().zip(pz).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = gz.iter().zip(pg).map(|(a, b)| a - b).collect();
            let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
            let yy: f64 = y.iter().map(|a| a * a).sum();
            if sy > 0.0 && (sy / yy).is_finite() {
                alpha = sy / yy;
            }
        }

        let mut accepted = None;
        for _ in 0..=MAX_BACKTRACKS {
            let trial: Vec<f64> = z.iter().zip(&gz).map(|(zk, gk)| (zk - alpha * gk).clamp(0.0, 1.0)).collect();
            let decrease: f64 = trial.iter().zip(&z).zip(&gz).map(|((t, zk), gk)| gk * (t - zk)).sum();
            let xt = to_x(&trial);
            let ft = cost(&xt)?;
            evaluations += 1;
            if ft <= f + config.armijo_c * decrease {
                accepted = Some((trial, xt, ft));
                break;
            }
            alpha *= config.backtrack_factor;
        }
        let Some((trial, xt, ft)) = accepted else {
            stalled = true;
            break;
        };

        let step = trial.iter().zip(&z).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        previous = Some((std::mem::replace(&mut z, trial), gz));
        x = xt;
        f = ft;
        history.push(Stage::Gradient, iteration, f, &x, evaluations);
        if step < config.step_tol {
            break;
        }
    }

    Ok(OptimResult { design: x, cost: f, history, evaluations, stalled })
}
