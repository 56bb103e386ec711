//! Model updating: the relative-residual strain cost and the hybrid
//! genetic / projected-gradient optimizer that minimizes it.
//!
//! The optimizers work on any cost `Fn(&[f64]) -> Result<f64> + Sync`; a
//! [`CostContext`] provides the finite element cost. Population and
//! finite-difference evaluations may run in parallel (feature `parallel`),
//! always reduced in index order, so results do not depend on the thread count.

mod cost;
mod descent;
mod ga;
mod gradient;
mod hybrid;

pub use cost::{evaluate_cost, relative_residual_cost, CostContext, DEFAULT_STRAIN_FLOOR};
pub use descent::{run_gradient, GradConfig};
pub use ga::{run_ga, run_ga_from_population, GaConfig};
pub use gradient::{fd_gradient, Gradient};
pub use hybrid::{run_hybrid, run_hybrid_with, HybridResult};

use crate::error::Result;
use serde::{Deserialize, Serialize};

/// Optimizer stage that produced a history record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    #[serde(rename = "GA")]
    Ga,
    #[serde(rename = "GRADIENT")]
    Gradient,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ga => "GA",
            Stage::Gradient => "GRADIENT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub stage: Stage,
    pub iteration: usize,
    pub best_cost: f64,
    pub design: Vec<f64>,
    /// Cumulative cost evaluations (forward solves) when the record was taken.
    pub forward_solves: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConvergenceHistory {
    pub records: Vec<HistoryRecord>,
}

impl ConvergenceHistory {
    pub fn push(&mut self, stage: Stage, iteration: usize, best_cost: f64, design: &[f64], forward_solves: usize) {
        self.records.push(HistoryRecord { stage, iteration, best_cost, design: design.to_vec(), forward_solves });
    }

    pub fn last(&self) -> Option<&HistoryRecord> {
        self.records.last()
    }

    pub fn stage(&self, stage: Stage) -> impl Iterator<Item = &HistoryRecord> {
        self.records.iter().filter(move |r| r.stage == stage)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Outcome of one optimizer stage.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub design: Vec<f64>,
    pub cost: f64,
    pub history: ConvergenceHistory,
    /// Cost evaluations spent by this stage.
    pub evaluations: usize,
    /// The gradient stage gave up in the line search.
    pub stalled: bool,
}

/// Evaluate `cost` at every design, returning values in input order.
pub(crate) fn evaluate_all<F>(cost: &F, designs: &[Vec<f64>]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        designs.par_iter().map(|d| cost(d)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        designs.iter().map(|d| cost(d)).collect()
    }
}
