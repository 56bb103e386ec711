use super::cost::CostContext;
use super::descent::descend;
use super::ga::{run_ga, GaConfig};
use super::{ConvergenceHistory, GradConfig};
use crate::error::Result;
use crate::solver::Bounds;

#[derive(Debug, Clone, PartialEq)]
pub struct HybridResult {
    pub design: Vec<f64>,
    pub cost: f64,
    /// Best design and cost at the hand-off from the GA.
    pub ga_design: Vec<f64>,
    pub ga_cost: f64,
    /// GA records followed by gradient records; `forward_solves` is cumulative
    /// across both stages.
    pub history: ConvergenceHistory,
    pub forward_solves: usize,
    pub stalled: bool,
}

/// GA exploration from `initial`, then projected-gradient refinement started
/// at the GA's best individual.
pub fn run_hybrid_with<F>(
    cost: F,
    initial: &[f64],
    bounds: &Bounds,
    ga: &GaConfig,
    grad: &GradConfig,
) -> Result<HybridResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    grad.validate()?;
    let global = run_ga(&cost, initial, bounds, ga)?;
    let local = descend(&cost, &global.design, Some(global.cost), bounds, grad)?;

    let mut history = global.history;
    let offset = global.evaluations;
    for mut rec in local.history.records {
        rec.forward_solves += offset;
        history.records.push(rec);
    }
    Ok(HybridResult {
        design: local.design,
        cost: local.cost,
        ga_design: global.design,
        ga_cost: global.cost,
        history,
        forward_solves: offset + local.evaluations,
        stalled: local.stalled,
    })
}

pub fn run_hybrid(
    context: &CostContext,
    initial: &[f64],
    bounds: &Bounds,
    ga: &GaConfig,
    grad: &GradConfig,
) -> Result<HybridResult> {
    run_hybrid_with(|x: &[f64]| context.evaluate(x), initial, bounds, ga, grad)
}
