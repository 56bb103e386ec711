//! Real-coded genetic algorithm: tournament selection, blend crossover
//! (BLX-0.5), Gaussian mutation and elitism, all clipped to the box.

use super::{evaluate_all, ConvergenceHistory, OptimResult, Stage};
use crate::error::{Error, Result};
use crate::solver::Bounds;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Blend-crossover extension on each side of the parent interval.
const BLEND_ALPHA: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations_max: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    /// Mutation standard deviation as a fraction of each bound range.
    pub mutation_scale: f64,
    pub elite_count: usize,
    pub tournament_size: usize,
    /// Stop once the best cost improved by less than `rel_tol` (relative)
    /// over this many generations.
    pub stall_generations: usize,
    pub rel_tol: f64,
    pub rng_seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 40,
            generations_max: 60,
            crossover_rate: 0.9,
            mutation_rate: 0.1,
            mutation_scale: 0.1,
            elite_count: 2,
            tournament_size: 3,
            stall_generations: 15,
            rel_tol: 1e-3,
            rng_seed: 7,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::invalid(m));
        if self.elite_count < 1 || 2 * self.elite_count > self.population_size {
            return bad(format!(
                "need 1 <= elite_count and 2*elite_count <= population_size, got {} / {}",
                self.elite_count, self.population_size
            ));
        }
        if self.tournament_size < 2 {
            return bad(format!("tournament_size must be at least 2, got {}", self.tournament_size));
        }
        for (name, v) in [("crossover_rate", self.crossover_rate), ("mutation_rate", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must be in [0, 1], got {v}"));
            }
        }
        if !(self.mutation_scale >= 0.0 && self.mutation_scale.is_finite()) {
            return bad(format!("mutation_scale must be non-negative, got {}", self.mutation_scale));
        }
        if !(self.rel_tol >= 0.0) || self.stall_generations == 0 {
            return bad("stall criterion needs rel_tol >= 0 and stall_generations >= 1".into());
        }
        Ok(())
    }
}

/// Run the GA from a population made of the feasible `initial` guess plus
/// uniform random individuals.
pub fn run_ga<F>(cost: F, initial: &[f64], bounds: &Bounds, config: &GaConfig) -> Result<OptimResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    config.validate()?;
    if initial.len() != bounds.len() {
        return Err(Error::invalid("initial guess and bounds differ in length"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut population = Vec::with_capacity(config.population_size);
    let mut guess = initial.to_vec();
    bounds.project(&mut guess);
    population.push(guess);
    while population.len() < config.population_size {
        let ind = (0..bounds.len())
            .map(
                |k| if bounds.is_fixed(k) { bounds.lo()[k] } else { rng.random_range(bounds.lo()[k]..=bounds.hi()[k]) },
            )
            .collect();
        population.push(ind);
    }
    evolve(&cost, population, bounds, config, rng)
}

/// Run the GA from an explicit starting population (projected onto the box).
pub fn run_ga_from_population<F>(
    cost: F,
    mut population: Vec<Vec<f64>>,
    bounds: &Bounds,
    config: &GaConfig,
) -> Result<OptimResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let config = GaConfig { population_size: population.len(), ..config.clone() };
    config.validate()?;
    for ind in &mut population {
        if ind.len() != bounds.len() {
            return Err(Error::invalid("individual and bounds differ in length"));
        }
        bounds.project(ind);
    }
    let rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    evolve(&cost, population, bounds, &config, rng)
}

fn evolve<F>(
    cost: &F,
    mut population: Vec<Vec<f64>>,
    bounds: &Bounds,
    config: &GaConfig,
    mut rng: ChaCha8Rng,
) -> Result<OptimResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let mut costs = evaluate_all(cost, &population)?;
    let mut evaluations = costs.len();
    let mut history = ConvergenceHistory::default();
    let mut best_per_gen = Vec::with_capacity(config.generations_max + 1);

    let ranking = |costs: &[f64]| {
        let mut order: Vec<usize> = (0..costs.len()).collect();
        order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));
        order
    };

    let mut order = ranking(&costs);
    history.push(Stage::Ga, 0, costs[order[0]], &population[order[0]], evaluations);
    best_per_gen.push(costs[order[0]]);

    for generation in 1..=config.generations_max {
        let mut next: Vec<Vec<f64>> = order[..config.elite_count].iter().map(|&i| population[i].clone()).collect();
        let mut next_costs: Vec<f64> = order[..config.elite_count].iter().map(|&i| costs[i]).collect();

        let mut children = Vec::with_capacity(population.len() - next.len());
        while next.len() + children.len() < population.len() {
            let a = tournament(&costs, config.tournament_size, &mut rng);
            let mut child = if rng.random::<f64>() < config.crossover_rate {
                let b = tournament(&costs, config.tournament_size, &mut rng);
                blend(&population[a], &population[b], bounds, &mut rng)
            } else {
                population[a].clone()
            };
            mutate(&mut child, bounds, config, &mut rng);
            children.push(child);
        }
        let child_costs = evaluate_all(cost, &children)?;
        evaluations += child_costs.len();
        next.extend(children);
        next_costs.extend(child_costs);
        population = next;
        costs = next_costs;

        order = ranking(&costs);
        let best = costs[order[0]];
        history.push(Stage::Ga, generation, best, &population[order[0]], evaluations);
        best_per_gen.push(best);

        if best == 0.0 {
            break;
        }
        if generation >= config.stall_generations {
            let earlier = best_per_gen[generation - config.stall_generations];
            if earlier - best <= config.rel_tol * earlier.abs() {
                break;
            }
        }
    }

    let best = order[0];
    Ok(OptimResult { design: population[best].clone(), cost: costs[best], history, evaluations, stalled: false })
}

fn tournament(costs: &[f64], size: usize, rng: &mut ChaCha8Rng) -> usize {
    let mut winner = rng.random_range(0..costs.len());
    for _ in 1..size {
        let c = rng.random_range(0..costs.len());
        if costs[c].total_cmp(&costs[winner]).then(c.cmp(&winner)).is_lt() {
            winner = c;
        }
    }
    winner
}

fn blend(a: &[f64], b: &[f64], bounds: &Bounds, rng: &mut ChaCha8Rng) -> Vec<f64> {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(k, (&x, &y))| {
            let (lo, hi) = (x.min(y), x.max(y));
            let span = hi - lo;
            if span == 0.0 {
                return x;
            }
            let v = rng.random_range(lo - BLEND_ALPHA * span..=hi + BLEND_ALPHA * span);
            bounds.clamp(k, v)
        })
        .collect()
}

fn mutate(child: &mut [f64], bounds: &Bounds, config: &GaConfig, rng: &mut ChaCha8Rng) {
    for (k, gene) in child.iter_mut().enumerate() {
        if bounds.is_fixed(k) || config.mutation_scale == 0.0 {
            continue;
        }
        if rng.random::<f64>() < config.mutation_rate {
            let normal = Normal::new(0.0, config.mutation_scale * bounds.range(k)).expect("positive std");
            *gene = bounds.clamp(k, *gene + normal.sample(rng));
        }
    }
}
