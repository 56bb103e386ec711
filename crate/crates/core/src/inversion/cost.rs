use crate::error::{Error, Result};
use crate::geometry::{Mesh, PatchMap};
use crate::measurement::{ExperimentalField, GridStrains, Interpolator, GRID_TOL_MM};
use crate::solver::{BoundaryConditions, ForwardModel, Surface, SurfaceSampler};
use std::sync::atomic::{AtomicUsize, Ordering};

/// Denominator floor applied to measured strains.
pub const DEFAULT_STRAIN_FLOOR: f64 = 1e-6;

/// Relative-residual misfit summed over points and the three in-plane
/// components:
///
/// `F = Σ_j Σ_c ((e_exp − e_num) / max(|e_exp|, floor))²`
///
/// The floor keeps points where a measured component vanishes from
/// dominating the sum.
pub fn relative_residual_cost(measured: &GridStrains, numerical: &GridStrains, strain_floor: f64) -> f64 {
    let mut total = 0.0;
    for (exp, num) in measured.components().into_iter().zip(numerical.components()) {
        for (&e, &n) in exp.iter().zip(num) {
            let r = (e - n) / e.abs().max(strain_floor);
            total += r * r;
        }
    }
    total
}

/// Everything the cost needs besides the design: the forward model, the
/// observation operator onto the measurement grid, and the measured fields
/// (one per load step).
///
/// Every load step is compared against the response to the same boundary
/// conditions. Forward solves are counted for bookkeeping.
#[derive(Debug)]
pub struct CostContext {
    model: ForwardModel,
    sampler: SurfaceSampler,
    interpolator: Interpolator,
    measurements: Vec<ExperimentalField>,
    strain_floor: f64,
    solves: AtomicUsize,
}

impl CostContext {
    /// Observes the default surface of the mesh (midplane in 2D, front face in 3D).
    pub fn new(
        mesh: &Mesh,
        patch_map: &PatchMap,
        bcs: &BoundaryConditions,
        poisson_ratio: f64,
        measurements: Vec<ExperimentalField>,
        strain_floor: f64,
    ) -> Result<CostContext> {
        Self::with_surface(mesh, patch_map, bcs, poisson_ratio, measurements, strain_floor, Surface::default_for(mesh))
    }

    pub fn with_surface(
        mesh: &Mesh,
        patch_map: &PatchMap,
        bcs: &BoundaryConditions,
        poisson_ratio: f64,
        measurements: Vec<ExperimentalField>,
        strain_floor: f64,
        surface: Surface,
    ) -> Result<CostContext> {
        if measurements.is_empty() {
            return Err(Error::invalid("at least one load step of measurements is required"));
        }
        if !(strain_floor > 0.0 && strain_floor.is_finite()) {
            return Err(Error::invalid(format!("strain_floor must be positive, got {strain_floor}")));
        }
        let grid = measurements[0].grid;
        if let Some(k) = measurements.iter().position(|m| !m.grid.matches(&grid, GRID_TOL_MM)) {
            return Err(Error::invalid(format!("load step {k} uses a different measurement grid")));
        }
        let model = ForwardModel::new(mesh, patch_map, bcs, poisson_ratio)?;
        let sampler = SurfaceSampler::new(mesh, surface)?;
        let interpolator = Interpolator::new(sampler.points(), &grid.points())?;
        Ok(CostContext { model, sampler, interpolator, measurements, strain_floor, solves: AtomicUsize::new(0) })
    }

    pub fn model(&self) -> &ForwardModel {
        &self.model
    }

    pub fn measurements(&self) -> &[ExperimentalField] {
        &self.measurements
    }

    pub fn strain_floor(&self) -> f64 {
        self.strain_floor
    }

    pub fn patch_count(&self) -> usize {
        self.model.patch_map().patch_count()
    }

    /// Forward solves performed through this context so far.
    pub fn forward_solves(&self) -> usize {
        self.solves.load(Ordering::Relaxed)
    }

    /// Numerical strains at the measurement grid for `design`.
    pub fn numerical_strains(&self, design: &[f64]) -> Result<GridStrains> {
        self.solves.fetch_add(1, Ordering::Relaxed);
        let u = self.model.solve(design).map_err(|e| Error::Cost { design: design.to_vec(), source: Box::new(e) })?;
        let strains = self.sampler.sample(self.model.mesh(), &u);
        Ok(self.interpolator.apply_field(&strains))
    }

    pub fn evaluate(&self, design: &[f64]) -> Result<f64> {
        let numerical = self.numerical_strains(design)?;
        let total =
            self.measurements.iter().map(|m| relative_residual_cost(&m.strains, &numerical, self.strain_floor)).sum();
        Ok(total)
    }
}

pub fn evaluate_cost(design: &[f64], context: &CostContext) -> Result<f64> {
    context.evaluate(design)
}
