use crate::config::RunConfig;
use crate::error::CliError;
use femu::geometry::{build_coupon_mesh, partition_longitudinal, stamp_defect_patches, DefectSpec, Mesh, PatchMap};
use femu::measurement::MeasurementGrid;
use femu::solver::{BoundaryConditions, Bounds, Surface};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatchKind {
    Section,
    Defect,
}

/// Everything a run needs that follows from the config alone.
#[derive(Debug)]
pub struct Problem {
    pub config: RunConfig,
    pub mesh: Mesh,
    pub patches: PatchMap,
    pub bcs: BoundaryConditions,
    pub grid: MeasurementGrid,
}

impl Problem {
    pub fn build(config: &RunConfig) -> Result<Problem, CliError> {
        let g = &config.geometry;
        let mesh = build_coupon_mesh(g.length_mm, g.width_mm, g.thickness_mm, g.nx, g.ny, g.nz)
            .map_err(|e| CliError::model("geometry", e))?;
        let sections = partition_longitudinal(&mesh, config.patches.n_sections)
            .map_err(|e| CliError::model("patches.n_sections", e))?;
        let defects = config
            .patches
            .defects
            .iter()
            .enumerate()
            .map(|(k, d)| {
                DefectSpec::new(&d.min, &d.max).map_err(|e| CliError::model(&format!("patches.defects[{k}]"), e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let patches =
            stamp_defect_patches(&sections, &mesh, &defects).map_err(|e| CliError::model("patches.defects", e))?;
        let b = &config.bcs;
        let bcs = BoundaryConditions::tension(&mesh, b.fixed_face, b.support, b.loaded_face, b.u_applied_mm)
            .map_err(|e| CliError::model("bcs", e))?;
        let m = &config.measurement;
        let grid = MeasurementGrid::with_margin(g.length_mm, g.width_mm, m.gx, m.gy, m.margin_spacings)
            .map_err(|e| CliError::model("measurement", e))?;
        Ok(Problem { config: config.clone(), mesh, patches, bcs, grid })
    }

    pub fn surface(&self) -> Surface {
        Surface::default_for(&self.mesh)
    }

    pub fn patch_count(&self) -> usize {
        self.patches.patch_count()
    }

    pub fn patch_kinds(&self) -> Vec<PatchKind> {
        (0..self.patch_count())
            .map(|k| if k < self.config.patches.n_sections { PatchKind::Section } else { PatchKind::Defect })
            .collect()
    }

    /// Configured ground truth, if any.
    pub fn truth(&self) -> Option<Vec<f64>> {
        let truth = self.config.material.truth.as_ref()?;
        let mut e = vec![self.config.material.e_ref_mpa; self.patch_count()];
        for o in &truth.overrides {
            e[o.patch] = o.e_mpa;
        }
        Some(e)
    }

    /// Moduli for forward and synthetic runs: the truth, or homogeneous.
    pub fn forward_moduli(&self) -> Vec<f64> {
        self.truth().unwrap_or_else(|| vec![self.config.material.e_ref_mpa; self.patch_count()])
    }

    pub fn bounds(&self) -> Result<Bounds, CliError> {
        let e = self.config.material.e_ref_mpa;
        let b = &self.config.bounds;
        let mut bounds = Bounds::uniform(self.patch_count(), b.lo_factor * e, b.hi_factor * e)
            .map_err(|e| CliError::model("bounds", e))?;
        if let Some(r) = b.reference_patch {
            bounds.pin(r, e).map_err(|e| CliError::model("bounds.reference_patch", e))?;
        }
        Ok(bounds)
    }

    /// Initial design projected onto the bounds.
    pub fn initial_guess(&self) -> Result<Vec<f64>, CliError> {
        let mut x = self
            .config
            .initial_guess_mpa
            .clone()
            .unwrap_or_else(|| vec![self.config.material.e_ref_mpa; self.patch_count()]);
        self.bounds()?.project(&mut x);
        Ok(x)
    }
}
