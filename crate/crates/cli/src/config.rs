//! Run configuration: one JSON document, unknown keys rejected, every field
//! defaulted except the coupon dimensions.

use crate::error::CliError;
use femu::geometry::Face;
use femu::inversion::{GaConfig, GradConfig, DEFAULT_STRAIN_FLOOR};
use femu::solver::Support;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: Geometry,
    #[serde(default)]
    pub patches: Patches,
    #[serde(default)]
    pub material: Material,
    #[serde(default)]
    pub bcs: Bcs,
    #[serde(default)]
    pub measurement: Measurement,
    #[serde(default)]
    pub ga: GaConfig,
    #[serde(default)]
    pub grad: GradConfig,
    #[serde(default)]
    pub bounds: BoundsConfig,
    /// Starting design for the GA; homogeneous `e_ref_mpa` when null.
    #[serde(default)]
    pub initial_guess_mpa: Option<Vec<f64>>,
    #[serde(default = "default_strain_floor")]
    pub strain_floor: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub length_mm: f64,
    pub width_mm: f64,
    pub thickness_mm: f64,
    #[serde(default = "default_nx")]
    pub nx: usize,
    #[serde(default = "default_ny")]
    pub ny: usize,
    /// Through-thickness divisions; null builds a 2D plane-stress mesh.
    #[serde(default)]
    pub nz: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Patches {
    pub n_sections: usize,
    pub defects: Vec<Defect>,
}

impl Default for Patches {
    fn default() -> Self {
        Patches { n_sections: 9, defects: Vec::new() }
    }
}

/// Axis-aligned box, 2 or 3 coordinates per corner (mm). A 2-coordinate box
/// spans the full thickness of a 3D coupon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Defect {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Material {
    pub e_ref_mpa: f64,
    pub poisson_ratio: f64,
    /// Ground truth for synthetic runs. Null means unknown (reports omit
    /// errors); synthetic fields then use the homogeneous reference.
    pub truth: Option<Truth>,
}

impl Default for Material {
    fn default() -> Self {
        Material { e_ref_mpa: 200_000.0, poisson_ratio: 0.3, truth: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Truth {
    /// Patches whose true modulus differs from `e_ref_mpa`.
    pub overrides: Vec<Override>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Override {
    pub patch: usize,
    pub e_mpa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Bcs {
    pub fixed_face: Face,
    pub support: Support,
    pub loaded_face: Face,
    pub u_applied_mm: f64,
}

impl Default for Bcs {
    fn default() -> Self {
        Bcs { fixed_face: Face::XMin, support: Support::Clamped, loaded_face: Face::XMax, u_applied_mm: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Measurement {
    pub gx: usize,
    pub gy: usize,
    /// Edge band left unmeasured, in grid spacings.
    pub margin_spacings: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for Measurement {
    fn default() -> Self {
        Measurement { gx: 40, gy: 10, margin_spacings: 1.0, noise_sigma: 0.0, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsConfig {
    pub lo_factor: f64,
    pub hi_factor: f64,
    /// Patch held at `e_ref_mpa` to fix the modulus scale; null frees it.
    pub reference_patch: Option<usize>,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig { lo_factor: 0.01, hi_factor: 3.0, reference_patch: Some(0) }
    }
}

fn default_strain_floor() -> f64 {
    DEFAULT_STRAIN_FLOOR
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("femu-out")
}

fn default_nx() -> usize {
    40
}

fn default_ny() -> usize {
    10
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<RunConfig, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|err| {
            let mut path = err.path().to_string();
            let message = err.inner().to_string();
            // name the missing key itself rather than its parent
            if let Some(field) = message.strip_prefix("missing field `").and_then(|m| m.split('`').next()) {
                path = if path == "." { field.to_string() } else { format!("{path}.{field}") };
            }
            CliError::config(path, message)
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn is_3d(&self) -> bool {
        self.geometry.nz.is_some()
    }

    pub fn patch_count(&self) -> usize {
        self.patches.n_sections + self.patches.defects.len()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let err = |path: &str, msg: String| Err(CliError::config(path, msg));
        let g = &self.geometry;
        for (name, v) in [("length_mm", g.length_mm), ("width_mm", g.width_mm), ("thickness_mm", g.thickness_mm)] {
            if !(v.is_finite() && v > 0.0) {
                return err(&format!("geometry.{name}"), format!("must be positive, got {v}"));
            }
        }
        for (name, v) in [("nx", g.nx), ("ny", g.ny), ("nz", g.nz.unwrap_or(1))] {
            if v == 0 {
                return err(&format!("geometry.{name}"), "must be at least 1".into());
            }
        }

        let p = &self.patches;
        if p.n_sections == 0 || p.n_sections > g.nx {
            return err("patches.n_sections", format!("must be in 1..={} (geometry.nx), got {}", g.nx, p.n_sections));
        }
        for (k, d) in p.defects.iter().enumerate() {
            let path = format!("patches.defects[{k}]");
            let dims = if self.is_3d() { 2..=3 } else { 2..=2 };
            if d.min.len() != d.max.len() || !dims.contains(&d.min.len()) {
                return err(
                    &path,
                    format!("min/max need {} coordinates each", if self.is_3d() { "2 or 3" } else { "2" }),
                );
            }
            if d.min.iter().zip(&d.max).any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
                return err(&path, "min must be below max in every coordinate".into());
            }
        }

        let m = &self.material;
        if !(m.e_ref_mpa.is_finite() && m.e_ref_mpa > 0.0) {
            return err("material.e_ref_mpa", format!("must be positive, got {}", m.e_ref_mpa));
        }
        if !(0.0..0.5).contains(&m.poisson_ratio) {
            return err("material.poisson_ratio", format!("must be in [0, 0.5), got {}", m.poisson_ratio));
        }
        if let Some(truth) = &m.truth {
            let mut seen = vec![false; self.patch_count()];
            for (k, o) in truth.overrides.iter().enumerate() {
                let path = format!("material.truth.overrides[{k}]");
                if o.patch >= seen.len() {
                    return err(&path, format!("patch {} out of range (patch count {})", o.patch, seen.len()));
                }
                if std::mem::replace(&mut seen[o.patch], true) {
                    return err(&path, format!("patch {} overridden twice", o.patch));
                }
                if !(o.e_mpa.is_finite() && o.e_mpa > 0.0) {
                    return err(&path, format!("e_mpa must be positive, got {}", o.e_mpa));
                }
            }
        }

        let b = &self.bcs;
        if b.fixed_face == b.loaded_face {
            return err("bcs.loaded_face", "must differ from fixed_face".into());
        }
        for (name, face) in [("fixed_face", b.fixed_face), ("loaded_face", b.loaded_face)] {
            if !self.is_3d() && face.axis().0 == 2 {
                return err(&format!("bcs.{name}"), "z faces need a 3D mesh (geometry.nz)".into());
            }
        }
        if !b.u_applied_mm.is_finite() {
            return err("bcs.u_applied_mm", "must be finite".into());
        }

        let me = &self.measurement;
        if me.gx < 2 || me.gy < 2 {
            return err("measurement", format!("grid needs at least 2x2 points, got {}x{}", me.gx, me.gy));
        }
        if !(me.margin_spacings.is_finite() && me.margin_spacings >= 0.0) {
            return err("measurement.margin_spacings", "must be non-negative".into());
        }
        if !(me.noise_sigma.is_finite() && me.noise_sigma >= 0.0) {
            return err("measurement.noise_sigma", "must be non-negative".into());
        }

        self.ga.validate().map_err(|e| CliError::config("ga", e))?;
        self.grad.validate().map_err(|e| CliError::config("grad", e))?;

        let bo = &self.bounds;
        if !(bo.lo_factor > 0.0 && bo.lo_factor <= bo.hi_factor && bo.hi_factor.is_finite()) {
            return err("bounds", format!("need 0 < lo_factor <= hi_factor, got {} / {}", bo.lo_factor, bo.hi_factor));
        }
        if let Some(r) = bo.reference_patch {
            if r >= self.patch_count() {
                return err("bounds.reference_patch", format!("patch {r} out of range"));
            }
        }
        if let Some(guess) = &self.initial_guess_mpa {
            if guess.len() != self.patch_count() {
                return err("initial_guess_mpa", format!("needs {} entries, got {}", self.patch_count(), guess.len()));
            }
            if guess.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return err("initial_guess_mpa", "entries must be positive".into());
            }
        }
        if !(self.strain_floor.is_finite() && self.strain_floor > 0.0) {
            return err("strain_floor", format!("must be positive, got {}", self.strain_floor));
        }
        Ok(())
    }
}
