//! Browser demo for `femu`.
//!
//! A fixed 100 x 20 x 2 mm plane-stress coupon, four longitudinal sections
//! and one user-placed rectangular defect. Three operations are exported to
//! JavaScript: the surface strain map, a cost sweep over the defect modulus,
//! and a small hybrid inversion. Every export has a plain Rust counterpart
//! so the demo logic is tested natively.

use femu::geometry::{
    build_coupon_mesh, partition_longitudinal, stamp_defect_patches, DefectSpec, Face, Mesh, PatchMap,
};
use femu::inversion::{run_hybrid, CostContext, GaConfig, GradConfig, DEFAULT_STRAIN_FLOOR};
use femu::measurement::{generate_synthetic, ExperimentalField, GridStrains, MeasurementGrid};
use femu::solver::{BoundaryConditions, Bounds, MaterialField, Support};
use wasm_bindgen::prelude::*;

pub const LENGTH_MM: f64 = 100.0;
pub const WIDTH_MM: f64 = 20.0;
const THICKNESS_MM: f64 = 2.0;
const NX: usize = 40;
const NY: usize = 10;
pub const SECTIONS: usize = 4;
pub const GRID: [usize; 2] = [40, 10];
pub const E_REF_MPA: f64 = 200_000.0;
const POISSON: f64 = 0.3;
const U_APPLIED_MM: f64 = 0.1;

/// Lowest and highest defect modulus probed by [`cost_sweep`], relative to the reference.
pub const SWEEP_RANGE: [f64; 2] = [0.05, 1.5];

/// The demo coupon with a defect over `[x0,x1] x [y0,y1]` (mm).
#[derive(Debug)]
pub struct Coupon {
    mesh: Mesh,
    patches: PatchMap,
    bcs: BoundaryConditions,
    grid: MeasurementGrid,
}

impl Coupon {
    pub fn new(defect: [f64; 4]) -> femu::Result<Coupon> {
        let [x0, y0, x1, y1] = defect;
        let mesh = build_coupon_mesh(LENGTH_MM, WIDTH_MM, THICKNESS_MM, NX, NY, None)?;
        let sections = partition_longitudinal(&mesh, SECTIONS)?;
        let spec = DefectSpec::rect(x0.min(x1), y0.min(y1), x0.max(x1), y0.max(y1))?;
        let patches = stamp_defect_patches(&sections, &mesh, &[spec])?;
        let bcs = BoundaryConditions::tension(&mesh, Face::XMin, Support::Clamped, Face::XMax, U_APPLIED_MM)?;
        let grid = MeasurementGrid::with_margin(LENGTH_MM, WIDTH_MM, GRID[0], GRID[1], 1.0)?;
        Ok(Coupon { mesh, patches, bcs, grid })
    }

    pub fn patch_count(&self) -> usize {
        self.patches.patch_count()
    }

    /// Sections at the reference modulus, the defect at `ratio` times it.
    pub fn truth(&self, ratio: f64) -> Vec<f64> {
        let mut e = vec![E_REF_MPA; self.patch_count()];
        e[SECTIONS] = ratio * E_REF_MPA;
        e
    }

    pub fn synthetic(&self, ratio: f64, noise_sigma: f64, seed: u64) -> femu::Result<ExperimentalField> {
        let truth = MaterialField::new(self.truth(ratio), POISSON)?;
        generate_synthetic(&self.mesh, &self.patches, &truth, &self.bcs, &self.grid, noise_sigma, seed)
    }

    pub fn context(&self, measured: ExperimentalField) -> femu::Result<CostContext> {
        CostContext::new(&self.mesh, &self.patches, &self.bcs, POISSON, vec![measured], DEFAULT_STRAIN_FLOOR)
    }

    /// Section 0 pinned at the reference; the rest free within `[0.01, 3] E_ref`.
    pub fn bounds(&self) -> femu::Result<Bounds> {
        let mut b = Bounds::uniform(self.patch_count(), 0.01 * E_REF_MPA, 3.0 * E_REF_MPA)?;
        b.pin(0, E_REF_MPA)?;
        Ok(b)
    }
}

fn component(s: GridStrains, which: u8) -> femu::Result<Vec<f64>> {
    match which {
        0 => Ok(s.exx),
        1 => Ok(s.eyy),
        2 => Ok(s.exy),
        c => Err(femu::Error::InvalidArgument(format!("strain component must be 0, 1 or 2, got {c}"))),
    }
}

/// Noiseless surface strain on the measurement grid, row-major with x fastest.
pub fn strain_field(defect: [f64; 4], ratio: f64, which: u8) -> femu::Result<Vec<f64>> {
    let coupon = Coupon::new(defect)?;
    component(coupon.synthetic(ratio, 0.0, 0)?.strains, which)
}

/// Cost against a synthetic measurement at `truth_ratio` as the defect
/// modulus runs evenly over [`SWEEP_RANGE`] with every other patch at the truth.
pub fn sweep(defect: [f64; 4], truth_ratio: f64, noise_sigma: f64, seed: u64, steps: usize) -> femu::Result<Vec<f64>> {
    if steps < 2 {
        return Err(femu::Error::InvalidArgument(format!("need at least 2 sweep steps, got {steps}")));
    }
    let coupon = Coupon::new(defect)?;
    let ctx = coupon.context(coupon.synthetic(truth_ratio, noise_sigma, seed)?)?;
    let [lo, hi] = SWEEP_RANGE;
    (0..steps)
        .map(|i| {
            let r = lo + (hi - lo) * i as f64 / (steps - 1) as f64;
            ctx.evaluate(&coupon.truth(r))
        })
        .collect()
}

/// Outcome of [`inversion`]; moduli are relative to the reference.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Inversion {
    recovered: Vec<f64>,
    truth: Vec<f64>,
    cost: f64,
    forward_solves: usize,
}

#[wasm_bindgen]
impl Inversion {
    #[wasm_bindgen(getter)]
    pub fn recovered(&self) -> Vec<f64> {
        self.recovered.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn truth(&self) -> Vec<f64> {
        self.truth.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn cost(&self) -> f64 {
        self.cost
    }

    #[wasm_bindgen(getter, js_name = forwardSolves)]
    pub fn forward_solves(&self) -> usize {
        self.forward_solves
    }
}

/// Small GA + gradient run against a synthetic measurement.
pub fn inversion(defect: [f64; 4], truth_ratio: f64, noise_sigma: f64, seed: u64) -> femu::Result<Inversion> {
    let coupon = Coupon::new(defect)?;
    let ctx = coupon.context(coupon.synthetic(truth_ratio, noise_sigma, seed)?)?;
    let bounds = coupon.bounds()?;
    let ga = GaConfig { population_size: 16, generations_max: 12, rng_seed: seed, ..GaConfig::default() };
    let grad = GradConfig { max_iterations: 150, ..GradConfig::default() };
    let start = vec![E_REF_MPA; coupon.patch_count()];
    let result = run_hybrid(&ctx, &start, &bounds, &ga, &grad)?;
    let rel = |v: &[f64]| v.iter().map(|e| e / E_REF_MPA).collect();
    Ok(Inversion {
        recovered: rel(&result.design),
        truth: rel(&coupon.truth(truth_ratio)),
        cost: result.cost,
        forward_solves: result.forward_solves,
    })
}

fn js(err: femu::Error) -> JsError {
    JsError::new(&err.to_string())
}

/// `[gx, gy, length_mm, width_mm]`.
#[wasm_bindgen(js_name = gridShape)]
pub fn grid_shape() -> Vec<f64> {
    vec![GRID[0] as f64, GRID[1] as f64, LENGTH_MM, WIDTH_MM]
}

#[wasm_bindgen(js_name = strainMap)]
pub fn strain_map(x0: f64, y0: f64, x1: f64, y1: f64, ratio: f64, which: u8) -> Result<Vec<f64>, JsError> {
    strain_field([x0, y0, x1, y1], ratio, which).map_err(js)
}

#[wasm_bindgen(js_name = costSweep)]
#[allow(clippy::too_many_arguments)]
pub fn cost_sweep(
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    truth_ratio: f64,
    noise_sigma: f64,
    seed: u32,
    steps: usize,
) -> Result<Vec<f64>, JsError> {
    sweep([x0, y0, x1, y1], truth_ratio, noise_sigma, seed as u64, steps).map_err(js)
}

#[wasm_bindgen]
pub fn invert(
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    truth_ratio: f64,
    noise_sigma: f64,
    seed: u32,
) -> Result<Inversion, JsError> {
    inversion([x0, y0, x1, y1], truth_ratio, noise_sigma, seed as u64).map_err(js)
}
