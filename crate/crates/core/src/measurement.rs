//! Measurement grids and full-field strain data.
//!
//! Numerical strains live at element sample points; measured strains live on
//! a regular surface grid. Everything is compared on the grid: FE values are
//! carried there by inverse-distance weighting over the four nearest samples.

use crate::error::{Error, Result};
use crate::geometry::{Mesh, PatchMap};
use crate::solver::{BoundaryConditions, ForwardModel, MaterialField, StrainField, Surface, SurfaceSampler};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::io::Write;
use std::path::Path;

/// Neighbours used by the inverse-distance interpolation.
pub const IDW_NEIGHBOURS: usize = 4;
/// Distances below this (mm) count as coincident points.
const COINCIDENT_MM: f64 = 1e-12;
/// Tolerance (mm) when matching CSV coordinates to a regular grid.
pub const GRID_TOL_MM: f64 = 1e-9;

/// Regular grid of surface points, row-major with y outer and x inner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementGrid {
    pub origin: [f64; 2],
    pub spacing: [f64; 2],
    pub counts: [usize; 2],
}

impl MeasurementGrid {
    pub fn new(origin: [f64; 2], spacing: [f64; 2], counts: [usize; 2]) -> Result<MeasurementGrid> {
        if !(spacing[0] > 0.0 && spacing[1] > 0.0) || counts[0] == 0 || counts[1] == 0 {
            return Err(Error::invalid(format!("grid needs positive spacing and counts, got {spacing:?} {counts:?}")));
        }
        if !(origin[0].is_finite() && origin[1].is_finite() && spacing[0].is_finite() && spacing[1].is_finite()) {
            return Err(Error::invalid("grid origin and spacing must be finite"));
        }
        Ok(MeasurementGrid { origin, spacing, counts })
    }

    /// `gx x gy` points over `[0,L] x [0,W]`, keeping `margin` grid spacings
    /// clear of every edge.
    pub fn with_margin(length: f64, width: f64, gx: usize, gy: usize, margin: f64) -> Result<MeasurementGrid> {
        if gx == 0 || gy == 0 || !(margin >= 0.0) {
            return Err(Error::invalid(format!("bad grid request gx={gx} gy={gy} margin={margin}")));
        }
        let step = |extent: f64, n: usize| {
            let gaps = (n - 1) as f64 + 2.0 * margin;
            if gaps > 0.0 {
                extent / gaps
            } else {
                extent
            }
        };
        let (dx, dy) = (step(length, gx), step(width, gy));
        let origin =
            [if gx == 1 { 0.5 * length } else { margin * dx }, if gy == 1 { 0.5 * width } else { margin * dy }];
        let grid = MeasurementGrid::new(origin, [dx, dy], [gx, gy])?;
        grid.check_inside([0.0, 0.0], [length, width])?;
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.counts[0] * self.counts[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        [self.origin[0] + i as f64 * self.spacing[0], self.origin[1] + j as f64 * self.spacing[1]]
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        let mut pts = Vec::with_capacity(self.len());
        for j in 0..self.counts[1] {
            for i in 0..self.counts[0] {
                pts.push(self.point(i, j));
            }
        }
        pts
    }

    pub fn check_inside(&self, lower: [f64; 2], upper: [f64; 2]) -> Result<()> {
        let last = self.point(self.counts[0] - 1, self.counts[1] - 1);
        let inside = |p: [f64; 2]| (0..2).all(|a| p[a] >= lower[a] - GRID_TOL_MM && p[a] <= upper[a] + GRID_TOL_MM);
        if !inside(self.origin) || !inside(last) {
            return Err(Error::invalid(format!(
                "grid {:?}..{:?} leaves the footprint {:?}..{:?}",
                self.origin, last, lower, upper
            )));
        }
        Ok(())
    }

    /// Same layout within `tol` mm on every point.
    pub fn matches(&self, other: &MeasurementGrid, tol: f64) -> bool {
        self.counts == other.counts
            && self
                .points()
                .iter()
                .zip(other.points())
                .all(|(a, b)| (a[0] - b[0]).abs() <= tol && (a[1] - b[1]).abs() <= tol)
    }
}

/// Strain components on a measurement grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GridStrains {
    pub exx: Vec<f64>,
    pub eyy: Vec<f64>,
    pub exy: Vec<f64>,
}

impl GridStrains {
    pub fn len(&self) -> usize {
        self.exx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exx.is_empty()
    }

    pub fn components(&self) -> [&[f64]; 3] {
        [&self.exx, &self.eyy, &self.exy]
    }
}

/// One load step of measured (or synthetic) surface strains.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentalField {
    pub load_step: usize,
    pub grid: MeasurementGrid,
    pub strains: GridStrains,
    pub noise_sigma: f64,
    pub rng_seed: Option<u64>,
}

impl ExperimentalField {
    pub fn new(
        load_step: usize,
        grid: MeasurementGrid,
        strains: GridStrains,
        noise_sigma: f64,
        rng_seed: Option<u64>,
    ) -> Result<ExperimentalField> {
        let n = grid.len();
        for (name, c) in ["exx", "eyy", "exy"].iter().zip(strains.components()) {
            if c.len() != n {
                return Err(Error::invalid(format!("{name} has {} values for a {n}-point grid", c.len())));
            }
            if let Some(i) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("{name}[{i}] is not finite")));
            }
        }
        if !(noise_sigma >= 0.0) {
            return Err(Error::invalid(format!("noise_sigma must be non-negative, got {noise_sigma}")));
        }
        Ok(ExperimentalField { load_step, grid, strains, noise_sigma, rng_seed })
    }
}

/// Precomputed inverse-distance weights (k = 4, power 2) from sample points
/// to target points.
#[derive(Debug, Clone)]
pub struct Interpolator {
    offsets: Vec<usize>,
    sources: Vec<usize>,
    weights: Vec<f64>,
}

impl Interpolator {
    /// Fails with [`Error::OutOfDomain`] if any target lies outside the convex
    /// hull of the samples.
    pub fn new(samples: &[[f64; 2]], targets: &[[f64; 2]]) -> Result<Interpolator> {
        if samples.is_empty() {
            return Err(Error::invalid("no sample points to interpolate from"));
        }
        let hull = ConvexHull::new(samples);
        let outside: Vec<[f64; 2]> = targets.iter().copied().filter(|&p| !hull.contains(p)).collect();
        if !outside.is_empty() {
            return Err(Error::OutOfDomain { points: outside });
        }

        let k = IDW_NEIGHBOURS.min(samples.len());
        let mut interp =
            Interpolator { offsets: Vec::with_capacity(targets.len() + 1), sources: Vec::new(), weights: Vec::new() };
        interp.offsets.push(0);
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        for &t in targets {
            best.clear();
            for (i, s) in samples.iter().enumerate() {
                let d2 = (s[0] - t[0]).powi(2) + (s[1] - t[1]).powi(2);
                if best.len() < k || d2 < best[k - 1].0 {
                    let pos = best.partition_point(|&(d, _)| d <= d2);
                    best.insert(pos, (d2, i));
                    best.truncate(k);
                }
            }
            if best[0].0 <= COINCIDENT_MM * COINCIDENT_MM {
                interp.sources.push(best[0].1);
                interp.weights.push(1.0);
            } else {
                let total: f64 = best.iter().map(|&(d2, _)| 1.0 / d2).sum();
                for &(d2, i) in &best {
                    interp.sources.push(i);
                    interp.weights.push(1.0 / d2 / total);
                }
            }
            interp.offsets.push(interp.sources.len());
        }
        Ok(interp)
    }

    pub fn target_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// `(sample index, weight)` pairs feeding target `t`.
    pub fn stencil(&self, t: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[t]..self.offsets[t + 1];
        self.sources[r.clone()].iter().copied().zip(self.weights[r].iter().copied())
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        (0..self.target_count()).map(|t| self.stencil(t).map(|(i, w)| w * values[i]).sum()).collect()
    }

    pub fn apply_field(&self, field: &StrainField) -> GridStrains {
        GridStrains { exx: self.apply(&field.exx), eyy: self.apply(&field.eyy), exy: self.apply(&field.exy) }
    }
}

/// Convex hull (counterclockwise, Andrew's monotone chain) used for the
/// out-of-domain test.
struct ConvexHull {
    vertices: Vec<[f64; 2]>,
    tol: f64,
}

impl ConvexHull {
    fn new(points: &[[f64; 2]]) -> ConvexHull {
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        pts.dedup();
        let cross =
            |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
        let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
        for pass in 0..2 {
            let start = hull.len();
            let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
                if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
            for &p in iter {
                while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                    hull.pop();
                }
                hull.push(p);
            }
            hull.pop();
        }
        if hull.is_empty() {
            hull = pts.clone();
        }
        let span = pts.iter().fold(0.0f64, |m, p| m.max((p[0] - pts[0][0]).abs()).max((p[1] - pts[0][1]).abs()));
        ConvexHull { vertices: hull, tol: 1e-9 * span.max(1.0) }
    }

    fn contains(&self, p: [f64; 2]) -> bool {
        let v = &self.vertices;
        match v.len() {
            0 => false,
            1 => (v[0][0] - p[0]).hypot(v[0][1] - p[1]) <= self.tol,
            2 => segment_distance(v[0], v[1], p) <= self.tol,
            n => (0..n).all(|i| {
                let (a, b) = (v[i], v[(i + 1) % n]);
                let len = (b[0] - a[0]).hypot(b[1] - a[1]);
                (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= -self.tol * len
            }),
        }
    }
}

fn segment_distance(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    (a[0] + t * dx - p[0]).hypot(a[1] + t * dy - p[1])
}

/// Carry FE sample-point strains onto a measurement grid.
pub fn interpolate_fe_to_grid(strain_field: &StrainField, grid: &MeasurementGrid) -> Result<GridStrains> {
    Ok(Interpolator::new(&strain_field.points, &grid.points())?.apply_field(strain_field))
}

/// Forward-solve `truth`, interpolate the observable surface strains to
/// `grid` and add i.i.d. Gaussian noise with standard deviation
/// `noise_sigma * RMS` of each clean component.
#[allow(clippy::too_many_arguments)]
pub fn generate_synthetic(
    mesh: &Mesh,
    patch_map: &PatchMap,
    truth: &MaterialField,
    bcs: &BoundaryConditions,
    grid: &MeasurementGrid,
    noise_sigma: f64,
    rng_seed: u64,
) -> Result<ExperimentalField> {
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::invalid(format!("noise_sigma must be non-negative, got {noise_sigma}")));
    }
    let model = ForwardModel::new(mesh, patch_map, bcs, truth.poisson_ratio)?;
    let u = model.solve(&truth.moduli)?;
    let sampler = SurfaceSampler::new(mesh, Surface::default_for(mesh))?;
    let clean = interpolate_fe_to_grid(&sampler.sample(mesh, &u), grid)?;
    let noisy = add_relative_noise(clean, noise_sigma, rng_seed);
    ExperimentalField::new(0, *grid, noisy, noise_sigma, Some(rng_seed))
}

/// Componentwise relative Gaussian noise; components are drawn in the order
/// exx, eyy, exy from one seeded stream.
pub fn add_relative_noise(mut field: GridStrains, noise_sigma: f64, rng_seed: u64) -> GridStrains {
    if noise_sigma == 0.0 {
        return field;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    for comp in [&mut field.exx, &mut field.eyy, &mut field.exy] {
        let rms = (comp.iter().map(|v| v * v).sum::<f64>() / comp.len().max(1) as f64).sqrt();
        if rms == 0.0 {
            continue;
        }
        let normal = Normal::new(0.0, noise_sigma * rms).expect("finite positive std");
        for v in comp.iter_mut() {
            *v += normal.sample(&mut rng);
        }
    }
    field
}

/// Write the measurement CSV: `#` metadata lines, the header
/// `x_mm,y_mm,exx,eyy,exy`, then one row per grid point with 17 significant
/// digits.
pub fn write_measurement_csv<W: Write>(field: &ExperimentalField, mut out: W) -> Result<()> {
    writeln!(out, "# load_step={}", field.load_step)?;
    writeln!(out, "# noise_sigma={}", field.noise_sigma)?;
    match field.rng_seed {
        Some(s) => writeln!(out, "# rng_seed={s}")?,
        None => writeln!(out, "# rng_seed=none")?,
    }
    writeln!(out, "x_mm,y_mm,exx,eyy,exy")?;
    for (p, i) in field.grid.points().iter().zip(0..) {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            p[0], p[1], field.strains.exx[i], field.strains.eyy[i], field.strains.exy[i]
        )?;
    }
    Ok(())
}

pub fn load_measurement_csv(path: impl AsRef<Path>) -> Result<ExperimentalField> {
    parse_measurement_csv(&std::fs::read_to_string(path)?)
}

const COLUMNS: [&str; 5] = ["x_mm", "y_mm", "exx", "eyy", "exy"];

pub fn parse_measurement_csv(text: &str) -> Result<ExperimentalField> {
    let mut load_step = 0usize;
    let mut noise_sigma = 0.0f64;
    let mut rng_seed = None;
    for (i, line) in text.lines().enumerate() {
        let Some(meta) = line.trim_start().strip_prefix('#') else { continue };
        let line_no = i as u64 + 1;
        let bad = |key: &str| Error::Parse { line: line_no, message: format!("bad value for {key}") };
        if let Some((key, value)) = meta.split_once('=') {
            let value = value.trim();
            match key.trim() {
                "load_step" => load_step = value.parse().map_err(|_| bad("load_step"))?,
                "noise_sigma" => noise_sigma = value.parse().map_err(|_| bad("noise_sigma"))?,
                "rng_seed" => {
                    rng_seed = if value == "none" { None } else { Some(value.parse().map_err(|_| bad("rng_seed"))?) }
                }
                _ => {}
            }
        }
    }

    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers().map_err(csv_error)?.clone();
    let header_line = header.position().map(|p| p.line()).unwrap_or(1);
    let mut index = [0usize; 5];
    for (slot, name) in index.iter_mut().zip(COLUMNS) {
        *slot = header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse { line: header_line, message: format!("missing column `{name}`") })?;
    }

    let mut rows: Vec<([f64; 5], u64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let mut row = [0.0; 5];
        for (k, (&col, name)) in index.iter().zip(COLUMNS).enumerate() {
            let raw = record.get(col).unwrap_or("");
            let v: f64 = raw
                .parse()
                .map_err(|_| Error::Parse { line, message: format!("column `{name}`: cannot parse `{raw}`") })?;
            if !v.is_finite() {
                return Err(Error::Parse { line, message: format!("column `{name}` is not finite") });
            }
            row[k] = v;
        }
        rows.push((row, line));
    }
    if rows.is_empty() {
        return Err(Error::Parse { line: header_line + 1, message: "no data rows".into() });
    }

    let grid = infer_grid(&rows)?;
    let strains = GridStrains {
        exx: rows.iter().map(|r| r.0[2]).collect(),
        eyy: rows.iter().map(|r| r.0[3]).collect(),
        exy: rows.iter().map(|r| r.0[4]).collect(),
    };
    ExperimentalField::new(load_step, grid, strains, noise_sigma, rng_seed)
}

fn infer_grid(rows: &[([f64; 5], u64)]) -> Result<MeasurementGrid> {
    let (x0, y0) = (rows[0].0[0], rows[0].0[1]);
    let gx = rows.iter().take_while(|r| (r.0[1] - y0).abs() <= GRID_TOL_MM).count();
    let last_line = rows.last().map(|r| r.1).unwrap_or(0);
    if !rows.len().is_multiple_of(gx) {
        return Err(Error::Parse {
            line: last_line,
            message: format!("{} rows do not fill a grid of {gx} points per row", rows.len()),
        });
    }
    let gy = rows.len() / gx;
    let dx = if gx > 1 { rows[1].0[0] - x0 } else { 1.0 };
    let dy = if gy > 1 { rows[gx].0[1] - y0 } else { 1.0 };
    if !(dx > 0.0 && dy > 0.0) {
        return Err(Error::Parse {
            line: rows[1.min(rows.len() - 1)].1,
            message: "grid spacing must be positive".into(),
        });
    }
    let grid = MeasurementGrid::new([x0, y0], [dx, dy], [gx, gy])?;
    for (k, (row, line)) in rows.iter().enumerate() {
        let p = grid.point(k % gx, k / gx);
        if (p[0] - row[0]).abs() > GRID_TOL_MM || (p[1] - row[1]).abs() > GRID_TOL_MM {
            return Err(Error::Parse {
                line: *line,
                message: format!("point ({}, {}) is off the regular grid (expected {:?})", row[0], row[1], p),
            });
        }
    }
    Ok(grid)
}

fn csv_error(err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    Error::Parse { line, message: err.to_string() }
}
