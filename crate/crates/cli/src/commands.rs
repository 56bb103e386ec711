use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::OutputDir;
use crate::problem::Problem;
use crate::report::{GridInfo, InversionReport, ResidualMap, SCHEMA_VERSION};
use crate::vtk::VtkWriter;
use femu::inversion::{relative_residual_cost, run_hybrid, CostContext};
use femu::measurement::{
    generate_synthetic, interpolate_fe_to_grid, load_measurement_csv, write_measurement_csv, ExperimentalField,
    GridStrains, GRID_TOL_MM,
};
use femu::solver::{ForwardModel, MaterialField, Surface, SurfaceSampler};
use std::fmt::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Per-run overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    /// Noise seed for `synth`, GA seed for `invert`.
    pub seed: Option<u64>,
}

fn prepare(
    config: &RunConfig,
    overrides: &Overrides,
    seed_field: fn(&mut RunConfig) -> &mut u64,
) -> (RunConfig, OutputTarget) {
    let mut config = config.clone();
    if let Some(out) = &overrides.out {
        config.output_dir = out.clone();
    }
    if let Some(seed) = overrides.seed {
        *seed_field(&mut config) = seed;
    }
    let dir = config.output_dir.clone();
    (config, OutputTarget(dir))
}

struct OutputTarget(PathBuf);

impl OutputTarget {
    fn open(&self, config: &RunConfig) -> Result<OutputDir, CliError> {
        let out = OutputDir::lock(&self.0)?;
        out.write("config.resolved.json", config.to_json())?;
        Ok(out)
    }
}

fn surface_name(surface: Surface) -> &'static str {
    match surface {
        Surface::Midplane => "midplane",
        Surface::Front => "front",
        Surface::Back => "back",
    }
}

fn measurement_csv(field: &ExperimentalField, surface: Surface) -> String {
    let mut buf = format!("# surface={}\n", surface_name(surface)).into_bytes();
    write_measurement_csv(field, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

fn modulus_map(problem: &Problem, title: &str, moduli: &[f64], truth: Option<&[f64]>) -> String {
    let patch = problem.patches.as_slice();
    let per_cell = |e: &[f64]| patch.iter().map(|&p| e[p]).collect::<Vec<_>>();
    let mut vtk = VtkWriter::for_mesh(title, &problem.mesh)
        .cell_ints("patch", patch)
        .cell_scalars("modulus_mpa", &per_cell(moduli));
    if let Some(t) = truth {
        vtk = vtk.cell_scalars("truth_mpa", &per_cell(t));
    }
    vtk.finish()
}

/// Solve the configured (truth or homogeneous) problem and write the
/// displacement, surface strains and modulus map.
pub fn forward(config: &RunConfig, overrides: &Overrides) -> Result<Vec<PathBuf>, CliError> {
    let (config, target) = prepare(config, overrides, |c| &mut c.measurement.seed);
    let problem = Problem::build(&config)?;
    let moduli = problem.forward_moduli();
    let nu = config.material.poisson_ratio;
    let model =
        ForwardModel::new(&problem.mesh, &problem.patches, &problem.bcs, nu).map_err(|e| CliError::model("bcs", e))?;
    let u = model.solve(&moduli).map_err(CliError::data)?;
    let surface = problem.surface();
    let strains = SurfaceSampler::new(&problem.mesh, surface).map_err(CliError::data)?.sample(&problem.mesh, &u);
    let on_grid = interpolate_fe_to_grid(&strains, &problem.grid).map_err(CliError::data)?;
    let field = ExperimentalField::new(0, problem.grid, on_grid, 0.0, None).map_err(CliError::data)?;

    let out = target.open(&config)?;
    let mut written = vec![out.path("config.resolved.json")];
    let displacement = VtkWriter::for_mesh("femu displacement", &problem.mesh)
        .cell_ints("patch", problem.patches.as_slice())
        .point_vectors("displacement_mm", u.dim, &u.values)
        .finish();
    written.push(out.write("displacement.vtk", displacement)?);
    written.push(out.write("modulus_map.vtk", modulus_map(&problem, "femu modulus map", &moduli, None))?);
    let mut csv = format!("# surface={}\nx_mm,y_mm,exx,eyy,exy\n", surface_name(surface));
    for i in 0..strains.len() {
        let p = strains.points[i];
        let _ = writeln!(
            csv,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            p[0], p[1], strains.exx[i], strains.eyy[i], strains.exy[i]
        );
    }
    written.push(out.write("surface_strain.csv", csv)?);
    written.push(out.write("grid_strain.csv", measurement_csv(&field, surface))?);
    Ok(written)
}

/// Generate a synthetic measurement from the configured truth.
pub fn synth(config: &RunConfig, overrides: &Overrides) -> Result<PathBuf, CliError> {
    let (config, target) = prepare(config, overrides, |c| &mut c.measurement.seed);
    let problem = Problem::build(&config)?;
    let truth = MaterialField::new(problem.forward_moduli(), config.material.poisson_ratio)
        .map_err(|e| CliError::model("material", e))?;
    let m = &config.measurement;
    let field =
        generate_synthetic(&problem.mesh, &problem.patches, &truth, &problem.bcs, &problem.grid, m.noise_sigma, m.seed)
            .map_err(CliError::data)?;
    let out = target.open(&config)?;
    out.write("measurement.csv", measurement_csv(&field, problem.surface()))
}

fn describe_grid(g: &femu::measurement::MeasurementGrid) -> String {
    format!(
        "{}x{} points, origin ({}, {}) mm, spacing ({}, {}) mm",
        g.counts[0], g.counts[1], g.origin[0], g.origin[1], g.spacing[0], g.spacing[1]
    )
}

/// Run the hybrid inversion against a measurement CSV and write the report
/// files. `measurement` defaults to `measurement.csv` in the output directory.
pub fn invert(
    config: &RunConfig,
    measurement: Option<&Path>,
    overrides: &Overrides,
) -> Result<InversionReport, CliError> {
    let (config, target) = prepare(config, overrides, |c| &mut c.ga.rng_seed);
    let problem = Problem::build(&config)?;
    let path = measurement.map(Path::to_path_buf).unwrap_or_else(|| config.output_dir.join("measurement.csv"));
    let field = load_measurement_csv(&path).map_err(|e| match e {
        femu::Error::Io(io) => CliError::io(&path, io),
        other => CliError::Data(format!("{}: {other}", path.display())),
    })?;
    if !field.grid.matches(&problem.grid, GRID_TOL_MM) {
        return Err(CliError::Data(format!(
            "measurement grid does not match the configured geometry\n  measurement: {}\n  configured:  {}",
            describe_grid(&field.grid),
            describe_grid(&problem.grid)
        )));
    }
    let measured = field.strains.clone();
    let ctx = CostContext::new(
        &problem.mesh,
        &problem.patches,
        &problem.bcs,
        config.material.poisson_ratio,
        vec![field],
        config.strain_floor,
    )
    .map_err(CliError::data)?;
    let bounds = problem.bounds()?;
    let initial = problem.initial_guess()?;

    let out = target.open(&config)?;
    let numerical = |x: &[f64]| -> Result<GridStrains, CliError> { ctx.numerical_strains(x).map_err(CliError::data) };
    let before = numerical(&initial)?;
    let initial_cost = relative_residual_cost(&measured, &before, config.strain_floor);

    let clock = Instant::now();
    let result = run_hybrid(&ctx, &initial, &bounds, &config.ga, &config.grad).map_err(CliError::data)?;
    let wall_time_s = clock.elapsed().as_secs_f64();
    let after = numerical(&result.design)?;

    let truth = problem.truth();
    let relative_error =
        truth.as_ref().map(|t| result.design.iter().zip(t).map(|(x, t)| (x - t) / t).collect::<Vec<_>>());
    let report = InversionReport {
        schema_version: SCHEMA_VERSION,
        patch_kinds: problem.patch_kinds(),
        fixed: (0..bounds.len()).map(|k| bounds.is_fixed(k)).collect(),
        initial_design: initial,
        recovered: result.design.clone(),
        truth,
        relative_error,
        initial_cost,
        ga_cost: result.ga_cost,
        final_cost: result.cost,
        cost_reduction: (result.cost > 0.0).then(|| initial_cost / result.cost),
        stalled: result.stalled,
        grid: GridInfo::from(&problem.grid),
        residual_before: ResidualMap::new(&measured, &before),
        residual_after: ResidualMap::new(&measured, &after),
        history: result.history,
        forward_solve_count: result.forward_solves,
        wall_time_s,
    };

    out.write("report.json", report.to_json())?;
    out.write("summary.txt", report.summary())?;
    out.write("convergence.csv", report.convergence_csv())?;
    let z = if problem.mesh.dim() == 3 { config.geometry.thickness_mm } else { 0.0 };
    for (name, map) in [("residual_before", &report.residual_before), ("residual_after", &report.residual_after)] {
        let vtk = VtkWriter::for_grid(&format!("femu {name}"), &problem.grid, z)
            .point_scalars("abs_exx", &map.exx)
            .point_scalars("abs_eyy", &map.eyy)
            .point_scalars("abs_exy", &map.exy)
            .point_scalars("rss", &map.rss)
            .finish();
        out.write(&format!("{name}.vtk"), vtk)?;
        out.write(&format!("{name}.csv"), map.to_csv(&problem.grid))?;
    }
    out.write(
        "modulus_map.vtk",
        modulus_map(&problem, "femu recovered modulus", &report.recovered, report.truth.as_deref()),
    )?;
    Ok(report)
}

/// Render a saved report (path to `report.json` or its directory).
pub fn report(path: &Path) -> Result<String, CliError> {
    Ok(InversionReport::load(path)?.summary())
}
