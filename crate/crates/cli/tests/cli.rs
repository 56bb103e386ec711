use femu::measurement::{interpolate_fe_to_grid, load_measurement_csv};
use femu::solver::{ForwardModel, Surface, SurfaceSampler};
use femu_cli::problem::Problem;
use femu_cli::report::InversionReport;
use femu_cli::RunConfig;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn femu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_femu")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path
}

fn run_ok(args: &[&str]) -> String {
    let out = femu(args);
    assert!(out.status.success(), "femu {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL_2D: &str = r#"{
  "geometry": { "length_mm": 100, "width_mm": 20, "thickness_mm": 2, "nx": 20, "ny": 5 },
  "patches": { "n_sections": 3, "defects": [ { "min": [40, 4], "max": [60, 12] } ] },
  "material": { "truth": { "overrides": [ { "patch": 3, "e_mpa": 60000 } ] } },
  "measurement": { "gx": 20, "gy": 5 },
  "ga": { "population_size": 16, "generations_max": 15 }
}"#;

/// Columns 2..5 of a strain CSV, skipping metadata and header.
fn strain_rows(path: &Path) -> Vec<[f64; 3]> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('x'))
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            [v[2], v[3], v[4]]
        })
        .collect()
}

#[test]
fn homogeneous_roller_forward_gives_constant_strain() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"geometry": {"length_mm": 100, "width_mm": 20, "thickness_mm": 2},
            "bcs": {"support": "roller"}}"#,
    );
    let out = tmp.path().join("out");
    run_ok(&["forward", "--config", s(&cfg), "--out", s(&out)]);
    let rows = strain_rows(&out.join("surface_strain.csv"));
    assert_eq!(rows.len(), 400 * 4);
    for r in &rows {
        assert!((r[0] - 1e-3).abs() < 1e-11);
        assert!((r[1] + 3e-4).abs() < 1e-11);
        assert!(r[2].abs() < 1e-11);
    }
    let vtk = std::fs::read_to_string(out.join("displacement.vtk")).unwrap();
    let lines: Vec<&str> = vtk.lines().collect();
    assert_eq!(lines[0], "# vtk DataFile Version 3.0");
    assert_eq!(lines[3], "DATASET UNSTRUCTURED_GRID");
    assert!(lines.contains(&"POINTS 451 double"));
    assert!(lines.contains(&"CELLS 400 2000"));
    assert!(lines.contains(&"POINT_DATA 451"));
    assert!(out.join("modulus_map.vtk").exists());
    assert!(!out.join(".femu.lock").exists());
}

#[test]
fn defect_truth_perturbs_forward_strain() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", SMALL_2D);
    let out = tmp.path().join("out");
    run_ok(&["forward", "--config", s(&cfg), "--out", s(&out)]);
    let exx: Vec<f64> = strain_rows(&out.join("surface_strain.csv")).iter().map(|r| r[0]).collect();
    let (lo, hi) = exx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    assert!(hi / lo > 1.05, "exx max/min {}", hi / lo);
}

#[test]
fn missing_geometry_field_exits_2_with_path() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"geometry": {"length_mm": 100, "width_mm": 20}}"#);
    let out = femu(&["forward", "--config", s(&cfg), "--out", s(&tmp.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("geometry.thickness_mm"), "{err}");
}

#[test]
fn noiseless_synth_matches_forward_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", SMALL_2D);
    let (f, m) = (tmp.path().join("f"), tmp.path().join("m"));
    run_ok(&["forward", "--config", s(&cfg), "--out", s(&f)]);
    run_ok(&["synth", "--config", s(&cfg), "--out", s(&m)]);
    assert_eq!(strain_rows(&f.join("grid_strain.csv")), strain_rows(&m.join("measurement.csv")));
}

#[test]
fn synth_is_byte_identical_per_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &SMALL_2D.replace(r#""gx": 20"#, r#""noise_sigma": 0.01, "gx": 20"#));
    let read = |dir: &str, seed: &str| {
        let out = tmp.path().join(dir);
        run_ok(&["synth", "--config", s(&cfg), "--out", s(&out), "--seed", seed]);
        std::fs::read(out.join("measurement.csv")).unwrap()
    };
    let a = read("a", "42");
    assert_eq!(a, read("b", "42"));
    assert_ne!(a, read("c", "43"));
    assert!(String::from_utf8(a).unwrap().contains("# rng_seed=42\n"));
}

#[test]
fn synth_3d_samples_only_the_front_face() {
    let tmp = tempfile::tempdir().unwrap();
    let json = r#"{
      "geometry": { "length_mm": 60, "width_mm": 16, "thickness_mm": 4, "nx": 15, "ny": 4, "nz": 2 },
      "patches": { "n_sections": 2, "defects": [ { "min": [20, 4, 0], "max": [40, 12, 2] } ] },
      "material": { "truth": { "overrides": [ { "patch": 2, "e_mpa": 40000 } ] } },
      "bcs": { "u_applied_mm": 0.06 },
      "measurement": { "gx": 15, "gy": 4 }
    }"#;
    let cfg = write_config(tmp.path(), "c.json", json);
    let out = tmp.path().join("m");
    run_ok(&["synth", "--config", s(&cfg), "--out", s(&out)]);
    let path = out.join("measurement.csv");
    assert!(std::fs::read_to_string(&path).unwrap().starts_with("# surface=front\n"));
    let field = load_measurement_csv(&path).unwrap();
    assert_eq!(field.grid.len(), 15 * 4);

    let config = RunConfig::from_json(json).unwrap();
    let problem = Problem::build(&config).unwrap();
    let model = ForwardModel::new(&problem.mesh, &problem.patches, &problem.bcs, 0.3).unwrap();
    let u = model.solve(&problem.forward_moduli()).unwrap();
    let face = |surface| {
        let strains = SurfaceSampler::new(&problem.mesh, surface).unwrap().sample(&problem.mesh, &u);
        interpolate_fe_to_grid(&strains, &problem.grid).unwrap()
    };
    let front = face(Surface::Front);
    let back = face(Surface::Back);
    for i in 0..field.grid.len() {
        assert!((field.strains.exx[i] - front.exx[i]).abs() <= 1e-15 * front.exx[i].abs());
    }
    assert!(front.exx.iter().zip(&back.exx).any(|(a, b)| (a - b).abs() > 1e-3 * a.abs()));
}

#[test]
fn homogeneous_truth_recovers_uniform_moduli() {
    let tmp = tempfile::tempdir().unwrap();
    let json = r#"{
      "geometry": { "length_mm": 100, "width_mm": 20, "thickness_mm": 2 },
      "patches": { "n_sections": 9, "defects": [ { "min": [25, 6], "max": [35, 14] }, { "min": [62, 4], "max": [72, 10] } ] },
      "material": { "truth": { "overrides": [] } },
      "initial_guess_mpa": [200000, 120000, 280000, 150000, 250000, 100000, 300000, 180000, 90000, 400000, 50000]
    }"#;
    let cfg = write_config(tmp.path(), "c.json", json);
    let out = tmp.path().join("o");
    run_ok(&["synth", "--config", s(&cfg), "--out", s(&out)]);
    run_ok(&["invert", "--config", s(&cfg), "--out", s(&out)]);
    let report = InversionReport::load(&out).unwrap();
    assert!(report.initial_cost > 1.0);
    let (lo, hi) = report.recovered.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    assert!(hi / lo - 1.0 < 0.02, "spread {}", hi / lo - 1.0);
}

#[test]
fn truncated_measurement_exits_3_with_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", SMALL_2D);
    let out = tmp.path().join("o");
    run_ok(&["synth", "--config", s(&cfg), "--out", s(&out)]);
    let path = out.join("measurement.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    let bad = tmp.path().join("bad.csv");
    std::fs::write(&bad, &text[..text.len() - 50]).unwrap();
    let res = femu(&["invert", "--config", s(&cfg), "--out", s(&out), "--measurement", s(&bad)]);
    assert_eq!(res.status.code(), Some(3));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("line "), "{err}");
}

#[test]
fn grid_mismatch_exits_3_describing_both_grids() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", SMALL_2D);
    let other = write_config(tmp.path(), "d.json", &SMALL_2D.replace(r#""gx": 20, "gy": 5"#, r#""gx": 10, "gy": 5"#));
    let out = tmp.path().join("o");
    run_ok(&["synth", "--config", s(&other), "--out", s(&out)]);
    let res = femu(&["invert", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(res.status.code(), Some(3));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("10x5 points") && err.contains("20x5 points"), "{err}");
}

#[test]
fn report_round_trip_and_error_paths() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", SMALL_2D);
    let out = tmp.path().join("o");
    run_ok(&["synth", "--config", s(&cfg), "--out", s(&out)]);
    let printed = run_ok(&["invert", "--config", s(&cfg), "--out", s(&out)]);
    let shown = run_ok(&["report", s(&out)]);
    assert_eq!(printed, shown);
    assert_eq!(shown, std::fs::read_to_string(out.join("summary.txt")).unwrap());
    assert!(shown.contains("truth MPa"));

    let report = InversionReport::load(&out.join("report.json")).unwrap();
    assert_eq!(report.final_cost, report.history.last().unwrap().best_cost);
    assert_eq!(report.cost_reduction, Some(report.initial_cost / report.final_cost));
    assert_eq!(report.residual_before.rss.len(), 20 * 5);
    for name in
        ["convergence.csv", "residual_before.vtk", "residual_after.vtk", "residual_before.csv", "modulus_map.vtk"]
    {
        assert!(out.join(name).exists(), "{name}");
    }
    let convergence = std::fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert!(convergence.starts_with("stage,iteration,best_cost,E_1,E_2,E_3,E_4\n"));
    assert_eq!(convergence.lines().count(), report.history.len() + 1);

    let mut no_truth = report.clone();
    no_truth.truth = None;
    no_truth.relative_error = None;
    let bare = tmp.path().join("bare.json");
    std::fs::write(&bare, no_truth.to_json()).unwrap();
    let shown = run_ok(&["report", s(&bare)]);
    assert!(!shown.contains("truth") && !shown.contains('%'));

    assert_eq!(femu(&["report", s(&tmp.path().join("nope"))]).status.code(), Some(2));
    std::fs::write(&bare, "{\"schema_version\": 1").unwrap();
    assert_eq!(femu(&["report", s(&bare)]).status.code(), Some(2));
}

#[test]
fn resolved_config_reproduces_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", SMALL_2D);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_ok(&["forward", "--config", s(&cfg), "--out", s(&a)]);
    let resolved = a.join("config.resolved.json");
    run_ok(&["forward", "--config", s(&resolved), "--out", s(&b)]);
    for name in ["displacement.vtk", "modulus_map.vtk", "surface_strain.csv", "grid_strain.csv"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    let text = std::fs::read_to_string(&resolved).unwrap();
    assert!(text.contains("\"population_size\": 16") && text.contains("\"rel_tol\""));
}

#[test]
fn locked_output_directory_is_refused() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", SMALL_2D);
    let out = tmp.path().join("o");
    std::fs::create_dir_all(&out).unwrap();
    std::fs::write(out.join(".femu.lock"), "1").unwrap();
    let res = femu(&["forward", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.join("displacement.vtk").exists());
}
