use femu::geometry::{build_coupon_mesh, partition_longitudinal, stamp_defect_patches, DefectSpec, Face};
use femu::inversion::*;
use femu::measurement::{generate_synthetic, GridStrains, MeasurementGrid};
use femu::solver::*;
use femu::Result;
use proptest::prelude::*;
use std::sync::atomic::{AtomicUsize, Ordering};

fn sphere(x: &[f64]) -> Result<f64> {
    Ok(x.iter().map(|v| (v - 5.5) * (v - 5.5)).sum())
}

fn rosenbrock(x: &[f64]) -> Result<f64> {
    Ok(x.windows(2).map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2)).sum())
}

#[test]
fn ga_sphere_regression() {
    let bounds = Bounds::uniform(5, 0.5, 10.5).unwrap();
    let cfg = GaConfig {
        population_size: 40,
        generations_max: 100,
        stall_generations: 100,
        rng_seed: 7,
        ..GaConfig::default()
    };
    let r = run_ga(sphere, &[0.5; 5], &bounds, &cfg).unwrap();
    assert!(r.cost < 1e-2, "sphere best cost {}", r.cost);
    // seed-locked value; a change here means the GA's random stream moved
    assert!((r.cost - 6.503284482786528e-9).abs() < 1e-6 * 6.5e-9, "pin moved: {:e}", r.cost);
    assert_eq!(r.history.stage(Stage::Ga).count(), 101);
}

#[test]
fn ga_is_deterministic_per_seed() {
    let bounds = Bounds::uniform(4, 0.1, 3.0).unwrap();
    let cfg = GaConfig { generations_max: 30, ..GaConfig::default() };
    let a = run_ga(rosenbrock, &[2.0; 4], &bounds, &cfg).unwrap();
    let b = run_ga(rosenbrock, &[2.0; 4], &bounds, &cfg).unwrap();
    assert_eq!(a, b);
    let c = run_ga(rosenbrock, &[2.0; 4], &bounds, &GaConfig { rng_seed: 8, ..cfg }).unwrap();
    assert_ne!(a.history, c.history);
}

#[test]
fn identical_population_without_mutation_stays_put() {
    let bounds = Bounds::uniform(3, 0.5, 10.5).unwrap();
    let cfg = GaConfig { mutation_rate: 0.0, generations_max: 25, ..GaConfig::default() };
    let population = vec![vec![2.0, 7.0, 4.0]; 20];
    let r = run_ga_from_population(sphere, population, &bounds, &cfg).unwrap();
    let first = r.history.records[0].best_cost;
    assert!(r.history.records.iter().all(|rec| rec.best_cost == first));
    assert_eq!(r.design, vec![2.0, 7.0, 4.0]);
}

#[test]
fn histories_are_monotone_and_feasible() {
    let bounds = Bounds::uniform(4, 0.1, 3.0).unwrap();
    let r = run_hybrid_with(rosenbrock, &[2.5; 4], &bounds, &GaConfig::default(), &GradConfig::default()).unwrap();
    for stage in [Stage::Ga, Stage::Gradient] {
        let costs: Vec<f64> = r.history.stage(stage).map(|rec| rec.best_cost).collect();
        assert!(!costs.is_empty());
        assert!(costs.windows(2).all(|w| w[1] <= w[0]), "{stage:?} not monotone");
    }
    assert!(r.history.records.iter().all(|rec| bounds.contains(&rec.design)));
    assert!(r.cost <= r.ga_cost);
    assert_eq!(r.history.last().unwrap().best_cost, r.cost);
}

#[test]
fn hybrid_never_regresses_from_ga() {
    let bounds = Bounds::uniform(6, 0.1, 3.0).unwrap();
    for seed in 0..4 {
        let ga = GaConfig { rng_seed: seed, generations_max: 20, ..GaConfig::default() };
        let hybrid = run_hybrid_with(rosenbrock, &[0.1; 6], &bounds, &ga, &GradConfig::default()).unwrap();
        let alone = run_ga(rosenbrock, &[0.1; 6], &bounds, &ga).unwrap();
        assert_eq!(hybrid.ga_cost, alone.cost);
        assert!(hybrid.cost <= alone.cost);
    }
}

#[test]
fn reported_evaluations_match_a_counting_wrapper() {
    let calls = AtomicUsize::new(0);
    let counted = |x: &[f64]| {
        calls.fetch_add(1, Ordering::Relaxed);
        rosenbrock(x)
    };
    let bounds = Bounds::uniform(5, 0.1, 3.0).unwrap();
    let r = run_hybrid_with(counted, &[2.0; 5], &bounds, &GaConfig::default(), &GradConfig::default()).unwrap();
    assert_eq!(r.forward_solves, calls.load(Ordering::Relaxed));
    assert_eq!(r.history.last().unwrap().forward_solves, r.forward_solves);

    calls.store(0, Ordering::Relaxed);
    let g = run_gradient(counted, &[2.0; 5], &bounds, &GradConfig::default()).unwrap();
    assert_eq!(g.evaluations, calls.load(Ordering::Relaxed));
}

/// Smooth non-polynomial test cost.
fn wavy(x: &[f64]) -> Result<f64> {
    Ok(x.iter().enumerate().map(|(k, v)| (v / (k as f64 + 1.0)).exp() + (2.0 * v).sin()).sum::<f64>()
        + x[0] * x[1] * x[1])
}

#[test]
fn central_difference_error_is_second_order() {
    let bounds = Bounds::uniform(3, 0.1, 2.1).unwrap();
    let x = [0.7, 1.3, 0.9];
    // five-point stencil at a small step as the reference derivative
    let five_point = |k: usize, h: f64| {
        let at = |d: f64| {
            let mut y = x.to_vec();
            y[k] += d;
            wavy(&y).unwrap()
        };
        (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h)
    };
    let h_rel = 1e-2;
    let coarse = fd_gradient(&wavy, &x, &bounds, h_rel, None).unwrap();
    let fine = fd_gradient(&wavy, &x, &bounds, h_rel / 2.0, None).unwrap();
    for k in 0..3 {
        let reference = five_point(k, 1e-3);
        let e1 = (coarse.values[k] - reference).abs();
        let e2 = (fine.values[k] - reference).abs();
        assert!(e1 / e2 >= 3.5, "coordinate {k}: error ratio {}", e1 / e2);
    }
    assert_eq!(coarse.evaluations, 6);
}

#[test]
fn gradient_projects_onto_the_box() {
    let c = [-1.0, 0.5, 4.0];
    let f = |x: &[f64]| -> Result<f64> { Ok(x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum()) };
    let bounds = Bounds::uniform(3, 0.1, 2.0).unwrap();
    let r = run_gradient(f, &[1.0, 1.0, 1.0], &bounds, &GradConfig::default()).unwrap();
    let expected = [0.1, 0.5, 2.0];
    for (a, b) in r.design.iter().zip(expected) {
        assert!((a - b).abs() < 1e-6);
    }
}

fn strains(n: usize, seed: u64) -> GridStrains {
    let mut state = seed;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 2e-3
    };
    GridStrains {
        exx: (0..n).map(|_| next()).collect(),
        eyy: (0..n).map(|_| next()).collect(),
        exy: (0..n).map(|_| next()).collect(),
    }
}

proptest! {
    #[test]
    fn cost_ignores_point_order(seed in any::<u64>(), rot in 0usize..50) {
        let exp = strains(50, seed);
        let num = strains(50, seed ^ 0x5555);
        let f = relative_residual_cost(&exp, &num, 1e-6);
        let permute = |g: &GridStrains| {
            let mut out = g.clone();
            for c in [&mut out.exx, &mut out.eyy, &mut out.exy] {
                c.rotate_left(rot);
                c.reverse();
            }
            out
        };
        let g = relative_residual_cost(&permute(&exp), &permute(&num), 1e-6);
        prop_assert!((f - g).abs() <= 1e-12 * f);
    }

    #[test]
    fn cost_scales_with_square_of_residual_ratio(seed in any::<u64>(), c in 0.1f64..10.0) {
        let exp = strains(40, seed);
        let num = strains(40, seed.wrapping_add(1));
        let f = relative_residual_cost(&exp, &num, 1e-9);
        // move each numerical value so its residual is multiplied by c
        let scaled = |e: &[f64], n: &[f64]| -> Vec<f64> { e.iter().zip(n).map(|(a, b)| a - c * (a - b)).collect() };
        let num_c = GridStrains {
            exx: scaled(&exp.exx, &num.exx),
            eyy: scaled(&exp.eyy, &num.eyy),
            exy: scaled(&exp.exy, &num.exy),
        };
        let g = relative_residual_cost(&exp, &num_c, 1e-9);
        prop_assert!((g - c * c * f).abs() <= 1e-9 * g);
    }
}

#[test]
fn fe_gradient_is_smallest_at_the_truth() {
    let mesh = build_coupon_mesh(100.0, 20.0, 2.0, 20, 5, None).unwrap();
    let sections = partition_longitudinal(&mesh, 3).unwrap();
    let patches = stamp_defect_patches(&sections, &mesh, &[DefectSpec::rect(40.0, 4.0, 60.0, 12.0).unwrap()]).unwrap();
    let bcs = BoundaryConditions::tension(&mesh, Face::XMin, Support::Clamped, Face::XMax, 0.1).unwrap();
    let truth = vec![200_000.0, 200_000.0, 200_000.0, 60_000.0];
    let grid = MeasurementGrid::with_margin(100.0, 20.0, 20, 5, 1.0).unwrap();
    let field =
        generate_synthetic(&mesh, &patches, &MaterialField::new(truth.clone(), 0.3).unwrap(), &bcs, &grid, 0.0, 0)
            .unwrap();
    let ctx = CostContext::new(&mesh, &patches, &bcs, 0.3, vec![field], DEFAULT_STRAIN_FLOOR).unwrap();
    let mut bounds = Bounds::uniform(4, 2_000.0, 600_000.0).unwrap();
    bounds.pin(0, 200_000.0).unwrap();
    let cost = |x: &[f64]| ctx.evaluate(x);
    let norm = |x: &[f64]| {
        let g = fd_gradient(&cost, x, &bounds, 1e-6, None).unwrap();
        g.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    };
    let at_truth = norm(&truth);
    for k in 1..4 {
        for s in [0.99, 1.01, 1.2] {
            let mut x = truth.clone();
            x[k] *= s;
            assert!(norm(&x) > at_truth, "patch {k} scaled {s}");
        }
    }

    ctx.evaluate(&truth).unwrap();
    let before = ctx.forward_solves();
    let r = run_hybrid(
        &ctx,
        &[200_000.0; 4],
        &bounds,
        &GaConfig { generations_max: 10, ..GaConfig::default() },
        &GradConfig::default(),
    )
    .unwrap();
    assert_eq!(ctx.forward_solves() - before, r.forward_solves);
}
