mod common;

use std::sync::Arc;

use nalgebra::Vector3;
use proptest::prelude::*;
use wulff_mc::geometry::{Dimension, GridLayout, RadialGrid, RigidMotion};
use wulff_mc::sampler::{EnsembleParams, InitOptions, RunSchedule};
use wulff_mc::search::{
    compare_shapes, estimate_mean_energy, lattice_energy_oracle, local_shape_search, minimize_lattice_energy,
    pressure_scan, project, NamedShape, SearchConfig, SearchError, SeedPlan, ShapeBasis, Verdict,
};

use common::*;

fn quick() -> RunSchedule {
    RunSchedule { burn_in: 300, sweeps: 1_600, thin: 10, blocks: 8, ..RunSchedule::default() }
}

#[test]
fn lattice_oracle_matches_shell_sum() {
    // Shells of the unit triangular lattice inside the cutoff:
    // 6 at 1, 6 at √3, 6 at 2, 12 at √7, 6 at 3.
    let v = |r: f64| r - 3.0;
    let shells = 6.0 * v(1.0) + 6.0 * v(3f64.sqrt()) + 6.0 * v(2.0) + 12.0 * v(7f64.sqrt()) + 6.0 * v(3.0);
    let oracle = lattice_energy_oracle(1.0).unwrap();
    assert!((oracle - shells / 2.0).abs() < 1e-12, "{oracle} vs {}", shells / 2.0);
}

#[test]
fn lattice_minimum_is_grid_stable() {
    let coarse = minimize_lattice_energy(201);
    for n in [401, 2001, 20001] {
        let fine = minimize_lattice_energy(n);
        assert_eq!(fine.spacing, coarse.spacing);
        assert_eq!(fine.energy, coarse.energy);
    }
    assert_eq!(coarse.spacing, 1.0);
}

#[test]
fn same_seeds_same_estimate() {
    let params = EnsembleParams::new(Dimension::Two, 12, 2.0, 2.0);
    let init = InitOptions::default();
    let a = estimate_mean_energy(Arc::new(hexagon()), &params, &quick(), &init, &[1, 2, 3]).unwrap();
    let b = estimate_mean_energy(Arc::new(hexagon()), &params, &quick(), &init, &[1, 2, 3]).unwrap();
    assert_eq!(a, b);
    // Equal shapes in different poses canonicalize to the same container.
    let moved = hexagon().transformed(&RigidMotion::planar(0.9, 2.0, -1.0)).canonicalized().unwrap();
    let c = estimate_mean_energy(Arc::new(moved), &params, &quick(), &init, &[1, 2, 3]).unwrap();
    assert!((c.total_energy.mean - a.total_energy.mean).abs() <= 1e-9 * a.total_energy.mean.abs().max(1.0) || c == a);
}

#[test]
fn single_particle_energy_is_kinetic_only() {
    let params = EnsembleParams::new(Dimension::Three, 1, 4.0, 1.0);
    let est = estimate_mean_energy(Arc::new(cuboctahedron()), &params, &quick(), &InitOptions::default(), &[5, 6]).unwrap();
    assert_eq!(est.total_energy.mean, 3.0 / 8.0);
    assert_eq!(est.total_energy.std_error, 0.0);
}

#[test]
fn comparison_pairs_are_antisymmetric_under_reordering() {
    let params = EnsembleParams::new(Dimension::Two, 10, 1.0, 1.0).ideal();
    let shapes = [NamedShape::new("disk", disk()), NamedShape::new("hexagon", hexagon())];
    let plan = SeedPlan { base: 4, replicas: 3 };
    let fwd = compare_shapes(&shapes, &params, &quick(), &InitOptions::default(), plan, 3.0).unwrap();
    let p = fwd.pair("disk", "hexagon").unwrap();
    assert_eq!(p.verdict, Verdict::from_difference(p.delta, p.std_error, 3.0));
    assert!(fwd.pair("hexagon", "disk").is_none());
    // Ideal gas: the container shape cannot matter.
    assert_eq!(p.verdict, Verdict::Indistinguishable);
    assert_eq!(fwd.co_minimal.len(), 2);
    let rev = compare_shapes(&[shapes[1].clone(), shapes[0].clone()], &params, &quick(), &InitOptions::default(), plan, 3.0)
        .unwrap();
    // Entry 0 always gets the same seeds, so its estimate follows the position.
    assert_eq!(rev.entries[0].seeds, fwd.entries[0].seeds);
    assert_eq!(rev.entries[1].label, "disk");
}

#[test]
fn comparison_needs_two_shapes() {
    let params = EnsembleParams::new(Dimension::Two, 4, 1.0, 1.0);
    let err = compare_shapes(
        &[NamedShape::new("disk", disk())],
        &params,
        &quick(),
        &InitOptions::default(),
        SeedPlan { base: 1, replicas: 2 },
        3.0,
    )
    .unwrap_err();
    assert!(matches!(err, SearchError::Usage(_)));
}

#[test]
fn single_pressure_scan_equals_comparison() {
    let params = EnsembleParams::new(Dimension::Two, 10, 2.0, 3.0);
    let shapes = [NamedShape::new("disk", disk()), NamedShape::new("hexagon", hexagon())];
    let plan = SeedPlan { base: 77, replicas: 2 };
    let init = InitOptions::default();
    let cmp = compare_shapes(&shapes, &params, &quick(), &init, plan, 3.0).unwrap();
    let scan = pressure_scan(&shapes, &params, &[3.0], &quick(), &init, plan, 3.0).unwrap();
    assert_eq!(scan.rows.len(), 1);
    assert_eq!(scan.rows[0], cmp);
    assert_eq!(scan.trends[0].pressures, vec![3.0]);
}

#[test]
fn scan_rejects_unsorted_pressures() {
    let params = EnsembleParams::new(Dimension::Two, 4, 1.0, 1.0);
    let shapes = [NamedShape::new("a", disk()), NamedShape::new("b", hexagon())];
    let err = pressure_scan(&shapes, &params, &[2.0, 1.0], &quick(), &InitOptions::default(), SeedPlan { base: 1, replicas: 1 }, 3.0)
        .unwrap_err();
    assert!(matches!(err, SearchError::Usage(_)));
}

#[test]
fn ideal_gas_search_accepts_nothing() {
    let params = EnsembleParams::new(Dimension::Two, 6, 1.0, 1.0).ideal();
    let config = SearchConfig { iterations: 5, replicas: 4, seed: 9, ..SearchConfig::default() };
    let out = local_shape_search(&disk(), &params, &quick(), &InitOptions::default(), &config).unwrap();
    assert!(out.trace.iter().all(|s| !s.accepted));
    assert!(out.trace.iter().filter(|s| s.feasible).all(|s| s.delta == 0.0));
    assert_eq!(out.shape.radial_distance(&disk()), 0.0);
}

#[test]
fn search_trace_is_monotone_over_accepted_steps() {
    let params = EnsembleParams::new(Dimension::Two, 10, 1.0, 10.0);
    let config = SearchConfig { iterations: 6, replicas: 4, step: 0.1, seed: 21, ..SearchConfig::default() };
    let start = project(
        &ShapeBasis::Fourier { order: 6 },
        GridLayout::Circle { nodes: 96 },
        &RadialGrid::from_fn(GridLayout::Circle { nodes: 96 }, |_| 1.0).unwrap().directions().to_vec(),
        &vec![2.0; 96],
        &[0.0, 0.0, 0.0, 0.0, 0.03, 0.0, 0.0, 0.0, 0.0, 0.0],
    )
    .unwrap();
    let out = local_shape_search(&start, &params, &quick(), &InitOptions::default(), &config).unwrap();
    assert!(!out.trace.is_empty());
    for s in out.trace.iter().filter(|s| s.accepted) {
        assert!(s.delta < 0.0 && s.proposal_energy < s.current_energy + 1e-9);
    }
    let accepted = out.trace.iter().filter(|s| s.accepted).count();
    assert_eq!(accepted == 0, out.coefficients.iter().all(|c| *c == 0.0));
}

#[test]
fn zero_budget_returns_start() {
    let params = EnsembleParams::new(Dimension::Two, 6, 1.0, 1.0);
    let config = SearchConfig { iterations: 0, ..SearchConfig::default() };
    let out = local_shape_search(&hexagon(), &params, &quick(), &InitOptions::default(), &config).unwrap();
    assert!(out.trace.is_empty());
    assert_eq!(out.shape.radial_distance(&hexagon()), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_meets_constraints(coeffs in prop::collection::vec(-0.4f64..0.4, 10)) {
        let basis = ShapeBasis::Fourier { order: 6 };
        let layout = GridLayout::Circle { nodes: 64 };
        let dirs = RadialGrid::from_fn(layout, |_| 1.0).unwrap().directions().to_vec();
        let base = vec![(10.0 / std::f64::consts::PI).sqrt(); 64];
        if let Ok(shape) = project(&basis, layout, &dirs, &base, &coeffs) {
            prop_assert!((shape.volume() - 10.0).abs() < 1e-9);
            prop_assert!(shape.min_radius() >= 1.0 - 1e-12);
            let c = shape.centroid();
            prop_assert!(c[0].hypot(c[1]) < 1e-9);
        }
    }

    #[test]
    fn spatial_projection_meets_constraints(coeffs in prop::collection::vec(-0.3f64..0.3, 13)) {
        let basis = ShapeBasis::Harmonic { order: 4 };
        let layout = GridLayout::Sphere { polar: 10, azimuthal: 20 };
        let dirs: Vec<Vector3<f64>> = RadialGrid::from_fn(layout, |_| 1.0).unwrap().directions().to_vec();
        let base = vec![ball_radius(3); dirs.len()];
        if let Ok(shape) = project(&basis, layout, &dirs, &base, &coeffs) {
            prop_assert!((shape.volume() - 10.0).abs() < 1e-9);
            prop_assert!(shape.min_radius() >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn verdicts_are_antisymmetric(delta in -10.0f64..10.0, se in 0.0f64..3.0, z in 0.5f64..5.0) {
        let a = Verdict::from_difference(delta, se, z);
        let b = Verdict::from_difference(-delta, se, z);
        let flipped = match a {
            Verdict::Lower => Verdict::Higher,
            Verdict::Higher => Verdict::Lower,
            Verdict::Indistinguishable => Verdict::Indistinguishable,
        };
        prop_assert_eq!(b, flipped);
    }
}
