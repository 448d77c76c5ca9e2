mod common;

use prr_core::kinematics::reachable_branch;
use prr_core::workspace::{
    bounding_rectangle, dead_zones, scan, scan_with_threads, stroke_sweep, Rectangle, SweepTemplate,
};
use prr_core::{CellClass, Geometry, Pose, WorkspaceSpec};
use rand::Rng;

use common::*;

#[test]
fn bounding_rectangles_of_the_reference_geometries() {
    let b = bounding_rectangle(&Geometry::equal_links_25());
    assert_eq!((b.h, b.w), (30.0, 70.0));
    let b = bounding_rectangle(&Geometry::graded_links(3.0));
    assert!((b.h - 2.9).abs() < 1e-15 && (b.w - 8.8).abs() < 1e-15);
    assert!((b.rectangle.x_max - b.rectangle.x_min - b.w).abs() < 1e-15);
}

#[test]
fn refinement_changes_the_fraction_by_less_than_two_over_n() {
    let g = Geometry::graded_links(3.0);
    for n in [40, 80] {
        let coarse = scan(&g, &WorkspaceSpec::for_geometry(&g, n, n, 36)).unwrap();
        let fine = scan(&g, &WorkspaceSpec::for_geometry(&g, 2 * n, 2 * n, 36)).unwrap();
        assert!(
            (coarse.fraction - fine.fraction).abs() <= 2.0 / n as f64,
            "{n}: {} vs {}",
            coarse.fraction,
            fine.fraction
        );
    }
}

#[test]
fn all_orientation_cells_pass_every_sampled_orientation() {
    // long links on a short platform: a band of cells reachable at any angle
    let g = Geometry::on_x_axis([4.0, 4.2, 4.4], [1.0, 0.6, 0.2], 6.0);
    let spec = WorkspaceSpec::for_geometry(&g, 80, 80, 36);
    let grid = scan(&g, &spec).unwrap();
    let all: Vec<(usize, usize)> = (0..spec.ny)
        .flat_map(|j| (0..spec.nx).map(move |i| (i, j)))
        .filter(|&(i, j)| grid.cell(i, j) == CellClass::AllOrientations)
        .collect();
    assert!(!all.is_empty());
    let mut rng = rng(41);
    for _ in 0..100 {
        let (i, j) = all[rng.random_range(0..all.len())];
        for k in 0..spec.orientation_samples {
            let pose = Pose::new(spec.x_at(i), spec.y_at(j), spec.theta_at(k));
            assert!(reachable_branch(&pose, &g).is_some(), "({i}, {j}) at {k}");
        }
    }
}

#[test]
fn worker_count_does_not_change_the_grid() {
    let g = Geometry::graded_links(2.5);
    let spec = WorkspaceSpec::for_geometry(&g, 60, 50, 24);
    let reference = scan_with_threads(&g, &spec, 1).unwrap();
    for threads in [4, 8] {
        assert_eq!(scan_with_threads(&g, &spec, threads).unwrap(), reference);
    }
}

#[test]
fn single_stroke_sweep_matches_a_direct_scan() {
    let g = Geometry::graded_links(1.0);
    let template = SweepTemplate {
        nx: 50,
        ny: 40,
        orientations: 12,
    };
    let rows = stroke_sweep(&g, &[2.0], &template).unwrap();
    let g2 = g.with_stroke(2.0);
    let grid = scan(&g2, &WorkspaceSpec::for_geometry(&g2, 50, 40, 12)).unwrap();
    assert_eq!(rows[0].fraction, grid.fraction);
    assert_eq!(rows[0].dead_zone_count, dead_zones(&grid).len());
}

#[test]
fn fraction_grows_with_stroke() {
    let g = Geometry::graded_links(1.0);
    let template = SweepTemplate {
        nx: 100,
        ny: 100,
        orientations: 36,
    };
    let rows = stroke_sweep(&g, &[1.0, 1.5, 2.0, 2.5, 3.0], &template).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].fraction >= w[0].fraction, "{rows:?}");
    }
}

#[test]
fn rectangle_out_of_reach_is_empty() {
    let g = Geometry::graded_links(3.0);
    let mut spec = WorkspaceSpec::for_geometry(&g, 20, 20, 8);
    spec.rectangle = Rectangle {
        x_min: -3.0,
        x_max: 6.0,
        y_min: 4.7,
        y_max: 9.0,
    };
    let grid = scan(&g, &spec).unwrap();
    assert_eq!(grid.fraction, 0.0);
    assert!(dead_zones(&grid).is_empty());
}

#[test]
fn short_stroke_leaves_an_interior_dead_zone() {
    let g = Geometry::graded_links(1.0);
    let grid = scan(&g, &WorkspaceSpec::for_geometry(&g, 200, 200, 36)).unwrap();
    assert!(!dead_zones(&grid).is_empty());
}
