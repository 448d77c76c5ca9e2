mod common;

use prr_core::kinematics::{assemble, inverse_kinematics, jacobians};
use prr_core::singularity::{classify, min_singular_margin, Thresholds};
use prr_core::{Geometry, JointVector, Pose, Rail, SingularityKind, Vec2};
use rand::Rng;

use common::*;

const ALL_MINUS: &str = "---";

#[test]
fn perpendicular_link_gives_exact_serial_singularity() {
    let g = Geometry::graded_links(3.0);
    // c_1 sits exactly one link length above the rail
    let config = inverse_kinematics(
        &Pose::new(4.0, 1.7, 0.0),
        &g,
        ALL_MINUS.parse().unwrap(),
        false,
    )
    .unwrap();
    let pair = jacobians(&config, &g);
    assert!(pair.det_b.abs() < 1e-12, "{}", pair.det_b);
    let report = classify(&config, &g, &Thresholds::default());
    assert_eq!(report.kind, SingularityKind::Serial(vec![1]));
    assert!(report.min_cos_alpha < 1e-12);
}

/// All three links at 30 degrees: `y - L_iG sin θ = L_ii / 2` for every leg.
fn parallel_links_pose(x: f64) -> Pose {
    Pose::new(x, 1.0, 0.05f64.asin())
}

#[test]
fn parallel_links_give_parallel_parallel_singularity() {
    let g = Geometry::graded_links(3.0);
    for x in [1.0, 2.5, 4.0] {
        let config = inverse_kinematics(
            &parallel_links_pose(x),
            &g,
            ALL_MINUS.parse().unwrap(),
            false,
        )
        .unwrap();
        for a in config.alpha {
            assert!((a - 30f64.to_radians()).abs() < 1e-12);
        }
        let report = classify(&config, &g, &Thresholds::default());
        assert!(
            report.det_a_normalized.abs() < 1e-12,
            "{}",
            report.det_a_normalized
        );
        assert_eq!(report.kind, SingularityKind::ParallelParallel);
    }
}

/// Geometry and configuration whose three link lines pass through `p`.
fn concurrent_configuration(pose: Pose, p: Vec2) -> (Geometry, prr_core::Configuration) {
    let offsets = [3.0, 2.0, 1.0];
    let u = Vec2::from_angle(pose.theta);
    let c: [Vec2; 3] = std::array::from_fn(|i| pose.position() - offsets[i] * u);
    // the line from c_i through p meets the rail y = 0 at b_i
    let b: [Vec2; 3] = std::array::from_fn(|i| {
        let t = c[i].y / (c[i].y - p.y);
        c[i] + t * (p - c[i])
    });
    let lengths: [f64; 3] = std::array::from_fn(|i| (c[i] - b[i]).norm());
    let geometry = Geometry {
        rails: [Rail::along_x(0.0, 20.0); 3],
        link_lengths: lengths,
        platform_offsets: offsets,
    };
    let joints = JointVector(std::array::from_fn(|i| b[i].x));
    let config = assemble(&pose, &joints, &geometry);
    (geometry, config)
}

#[test]
fn concurrent_link_lines_give_parallel_intersecting_singularity() {
    let mut rng = rng(21);
    for _ in 0..200 {
        let pose = Pose::new(
            rng.random_range(4.0..8.0),
            rng.random_range(1.0..2.0),
            rng.random_range(-0.4..0.4),
        );
        let p = Vec2::new(rng.random_range(2.0..10.0), rng.random_range(3.0..6.0));
        let (g, config) = concurrent_configuration(pose, p);
        assert!(config.loop_closure_error(&g) < 1e-12);
        let report = classify(&config, &g, &Thresholds::default());
        assert!(
            report.det_a_normalized.abs() < 1e-9,
            "{}",
            report.det_a_normalized
        );
        assert_eq!(report.kind, SingularityKind::ParallelIntersecting);
    }
}

#[test]
fn margin_shrinks_monotonically_toward_parallel_links() {
    let g = Geometry::graded_links(3.0);
    let target = parallel_links_pose(2.0);
    let start = Pose::new(target.x - 0.3, target.y + 0.1, target.theta + 0.15);
    let branch = ALL_MINUS.parse().unwrap();
    let margins: Vec<f64> = (0..100)
        .map(|k| {
            let s = k as f64 / 99.0;
            let pose = Pose::new(
                start.x + s * (target.x - start.x),
                start.y + s * (target.y - start.y),
                start.theta + s * (target.theta - start.theta),
            );
            min_singular_margin(&inverse_kinematics(&pose, &g, branch, false).unwrap(), &g)
        })
        .collect();
    for w in margins.windows(2) {
        assert!(w[1] < w[0], "{margins:?}");
    }
    assert!(margins[99] < 1e-12);
}

#[test]
fn regular_configurations_have_positive_margin() {
    let mut rng = rng(22);
    let zero = Thresholds {
        serial: 0.0,
        parallel: 0.0,
    };
    for (_, g) in fixtures() {
        for _ in 0..500 {
            let (_, configs) = random_reachable(&mut rng, &g);
            for config in configs {
                let report = classify(&config, &g, &zero);
                assert_eq!(
                    report.kind == SingularityKind::Regular,
                    min_singular_margin(&config, &g) > 0.0
                );
                // det B is the product of the link cosines in normalized form
                let cos: f64 = config.alpha.iter().map(|a| a.cos()).product();
                assert!((report.det_b_normalized - cos).abs() < 1e-12);
            }
        }
    }
}
