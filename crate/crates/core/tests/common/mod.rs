#![allow(dead_code)]

use prr_core::kinematics::inverse_kinematics;
use prr_core::singularity::{classify, min_singular_margin, Thresholds};
use prr_core::workspace::bounding_rectangle;
use prr_core::{BranchSelector, Configuration, Geometry, Pose, SingularityKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixtures() -> [(&'static str, Geometry); 2] {
    [
        ("equal links 25", Geometry::equal_links_25()),
        ("graded links L=3", Geometry::graded_links(3.0)),
    ]
}

/// Uniform pose in the bounding rectangle, any orientation.
pub fn random_pose(rng: &mut ChaCha8Rng, geometry: &Geometry) -> Pose {
    let r = bounding_rectangle(geometry).rectangle;
    Pose::new(
        rng.random_range(r.x_min..r.x_max),
        rng.random_range(r.y_min..r.y_max),
        rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
    )
}

/// Every assembly mode that places all sliders inside their strokes.
pub fn feasible_configurations(pose: &Pose, geometry: &Geometry) -> Vec<Configuration> {
    BranchSelector::all()
        .into_iter()
        .filter_map(|b| inverse_kinematics(pose, geometry, b, true).ok())
        .collect()
}

/// Random pose with at least one feasible assembly mode.
pub fn random_reachable(rng: &mut ChaCha8Rng, geometry: &Geometry) -> (Pose, Vec<Configuration>) {
    loop {
        let pose = random_pose(rng, geometry);
        let configs = feasible_configurations(&pose, geometry);
        if !configs.is_empty() {
            return (pose, configs);
        }
    }
}

/// Random configuration that is regular with normalized margin above `margin`.
pub fn random_regular(rng: &mut ChaCha8Rng, geometry: &Geometry, margin: f64) -> Configuration {
    loop {
        let (_, configs) = random_reachable(rng, geometry);
        let pick = rng.random_range(0..configs.len());
        let config = configs.into_iter().nth(pick).unwrap();
        let kind = classify(&config, geometry, &Thresholds::default()).kind;
        if kind == SingularityKind::Regular && min_singular_margin(&config, geometry) > margin {
            return config;
        }
    }
}
